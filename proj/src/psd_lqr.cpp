#include "conelqr/psd_lqr.hpp"

#include <random>

#include "conelqr/errors.hpp"
#include "random_util.hpp"

namespace conelqr {

void LQRData::validate_dimensions() const {
    const std::size_t pp = F.rows();
    const std::size_t qq = G.cols();
    if (!F.is_square()) throw DimensionError("LQRData: F must be square");
    if (G.rows() != pp) throw DimensionError("LQRData: G must have p rows");
    if (S.rows() != pp || S.cols() != pp) throw DimensionError("LQRData: S must be p x p");
    if (R1.rows() != pp || R1.cols() != qq) throw DimensionError("LQRData: R1 must be p x q");
    if (R2.rows() != qq || R2.cols() != qq) throw DimensionError("LQRData: R2 must be q x q");
    if (asymmetry(S) > 1e-10 * (1.0 + S.max_abs())) throw SymmetryError("LQRData: S is not symmetric");
    if (asymmetry(R2) > 1e-10 * (1.0 + R2.max_abs())) throw SymmetryError("LQRData: R2 is not symmetric");
}

Matrix LQRData::cost_matrix() const { return block2x2(S, R1, R1.transpose(), R2); }

bool cost_condition_holds(const LQRData& data) {
    data.validate_dimensions();
    return min_eigenvalue(symmetrize(data.cost_matrix())) > kCostDefinitenessMargin;
}

bool psd_fiber_nonempty(const Matrix& m1, const Matrix& m2) {
    if (m2.rows() != m1.cols() || !m2.is_square()) throw DimensionError("psd fiber: M1 and M2 disagree on q");
    if (m2.rows() == 0) return true;
    if (!is_psd(m2, 1e-9)) return false;
    const Matrix projector = Matrix::identity(m2.rows()) - m2 * pinv(m2);
    const Matrix leak = projector * m1.transpose();
    return leak.max_abs() <= 1e-8 * (1.0 + m1.max_abs());
}

Matrix PsdCone::min_element(const Matrix& m1, const Matrix& m2) const {
    if (!psd_fiber_nonempty(m1, m2)) {
        throw NoMinimalElementError("psd cone: [Λ M1; M1ᵀ M2] ⪰ 0 has no solution (M2 not PSD or range condition fails)");
    }
    if (m2.rows() == 0) return Matrix(m1.rows(), m1.rows());
    return symmetrize(m1 * pinv(m2) * m1.transpose());
}

Matrix phi_psd(const Matrix& m1, const Matrix& m2) {
    const PsdCone cone(m1.rows(), m1.cols());
    return -cone.min_element(m1, m2);
}

bool PsdCone::contains_matrix(const Matrix& stacked) const { return is_psd(stacked, tol_); }

bool PsdCone::dual_contains_matrix(const Matrix& stacked) const { return is_psd(stacked, tol_); }

namespace {

std::vector<PrimalPoint> sample_stacked_psd(std::size_t p, std::size_t q, std::size_t count, std::uint64_t seed) {
    std::vector<PrimalPoint> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto rng = detail::stream(seed, i);
        const Matrix m = detail::random_psd(rng, p + q);
        out.push_back({embed::svec(m.block(0, 0, p, p)),
                       embed::pack_input(m.block(0, p, p, q), m.block(p, p, q, q))});
    }
    return out;
}

}  // namespace

std::vector<PrimalPoint> PsdCone::sample_primal(std::size_t count, std::uint64_t seed) const {
    return sample_stacked_psd(p_, q_, count, seed);
}

std::vector<DualPoint> PsdCone::sample_dual(std::size_t count, std::uint64_t seed) const {
    std::vector<DualPoint> out;
    for (auto& pt : sample_stacked_psd(p_, q_, count, seed ^ 0x5bd1e995ULL)) {
        out.push_back({std::move(pt.x), std::move(pt.u)});
    }
    return out;
}

std::vector<Vector> PsdCone::sample_dual_fiber(const Vector& mu, std::size_t count, std::uint64_t seed) const {
    const auto dm = embed::unpack_input(mu, p_, q_);
    const Matrix lo = min_element(dm.U1, dm.U2);
    std::vector<Vector> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (i == 0) {
            out.push_back(embed::svec(lo));
            continue;
        }
        auto rng = detail::stream(seed, i);
        std::uniform_real_distribution<double> amp(0.0, 1.0);
        out.push_back(embed::svec(lo + amp(rng) * detail::random_psd(rng, p_)));
    }
    return out;
}

Matrix riccati_step(const LQRData& data, const Matrix& lambda) {
    data.validate_dimensions();
    if (lambda.rows() != data.p() || lambda.cols() != data.p()) throw DimensionError("riccati_step: Λ must be p x p");
    const Matrix lf = lambda * data.F;
    Matrix out = data.S + data.F.transpose() * lf;
    if (data.q() == 0) return symmetrize(out);
    const Matrix inner = symmetrize(data.R2 + data.G.transpose() * lambda * data.G);
    if (min_eigenvalue(inner) <= 1e-14 * (1.0 + inner.max_abs())) {
        throw SingularMatrixError("riccati_step: R2 + GᵀΛG is not positive definite");
    }
    const Matrix cross = lf.transpose() * data.G + data.R1;  // FᵀΛG + R1
    out -= cross * solve(inner, cross.transpose());
    return symmetrize(out);
}

DualCertificate solve_riccati(const LQRData& data, double tol, std::size_t max_iter) {
    DualCertificate cert;
    Matrix lambda(data.p(), data.p());
    for (std::size_t k = 0; k < max_iter; ++k) {
        Matrix next = riccati_step(data, lambda);
        const double step = (next - lambda).max_abs();
        ++cert.iterations;
        const bool done = step <= tol * (1.0 + lambda.max_abs());
        lambda = std::move(next);
        if (lambda.max_abs() > 1e12) {
            cert.status = SolveStatus::diverged;
            cert.Lambda = lambda;
            cert.residual = step;
            return cert;
        }
        if (done) {
            cert.status = SolveStatus::converged;
            break;
        }
    }
    cert.residual = (riccati_step(data, lambda) - lambda).max_abs();
    cert.Lambda = std::move(lambda);
    return cert;
}

Matrix gain(const LQRData& data, const Matrix& lambda) {
    data.validate_dimensions();
    const Matrix inner = symmetrize(data.R2 + data.G.transpose() * lambda * data.G);
    if (data.q() > 0 && min_eigenvalue(inner) <= 1e-14 * (1.0 + inner.max_abs())) {
        throw SingularMatrixError("gain: R2 + GᵀΛG is not positive definite");
    }
    return solve(inner, data.G.transpose() * lambda * data.F + data.R1.transpose());
}

bool dual_feasibility_check(const LQRData& data, const Matrix& lambda, double tol) {
    data.validate_dimensions();
    if (lambda.rows() != data.p() || lambda.cols() != data.p()) {
        throw DimensionError("dual_feasibility_check: Λ must be p x p");
    }
    if (min_eigenvalue(symmetrize(lambda)) < -tol) return false;
    const Matrix fg = hstack(data.F, data.G);
    const Matrix lmi = block2x2(data.S - lambda, data.R1, data.R1.transpose(), data.R2) +
                       fg.transpose() * lambda * fg;
    return min_eigenvalue(symmetrize(lmi)) >= -tol;
}

MatrixState embed_rank1(std::span<const double> x0, std::size_t q) {
    return {outer(x0, x0), Matrix(x0.size(), q), Matrix(q, q)};
}

std::shared_ptr<const PsdCone> psd_cone_oracle(const LQRData& data) {
    if (!cost_condition_holds(data)) {
        throw ConeAssumptionError("psd cone: stacked cost [S R1; R1ᵀ R2] is not positive definite");
    }
    return std::make_shared<const PsdCone>(data.p(), data.q());
}

ConeProgram make_psd_program(const LQRData& data, const Matrix& x0) {
    if (x0.rows() != data.p() || x0.cols() != data.p()) throw DimensionError("make_psd_program: X0 must be p x p");
    return make_matrix_program(data.F, data.G, data.S, data.R1, data.R2, x0, psd_cone_oracle(data));
}

Matrix lambda_matrix(const Vector& lambda, std::size_t p) { return embed::smat(lambda, p); }

}  // namespace conelqr
