#include "conelqr/structured_lqr.hpp"

#include <random>

#include "conelqr/errors.hpp"
#include "random_util.hpp"

namespace conelqr {

namespace {

Matrix block_diag(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() + b.rows(), a.cols() + b.cols());
    out.set_block(0, 0, a);
    out.set_block(a.rows(), a.cols(), b);
    return out;
}

double max_off_diagonal(const Matrix& d) {
    double worst = 0.0;
    for (std::size_t i = 0; i < d.rows(); ++i)
        for (std::size_t j = 0; j < d.cols(); ++j)
            if (i != j) worst = std::max(worst, std::abs(d(i, j)));
    return worst;
}

void require_stacked_size(const QTransform& qt, const Matrix& mat, const char* what) {
    const std::size_t n = qt.m * (qt.p + qt.q);
    if (mat.rows() != n || mat.cols() != n) {
        throw DimensionError(std::string(what) + ": matrix must be m(p+q) square");
    }
}

}  // namespace

QTransform make_qtransform(const Matrix& q_matrix, std::size_t p, std::size_t q) {
    if (!q_matrix.is_square() || q_matrix.rows() == 0) throw DimensionError("QTransform: Q must be square and non-empty");
    if (p == 0) throw DimensionError("QTransform: p must be positive");
    QTransform qt;
    qt.Q = q_matrix;
    qt.Q_inv = inverse(q_matrix);
    qt.m = q_matrix.rows();
    qt.p = p;
    qt.q = q;
    qt.T = block_diag(kron(qt.Q_inv, Matrix::identity(p)), kron(qt.Q_inv, Matrix::identity(q)));
    qt.T_inv = block_diag(kron(qt.Q, Matrix::identity(p)), kron(qt.Q, Matrix::identity(q)));
    qt.condition = qt.Q.max_abs() * qt.Q_inv.max_abs();
    return qt;
}

Matrix diag_m_project(const Matrix& mat, std::size_t m, std::size_t x, std::size_t y) {
    if (mat.rows() != m * x || mat.cols() != m * y) throw DimensionError("diag_m_project: matrix must be (m x) by (m y)");
    Matrix out(mat.rows(), mat.cols());
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t i = 0; i < x; ++i)
            for (std::size_t j = 0; j < y; ++j) out(k * x + i, k * y + j) = mat(k * x + i, k * y + j);
    return out;
}

Matrix pinch(const Matrix& mat, std::size_t m, std::size_t p, std::size_t q) {
    const std::size_t sp = m * p;
    const std::size_t sq = m * q;
    if (mat.rows() != sp + sq || mat.cols() != sp + sq) throw DimensionError("pinch: matrix must be m(p+q) square");
    Matrix out(sp + sq, sp + sq);
    out.set_block(0, 0, diag_m_project(mat.block(0, 0, sp, sp), m, p, p));
    out.set_block(0, sp, diag_m_project(mat.block(0, sp, sp, sq), m, p, q));
    out.set_block(sp, 0, diag_m_project(mat.block(sp, 0, sq, sp), m, q, p));
    out.set_block(sp, sp, diag_m_project(mat.block(sp, sp, sq, sq), m, q, q));
    return out;
}

bool pq_contains(const QTransform& qt, const Matrix& stacked, double tol) {
    require_stacked_size(qt, stacked, "pq_contains");
    const Matrix w = symmetrize(qt.T * stacked * qt.T.transpose());
    return is_psd(pinch(w, qt.m, qt.p, qt.q), tol);
}

bool pq_dual_contains(const QTransform& qt, const Matrix& stacked, double tol) {
    require_stacked_size(qt, stacked, "pq_dual_contains");
    const Matrix z = symmetrize(qt.T_inv.transpose() * stacked * qt.T_inv);
    const double off_block = (pinch(z, qt.m, qt.p, qt.q) - z).max_abs();
    if (off_block > tol * (1.0 + z.max_abs())) return false;
    return is_psd(z, tol);
}

Matrix phi_pq(const QTransform& qt, const Matrix& m1, const Matrix& m2, double tol) {
    const PqCone cone(qt, tol);
    return -cone.min_element(m1, m2);
}

std::pair<Matrix, Matrix> pq_policy(const Matrix& x, const Matrix& m1, const Matrix& m2) {
    if (x.rows() != m1.rows() || m2.rows() != m1.cols()) throw DimensionError("pq_policy: block sizes disagree");
    const Matrix k = pinv(m2) * m1.transpose();
    return {-(x * k.transpose()), symmetrize(k * x * k.transpose())};
}

Matrix circulant(std::span<const double> first_row) {
    const std::size_t m = first_row.size();
    Matrix c(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) c(i, j) = first_row[(j + m - i) % m];
    return c;
}

std::pair<Matrix, Matrix> circulant_build(const CirculantSpec& spec) {
    if (spec.f.empty() || spec.f.size() != spec.g.size()) {
        throw DimensionError("circulant_build: f and g must be non-empty and of equal length");
    }
    if (!spec.Fbar.is_square() || spec.Gbar.rows() != spec.Fbar.rows()) {
        throw DimensionError("circulant_build: Fbar must be p x p and Gbar p x q");
    }
    return {kron(circulant(spec.f), spec.Fbar), kron(circulant(spec.g), spec.Gbar)};
}

bool simdiag_check(const Matrix& f_sd, const Matrix& g_sd, const Matrix& q_matrix, double tol) {
    if (!f_sd.is_square() || f_sd.rows() != q_matrix.rows() || g_sd.rows() != f_sd.rows() || !g_sd.is_square()) {
        throw DimensionError("simdiag_check: F_sd, G_sd and Q must be m x m");
    }
    const Matrix q_inv = inverse(q_matrix);
    for (const Matrix* sd : {&f_sd, &g_sd}) {
        const Matrix d = q_inv * (*sd) * q_matrix;
        if (max_off_diagonal(d) > tol * (1.0 + d.max_abs())) return false;
    }
    return true;
}

bool block_diagonalized(const Matrix& mat, const Matrix& q_inv, const Matrix& q_matrix, std::size_t m,
                        std::size_t row_block, std::size_t col_block, double tol) {
    if (mat.rows() != m * row_block || mat.cols() != m * col_block) {
        throw DimensionError("block_diagonalized: matrix has wrong size");
    }
    const Matrix l = kron(q_inv, Matrix::identity(row_block)) * mat * kron(q_matrix, Matrix::identity(col_block));
    return (diag_m_project(l, m, row_block, col_block) - l).max_abs() <= tol * (1.0 + l.max_abs());
}

bool structured_gain_check(const Matrix& k, const QTransform& qt, double tol) {
    if (k.rows() != qt.m * qt.q || k.cols() != qt.m * qt.p) throw DimensionError("structured_gain_check: K must be mq x mp");
    return block_diagonalized(k, qt.Q_inv, qt.Q, qt.m, qt.q, qt.p, tol);
}

Matrix simultaneous_diagonalizer(const Matrix& f_sd, const Matrix& g_sd, std::uint64_t seed) {
    if (!f_sd.is_square() || f_sd.rows() != g_sd.rows() || !g_sd.is_square()) {
        throw DimensionError("simultaneous_diagonalizer: F_sd and G_sd must be m x m");
    }
    for (const Matrix* sd : {&f_sd, &g_sd}) {
        if (asymmetry(*sd) > 1e-12 * (1.0 + sd->max_abs())) {
            throw ConfigurationError(
                "simultaneous_diagonalizer: only symmetric (real-spectrum) pairs are supported; "
                "non-symmetric circulants need a complex diagonalizer");
        }
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> theta(0.5, 1.5);
    const Matrix q = sym_eig(symmetrize(f_sd + theta(rng) * g_sd)).vectors;
    if (!simdiag_check(f_sd, g_sd, q, 1e-8)) {
        throw ConfigurationError("simultaneous_diagonalizer: F_sd and G_sd are not simultaneously diagonalizable");
    }
    return q;
}

StructuredAssumptionReport check_structured_assumptions(const QTransform& qt, const LQRData& data, double tol) {
    data.validate_dimensions();
    if (data.p() != qt.m * qt.p || data.q() != qt.m * qt.q) {
        throw DimensionError("structured assumptions: LQR data must be (m p) x (m p) / (m p) x (m q)");
    }
    StructuredAssumptionReport rep;
    rep.dynamics_preserved = block_diagonalized(data.F, qt.Q_inv, qt.Q, qt.m, qt.p, qt.p, 1e-8) &&
                             block_diagonalized(data.G, qt.Q_inv, qt.Q, qt.m, qt.p, qt.q, 1e-8);
    rep.cost_definite = cost_condition_holds(data);
    rep.cost_in_dual = pq_dual_contains(qt, symmetrize(data.cost_matrix()), tol);
    return rep;
}

PqCone::PqCone(QTransform qt, double tol)
    : MatrixConeBase(qt.m * qt.p, qt.m * qt.q, tol), qt_(std::move(qt)) {}

Matrix PqCone::min_element(const Matrix& m1, const Matrix& m2) const {
    if (!psd_fiber_nonempty(m1, m2)) {
        throw NoMinimalElementError("structured cone: dual fiber is empty (fails the PSD range condition)");
    }
    const Matrix lo = m2.rows() == 0 ? Matrix(m1.rows(), m1.rows()) : symmetrize(m1 * pinv(m2) * m1.transpose());
    if (!pq_dual_contains(qt_, embed::stack(lo, m1, m2), tol_)) {
        throw NoMinimalElementError("structured cone: completion [M1M2⁺M1ᵀ M1; M1ᵀ M2] is not in P_Q*");
    }
    return lo;
}

bool PqCone::contains_matrix(const Matrix& stacked) const { return pq_contains(qt_, stacked, tol_); }

bool PqCone::dual_contains_matrix(const Matrix& stacked) const { return pq_dual_contains(qt_, stacked, tol_); }

std::vector<PrimalPoint> PqCone::sample_primal(std::size_t count, std::uint64_t seed) const {
    const std::size_t n = p_ + q_;
    std::vector<PrimalPoint> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto rng = detail::stream(seed, i);
        const Matrix y = pinch(detail::random_psd(rng, n), qt_.m, qt_.p, qt_.q);
        const Matrix h = detail::random_symmetric(rng, n);
        const Matrix w = y + (h - pinch(h, qt_.m, qt_.p, qt_.q));
        const Matrix mat = symmetrize(qt_.T_inv * w * qt_.T_inv.transpose());
        out.push_back({embed::svec(mat.block(0, 0, p_, p_)), embed::pack_input(mat.block(0, p_, p_, q_), mat.block(p_, p_, q_, q_))});
    }
    return out;
}

std::vector<DualPoint> PqCone::sample_dual(std::size_t count, std::uint64_t seed) const {
    const std::size_t n = p_ + q_;
    std::vector<DualPoint> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto rng = detail::stream(seed ^ 0x3c6ef372ULL, i);
        const Matrix y = pinch(detail::random_psd(rng, n), qt_.m, qt_.p, qt_.q);
        const Matrix mat = symmetrize(qt_.T.transpose() * y * qt_.T);
        out.push_back({embed::svec(mat.block(0, 0, p_, p_)), embed::pack_input(mat.block(0, p_, p_, q_), mat.block(p_, p_, q_, q_))});
    }
    return out;
}

std::vector<Vector> PqCone::sample_dual_fiber(const Vector& mu, std::size_t count, std::uint64_t seed) const {
    const auto dm = embed::unpack_input(mu, p_, q_);
    const Matrix lo = min_element(dm.U1, dm.U2);
    const Matrix pp = qt_.T.block(0, 0, p_, p_);
    std::vector<Vector> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (i == 0) {
            out.push_back(embed::svec(lo));
            continue;
        }
        auto rng = detail::stream(seed, i);
        std::uniform_real_distribution<double> amp(0.0, 1.0);
        const Matrix d = diag_m_project(detail::random_psd(rng, p_), qt_.m, qt_.p, qt_.p);
        out.push_back(embed::svec(lo + amp(rng) * symmetrize(pp.transpose() * d * pp)));
    }
    return out;
}

std::shared_ptr<const PqCone> pq_cone_oracle(const QTransform& qt, const LQRData& data) {
    const auto rep = check_structured_assumptions(qt, data);
    if (!rep.dynamics_preserved) {
        throw ConfigurationError("structured cone: F and G are not block-diagonalized by Q");
    }
    if (!rep.cost_definite) throw ConfigurationError("structured cone: stacked cost is not positive definite");
    if (!rep.cost_in_dual) throw ConfigurationError("structured cone: stacked cost is not in the dual cone P_Q*");
    return std::make_shared<const PqCone>(qt);
}

ConeProgram make_structured_program(const QTransform& qt, const LQRData& data, const Matrix& x0) {
    if (x0.rows() != data.p() || x0.cols() != data.p()) throw DimensionError("make_structured_program: X0 must be mp x mp");
    return make_matrix_program(data.F, data.G, data.S, data.R1, data.R2, x0, pq_cone_oracle(qt, data));
}

}  // namespace conelqr
