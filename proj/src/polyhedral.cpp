#include "conelqr/polyhedral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "conelqr/errors.hpp"
#include "random_util.hpp"

namespace conelqr {

namespace {

void require_shapes(const Matrix& e, std::size_t n, std::size_t m, const char* what) {
    if (e.cols() != n || e.rows() != m) throw DimensionError(std::string(what) + ": E must be m x n");
}

// Eᵀ v
Vector e_transpose_times(const Matrix& e, const Vector& v) {
    Vector out(e.cols(), 0.0);
    for (std::size_t i = 0; i < e.rows(); ++i)
        for (std::size_t j = 0; j < e.cols(); ++j) out[j] += e(i, j) * v[i];
    return out;
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

bool poly_contains(const Matrix& e, const Vector& x, const Vector& u, double tol) {
    require_shapes(e, x.size(), u.size(), "poly_contains");
    const double slack = tol * (1.0 + norm_inf(x) + norm_inf(u));
    if (std::any_of(x.begin(), x.end(), [&](double v) { return v < -slack; })) return false;
    const Vector ex = e * x;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (std::abs(u[i]) > ex[i] + slack) return false;
    }
    return true;
}

bool poly_dual_contains(const Matrix& e, const Vector& lambda, const Vector& mu, double tol) {
    require_shapes(e, lambda.size(), mu.size(), "poly_dual_contains");
    const Vector floor = e_transpose_times(e, abs(mu));
    const double slack = tol * (1.0 + norm_inf(lambda) + norm_inf(floor));
    for (std::size_t j = 0; j < lambda.size(); ++j) {
        if (lambda[j] - floor[j] < -slack) return false;
    }
    return true;
}

DualWitness dual_witness(const Matrix& e, const Vector& lambda, const Vector& mu) {
    require_shapes(e, lambda.size(), mu.size(), "dual_witness");
    DualWitness w{sub(lambda, e_transpose_times(e, abs(mu))), Vector(mu.size()), Vector(mu.size())};
    for (std::size_t i = 0; i < mu.size(); ++i) {
        w.y[i] = std::max(-mu[i], 0.0);
        w.z[i] = std::max(mu[i], 0.0);
    }
    return w;
}

Vector phi_poly(const Matrix& e, const Vector& mu) {
    if (e.rows() != mu.size()) throw DimensionError("phi_poly: E must have m rows");
    return scale(-1.0, e_transpose_times(e, abs(mu)));
}

Vector poly_policy(const Matrix& e, const Vector& x, const Vector& mu) {
    require_shapes(e, x.size(), mu.size(), "poly_policy");
    const Vector ex = e * x;
    Vector u(mu.size());
    for (std::size_t i = 0; i < mu.size(); ++i) u[i] = -sign(mu[i]) * ex[i];
    return u;
}

PolyAssumptionReport check_poly_assumptions(const Matrix& a, const Matrix& b, const Matrix& e, const Vector& s,
                                            const Vector& r) {
    const std::size_t n = a.rows();
    const std::size_t m = b.cols();
    if (!a.is_square() || b.rows() != n) throw DimensionError("check_poly_assumptions: A must be n x n, B n x m");
    require_shapes(e, n, m, "check_poly_assumptions");
    if (s.size() != n || r.size() != m) throw DimensionError("check_poly_assumptions: s/r lengths");

    PolyAssumptionReport rep;
    const auto& ed = e.data();
    rep.e_nonnegative = std::all_of(ed.begin(), ed.end(), [](double v) { return v >= 0.0; });

    const Matrix slack = a - elementwise_abs(b) * e;
    const auto& sd = slack.data();
    rep.invariance_margin = sd.empty() ? 0.0 : *std::min_element(sd.begin(), sd.end());
    rep.invariance = rep.invariance_margin >= -1e-12 * (1.0 + a.max_abs());

    const Vector gap = sub(s, e_transpose_times(e, abs(r)));
    rep.interiority_margin = gap.empty() ? 0.0 : *std::min_element(gap.begin(), gap.end());
    rep.interiority = rep.interiority_margin > 1e-9 * (1.0 + norm_inf(s));

    if (m == n) {
        const Matrix square = a - elementwise_abs(e * b);
        const auto& pd = square.data();
        rep.square_form_invariance = std::all_of(pd.begin(), pd.end(), [&](double v) { return v >= -1e-12 * (1.0 + a.max_abs()); });
        rep.note = "checked A - |B|E >= 0; square form A >= |EB| also evaluated since m == n";
    } else {
        rep.note = "checked A - |B|E >= 0; square form A >= |EB| needs m == n";
    }
    return rep;
}

PolyCone::PolyCone(Matrix e, double tol) : e_(std::move(e)), tol_(tol) {
    const auto& d = e_.data();
    if (std::any_of(d.begin(), d.end(), [](double v) { return v < 0.0; })) {
        throw ConfigurationError("polyhedral cone: E must be elementwise nonnegative");
    }
}

bool PolyCone::contains(const Vector& x, const Vector& u) const { return poly_contains(e_, x, u, tol_); }

bool PolyCone::dual_contains(const Vector& lambda, const Vector& mu) const {
    return poly_dual_contains(e_, lambda, mu, tol_);
}

Vector PolyCone::phi(const Vector& mu) const { return phi_poly(e_, mu); }

Vector PolyCone::argmin_input(const Vector& x, const Vector& mu) const { return poly_policy(e_, x, mu); }

std::vector<PrimalPoint> PolyCone::sample_primal(std::size_t count, std::uint64_t seed) const {
    std::vector<PrimalPoint> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        auto rng = detail::stream(seed, k);
        std::normal_distribution<double> n01(0.0, 1.0);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        Vector x(state_dim());
        for (double& v : x) v = u01(rng) < 0.2 ? 0.0 : std::abs(n01(rng));
        const Vector ex = e_ * x;
        Vector u(input_dim());
        for (std::size_t i = 0; i < u.size(); ++i) {
            // a quarter of the draws sit on a face of the box
            const double t = u01(rng) < 0.25 ? (u01(rng) < 0.5 ? -1.0 : 1.0) : 2.0 * u01(rng) - 1.0;
            u[i] = t * ex[i];
        }
        out.push_back({std::move(x), std::move(u)});
    }
    return out;
}

std::vector<DualPoint> PolyCone::sample_dual(std::size_t count, std::uint64_t seed) const {
    std::vector<DualPoint> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        auto rng = detail::stream(seed ^ 0xa5a5a5a5ULL, k);
        std::normal_distribution<double> n01(0.0, 1.0);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        auto draw = [&](std::size_t len) {
            Vector v(len);
            for (double& x : v) x = u01(rng) < 0.3 ? 0.0 : std::abs(n01(rng));
            return v;
        };
        const Vector w = draw(state_dim());
        const Vector y = draw(input_dim());
        const Vector z = draw(input_dim());
        out.push_back({add(w, e_transpose_times(e_, add(y, z))), sub(z, y)});
    }
    return out;
}

std::vector<Vector> PolyCone::sample_dual_fiber(const Vector& mu, std::size_t count, std::uint64_t seed) const {
    if (mu.size() != input_dim()) throw DimensionError("sample_dual_fiber: μ has wrong length");
    const Vector lo = e_transpose_times(e_, abs(mu));
    std::vector<Vector> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        if (k == 0) {
            out.push_back(lo);
            continue;
        }
        auto rng = detail::stream(seed, k);
        std::normal_distribution<double> n01(0.0, 1.0);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        Vector w(state_dim());
        Vector v(input_dim());
        for (double& x : w) x = u01(rng) < 0.5 ? 0.0 : std::abs(n01(rng));
        for (double& x : v) x = u01(rng) < 0.5 ? 0.0 : std::abs(n01(rng));
        out.push_back(add(add(lo, w), e_transpose_times(e_, v)));
    }
    return out;
}

std::optional<Vector> PolyCone::completion_witness(const Vector& next_state) const {
    (void)next_state;
    return Vector(input_dim(), 0.0);
}

bool PolyCone::in_state_projection(const Vector& x) const {
    if (x.size() != state_dim()) throw DimensionError("polyhedral cone: state has wrong length");
    const double slack = tol_ * (1.0 + norm_inf(x));
    return std::all_of(x.begin(), x.end(), [&](double v) { return v >= -slack; });
}

std::shared_ptr<const PolyCone> poly_cone_oracle(const Matrix& e) { return std::make_shared<const PolyCone>(e); }

ConeProgram make_poly_program(const Matrix& a, const Matrix& b, const Matrix& e, const Vector& s, const Vector& r,
                              const Vector& x0) {
    return ConeProgram(a, b, s, r, x0, poly_cone_oracle(e));
}

LPData build_lp(const Matrix& a, const Matrix& b, const Matrix& e, const Vector& s, const Vector& r,
                const Vector& x0) {
    const std::size_t n = a.rows();
    const std::size_t m = b.cols();
    if (!a.is_square() || b.rows() != n) throw DimensionError("build_lp: A must be n x n, B n x m");
    require_shapes(e, n, m, "build_lp");
    if (s.size() != n || r.size() != m || x0.size() != n) throw DimensionError("build_lp: s/r/x0 lengths");

    LPData lp;
    const std::size_t nz = 2 * n + 2 * m;
    lp.c.assign(nz, 0.0);
    std::copy(x0.begin(), x0.end(), lp.c.begin());
    lp.M = Matrix(n + m, nz);
    lp.b = concat(s, r);

    const Matrix et = e.transpose();
    // state rows: (I - Aᵀ) λ + w + Eᵀ y + Eᵀ z = s
    lp.M.set_block(0, 0, Matrix::identity(n) - a.transpose());
    lp.M.set_block(0, n, Matrix::identity(n));
    lp.M.set_block(0, 2 * n, et);
    lp.M.set_block(0, 2 * n + m, et);
    // input rows: -Bᵀ λ - y + z = r   (μ = z - y)
    lp.M.set_block(n, 0, -b.transpose());
    lp.M.set_block(n, 2 * n, -Matrix::identity(m));
    lp.M.set_block(n, 2 * n + m, Matrix::identity(m));

    for (std::size_t i = 0; i < n; ++i) lp.names.push_back("lambda_" + std::to_string(i + 1));
    for (std::size_t i = 0; i < n; ++i) lp.names.push_back("w_" + std::to_string(i + 1));
    for (std::size_t i = 0; i < m; ++i) lp.names.push_back("y_" + std::to_string(i + 1));
    for (std::size_t i = 0; i < m; ++i) lp.names.push_back("z_" + std::to_string(i + 1));
    return lp;
}

}  // namespace conelqr
