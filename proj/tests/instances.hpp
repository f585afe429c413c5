#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "conelqr/lp_simplex.hpp"
#include "conelqr/polyhedral.hpp"
#include "conelqr/psd_lqr.hpp"
#include "conelqr/structured_lqr.hpp"
#include "lp_oracle.hpp"
#include "test_support.hpp"

// Random problem data shared by unit and acceptance tests.
namespace instances {

using conelqr::LQRData;
using conelqr::Matrix;
using conelqr::Vector;

// Stacked cost V Vᵀ + δI, F with spectral norm <= 0.9 (so spectral radius <= 0.9).
inline LQRData random_lqr(std::mt19937_64& rng, std::size_t p, std::size_t q) {
    using testing_support::gaussian;
    std::uniform_real_distribution<double> u(0.1, 0.9);
    LQRData d;
    d.F = testing_support::with_norm(gaussian(rng, p, p), u(rng));
    d.G = gaussian(rng, p, q);
    const Matrix v = gaussian(rng, p + q, p + q);
    const Matrix cost = conelqr::symmetrize(v * v.transpose() + 0.2 * Matrix::identity(p + q));
    d.S = cost.block(0, 0, p, p);
    d.R1 = cost.block(0, p, p, q);
    d.R2 = cost.block(p, p, q, q);
    return d;
}

inline Matrix random_psd(std::mt19937_64& rng, std::size_t n) {
    const Matrix v = testing_support::gaussian(rng, n, n);
    return conelqr::symmetrize(v * v.transpose());
}

// f with f[k] = f[m - k], so circ(f) is symmetric.
inline Vector symmetric_first_row(std::mt19937_64& rng, std::size_t m) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector f(m);
    for (std::size_t k = 0; k <= m / 2; ++k) f[k] = f[(m - k) % m] = g(rng);
    return f;
}

struct CirculantInstance {
    conelqr::CirculantSpec spec;
    LQRData data;
    Matrix f_sd;
    Matrix g_sd;
};

// Symmetric-circulant dynamics with cost I_m ⊗ [S̄ R̄1; R̄1ᵀ R̄2].
inline CirculantInstance random_circulant(std::mt19937_64& rng, std::size_t m, std::size_t p, std::size_t q) {
    using testing_support::gaussian;
    CirculantInstance inst;
    inst.spec.f = symmetric_first_row(rng, m);
    inst.spec.g = symmetric_first_row(rng, m);
    inst.spec.Fbar = gaussian(rng, p, p);
    inst.spec.Gbar = gaussian(rng, p, q);
    inst.f_sd = conelqr::circulant(inst.spec.f);
    inst.g_sd = conelqr::circulant(inst.spec.g);
    auto [f, g] = conelqr::circulant_build(inst.spec);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    const double k = u(rng) / std::max(testing_support::spectral_norm(f), 1e-12);
    for (double& v : inst.spec.Fbar.data()) v *= k;
    f *= k;
    inst.data.F = f;
    inst.data.G = g;
    const Matrix v = gaussian(rng, p + q, p + q);
    const Matrix bar = conelqr::symmetrize(v * v.transpose() + 0.2 * Matrix::identity(p + q));
    const Matrix im = Matrix::identity(m);
    inst.data.S = conelqr::kron(im, bar.block(0, 0, p, p));
    inst.data.R1 = conelqr::kron(im, bar.block(0, p, p, q));
    inst.data.R2 = conelqr::kron(im, bar.block(p, p, q, q));
    return inst;
}

struct RandomPoly {
    Matrix A, B, E;
    Vector s, r, x0;
};

// Nonnegative E; A = |B|E + slack keeps A - |B|E >= 0; s chosen strictly
// above Eᵀ|r|. A is scaled so the closed loop stays contractive.
inline RandomPoly random_poly(std::mt19937_64& rng, std::size_t n, std::size_t m) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g(0.0, 1.0);
    RandomPoly p;
    p.E = Matrix(m, n);
    for (double& v : p.E.data()) v = u(rng) < 0.3 ? 0.0 : u(rng);
    p.B = Matrix(n, m);
    for (double& v : p.B.data()) v = 0.3 * g(rng);
    p.A = conelqr::elementwise_abs(p.B) * p.E;
    for (double& v : p.A.data()) v += 0.3 * u(rng);
    // column sums of A + |B|E bound the growth of λ; scale both A and B
    Matrix growth = p.A + conelqr::elementwise_abs(p.B) * p.E;
    double col_max = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += growth(i, j);
        col_max = std::max(col_max, sum);
    }
    const double k = col_max > 0.8 ? 0.8 / col_max : 1.0;
    p.A *= k;
    p.B *= k;
    p.r = Vector(m);
    for (double& v : p.r) v = g(rng);
    p.s = Vector(n);
    for (std::size_t j = 0; j < n; ++j) {
        double floor = 0.0;
        for (std::size_t i = 0; i < m; ++i) floor += p.E(i, j) * std::abs(p.r[i]);
        p.s[j] = floor + 0.1 + u(rng);
    }
    p.x0 = Vector(n);
    for (double& v : p.x0) v = u(rng) < 0.2 ? 0.0 : std::abs(g(rng));
    return p;
}

inline lp_oracle::Dense dense(const Matrix& m) {
    lp_oracle::Dense d(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) d[i][j] = m(i, j);
    return d;
}

// Small-integer LPs; three quarters are feasible by construction.
inline conelqr::LPData random_lp(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> small(-3, 3);
    std::uniform_int_distribution<std::size_t> nvar(1, 8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t nz = nvar(rng);
    const std::size_t rows = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
    Matrix m(rows, nz);
    for (double& v : m.data()) v = small(rng);
    Vector c(nz);
    for (double& v : c) v = small(rng);
    Vector b(rows);
    if (u(rng) < 0.75) {
        Vector z(nz);
        for (double& v : z) v = u(rng) < 0.4 ? 0.0 : std::floor(4.0 * u(rng));
        b = m * z;
    } else {
        for (double& v : b) v = small(rng);
    }
    conelqr::LPData lp;
    lp.c = std::move(c);
    lp.M = std::move(m);
    lp.b = std::move(b);
    return lp;
}

}  // namespace instances
