#include <cmath>
#include <numbers>
#include <random>

#include "conelqr/cone.hpp"
#include "conelqr/errors.hpp"
#include "conelqr/psd_lqr.hpp"
#include "doctest.h"
#include "instances.hpp"
#include "test_support.hpp"

using namespace conelqr;
using testing_support::max_diff;

namespace {

const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

LQRData scalar_data() { return {Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{0.0}}, Matrix{{1.0}}}; }

Vector pack_mu(const Matrix& m1, const Matrix& m2) { return embed::pack_input(m1, m2); }

}  // namespace

TEST_CASE("symmetric embedding is an isometry") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = symmetrize(testing_support::gaussian(rng, 4, 4));
        const Matrix b = symmetrize(testing_support::gaussian(rng, 4, 4));
        CHECK(std::abs(dot(embed::svec(a), embed::svec(b)) - frobenius_inner(a, b)) <= 1e-12);
        CHECK(max_diff(embed::smat(embed::svec(a), 4), a) <= 1e-15);
        const Matrix u1 = testing_support::gaussian(rng, 4, 2);
        const Matrix u2 = symmetrize(testing_support::gaussian(rng, 2, 2));
        const auto back = embed::unpack_input(embed::pack_input(u1, u2), 4, 2);
        CHECK(max_diff(back.U1, u1) <= 1e-15);
        CHECK(max_diff(back.U2, u2) <= 1e-15);
    }
}

TEST_CASE("phi_psd examples") {
    CHECK(phi_psd(Matrix(2, 1), Matrix{{3.0}}).max_abs() == 0.0);
    CHECK(phi_psd(Matrix{{1.0}}, Matrix{{2.0}})(0, 0) == doctest::Approx(-0.5));
    CHECK(phi_psd(Matrix{{1.0, 0.0}}, Matrix{{1.0, 0.0}, {0.0, 0.0}})(0, 0) == doctest::Approx(-1.0));
    // M1 leaks into the null space of M2
    CHECK_THROWS_AS(phi_psd(Matrix{{0.0, 1.0}}, Matrix{{1.0, 0.0}, {0.0, 0.0}}), NoMinimalElementError);
    CHECK_THROWS_AS(phi_psd(Matrix{{0.0}}, Matrix{{-1.0}}), NoMinimalElementError);
}

TEST_CASE("riccati_step examples") {
    CHECK(riccati_step(scalar_data(), Matrix{{0.0}})(0, 0) == doctest::Approx(1.0));
    CHECK(riccati_step(scalar_data(), Matrix{{1.0}})(0, 0) == doctest::Approx(1.5));

    std::mt19937_64 rng(3);
    auto d = instances::random_lqr(rng, 3, 2);
    const Matrix at_zero = riccati_step(d, Matrix(3, 3));
    CHECK(max_diff(at_zero, d.S - d.R1 * inverse(d.R2) * d.R1.transpose()) <= 1e-12);

    d.G = Matrix(3, 2);
    d.R1 = Matrix(3, 2);
    const Matrix lam = instances::random_psd(rng, 3);
    CHECK(max_diff(riccati_step(d, lam), d.S + d.F.transpose() * lam * d.F) <= 1e-12);
}

TEST_CASE("solve_riccati examples") {
    const auto cert = solve_riccati(scalar_data());
    REQUIRE(cert.converged());
    CHECK(std::abs(cert.Lambda(0, 0) - kGolden) <= 1e-9);
    const Matrix k = gain(scalar_data(), cert.Lambda);
    CHECK(std::abs(k(0, 0) - kGolden / (1.0 + kGolden)) <= 1e-9);

    LQRData zero_f{Matrix(2, 2), Matrix{{1.0}, {0.0}}, Matrix{{2.0, 0.5}, {0.5, 1.0}}, Matrix(2, 1), Matrix{{1.0}}};
    const auto one = solve_riccati(zero_f);
    REQUIRE(one.converged());
    CHECK(max_diff(one.Lambda, zero_f.S) <= 1e-14);
    CHECK(one.iterations <= 2);

    const LQRData diag{0.5 * Matrix::identity(2), Matrix::identity(2), Matrix::identity(2), Matrix(2, 2),
                       Matrix::identity(2)};
    // decoupled scalar recursion ρ' = 1 + 0.25ρ - 0.25ρ²/(1+ρ)
    double rho = 0.0;
    for (int i = 0; i < 200; ++i) rho = 1.0 + 0.25 * rho - 0.25 * rho * rho / (1.0 + rho);
    const auto cert2 = solve_riccati(diag);
    REQUIRE(cert2.converged());
    CHECK(max_diff(cert2.Lambda, rho * Matrix::identity(2)) <= 1e-9);
}

TEST_CASE("gain examples") {
    std::mt19937_64 rng(5);
    auto d = instances::random_lqr(rng, 3, 2);
    d.R1 = Matrix(3, 2);
    CHECK(gain(d, Matrix(3, 3)).max_abs() == 0.0);
    d = instances::random_lqr(rng, 3, 2);
    d.G = Matrix(3, 2);
    CHECK(max_diff(gain(d, instances::random_psd(rng, 3)), inverse(d.R2) * d.R1.transpose()) <= 1e-12);
}

TEST_CASE("dual feasibility certificate") {
    const auto data = scalar_data();
    CHECK(dual_feasibility_check(data, Matrix{{0.0}}, 1e-9));
    const auto cert = solve_riccati(data);
    CHECK(dual_feasibility_check(data, cert.Lambda, 1e-7));
    CHECK_FALSE(dual_feasibility_check(data, cert.Lambda + Matrix::identity(1), 1e-7));

    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const auto d = instances::random_lqr(rng, 3, 2);
        const auto c = solve_riccati(d);
        REQUIRE(c.converged());
        CHECK(dual_feasibility_check(d, c.Lambda, 1e-7));
        CHECK_FALSE(dual_feasibility_check(d, c.Lambda + Matrix::identity(3), 1e-7));
        // any feasible θΛ* gives a smaller objective on PSD X0
        const Matrix x0 = instances::random_psd(rng, 3);
        for (double theta : {0.0, 0.3, 0.9, 1.0}) {
            const Matrix lam = theta * c.Lambda;
            CHECK(dual_feasibility_check(d, lam, 1e-7));
            CHECK(frobenius_inner(lam, x0) <= frobenius_inner(c.Lambda, x0) + 1e-8);
        }
    }
    CHECK_THROWS_AS(dual_feasibility_check(data, Matrix::identity(2), 1e-9), DimensionError);
}

TEST_CASE("rank-one embedding") {
    auto s = embed_rank1(Vector{0.0, 0.0});
    CHECK(s.X.max_abs() == 0.0);
    s = embed_rank1(Vector{2.0}, 1);
    CHECK(s.X(0, 0) == 4.0);
    CHECK(s.U1.cols() == 1);

    const auto cert = solve_riccati(scalar_data());
    const auto prog = make_psd_program(scalar_data(), embed_rank1(Vector{2.0}).X);
    const auto trace = solve_fixed_point(prog);
    REQUIRE(trace.converged());
    CHECK(std::abs(evaluate_value(trace, prog.x0) - 4.0 * kGolden) <= 1e-9);
    CHECK(std::abs(lambda_matrix(trace.final(), 1)(0, 0) - cert.Lambda(0, 0)) <= 1e-9);
}

TEST_CASE("oracle membership examples") {
    const PsdCone cone(1, 1);
    CHECK(cone.contains({1.0}, pack_mu(Matrix{{0.0}}, Matrix{{1.0}})));
    CHECK_FALSE(cone.contains({1.0}, pack_mu(Matrix{{2.0}}, Matrix{{1.0}})));
    CHECK(cone.phi(pack_mu(Matrix{{1.0}}, Matrix{{2.0}}))[0] == doctest::Approx(-0.5));
    CHECK_THROWS_AS(psd_cone_oracle({Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{2.0}}, Matrix{{1.0}}}),
                    ConeAssumptionError);
}

TEST_CASE("scalar bellman step and policy") {
    const auto prog = make_psd_program(scalar_data(), Matrix{{1.0}});
    CHECK(bellman_step(prog, {0.0})[0] == doctest::Approx(1.0));
    const auto trace = solve_fixed_point(prog);
    REQUIRE(trace.converged());
    CHECK(std::abs(trace.final()[0] - kGolden) <= 1e-9);
    const Vector u = optimal_policy(prog, trace.final(), {1.0});
    const auto blocks = embed::unpack_input(u, 1, 1);
    const double k = kGolden / (1.0 + kGolden);
    CHECK(std::abs(blocks.U1(0, 0) + k) <= 1e-9);
    CHECK(std::abs(blocks.U2(0, 0) - k * k) <= 1e-9);
    CHECK_THROWS_AS(optimal_policy(prog, trace.final(), {-1.0}), InfeasibleStateError);
}

TEST_CASE("value iteration equals Riccati iteration on random data") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        std::uniform_int_distribution<std::size_t> dim(1, 4);
        const auto d = instances::random_lqr(rng, dim(rng), dim(rng));
        const auto prog = make_psd_program(d, Matrix::identity(d.p()));
        Vector lam(prog.n(), 0.0);
        Matrix ric(d.p(), d.p());
        for (int k = 0; k < 40; ++k) {
            lam = bellman_step(prog, lam);
            ric = riccati_step(d, ric);
            CHECK(max_diff(lambda_matrix(lam, d.p()), ric) <= 1e-9 * (1.0 + ric.max_abs()));
        }
    }
}

TEST_CASE("self-duality and pairing on samples") {
    std::mt19937_64 rng(41);
    const PsdCone cone(3, 2);
    for (int trial = 0; trial < 500; ++trial) {
        const Matrix m = symmetrize(testing_support::gaussian(rng, 5, 5)) + (trial % 2 ? 2.5 : 0.0) * Matrix::identity(5);
        const Vector x = embed::svec(m.block(0, 0, 3, 3));
        const Vector u = embed::pack_input(m.block(0, 3, 3, 2), m.block(3, 3, 2, 2));
        CHECK(cone.contains(x, u) == cone.dual_contains(x, u));
    }
    for (const auto& p : cone.sample_primal(200, 1)) CHECK(cone.contains(p.x, p.u));
    CHECK(min_dual_pairing(cone, 1000, 2) >= -1e-9);
}

TEST_CASE("minimal element on the PSD cone") {
    std::mt19937_64 rng(43);
    const PsdCone cone(3, 2);
    int checked = 0;
    for (const auto& d : cone.sample_dual(60, 9)) {
        const auto blocks = embed::unpack_input(d.mu, 3, 2);
        const Matrix bar = blocks.U1 * pinv(blocks.U2) * blocks.U1.transpose();
        CHECK(check_min_element(cone, d.mu, embed::svec(bar), 30, 4));
        CHECK_FALSE(check_min_element(cone, d.mu, embed::svec(bar + 1e-3 * Matrix::identity(3)), 30, 4));
        ++checked;
    }
    CHECK(checked == 60);
    CHECK(check_min_element(cone, Vector(cone.input_dim(), 0.0), Vector(cone.state_dim(), 0.0), 20, 1));
}

TEST_CASE("rank-one trajectories follow the vector closed loop") {
    std::mt19937_64 rng(47);
    for (int trial = 0; trial < 5; ++trial) {
        const auto d = instances::random_lqr(rng, 3, 2);
        const Vector x0 = testing_support::gaussian_vector(rng, 3);
        const auto prog = make_psd_program(d, embed_rank1(x0).X);
        const auto trace = solve_fixed_point(prog);
        REQUIRE(trace.converged());
        CHECK_FALSE(check_monotone(*prog.cone, trace).has_value());
        const Matrix lam = lambda_matrix(trace.final(), 3);
        const Matrix k = gain(d, lam);
        const Matrix closed = d.F - d.G * k;
        const auto traj = simulate(prog, trace.final(), 50);
        Vector x = x0;
        for (const auto& state : traj.states) {
            const Matrix xm = embed::smat(state, 3);
            CHECK(max_diff(xm, outer(x, x)) <= 1e-8 * (1.0 + norm_inf(x0) * norm_inf(x0)));
            const auto ev = sym_eig(xm).values;
            CHECK(std::abs(ev[1]) <= 1e-8 * std::max(ev[2], 1.0));
            x = closed * x;
        }
        const double value = evaluate_value(trace, prog.x0);
        CHECK(std::abs(traj.total_cost + traj.tail_value - value) <= 1e-8 * (1.0 + value));
        for (std::uint64_t seed = 0; seed < 5; ++seed) CHECK(perturbed_policy_cost(prog, trace.final(), 20, seed) >= value - 1e-7);
    }
}
