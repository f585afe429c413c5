#include <cmath>
#include <random>

#include "conelqr/errors.hpp"
#include "conelqr/lp_simplex.hpp"
#include "conelqr/polyhedral.hpp"
#include "doctest.h"
#include "instances.hpp"
#include "lp_oracle.hpp"

using instances::dense;
using instances::random_lp;
using namespace conelqr;

namespace {

LPData make_lp(Vector c, Matrix m, Vector b) {
    LPData lp;
    lp.c = std::move(c);
    lp.M = std::move(m);
    lp.b = std::move(b);
    return lp;
}

}  // namespace

TEST_CASE("reference examples") {
    auto res = solve_lp(make_lp({1.0, 0.0}, Matrix{{1.0, 1.0}}, {1.0}));
    REQUIRE(res.status == LPStatus::optimal);
    CHECK(res.value == doctest::Approx(1.0));
    CHECK(res.z == Vector{1.0, 0.0});

    res = solve_lp(make_lp({1.0, 0.0}, Matrix{{1.0, -1.0}}, {0.0}));
    CHECK(res.status == LPStatus::unbounded);

    res = solve_lp(make_lp({0.0}, Matrix{{1.0}}, {-1.0}));
    CHECK(res.status == LPStatus::infeasible);
}

TEST_CASE("zero rows and redundant rows") {
    auto res = solve_lp(make_lp({1.0, 2.0}, Matrix{{1.0, 1.0}, {0.0, 0.0}, {2.0, 2.0}}, {4.0, 0.0, 8.0}));
    REQUIRE(res.status == LPStatus::optimal);
    CHECK(res.value == doctest::Approx(8.0));
    CHECK(res.active_rows.size() == 1);
    CHECK(verify_certificate(make_lp({1.0, 2.0}, Matrix{{1.0, 1.0}, {0.0, 0.0}, {2.0, 2.0}}, {4.0, 0.0, 8.0}), res));

    res = solve_lp(make_lp({1.0}, Matrix{{0.0}}, {1.0}));
    CHECK(res.status == LPStatus::infeasible);
    CHECK_THROWS_AS(solve_lp(make_lp({1.0}, Matrix{{1.0}, {1.0}}, {1.0})), DimensionError);
}

TEST_CASE("certificate verification") {
    const auto lp = make_lp({3.0, 1.0, 0.0}, Matrix{{1.0, 1.0, 1.0}, {1.0, -1.0, 0.0}}, {4.0, 1.0});
    const auto res = solve_lp(lp);
    REQUIRE(res.status == LPStatus::optimal);
    CHECK(verify_certificate(lp, res));

    auto bad = res;
    bad.z[0] -= 0.1;
    CHECK_FALSE(verify_certificate(lp, bad));
    bad = res;
    bad.value += 0.1;
    CHECK_FALSE(verify_certificate(lp, bad));
    bad = res;
    bad.status = LPStatus::infeasible;
    CHECK_FALSE(verify_certificate(lp, bad));
}

TEST_CASE("brute-force oracle agreement and determinism") {
    std::mt19937_64 rng(2024);
    int optimal = 0, infeasible = 0, unbounded = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const auto lp = random_lp(rng);
        const auto res = solve_lp(lp);
        const auto ref = lp_oracle::solve(dense(lp.M), lp.b, lp.c);
        REQUIRE(res.status != LPStatus::numerical_failure);
        switch (ref.kind) {
            case lp_oracle::Kind::optimal:
                ++optimal;
                REQUIRE(res.status == LPStatus::optimal);
                CHECK(std::abs(res.value - ref.value) <= 1e-9 * (1.0 + std::abs(ref.value)));
                CHECK(verify_certificate(lp, res));
                break;
            case lp_oracle::Kind::infeasible:
                ++infeasible;
                CHECK(res.status == LPStatus::infeasible);
                break;
            case lp_oracle::Kind::unbounded:
                ++unbounded;
                CHECK(res.status == LPStatus::unbounded);
                break;
        }
        const auto again = solve_lp(lp);
        CHECK(again.pivots == res.pivots);
        CHECK(again.z == res.z);
    }
    CHECK(optimal > 50);
    CHECK(infeasible > 10);
    CHECK(unbounded > 10);
}

TEST_CASE("LP from the positive-system data") {
    const auto lp = build_lp(Matrix{{0.5}}, Matrix{{0.25}}, Matrix{{1.0}}, {1.0}, {0.0}, {1.0});
    CHECK(lp.nz() == 4);
    CHECK(lp.rows() == 2);
    CHECK(lp.names == std::vector<std::string>{"lambda_1", "w_1", "y_1", "z_1"});
    const auto res = solve_lp(lp);
    REQUIRE(res.status == LPStatus::optimal);
    CHECK(std::abs(res.value - 4.0 / 3.0) <= 1e-9);
    for (double v : res.phase2_values) CHECK(v <= 4.0 / 3.0 + 1e-6);

    const auto zero = solve_lp(build_lp(Matrix{{0.5}}, Matrix{{0.25}}, Matrix{{1.0}}, {1.0}, {0.0}, {0.0}));
    REQUIRE(zero.status == LPStatus::optimal);
    CHECK(zero.value == 0.0);

    // s = 0 below Eᵀ|r|: no nonnegative witness exists
    const auto inf = solve_lp(build_lp(Matrix{{0.5}}, Matrix{{0.25}}, Matrix{{1.0}}, {0.0}, {1.0}, {1.0}));
    CHECK(inf.status == LPStatus::infeasible);
}
