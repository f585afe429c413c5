#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "conelqr/errors.hpp"
#include "conelqr/kernels.hpp"
#include "conelqr/linalg.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace conelqr;
using testing_support::gaussian;
using testing_support::max_diff;

namespace {

void check_penrose(const Matrix& m, const Matrix& p) {
    CHECK(max_diff(m * p * m, m) <= 1e-8);
    CHECK(max_diff(p * m * p, p) <= 1e-8);
    CHECK(asymmetry(m * p) <= 1e-8);
    CHECK(asymmetry(p * m) <= 1e-8);
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd e(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
    return e;
}

}  // namespace

TEST_CASE("matrix construction rejects non-finite and ragged input") {
    CHECK_THROWS_AS(Matrix({{1.0, NAN}}), NonFiniteError);
    CHECK_THROWS_AS(Matrix::from_rows({{1.0, 2.0}, {3.0}}), DimensionError);
    CHECK_THROWS_AS(Matrix({{1.0, 2.0}}) * Matrix({{1.0, 2.0}}), DimensionError);
}

TEST_CASE("sym_eig small cases") {
    auto r = sym_eig(Matrix::identity(2));
    CHECK(r.values[0] == doctest::Approx(1.0));
    CHECK(r.values[1] == doctest::Approx(1.0));

    r = sym_eig(Matrix{{-3.0, 0.0}, {0.0, 5.0}});
    CHECK(r.values[0] == doctest::Approx(-3.0));
    CHECK(r.values[1] == doctest::Approx(5.0));

    // λ² - 2λ - 3 = (λ - 3)(λ + 1)
    r = sym_eig(Matrix{{1.0, 2.0}, {2.0, 1.0}});
    CHECK(std::abs(r.values[0] + 1.0) <= 1e-12);
    CHECK(std::abs(r.values[1] - 3.0) <= 1e-12);

    CHECK_THROWS_AS(sym_eig(Matrix(2, 3)), DimensionError);
    CHECK_THROWS_AS(sym_eig(Matrix{{1.0, 2.0}, {0.0, 1.0}}), SymmetryError);
}

TEST_CASE("sym_eig orthonormality and reconstruction on random input") {
    std::mt19937_64 rng(11);
    for (std::size_t n : {1u, 2u, 5u, 12u, 30u}) {
        const Matrix m = symmetrize(gaussian(rng, n, n));
        const auto r = sym_eig(m);
        const Matrix& v = r.vectors;
        CHECK(max_diff(v.transpose() * v, Matrix::identity(n)) <= 1e-10);
        CHECK(max_diff(m * v, v * Matrix::diagonal(r.values)) <= 1e-8 * (1.0 + m.max_abs()));
        for (std::size_t i = 1; i < n; ++i) CHECK(r.values[i - 1] <= r.values[i]);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(m));
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(es.eigenvalues()(i) - r.values[i]) <= 1e-10 * (1.0 + m.max_abs()));
    }
}

TEST_CASE("sym_eig handles repeated eigenvalues") {
    std::mt19937_64 rng(3);
    const Matrix q = sym_eig(symmetrize(gaussian(rng, 6, 6))).vectors;
    const Matrix m = symmetrize(q * Matrix::diagonal(Vector{2, 2, 2, -1, -1, 0}) * q.transpose());
    const auto r = sym_eig(m);
    CHECK(max_diff(r.vectors.transpose() * r.vectors, Matrix::identity(6)) <= 1e-10);
    CHECK(std::abs(r.values[0] + 1.0) <= 1e-10);
    CHECK(std::abs(r.values[5] - 2.0) <= 1e-10);
}

TEST_CASE("pinv examples and Penrose conditions") {
    CHECK(max_diff(pinv(Matrix::identity(3)), Matrix::identity(3)) <= 1e-12);
    CHECK(pinv(Matrix(2, 2)).max_abs() == 0.0);
    const Matrix d{{2.0, 0.0}, {0.0, 0.0}};
    const Matrix pd = pinv(d);
    CHECK(max_diff(pd, Matrix{{0.5, 0.0}, {0.0, 0.0}}) <= 1e-12);
    check_penrose(d, pd);

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix m = gaussian(rng, 5, 5);
        CHECK(max_diff(pinv(pinv(m)), m) <= 1e-7);
        check_penrose(m, pinv(m));
    }
    // rank-deficient and rectangular
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix m = gaussian(rng, 6, 2) * gaussian(rng, 2, 4);
        const Matrix p = pinv(m);
        CHECK(p.rows() == 4);
        check_penrose(m, p);
    }
}

TEST_CASE("is_psd") {
    CHECK(is_psd(Matrix::identity(2), 1e-9));
    CHECK_FALSE(is_psd(-Matrix::identity(2), 1e-9));
    CHECK_FALSE(is_psd(Matrix{{1.0, 2.0}, {2.0, 1.0}}, 1e-9));
    CHECK_THROWS_AS(is_psd(Matrix{{1.0, 1.0}, {0.0, 1.0}}, 1e-9), SymmetryError);

    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix v = gaussian(rng, 3, 6);
        CHECK(is_psd(symmetrize(v.transpose() * v), 1e-9));
    }
}

TEST_CASE("kron examples and mixed-product property") {
    CHECK(kron(Matrix::identity(2), Matrix::identity(3)) == Matrix::identity(6));
    const Matrix m{{1.0, -2.0}, {3.5, 4.0}};
    CHECK(kron(Matrix{{2.0}}, m) == 2.0 * m);
    const Matrix swap = kron(Matrix{{0.0, 1.0}, {1.0, 0.0}}, Matrix::identity(2));
    const Matrix expected{{0, 0, 1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}, {0, 1, 0, 0}};
    CHECK(swap == expected);

    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = gaussian(rng, 2, 3);
        const Matrix b = gaussian(rng, 3, 2);
        const Matrix c = gaussian(rng, 3, 2);
        const Matrix d = gaussian(rng, 2, 4);
        CHECK(max_diff(kron(a, b) * kron(c, d), kron(a * c, b * d)) <= 1e-9);
    }
}

TEST_CASE("solve and inverse") {
    const Matrix a{{4.0, 1.0}, {2.0, 3.0}};
    CHECK(max_diff(a * inverse(a), Matrix::identity(2)) <= 1e-14);
    CHECK_THROWS_AS(inverse(Matrix{{1.0, 2.0}, {2.0, 4.0}}), SingularMatrixError);
}

TEST_CASE("serial and parallel kernels agree") {
    std::mt19937_64 rng(13);
    for (std::size_t n : {1u, 7u, 40u, 90u}) {
        const Matrix a = gaussian(rng, n, n + 3);
        const Matrix b = gaussian(rng, n + 3, n);
        const Matrix c = gaussian(rng, n, n + 3);
        const Matrix s = symmetrize(gaussian(rng, n + 3, n + 3));
        CHECK(kernels::serial::matmul(a, b) == kernels::parallel::matmul(a, b));
        CHECK(kernels::serial::transpose_matmul(a, c) == kernels::parallel::transpose_matmul(a, c));
        CHECK(kernels::serial::kron(a, b) == kernels::parallel::kron(a, b));
        CHECK(kernels::serial::congruence(a, s) == kernels::parallel::congruence(a, s));
        CHECK(max_diff(kernels::serial::matmul(a, b), a * b) == 0.0);
    }
}
