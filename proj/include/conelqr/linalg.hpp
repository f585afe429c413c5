#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace conelqr {

using Vector = std::vector<double>;

/**
 * Dense row-major real matrix.
 *
 * Constructors that take user data reject NaN/Inf. Arithmetic results are
 * not re-checked.
 */
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);
    static Matrix column(std::span<const double> v);
    static Matrix diagonal(std::span<const double> d);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }
    bool is_square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    Matrix transpose() const;
    Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
    void set_block(std::size_t r0, std::size_t c0, const Matrix& b);

    double max_abs() const noexcept;
    double trace() const;

    Matrix& operator+=(const Matrix& o);
    Matrix& operator-=(const Matrix& o);
    Matrix& operator*=(double a) noexcept;

    bool operator==(const Matrix& o) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator-(Matrix a);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
// Dispatches to the OpenMP kernel for large products, serial otherwise.
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

// Vector helpers.
double dot(std::span<const double> a, std::span<const double> b);
double norm_inf(std::span<const double> v);
Vector add(std::span<const double> a, std::span<const double> b);
Vector sub(std::span<const double> a, std::span<const double> b);
Vector scale(double s, std::span<const double> v);
Vector abs(std::span<const double> v);
Vector concat(std::span<const double> a, std::span<const double> b);

// Frobenius pairing sum_ij A_ij B_ij (= tr(Aᵀ B)).
double frobenius_inner(const Matrix& a, const Matrix& b);
Matrix symmetrize(const Matrix& m);
double asymmetry(const Matrix& m);
Matrix hstack(const Matrix& a, const Matrix& b);
Matrix vstack(const Matrix& a, const Matrix& b);
// [[a, b], [c, d]]
Matrix block2x2(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d);
Matrix outer(std::span<const double> a, std::span<const double> b);
Matrix elementwise_abs(const Matrix& m);

// Scale-aware tolerance: tol * (1 + scale) with an absolute floor of 1e-12.
double scaled_tol(double tol, double scale);

struct SymEigResult {
    Vector values;   // ascending
    Matrix vectors;  // orthonormal columns, vectors(:, k) pairs with values[k]
};

// Cyclic Jacobi eigensolver. Throws DimensionError / SymmetryError.
SymEigResult sym_eig(const Matrix& m);

// Moore-Penrose pseudo-inverse. Singular values below 1e-10 * sigma_max are
// treated as zero.
Matrix pinv(const Matrix& m);
inline constexpr double kPinvRelativeThreshold = 1e-10;

// min eigenvalue >= -tol * (1 + max|M_ij|). Throws SymmetryError.
bool is_psd(const Matrix& m, double tol);
double min_eigenvalue(const Matrix& m);

Matrix kron(const Matrix& a, const Matrix& b);

// LU with partial pivoting. Throws SingularMatrixError.
Matrix inverse(const Matrix& m);
Matrix solve(const Matrix& a, const Matrix& b);

}  // namespace conelqr
