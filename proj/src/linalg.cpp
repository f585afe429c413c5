#include "conelqr/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "conelqr/errors.hpp"
#include "conelqr/kernels.hpp"

namespace conelqr {

namespace {

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw NonFiniteError(std::string(what) + ": non-finite entry");
    }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionError(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()) + ")");
    }
}

void require_same_length(std::span<const double> a, std::span<const double> b, const char* what) {
    if (a.size() != b.size()) throw DimensionError(std::string(what) + ": length mismatch");
}

void require_symmetric(const Matrix& m, const char* what) {
    if (!m.is_square()) throw DimensionError(std::string(what) + ": matrix is not square");
    if (asymmetry(m) > 1e-10 * (1.0 + m.max_abs())) {
        throw SymmetryError(std::string(what) + ": matrix is not symmetric");
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (!std::isfinite(fill)) throw NonFiniteError("Matrix: non-finite fill value");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
    require_finite(data_, "Matrix");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    Matrix m;
    m.rows_ = rows.size();
    m.cols_ = rows.empty() ? 0 : rows.front().size();
    m.data_.reserve(m.rows_ * m.cols_);
    for (const auto& r : rows) {
        if (r.size() != m.cols_) throw DimensionError("Matrix: ragged rows");
        m.data_.insert(m.data_.end(), r.begin(), r.end());
    }
    require_finite(m.data_, "Matrix");
    return m;
}

Matrix Matrix::column(std::span<const double> v) {
    require_finite(v, "Matrix::column");
    Matrix m(v.size(), 1);
    std::copy(v.begin(), v.end(), m.data_.begin());
    return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
    require_finite(d, "Matrix::diagonal");
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) throw DimensionError("Matrix::block: out of range");
    Matrix b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nc; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
    if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_) throw DimensionError("Matrix::set_block: out of range");
    for (std::size_t i = 0; i < b.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

double Matrix::max_abs() const noexcept {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
}

double Matrix::trace() const {
    if (!is_square()) throw DimensionError("trace: matrix is not square");
    double t = 0.0;
    for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
}

Matrix& Matrix::operator+=(const Matrix& o) {
    require_same_shape(*this, o, "operator+");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
    require_same_shape(*this, o, "operator-");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
}

Matrix& Matrix::operator*=(double a) noexcept {
    for (double& x : data_) x *= a;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator-(Matrix a) { return a *= -1.0; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.rows() * a.cols() * b.cols() >= kernels::kParallelThreshold) {
        return kernels::parallel::matmul(a, b);
    }
    return kernels::serial::matmul(a, b);
}

Vector operator*(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) throw DimensionError("matrix-vector product: dimension mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
        y[i] = acc;
    }
    return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
    require_same_length(a, b, "dot");
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm_inf(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

Vector add(std::span<const double> a, std::span<const double> b) {
    require_same_length(a, b, "add");
    Vector c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
    return c;
}

Vector sub(std::span<const double> a, std::span<const double> b) {
    require_same_length(a, b, "sub");
    Vector c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
    return c;
}

Vector scale(double s, std::span<const double> v) {
    Vector c(v.begin(), v.end());
    for (double& x : c) x *= s;
    return c;
}

Vector abs(std::span<const double> v) {
    Vector c(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) c[i] = std::abs(v[i]);
    return c;
}

Vector concat(std::span<const double> a, std::span<const double> b) {
    Vector c(a.begin(), a.end());
    c.insert(c.end(), b.begin(), b.end());
    return c;
}

double frobenius_inner(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "frobenius_inner");
    return dot(a.data(), b.data());
}

Matrix symmetrize(const Matrix& m) {
    if (!m.is_square()) throw DimensionError("symmetrize: matrix is not square");
    Matrix s(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

double asymmetry(const Matrix& m) {
    if (!m.is_square()) throw DimensionError("asymmetry: matrix is not square");
    double a = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j) a = std::max(a, std::abs(m(i, j) - m(j, i)));
    return a;
}

Matrix hstack(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw DimensionError("hstack: row counts differ");
    Matrix c(a.rows(), a.cols() + b.cols());
    c.set_block(0, 0, a);
    c.set_block(0, a.cols(), b);
    return c;
}

Matrix vstack(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw DimensionError("vstack: column counts differ");
    Matrix c(a.rows() + b.rows(), a.cols());
    c.set_block(0, 0, a);
    c.set_block(a.rows(), 0, b);
    return c;
}

Matrix block2x2(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d) {
    return vstack(hstack(a, b), hstack(c, d));
}

Matrix outer(std::span<const double> a, std::span<const double> b) {
    Matrix m(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
    return m;
}

Matrix elementwise_abs(const Matrix& m) {
    Matrix r = m;
    for (double& x : r.data()) x = std::abs(x);
    return r;
}

double scaled_tol(double tol, double scale) { return std::max(tol * (1.0 + scale), 1e-12); }

SymEigResult sym_eig(const Matrix& m) {
    require_symmetric(m, "sym_eig");
    const std::size_t n = m.rows();
    Matrix a = symmetrize(m);
    Matrix v = Matrix::identity(n);

    double fro2 = 0.0;
    for (double x : a.data()) fro2 += x * x;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off2 = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off2 += 2.0 * a(p, q) * a(p, q);
        if (off2 <= 1e-30 * fro2 || off2 == 0.0) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

    SymEigResult r;
    r.values.resize(n);
    r.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        r.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) r.vectors(i, k) = v(i, order[k]);
    }
    return r;
}

Matrix pinv(const Matrix& m) {
    const std::size_t r = m.rows();
    const std::size_t c = m.cols();
    if (r == 0 || c == 0) return Matrix(c, r);
    // Eigenpairs of [[0, M], [Mᵀ, 0]] are ±sigma with vectors (u; ±v)/sqrt(2),
    // so singular values come out at full precision instead of squared.
    Matrix aug(r + c, r + c);
    aug.set_block(0, r, m);
    aug.set_block(r, 0, m.transpose());
    const SymEigResult eig = sym_eig(aug);
    const double sigma_max = std::max(0.0, eig.values.back());
    Matrix p(c, r);
    if (sigma_max == 0.0) return p;
    const double cutoff = kPinvRelativeThreshold * sigma_max;
    for (std::size_t k = 0; k < r + c; ++k) {
        const double sigma = eig.values[k];
        if (sigma <= cutoff) continue;
        const double w = 2.0 / sigma;
        for (std::size_t i = 0; i < c; ++i) {
            const double vi = eig.vectors(r + i, k);
            for (std::size_t j = 0; j < r; ++j) p(i, j) += w * vi * eig.vectors(j, k);
        }
    }
    return p;
}

double min_eigenvalue(const Matrix& m) {
    if (m.rows() == 0) return 0.0;
    return sym_eig(m).values.front();
}

bool is_psd(const Matrix& m, double tol) {
    require_symmetric(m, "is_psd");
    if (m.rows() == 0) return true;
    return min_eigenvalue(m) >= -tol * (1.0 + m.max_abs());
}

Matrix kron(const Matrix& a, const Matrix& b) {
    if (a.size() * b.size() >= kernels::kParallelThreshold) return kernels::parallel::kron(a, b);
    return kernels::serial::kron(a, b);
}

Matrix solve(const Matrix& a, const Matrix& b) {
    if (!a.is_square()) throw DimensionError("solve: matrix is not square");
    if (a.rows() != b.rows()) throw DimensionError("solve: right-hand side has wrong row count");
    const std::size_t n = a.rows();
    Matrix lu = a;
    Matrix x = b;
    const double scale = a.max_abs();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(lu(i, k)) > std::abs(lu(piv, k))) piv = i;
        if (std::abs(lu(piv, k)) <= 1e-14 * scale || lu(piv, k) == 0.0) {
            throw SingularMatrixError("solve: matrix is singular to working precision");
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(piv, j));
            for (std::size_t j = 0; j < x.cols(); ++j) std::swap(x(k, j), x(piv, j));
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = lu(i, k) / lu(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) lu(i, j) -= f * lu(k, j);
            for (std::size_t j = 0; j < x.cols(); ++j) x(i, j) -= f * x(k, j);
        }
    }
    for (std::size_t kk = n; kk-- > 0;) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            double acc = x(kk, j);
            for (std::size_t i = kk + 1; i < n; ++i) acc -= lu(kk, i) * x(i, j);
            x(kk, j) = acc / lu(kk, kk);
        }
    }
    return x;
}

Matrix inverse(const Matrix& m) { return solve(m, Matrix::identity(m.rows())); }

}  // namespace conelqr
