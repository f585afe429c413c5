#include "conelqr/kernels.hpp"

#include <omp.h>

#include "conelqr/errors.hpp"

namespace conelqr::kernels {

namespace {

void require_product(const Matrix& a, const Matrix& b, const char* what) {
    if (a.cols() != b.rows()) {
        throw DimensionError(std::string(what) + ": inner dimensions differ");
    }
}

}  // namespace

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
    require_product(a, b, "matmul");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                c(i, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

Matrix transpose_matmul(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw DimensionError("transpose_matmul: row counts differ");
    Matrix c(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = a(k, i);
            if (aki == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                c(i, j) += aki * b(k, j);
            }
        }
    }
    return c;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    const std::size_t p = b.rows();
    const std::size_t q = b.cols();
    Matrix c(a.rows() * p, a.cols() * q);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            for (std::size_t k = 0; k < p; ++k)
                for (std::size_t l = 0; l < q; ++l)
                    c(i * p + k, j * q + l) = a(i, j) * b(k, l);
    return c;
}

Matrix congruence(const Matrix& c, const Matrix& a) {
    return matmul(matmul(c, a), c.transpose());
}

}  // namespace serial

namespace parallel {

Matrix matmul(const Matrix& a, const Matrix& b) {
    require_product(a, b, "matmul");
    Matrix c(a.rows(), b.cols());
    const auto rows = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(ui, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                c(ui, j) += aik * b(k, j);
            }
        }
    }
    return c;
}

Matrix transpose_matmul(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw DimensionError("transpose_matmul: row counts differ");
    Matrix c(a.cols(), b.cols());
    const auto out_rows = static_cast<std::ptrdiff_t>(a.cols());
    // Each thread owns a block of output rows; the k loop stays in order so
    // results match the serial kernel bit for bit.
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < out_rows; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        for (std::size_t k = 0; k < a.rows(); ++k) {
            const double aki = a(k, ui);
            if (aki == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                c(ui, j) += aki * b(k, j);
            }
        }
    }
    return c;
}

Matrix kron(const Matrix& a, const Matrix& b) {
    const std::size_t p = b.rows();
    const std::size_t q = b.cols();
    Matrix c(a.rows() * p, a.cols() * q);
    const auto ar = static_cast<std::ptrdiff_t>(a.rows());
#pragma omp parallel for collapse(2) schedule(static)
    for (std::ptrdiff_t i = 0; i < ar; ++i)
        for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(p); ++k) {
            const auto ui = static_cast<std::size_t>(i);
            const auto uk = static_cast<std::size_t>(k);
            for (std::size_t j = 0; j < a.cols(); ++j)
                for (std::size_t l = 0; l < q; ++l)
                    c(ui * p + uk, j * q + l) = a(ui, j) * b(uk, l);
        }
    return c;
}

Matrix congruence(const Matrix& c, const Matrix& a) {
    return matmul(matmul(c, a), c.transpose());
}

}  // namespace parallel

int max_threads() { return omp_get_max_threads(); }

}  // namespace conelqr::kernels
