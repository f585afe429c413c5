#pragma once

#include <cstddef>

#include "conelqr/linalg.hpp"

// Dense kernels in two flavours. The serial versions are the reference
// implementation the tests compare against; the OpenMP versions are what the
// library dispatches to above kParallelThreshold multiply-adds.
namespace conelqr::kernels {

inline constexpr std::size_t kParallelThreshold = 1u << 15;

namespace serial {
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose_matmul(const Matrix& a, const Matrix& b);  // aᵀ b
Matrix kron(const Matrix& a, const Matrix& b);
// c a cᵀ
Matrix congruence(const Matrix& c, const Matrix& a);
}  // namespace serial

namespace parallel {
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose_matmul(const Matrix& a, const Matrix& b);
Matrix kron(const Matrix& a, const Matrix& b);
Matrix congruence(const Matrix& c, const Matrix& a);
}  // namespace parallel

int max_threads();

}  // namespace conelqr::kernels
