#pragma once

#include <cstdint>
#include <random>

#include "conelqr/linalg.hpp"

namespace conelqr::detail {

// Seed streams are split per sample so results do not depend on the order
// in which parallel loops consume them.
inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

inline Matrix gaussian_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    std::normal_distribution<double> n01(0.0, 1.0);
    Matrix m(rows, cols);
    for (double& x : m.data()) x = n01(rng);
    return m;
}

// V Vᵀ with V of shape n x k, k uniform in [0, n].
inline Matrix random_psd(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<std::size_t> rank(0, n);
    const Matrix v = gaussian_matrix(rng, n, rank(rng));
    return symmetrize(v * v.transpose());
}

inline Matrix random_symmetric(std::mt19937_64& rng, std::size_t n) {
    return symmetrize(gaussian_matrix(rng, n, n));
}

}  // namespace conelqr::detail
