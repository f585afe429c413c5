#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "conelqr/linalg.hpp"

namespace conelqr {

/// maximize cᵀz  subject to  M z = b,  z >= 0
struct LPData {
    Vector c;
    Matrix M;
    Vector b;
    std::vector<std::string> names;  // optional variable names, size nz when present

    std::size_t nz() const { return c.size(); }
    std::size_t rows() const { return b.size(); }
    void validate() const;
};

enum class LPStatus { optimal, infeasible, unbounded, numerical_failure };

std::string to_string(LPStatus s);

struct Pivot {
    std::size_t row;
    std::size_t entering;
    std::size_t leaving;
    friend bool operator==(const Pivot&, const Pivot&) = default;
};

struct LPResult {
    LPStatus status = LPStatus::numerical_failure;
    double value = 0.0;
    Vector z;
    // Final basis (column indices into the original variables) and the
    // original constraint rows it spans after zero/redundant rows are dropped.
    std::vector<std::size_t> basis;
    std::vector<std::size_t> active_rows;
    std::vector<Pivot> pivots;           // every pivot, both phases, in order
    std::vector<double> phase2_values;   // objective at each phase-2 basis
    std::string message;
};

struct SimplexOptions {
    double pivot_tol = 1e-9;
    double optimality_tol = 1e-9;
    double feasibility_tol = 1e-9;
    std::size_t max_pivots = 100000;
};

// Dense two-phase tableau simplex with Bland's rule.
LPResult solve_lp(const LPData& lp, const SimplexOptions& options = {});

// Primal feasibility, objective consistency, and nonpositive reduced costs at
// the reported basis, all within 1e-8.
bool verify_certificate(const LPData& lp, const LPResult& result);

}  // namespace conelqr
