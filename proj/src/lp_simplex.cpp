#include "conelqr/lp_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "conelqr/errors.hpp"

namespace conelqr {

void LPData::validate() const {
    if (M.rows() != b.size()) throw DimensionError("LPData: M must have one row per entry of b");
    if (M.cols() != c.size()) throw DimensionError("LPData: M must have one column per variable");
    if (!names.empty() && names.size() != c.size()) throw DimensionError("LPData: names must match variable count");
    for (double v : b)
        if (!std::isfinite(v)) throw NonFiniteError("LPData: b must be finite");
}

std::string to_string(LPStatus s) {
    switch (s) {
        case LPStatus::optimal: return "optimal";
        case LPStatus::infeasible: return "infeasible";
        case LPStatus::unbounded: return "unbounded";
        case LPStatus::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

namespace {

/// Dense tableau. Rows 0..rows-1 are constraints, row `rows` holds reduced
/// costs d_j = c_j - c_Bᵀ B⁻¹ a_j and, in the last column, minus the
/// current objective value.
class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), t_(rows + 1, cols + 1) {}

    double& at(std::size_t i, std::size_t j) { return t_(i, j); }
    double at(std::size_t i, std::size_t j) const { return t_(i, j); }
    double& rhs(std::size_t i) { return t_(i, cols_); }
    double rhs(std::size_t i) const { return t_(i, cols_); }
    double& cost(std::size_t j) { return t_(rows_, j); }
    double objective() const { return -t_(rows_, cols_); }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    void pivot(std::size_t r, std::size_t e) {
        const double piv = t_(r, e);
        for (std::size_t j = 0; j <= cols_; ++j) t_(r, j) /= piv;
        t_(r, e) = 1.0;
        for (std::size_t i = 0; i <= rows_; ++i) {
            if (i == r) continue;
            const double f = t_(i, e);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) t_(i, j) -= f * t_(r, j);
            t_(i, e) = 0.0;
        }
    }

    // Objective row from scratch for costs c and the given basis.
    void price(const Vector& c, const std::vector<std::size_t>& basis) {
        for (std::size_t j = 0; j < cols_; ++j) t_(rows_, j) = c[j];
        t_(rows_, cols_) = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            const double cb = c[basis[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) t_(rows_, j) -= cb * t_(i, j);
        }
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    Matrix t_;
};

enum class Outcome { optimal, unbounded, stalled };

// Primal simplex on the tableau with Bland's rule. Columns >= allowed_cols
// never enter.
Outcome run_simplex(Tableau& tab, std::vector<std::size_t>& basis, std::size_t allowed_cols,
                    const SimplexOptions& opt, LPResult& result, bool record_values) {
    while (true) {
        if (record_values) result.phase2_values.push_back(tab.objective());
        std::size_t entering = allowed_cols;
        for (std::size_t j = 0; j < allowed_cols; ++j) {
            if (tab.cost(j) > opt.optimality_tol) {
                entering = j;
                break;
            }
        }
        if (entering == allowed_cols) return Outcome::optimal;

        std::size_t leave_row = tab.rows();
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < tab.rows(); ++i) {
            const double a = tab.at(i, entering);
            if (a <= opt.pivot_tol) continue;
            const double ratio = std::max(tab.rhs(i), 0.0) / a;
            const bool tie = leave_row < tab.rows() && std::abs(ratio - best) <= 1e-12 * (1.0 + std::abs(best));
            if (tie ? basis[i] < basis[leave_row] : ratio < best) {
                if (!tie) best = ratio;
                leave_row = i;
            }
        }
        if (leave_row == tab.rows()) return Outcome::unbounded;
        if (result.pivots.size() >= opt.max_pivots) return Outcome::stalled;

        result.pivots.push_back({leave_row, entering, basis[leave_row]});
        tab.pivot(leave_row, entering);
        basis[leave_row] = entering;
    }
}

}  // namespace

LPResult solve_lp(const LPData& lp, const SimplexOptions& opt) {
    lp.validate();
    LPResult result;
    const std::size_t nz = lp.nz();
    const double b_scale = 1.0 + norm_inf(lp.b);

    // Drop all-zero rows; a zero row with nonzero rhs is infeasible outright.
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < lp.rows(); ++i) {
        const auto row = lp.M.row(i);
        const bool zero = std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; });
        if (!zero) {
            rows.push_back(i);
        } else if (std::abs(lp.b[i]) > opt.feasibility_tol * b_scale) {
            result.status = LPStatus::infeasible;
            result.message = "zero constraint row with nonzero right-hand side";
            return result;
        }
    }

    // Phase 1: artificial basis, maximize -sum(artificials).
    const std::size_t r = rows.size();
    Tableau tab(r, nz + r);
    std::vector<std::size_t> basis(r);
    for (std::size_t k = 0; k < r; ++k) {
        const std::size_t i = rows[k];
        const double sgn = lp.b[i] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < nz; ++j) tab.at(k, j) = sgn * lp.M(i, j);
        tab.at(k, nz + k) = 1.0;
        tab.rhs(k) = sgn * lp.b[i];
        basis[k] = nz + k;
    }
    Vector phase1_cost(nz + r, 0.0);
    std::fill(phase1_cost.begin() + static_cast<std::ptrdiff_t>(nz), phase1_cost.end(), -1.0);
    tab.price(phase1_cost, basis);

    if (run_simplex(tab, basis, nz + r, opt, result, false) == Outcome::stalled) {
        result.status = LPStatus::numerical_failure;
        result.message = "pivot limit reached in phase 1";
        return result;
    }
    if (-tab.objective() > opt.feasibility_tol * b_scale) {
        result.status = LPStatus::infeasible;
        result.message = "phase 1 optimum has positive artificial mass";
        return result;
    }

    // Drive artificials out of the basis; rows where that is impossible are
    // linear combinations of the others.
    std::vector<char> keep(r, 1);
    for (std::size_t k = 0; k < r; ++k) {
        if (basis[k] < nz) continue;
        std::size_t col = nz;
        for (std::size_t j = 0; j < nz; ++j) {
            if (std::abs(tab.at(k, j)) > opt.pivot_tol) {
                col = j;
                break;
            }
        }
        if (col == nz) {
            keep[k] = 0;
        } else {
            result.pivots.push_back({k, col, basis[k]});
            tab.pivot(k, col);
            basis[k] = col;
        }
    }

    // Phase 2 tableau over the original columns and surviving rows.
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < r; ++k)
        if (keep[k]) kept.push_back(k);
    Tableau tab2(kept.size(), nz);
    std::vector<std::size_t> basis2(kept.size());
    for (std::size_t k = 0; k < kept.size(); ++k) {
        for (std::size_t j = 0; j < nz; ++j) tab2.at(k, j) = tab.at(kept[k], j);
        tab2.rhs(k) = tab.rhs(kept[k]);
        basis2[k] = basis[kept[k]];
        result.active_rows.push_back(rows[kept[k]]);
    }
    tab2.price(lp.c, basis2);

    const Outcome out = run_simplex(tab2, basis2, nz, opt, result, true);
    if (out == Outcome::stalled) {
        result.status = LPStatus::numerical_failure;
        result.message = "pivot limit reached in phase 2";
        return result;
    }
    if (out == Outcome::unbounded) {
        result.status = LPStatus::unbounded;
        result.message = "improving ray found";
        return result;
    }

    result.z.assign(nz, 0.0);
    for (std::size_t k = 0; k < basis2.size(); ++k) result.z[basis2[k]] = std::max(tab2.rhs(k), 0.0);
    result.basis = basis2;
    result.value = dot(lp.c, result.z);

    const Vector residual = sub(lp.M * result.z, lp.b);
    if (norm_inf(residual) > 1e-8 * b_scale) {
        result.status = LPStatus::numerical_failure;
        result.message = "final basis does not reproduce the constraints";
        return result;
    }
    result.status = LPStatus::optimal;
    return result;
}

bool verify_certificate(const LPData& lp, const LPResult& result) {
    if (result.status != LPStatus::optimal) return false;
    lp.validate();
    const std::size_t nz = lp.nz();
    if (result.z.size() != nz || result.basis.size() != result.active_rows.size()) return false;

    const double z_scale = 1.0 + norm_inf(result.z);
    if (std::any_of(result.z.begin(), result.z.end(), [](double v) { return v < -1e-9; })) return false;
    if (norm_inf(sub(lp.M * result.z, lp.b)) > 1e-8 * (1.0 + norm_inf(lp.b))) return false;
    if (std::abs(dot(lp.c, result.z) - result.value) > 1e-8 * (1.0 + std::abs(result.value))) return false;

    std::vector<char> basic(nz, 0);
    for (std::size_t j : result.basis) {
        if (j >= nz) return false;
        basic[j] = 1;
    }
    for (std::size_t j = 0; j < nz; ++j)
        if (!basic[j] && std::abs(result.z[j]) > 1e-9 * z_scale) return false;

    // Duals from Bᵀ y = c_B, then c_j - yᵀ a_j <= 0 for all j.
    const std::size_t k = result.basis.size();
    Vector y;
    if (k > 0) {
        Matrix bt(k, k);
        Matrix cb(k, 1);
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t row = 0; row < k; ++row) bt(a, row) = lp.M(result.active_rows[row], result.basis[a]);
            cb(a, 0) = lp.c[result.basis[a]];
        }
        try {
            const Matrix sol = solve(bt, cb);
            y.assign(sol.data().begin(), sol.data().end());
        } catch (const SingularMatrixError&) {
            return false;
        }
    }
    const double c_scale = 1.0 + norm_inf(lp.c);
    for (std::size_t j = 0; j < nz; ++j) {
        double reduced = lp.c[j];
        for (std::size_t row = 0; row < k; ++row) reduced -= y[row] * lp.M(result.active_rows[row], j);
        if (reduced > 1e-8 * c_scale) return false;
    }
    return true;
}

}  // namespace conelqr
