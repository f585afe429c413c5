#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "conelqr/linalg.hpp"

namespace conelqr {

struct PrimalPoint {
    Vector x;
    Vector u;
};

struct DualPoint {
    Vector lambda;
    Vector mu;
};

/**
 * A proper cone P in state x input space, together with the map phi that
 * makes min { muᵀu : (x,u) in P } linear in x.
 *
 * Implementations are immutable and every member is safe to call from
 * several threads at once. Samplers are deterministic given the seed.
 */
class ConeOracle {
public:
    virtual ~ConeOracle() = default;

    virtual std::string name() const = 0;
    virtual std::size_t state_dim() const = 0;
    virtual std::size_t input_dim() const = 0;

    virtual bool contains(const Vector& x, const Vector& u) const = 0;
    virtual bool dual_contains(const Vector& lambda, const Vector& mu) const = 0;

    // phi(mu)ᵀx = min { muᵀu : (x,u) in P }. Throws NoMinimalElementError
    // when the dual fiber of mu is empty.
    virtual Vector phi(const Vector& mu) const = 0;

    // A minimizer of muᵀu over { u : (x,u) in P }. Tie-breaking is
    // deterministic.
    virtual Vector argmin_input(const Vector& x, const Vector& mu) const = 0;

    virtual std::vector<PrimalPoint> sample_primal(std::size_t count, std::uint64_t seed) const = 0;
    virtual std::vector<DualPoint> sample_dual(std::size_t count, std::uint64_t seed) const = 0;
    // Points lambda with (lambda, mu) in P*. Throws NoMinimalElementError if
    // the fiber is empty.
    virtual std::vector<Vector> sample_dual_fiber(const Vector& mu, std::size_t count,
                                                  std::uint64_t seed) const = 0;

    // An input v with (next_state, v) in P, or nullopt when the backend
    // cannot produce one.
    virtual std::optional<Vector> completion_witness(const Vector& next_state) const {
        (void)next_state;
        return std::nullopt;
    }

    // Whether x lies in the projection { x : (x,v) in P for some v }.
    virtual bool in_state_projection(const Vector& x) const { return contains(x, Vector(input_dim(), 0.0)); }
};

/// Instance of the cone-constrained problem: minimize sum sᵀx + rᵀu subject
/// to x(t+1) = A x(t) + B u(t), (x(t), u(t)) in P, x(0) = x0.
struct ConeProgram {
    ConeProgram(Matrix a, Matrix b, Vector s, Vector r, Vector x0, std::shared_ptr<const ConeOracle> cone);

    Matrix A;
    Matrix B;
    Vector s;
    Vector r;
    Vector x0;
    std::shared_ptr<const ConeOracle> cone;

    std::size_t n() const { return A.rows(); }
    std::size_t m() const { return B.cols(); }
    // (s, r) in P*. Interiority is the backend's business.
    bool cost_in_dual_cone() const;
};

enum class SolveStatus { converged, diverged, max_iterations };

std::string to_string(SolveStatus s);

struct SolveOptions {
    double tol = 1e-10;
    std::size_t max_iter = 100000;
    // Above this sup-norm the iteration is declared divergent.
    double divergence_bound = 1e12;
    // Warm start. Monotonicity checks only apply to the default lambda_0 = 0.
    std::optional<Vector> initial;
};

struct IterationTrace {
    std::vector<Vector> iterates;  // lambda_0, lambda_1, ...
    std::vector<double> residuals;  // ||lambda_{k+1} - lambda_k||_inf
    SolveStatus status = SolveStatus::max_iterations;
    // ||lambda* - bellman_step(lambda*)||_inf at the returned iterate.
    double fixed_point_residual = 0.0;
    bool cold_start = true;
    std::optional<double> value_at_x0;

    bool converged() const { return status == SolveStatus::converged; }
    std::size_t iterations() const { return residuals.size(); }
    const Vector& final() const { return iterates.back(); }
};

struct Trajectory {
    std::vector<Vector> states;  // x(0..T)
    std::vector<Vector> inputs;  // u(0..T-1)
    std::vector<double> stage_costs;
    std::vector<double> bellman_residuals;  // |lambdaᵀx(t) - stage(t) - lambdaᵀx(t+1)|
    double total_cost = 0.0;
    double tail_value = 0.0;  // lambdaᵀx(T)
};

// lambda' = s + Aᵀ lambda + phi(r + Bᵀ lambda)
Vector bellman_step(const ConeProgram& program, const Vector& lambda);

IterationTrace solve_fixed_point(const ConeProgram& program, const SolveOptions& options = {});

// lambda*ᵀ x0; throws NotConvergedError for an unconverged trace.
double evaluate_value(const IterationTrace& trace, const Vector& x0);

// Minimizer of (r + Bᵀ lambda*)ᵀ u over the cone slice at x.
Vector optimal_policy(const ConeProgram& program, const Vector& lambda_star, const Vector& x);

Trajectory simulate(const ConeProgram& program, const Vector& lambda_star, std::size_t horizon);

enum class CheckStatus { pass, fail, skipped };

std::string to_string(CheckStatus s);

struct InvarianceReport {
    CheckStatus status = CheckStatus::skipped;
    std::size_t checked = 0;
    std::optional<PrimalPoint> counterexample;
    std::string message;
};

InvarianceReport check_invariance(const ConeProgram& program, std::size_t samples, std::uint64_t seed);

struct MinElementReport {
    bool minimal = true;           // every fiber sample dominates lambda_bar
    bool linear_form_matches = true;  // -lambda_barᵀx == min muᵀu on sampled x
    std::size_t fiber_samples = 0;
    std::size_t state_samples = 0;
    double worst_linear_form_gap = 0.0;

    bool passed() const { return minimal && linear_form_matches; }
};

// Checks that lambda_bar is the minimum element of C_mu = { lambda : (lambda, mu) in P* }.
// Throws PreconditionError if lambda_bar is not in C_mu.
MinElementReport check_min_element_report(const ConeOracle& cone, const Vector& mu, const Vector& lambda_bar,
                                          std::size_t samples, std::uint64_t seed);
bool check_min_element(const ConeOracle& cone, const Vector& mu, const Vector& lambda_bar, std::size_t samples,
                       std::uint64_t seed);

// dual_contains(lambda_{k+1} - lambda_k, 0) for every step. Cold-started
// traces only; returns the first failing index or nullopt.
std::optional<std::size_t> check_monotone(const ConeOracle& cone, const IterationTrace& trace);

// Smallest lambdaᵀx + muᵀu over sampled primal/dual pairs.
double min_dual_pairing(const ConeOracle& cone, std::size_t samples, std::uint64_t seed);

// Largest |phi(mu)ᵀx - muᵀ argmin_input(x, mu)| over sampled x and given mu.
double max_phi_gap(const ConeOracle& cone, const std::vector<Vector>& mus, std::size_t samples, std::uint64_t seed);

// Accumulated cost plus terminal value under a feasible but non-optimal
// input sequence; the result never undercuts lambda*ᵀx0.
double perturbed_policy_cost(const ConeProgram& program, const Vector& lambda_star, std::size_t horizon,
                             std::uint64_t seed);

}  // namespace conelqr
