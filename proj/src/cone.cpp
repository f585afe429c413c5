#include "conelqr/cone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "conelqr/errors.hpp"
#include "parallel_for.hpp"

namespace conelqr {

namespace {

// Aᵀ v without forming the transpose.
Vector transpose_times(const Matrix& a, const Vector& v) {
    if (a.rows() != v.size()) throw DimensionError("transpose product: dimension mismatch");
    Vector y(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double vi = v[i];
        if (vi == 0.0) continue;
        for (std::size_t j = 0; j < a.cols(); ++j) y[j] += a(i, j) * vi;
    }
    return y;
}

Vector next_state(const ConeProgram& p, const Vector& x, const Vector& u) { return add(p.A * x, p.B * u); }

}  // namespace

ConeProgram::ConeProgram(Matrix a, Matrix b, Vector s_, Vector r_, Vector x0_, std::shared_ptr<const ConeOracle> c)
    : A(std::move(a)), B(std::move(b)), s(std::move(s_)), r(std::move(r_)), x0(std::move(x0_)), cone(std::move(c)) {
    if (!cone) throw ConfigurationError("ConeProgram: missing cone oracle");
    const std::size_t n = cone->state_dim();
    const std::size_t m = cone->input_dim();
    if (A.rows() != n || A.cols() != n) throw DimensionError("ConeProgram: A must be n x n for the cone's state dimension");
    if (B.rows() != n || B.cols() != m) throw DimensionError("ConeProgram: B must be n x m");
    if (s.size() != n || x0.size() != n) throw DimensionError("ConeProgram: s and x0 must have length n");
    if (r.size() != m) throw DimensionError("ConeProgram: r must have length m");
}

bool ConeProgram::cost_in_dual_cone() const { return cone->dual_contains(s, r); }

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::diverged: return "diverged";
        case SolveStatus::max_iterations: return "max_iterations";
    }
    return "unknown";
}

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        case CheckStatus::skipped: return "skipped";
    }
    return "unknown";
}

Vector bellman_step(const ConeProgram& program, const Vector& lambda) {
    if (lambda.size() != program.n()) throw DimensionError("bellman_step: costate has wrong length");
    const Vector mu = add(program.r, transpose_times(program.B, lambda));
    Vector out = add(program.s, transpose_times(program.A, lambda));
    return add(out, program.cone->phi(mu));
}

IterationTrace solve_fixed_point(const ConeProgram& program, const SolveOptions& options) {
    IterationTrace trace;
    Vector lambda = options.initial.value_or(Vector(program.n(), 0.0));
    if (lambda.size() != program.n()) throw DimensionError("solve_fixed_point: initial costate has wrong length");
    trace.cold_start = !options.initial.has_value();
    trace.iterates.push_back(lambda);

    for (std::size_t k = 0; k < options.max_iter; ++k) {
        Vector next = bellman_step(program, lambda);
        const double step = norm_inf(sub(next, lambda));
        const double size = norm_inf(next);
        trace.residuals.push_back(step);
        trace.iterates.push_back(next);
        if (!std::isfinite(size) || size > options.divergence_bound) {
            trace.status = SolveStatus::diverged;
            trace.fixed_point_residual = std::numeric_limits<double>::infinity();
            return trace;
        }
        const bool done = step <= options.tol * (1.0 + norm_inf(lambda));
        lambda = std::move(next);
        if (done) {
            trace.status = SolveStatus::converged;
            break;
        }
    }
    trace.fixed_point_residual = norm_inf(sub(bellman_step(program, lambda), lambda));
    if (trace.converged()) trace.value_at_x0 = dot(lambda, program.x0);
    return trace;
}

double evaluate_value(const IterationTrace& trace, const Vector& x0) {
    if (!trace.converged()) throw NotConvergedError("evaluate_value: iteration did not converge");
    return dot(trace.final(), x0);
}

Vector optimal_policy(const ConeProgram& program, const Vector& lambda_star, const Vector& x) {
    if (!program.cone->in_state_projection(x)) {
        throw InfeasibleStateError("optimal_policy: state is outside the cone's state projection");
    }
    const Vector mu = add(program.r, transpose_times(program.B, lambda_star));
    return program.cone->argmin_input(x, mu);
}

Trajectory simulate(const ConeProgram& program, const Vector& lambda_star, std::size_t horizon) {
    Trajectory tr;
    Vector x = program.x0;
    tr.states.push_back(x);
    for (std::size_t t = 0; t < horizon; ++t) {
        if (!program.cone->in_state_projection(x)) throw InvarianceFailureError(t, "state left the cone");
        Vector u = optimal_policy(program, lambda_star, x);
        if (!program.cone->contains(x, u)) throw InvarianceFailureError(t, "(x, u) is not in the cone");
        const double stage = dot(program.s, x) + dot(program.r, u);
        Vector next = next_state(program, x, u);
        const double residual = std::abs(dot(lambda_star, x) - stage - dot(lambda_star, next));
        tr.stage_costs.push_back(stage);
        tr.bellman_residuals.push_back(residual);
        tr.total_cost += stage;
        tr.inputs.push_back(std::move(u));
        tr.states.push_back(next);
        x = std::move(next);
    }
    if (!program.cone->in_state_projection(x)) throw InvarianceFailureError(horizon, "state left the cone");
    tr.tail_value = dot(lambda_star, x);
    return tr;
}

InvarianceReport check_invariance(const ConeProgram& program, std::size_t samples, std::uint64_t seed) {
    InvarianceReport report;
    const auto points = program.cone->sample_primal(samples, seed);
    if (points.empty()) {
        report.message = "no samples";
        return report;
    }
    if (!program.cone->completion_witness(next_state(program, points.front().x, points.front().u))) {
        report.status = CheckStatus::skipped;
        report.message = "backend provides no completion witness";
        return report;
    }
    std::vector<char> ok(points.size(), 0);
    detail::parallel_for(points.size(), [&](std::size_t i) {
        const Vector next = next_state(program, points[i].x, points[i].u);
        const auto v = program.cone->completion_witness(next);
        ok[i] = v && program.cone->contains(next, *v);
    });
    report.checked = points.size();
    const auto bad = std::find(ok.begin(), ok.end(), 0);
    if (bad == ok.end()) {
        report.status = CheckStatus::pass;
        report.message = "all sampled successors admit a completion";
    } else {
        report.status = CheckStatus::fail;
        report.counterexample = points[static_cast<std::size_t>(bad - ok.begin())];
        report.message = "A x + B u has no completion in the cone for a sampled (x, u)";
    }
    return report;
}

MinElementReport check_min_element_report(const ConeOracle& cone, const Vector& mu, const Vector& lambda_bar,
                                          std::size_t samples, std::uint64_t seed) {
    if (!cone.dual_contains(lambda_bar, mu)) {
        throw PreconditionError("check_min_element: candidate is not in the dual fiber of mu");
    }
    MinElementReport report;
    const Vector zero_input(cone.input_dim(), 0.0);

    const auto fiber = cone.sample_dual_fiber(mu, samples, seed);
    std::vector<char> dominated(fiber.size(), 0);
    detail::parallel_for(fiber.size(), [&](std::size_t i) {
        dominated[i] = cone.dual_contains(sub(fiber[i], lambda_bar), zero_input);
    });
    report.fiber_samples = fiber.size();
    report.minimal = std::all_of(dominated.begin(), dominated.end(), [](char c) { return c != 0; });

    const auto primal = cone.sample_primal(samples, seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<double> gap(primal.size(), 0.0);
    std::vector<char> within(primal.size(), 0);
    detail::parallel_for(primal.size(), [&](std::size_t i) {
        const Vector& x = primal[i].x;
        const double direct = dot(mu, cone.argmin_input(x, mu));
        const double linear = -dot(lambda_bar, x);
        gap[i] = std::abs(direct - linear);
        within[i] = gap[i] <= 1e-8 * (1.0 + std::abs(direct) + std::abs(linear));
    });
    report.state_samples = primal.size();
    report.worst_linear_form_gap = gap.empty() ? 0.0 : *std::max_element(gap.begin(), gap.end());
    report.linear_form_matches = std::all_of(within.begin(), within.end(), [](char c) { return c != 0; });
    return report;
}

bool check_min_element(const ConeOracle& cone, const Vector& mu, const Vector& lambda_bar, std::size_t samples,
                       std::uint64_t seed) {
    return check_min_element_report(cone, mu, lambda_bar, samples, seed).passed();
}

std::optional<std::size_t> check_monotone(const ConeOracle& cone, const IterationTrace& trace) {
    if (!trace.cold_start) return std::nullopt;
    const Vector zero_input(cone.input_dim(), 0.0);
    const std::size_t steps = trace.iterates.size() > 0 ? trace.iterates.size() - 1 : 0;
    std::vector<char> ok(steps, 0);
    detail::parallel_for(steps, [&](std::size_t k) {
        ok[k] = cone.dual_contains(sub(trace.iterates[k + 1], trace.iterates[k]), zero_input);
    });
    const auto bad = std::find(ok.begin(), ok.end(), 0);
    if (bad == ok.end()) return std::nullopt;
    return static_cast<std::size_t>(bad - ok.begin());
}

double min_dual_pairing(const ConeOracle& cone, std::size_t samples, std::uint64_t seed) {
    const auto primal = cone.sample_primal(samples, seed);
    const auto dual = cone.sample_dual(samples, seed + 1);
    const std::size_t n = std::min(primal.size(), dual.size());
    std::vector<double> worst(n, std::numeric_limits<double>::infinity());
    detail::parallel_for(n, [&](std::size_t i) {
        for (std::size_t shift : {std::size_t{0}, std::size_t{1}}) {
            const auto& d = dual[(i + shift) % n];
            worst[i] = std::min(worst[i], dot(d.lambda, primal[i].x) + dot(d.mu, primal[i].u));
        }
    });
    return worst.empty() ? 0.0 : *std::min_element(worst.begin(), worst.end());
}

double max_phi_gap(const ConeOracle& cone, const std::vector<Vector>& mus, std::size_t samples, std::uint64_t seed) {
    const auto primal = cone.sample_primal(samples, seed);
    std::vector<double> worst(mus.size(), 0.0);
    detail::parallel_for(mus.size(), [&](std::size_t j) {
        const Vector phi = cone.phi(mus[j]);
        for (const auto& p : primal) {
            const double gap = std::abs(dot(phi, p.x) - dot(mus[j], cone.argmin_input(p.x, mus[j])));
            worst[j] = std::max(worst[j], gap);
        }
    });
    return worst.empty() ? 0.0 : *std::max_element(worst.begin(), worst.end());
}

double perturbed_policy_cost(const ConeProgram& program, const Vector& lambda_star, std::size_t horizon,
                             std::uint64_t seed) {
    // Inputs are minimizers for unrelated dual directions, so they are
    // feasible but generally suboptimal.
    const auto directions = program.cone->sample_dual(horizon, seed);
    Vector x = program.x0;
    double cost = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
        const Vector u = program.cone->argmin_input(x, directions[t].mu);
        cost += dot(program.s, x) + dot(program.r, u);
        x = next_state(program, x, u);
    }
    return cost + dot(lambda_star, x);
}

}  // namespace conelqr
