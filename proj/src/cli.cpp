#include "conelqr/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "conelqr/cone.hpp"
#include "conelqr/errors.hpp"
#include "conelqr/polyhedral.hpp"
#include "conelqr/problem.hpp"
#include "conelqr/psd_lqr.hpp"
#include "conelqr/structured_lqr.hpp"
#include "json.hpp"

namespace conelqr::cli {

using json = nlohmann::json;

namespace {

std::string num(double v, const char* f = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

json to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto r = m.row(i);
        rows.push_back(json(std::vector<double>(r.begin(), r.end())));
    }
    return rows;
}

ProblemOptions merged_options(const ProblemFile& pf, const Flags& flags) {
    ProblemOptions o = pf.options;
    if (flags.horizon) o.horizon = *flags.horizon;
    if (flags.samples) o.samples = *flags.samples;
    if (flags.seed) o.seed = *flags.seed;
    if (flags.tol) o.tol = *flags.tol;
    if (flags.max_iter) o.max_iter = *flags.max_iter;
    return o;
}

SolveOptions solve_options(const ProblemOptions& o) {
    SolveOptions s;
    s.tol = o.tol;
    s.max_iter = o.max_iter;
    return s;
}

// Runs a command body and maps library exceptions onto exit codes.
int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const ProblemParseError& e) {
        err << "error: " << e.what() << "\n";
        return kParseError;
    } catch (const ConeAssumptionError& e) {
        err << "assumption failure: " << e.what() << "\n";
        return kAssumption;
    } catch (const ConfigurationError& e) {
        err << "assumption failure: " << e.what() << "\n";
        return kAssumption;
    } catch (const InvarianceFailureError& e) {
        err << "assumption failure: " << e.what() << "\n";
        return kAssumption;
    } catch (const InfeasibleStateError& e) {
        err << "assumption failure: " << e.what() << "\n";
        return kAssumption;
    } catch (const NotConvergedError& e) {
        err << "not converged: " << e.what() << "\n";
        return kNotConverged;
    } catch (const Error& e) {
        err << "numerical error: " << e.what() << "\n";
        return kNumericalError;
    }
}

void report_assumption_failure(const Instance& inst, std::ostream& err) {
    for (const auto& a : inst.assumptions) {
        if (!a.passed) err << "assumption failure: " << a.name << " (" << a.detail << ")\n";
    }
}

struct Solved {
    ProblemFile problem;
    ProblemOptions options;
    Instance instance;
    IterationTrace trace;
    double millis = 0.0;
};

// Loads, checks assumptions and solves. Returns an exit code when the
// command cannot continue.
std::optional<int> load_and_solve(const std::string& path, const Flags& flags, std::ostream& err, Solved& out) {
    out.problem = load_problem(path);
    out.options = merged_options(out.problem, flags);
    out.instance = build_instance(out.problem);
    if (!out.instance.assumptions_hold() || !out.instance.program) {
        report_assumption_failure(out.instance, err);
        return kAssumption;
    }
    const auto start = std::chrono::steady_clock::now();
    out.trace = solve_fixed_point(*out.instance.program, solve_options(out.options));
    out.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return std::nullopt;
}

std::string status_detail(const IterationTrace& trace) {
    if (trace.status == SolveStatus::diverged) return "value likely infinite (iterates exceeded the divergence bound)";
    if (trace.status == SolveStatus::max_iterations) return "iteration limit reached";
    return "";
}

json solve_json(const Solved& s, bool with_trace) {
    const auto& prog = *s.instance.program;
    json j;
    j["cone_kind"] = to_string(s.instance.kind);
    if (!s.problem.name.empty()) j["name"] = s.problem.name;
    j["status"] = to_string(s.trace.status);
    j["iterations"] = s.trace.iterations();
    j["residual"] = s.trace.fixed_point_residual;
    j["timing_ms"] = s.millis;
    json assumptions = json::object();
    for (const auto& a : s.instance.assumptions) assumptions[a.name] = {{"passed", a.passed}, {"detail", a.detail}};
    j["assumptions"] = assumptions;
    if (s.trace.converged()) {
        const Vector& lam = s.trace.final();
        j["value"] = evaluate_value(s.trace, prog.x0);
        j["lambda"] = lam;
        if (s.instance.lqr) {
            const Matrix big = lambda_matrix(lam, s.instance.lqr->p());
            j["Lambda"] = to_json(big);
            j["gain"] = to_json(gain(*s.instance.lqr, big));
        } else {
            j["policy_at_x0"] = optimal_policy(prog, lam, prog.x0);
        }
    } else {
        j["diagnostic"] = status_detail(s.trace);
    }
    if (with_trace) j["trace"] = s.trace.residuals;
    return j;
}

int exit_for(const IterationTrace& trace) { return trace.converged() ? kOk : kNotConverged; }

void write_matrix(std::ostream& out, const char* label, const Matrix& m) {
    out << label << ":\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        out << " ";
        for (std::size_t j = 0; j < m.cols(); ++j) out << " " << num(m(i, j), "%.10g");
        out << "\n";
    }
}

void write_trace_csv(std::ostream& out, const IterationTrace& trace) {
    out << "k,residual\n";
    for (std::size_t k = 0; k < trace.residuals.size(); ++k) out << k << "," << num(trace.residuals[k]) << "\n";
}

}  // namespace

int cmd_solve(const std::string& path, const Flags& flags, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Solved s;
        if (auto code = load_and_solve(path, flags, err, s)) {
            if (flags.json) {
                json j;
                j["cone_kind"] = to_string(s.instance.kind);
                if (!s.problem.name.empty()) j["name"] = s.problem.name;
                j["status"] = "assumption_failure";
                json assumptions = json::object();
                for (const auto& a : s.instance.assumptions) assumptions[a.name] = {{"passed", a.passed}, {"detail", a.detail}};
                j["assumptions"] = assumptions;
                out << j.dump(2) << "\n";
            }
            return *code;
        }
        if (flags.json) {
            out << solve_json(s, flags.trace).dump(2) << "\n";
            return exit_for(s.trace);
        }
        out << "cone_kind: " << to_string(s.instance.kind) << "\n";
        out << "status: " << to_string(s.trace.status) << "\n";
        out << "iterations: " << s.trace.iterations() << "\n";
        out << "residual: " << num(s.trace.fixed_point_residual, "%.3e") << "\n";
        for (const auto& a : s.instance.assumptions) out << "assumption " << a.name << ": " << (a.passed ? "pass" : "fail") << "\n";
        if (s.trace.converged()) {
            const auto& prog = *s.instance.program;
            out << "value: " << num(evaluate_value(s.trace, prog.x0), "%.10f") << "\n";
            if (s.instance.lqr) {
                const Matrix big = lambda_matrix(s.trace.final(), s.instance.lqr->p());
                write_matrix(out, "Lambda", big);
                write_matrix(out, "gain K", gain(*s.instance.lqr, big));
            } else {
                out << "lambda:";
                for (double v : s.trace.final()) out << " " << num(v, "%.10g");
                out << "\npolicy at x0:";
                for (double v : optimal_policy(prog, s.trace.final(), prog.x0)) out << " " << num(v, "%.10g");
                out << "\n";
            }
        } else {
            out << "diagnostic: " << status_detail(s.trace) << "\n";
        }
        out << "timing_ms: " << num(s.millis, "%.3f") << "\n";
        if (flags.trace) write_trace_csv(out, s.trace);
        return exit_for(s.trace);
    });
}

int cmd_simulate(const std::string& path, const Flags& flags, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        Solved s;
        if (auto code = load_and_solve(path, flags, err, s)) return *code;
        if (!s.trace.converged()) {
            err << "not converged: " << to_string(s.trace.status) << "; " << status_detail(s.trace) << "\n";
            return static_cast<int>(kNotConverged);
        }
        const auto& prog = *s.instance.program;
        const Vector& lam = s.trace.final();
        const auto traj = simulate(prog, lam, s.options.horizon);
        out << "t";
        for (std::size_t i = 0; i < prog.n(); ++i) out << ",x_" << i + 1;
        for (std::size_t i = 0; i < prog.m(); ++i) out << ",u_" << i + 1;
        out << ",stage_cost,running_cost,value_to_go,bellman_residual\n";
        double running = 0.0;
        for (std::size_t t = 0; t < traj.states.size(); ++t) {
            out << t;
            for (double v : traj.states[t]) out << "," << num(v);
            const bool last = t == traj.inputs.size();
            if (last) {
                for (std::size_t i = 0; i < prog.m(); ++i) out << ",";
                out << "," << "," << num(running) << "," << num(traj.tail_value) << ",\n";
                continue;
            }
            for (double v : traj.inputs[t]) out << "," << num(v);
            running += traj.stage_costs[t];
            out << "," << num(traj.stage_costs[t]) << "," << num(running) << "," << num(dot(lam, traj.states[t])) << ","
                << num(traj.bellman_residuals[t]) << "\n";
        }
        return static_cast<int>(kOk);
    });
}

namespace {

struct CheckLine {
    CheckStatus status;
    std::string name;
    std::string detail;
};

CheckStatus from_bool(bool ok) { return ok ? CheckStatus::pass : CheckStatus::fail; }

std::vector<CheckLine> run_checks(const Instance& inst, const ProblemFile& pf, const ProblemOptions& opt) {
    std::vector<CheckLine> lines;
    for (const auto& a : inst.assumptions) lines.push_back({from_bool(a.passed), "assumption " + a.name, a.detail});
    const char* checks[] = {"cost_in_dual_cone", "invariance",       "dual_pairing",    "min_element",
                            "phi_consistency",   "monotone",         "bellman_identity", "suboptimality",
                            "lp_agreement",      "riccati_certificate", "structure_inheritance"};
    if (!inst.program) {
        for (const char* c : checks) lines.push_back({CheckStatus::skipped, c, "no program (assumption failure)"});
        return lines;
    }
    const ConeProgram& prog = *inst.program;
    const ConeOracle& cone = *prog.cone;
    const std::size_t n = opt.samples;
    const std::size_t fiber_mus = std::min<std::size_t>(n, 100);

    lines.push_back({from_bool(prog.cost_in_dual_cone()), "cost_in_dual_cone", "(s, r) in the dual cone"});

    const auto inv = check_invariance(prog, n, opt.seed);
    lines.push_back({inv.status, "invariance", inv.message});

    const double pairing = min_dual_pairing(cone, n, opt.seed);
    lines.push_back({from_bool(pairing >= -1e-9), "dual_pairing", "min λᵀx + μᵀu = " + num(pairing, "%.3e")});

    const auto duals = cone.sample_dual(fiber_mus, opt.seed + 1);
    std::vector<Vector> mus;
    std::size_t min_ok = 0;
    for (std::size_t i = 0; i < duals.size(); ++i) {
        mus.push_back(duals[i].mu);
        const Vector bar = scale(-1.0, cone.phi(duals[i].mu));
        if (check_min_element(cone, duals[i].mu, bar, 20, opt.seed + i)) ++min_ok;
    }
    lines.push_back({from_bool(min_ok == duals.size()), "min_element",
                     std::to_string(min_ok) + "/" + std::to_string(duals.size()) + " fibers minimal at -phi(mu)"});

    const double gap = max_phi_gap(cone, mus, std::min<std::size_t>(n, 200), opt.seed + 2);
    lines.push_back({from_bool(gap <= 1e-8), "phi_consistency", "max |phi(mu)ᵀx - muᵀu*| = " + num(gap, "%.3e")});

    const auto trace = solve_fixed_point(prog, solve_options(opt));
    if (!trace.converged()) {
        lines.push_back({CheckStatus::fail, "monotone", "fixed point not reached: " + to_string(trace.status)});
        for (std::size_t k = 6; k < std::size(checks); ++k)
            lines.push_back({CheckStatus::skipped, checks[k], "fixed point not reached"});
        return lines;
    }
    const auto bad = check_monotone(cone, trace);
    lines.push_back({from_bool(!bad), "monotone",
                     bad ? "step " + std::to_string(*bad) + " decreases" : std::to_string(trace.iterations()) + " steps"});

    const Vector& lam = trace.final();
    const double value = evaluate_value(trace, prog.x0);
    const double tol = 1e-8 * (1.0 + std::abs(value));
    const auto traj = simulate(prog, lam, opt.horizon);
    double worst = 0.0;
    for (double r : traj.bellman_residuals) worst = std::max(worst, r);
    const double tele = std::abs(traj.total_cost + traj.tail_value - value);
    lines.push_back({from_bool(worst <= tol && tele <= tol), "bellman_identity",
                     "max residual " + num(worst, "%.3e") + ", telescoping gap " + num(tele, "%.3e")});

    double least = INFINITY;
    for (std::uint64_t k = 0; k < 10; ++k) least = std::min(least, perturbed_policy_cost(prog, lam, opt.horizon, opt.seed + k));
    lines.push_back({from_bool(least >= value - 1e-7), "suboptimality",
                     "best perturbed cost " + num(least, "%.10g") + " vs value " + num(value, "%.10g")});

    if (const auto* p = std::get_if<PolyProblem>(&pf.body)) {
        const auto lp = solve_lp(build_lp(p->A, p->B, p->E, p->s, p->r, p->x0));
        const bool ok = lp.status == LPStatus::optimal && std::abs(lp.value - value) <= 1e-6 * (1.0 + std::abs(value));
        lines.push_back({from_bool(ok), "lp_agreement", "LP " + to_string(lp.status) + " value " + num(lp.value, "%.10g")});
    } else {
        lines.push_back({CheckStatus::skipped, "lp_agreement", "polyhedral cones only"});
    }

    if (inst.lqr) {
        const Matrix big = lambda_matrix(lam, inst.lqr->p());
        lines.push_back({from_bool(dual_feasibility_check(*inst.lqr, big, 1e-7)), "riccati_certificate",
                         "Λ* feasible for the dual semidefinite program"});
        if (inst.qt) {
            lines.push_back({from_bool(structured_gain_check(gain(*inst.lqr, big), *inst.qt, 1e-8)), "structure_inheritance",
                             "Q⁻¹ K Q block diagonal"});
        } else {
            lines.push_back({CheckStatus::skipped, "structure_inheritance", "structured cones only"});
        }
    } else {
        lines.push_back({CheckStatus::skipped, "riccati_certificate", "matrix cones only"});
        lines.push_back({CheckStatus::skipped, "structure_inheritance", "structured cones only"});
    }
    return lines;
}

}  // namespace

int cmd_verify(const std::string& path, const Flags& flags, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ProblemFile pf = load_problem(path);
        const ProblemOptions opt = merged_options(pf, flags);
        const Instance inst = build_instance(pf);
        const auto lines = run_checks(inst, pf, opt);
        bool failed = false;
        for (const auto& l : lines) {
            const char* tag = l.status == CheckStatus::pass ? "PASS" : (l.status == CheckStatus::fail ? "FAIL" : "SKIP");
            failed = failed || l.status == CheckStatus::fail;
            out << tag << " " << l.name;
            if (!l.detail.empty()) out << ": " << l.detail;
            out << "\n";
        }
        return static_cast<int>(failed ? kCheckFailed : kOk);
    });
}

int cmd_emit_lp(const std::string& path, const Flags& flags, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ProblemFile pf = load_problem(path);
        const auto* p = std::get_if<PolyProblem>(&pf.body);
        if (!p) {
            err << "emit-lp: cone_kind must be polyhedral, got " << to_string(pf.kind) << "\n";
            return static_cast<int>(kAssumption);
        }
        const LPData lp = build_lp(p->A, p->B, p->E, p->s, p->r, p->x0);
        const std::string text = format_lp_listing(lp);
        if (flags.out) {
            std::ofstream f(*flags.out);
            if (!f) {
                err << "emit-lp: cannot write " << *flags.out << "\n";
                return static_cast<int>(kParseError);
            }
            f << text;
        } else {
            out << text;
        }
        if (flags.solve_lp) {
            const auto res = solve_lp(parse_lp_listing(text));
            out << "lp_status: " << to_string(res.status) << "\n";
            if (res.status == LPStatus::optimal) out << "lp_value: " << num(res.value, "%.10f") << "\n";
        }
        return static_cast<int>(kOk);
    });
}

namespace {

void write_terms(std::ostream& os, const std::vector<std::pair<double, std::string>>& terms) {
    if (terms.empty()) {
        os << " 0";
        return;
    }
    bool first = true;
    for (const auto& [c, name] : terms) {
        if (first) {
            os << " " << num(c) << " " << name;
            first = false;
        } else {
            os << (c < 0 ? " - " : " + ") << num(std::abs(c)) << " " << name;
        }
    }
}

}  // namespace

std::string format_lp_listing(const LPData& lp) {
    lp.validate();
    std::vector<std::string> names = lp.names;
    if (names.empty())
        for (std::size_t j = 0; j < lp.nz(); ++j) names.push_back("z_" + std::to_string(j + 1));
    std::ostringstream os;
    os << "\\ maximize cᵀz subject to M z = b, z >= 0\n";
    os << "variables";
    for (const auto& n : names) os << " " << n;
    os << "\nmaximize\n obj:";
    std::vector<std::pair<double, std::string>> terms;
    for (std::size_t j = 0; j < lp.nz(); ++j)
        if (lp.c[j] != 0.0) terms.emplace_back(lp.c[j], names[j]);
    write_terms(os, terms);
    os << "\nsubject to\n";
    for (std::size_t i = 0; i < lp.rows(); ++i) {
        terms.clear();
        for (std::size_t j = 0; j < lp.nz(); ++j)
            if (lp.M(i, j) != 0.0) terms.emplace_back(lp.M(i, j), names[j]);
        os << " c" << i + 1 << ":";
        write_terms(os, terms);
        os << " = " << num(lp.b[i]) << "\n";
    }
    os << "bounds\n all variables >= 0\nend\n";
    return os.str();
}

namespace {

[[noreturn]] void listing_error(std::size_t line, const std::string& msg) {
    throw ProblemParseError("lp listing:" + std::to_string(line) + ": " + msg, line, 1, "");
}

double parse_number(const std::string& tok, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used != tok.size()) listing_error(line, "bad number '" + tok + "'");
        return v;
    } catch (const std::logic_error&) {
        listing_error(line, "bad number '" + tok + "'");
    }
}

// "[label:] c1 n1 (+|-) c2 n2 ..." or "0" into a dense row.
std::vector<double> parse_terms(std::istringstream& is, const std::vector<std::string>& names, std::size_t line,
                                const std::string& stop) {
    std::vector<double> row(names.size(), 0.0);
    std::string tok;
    double sign = 1.0;
    bool expect_coef = true;
    double coef = 0.0;
    while (is >> tok) {
        if (tok == stop) return row;
        if (expect_coef && (tok == "+" || tok == "-")) {
            sign = tok == "-" ? -1.0 : 1.0;
            continue;
        }
        if (expect_coef) {
            coef = sign * parse_number(tok, line);
            expect_coef = false;
            continue;
        }
        const auto it = std::find(names.begin(), names.end(), tok);
        if (it == names.end()) listing_error(line, "unknown variable '" + tok + "'");
        row[static_cast<std::size_t>(it - names.begin())] += coef;
        expect_coef = true;
        sign = 1.0;
    }
    if (!stop.empty()) listing_error(line, "missing '" + stop + "'");
    if (!expect_coef && coef != 0.0) listing_error(line, "coefficient without a variable");
    return row;
}

}  // namespace

LPData parse_lp_listing(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line = 0;
    enum class Section { none, objective, constraints, bounds, done } section = Section::none;
    LPData lp;
    std::vector<Vector> rows;
    bool have_objective = false;
    while (section != Section::done && std::getline(in, raw)) {
        ++line;
        std::istringstream is(raw);
        std::string head;
        if (!(is >> head) || head.front() == '\\') continue;
        if (head == "variables") {
            std::string n;
            while (is >> n) lp.names.push_back(n);
        } else if (head == "maximize") {
            section = Section::objective;
        } else if (head == "subject") {
            section = Section::constraints;
        } else if (head == "bounds") {
            section = Section::bounds;
        } else if (head == "end") {
            section = Section::done;
        } else if (section == Section::objective) {
            if (head.back() != ':') listing_error(line, "expected 'obj:'");
            lp.c = parse_terms(is, lp.names, line, "");
            have_objective = true;
        } else if (section == Section::constraints) {
            if (head.back() != ':') listing_error(line, "expected a row label");
            Vector row = parse_terms(is, lp.names, line, "=");
            std::string rhs;
            if (!(is >> rhs)) listing_error(line, "missing right-hand side");
            lp.b.push_back(parse_number(rhs, line));
            rows.push_back(std::move(row));
        } else if (section == Section::bounds) {
            continue;
        } else {
            listing_error(line, "unexpected '" + head + "'");
        }
    }
    if (section != Section::done) listing_error(line, "missing 'end'");
    if (!have_objective) listing_error(line, "missing objective");
    lp.M = Matrix(rows.size(), lp.names.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < lp.names.size(); ++j) lp.M(i, j) = rows[i][j];
    lp.validate();
    return lp;
}

}  // namespace conelqr::cli
