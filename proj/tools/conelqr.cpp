#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "conelqr/cli.hpp"

int main(int argc, char** argv) {
    namespace cli = conelqr::cli;
    CLI::App app{"conelqr: value iteration for cone-constrained linear optimal control"};
    app.require_subcommand(1);

    cli::Flags flags;
    std::string path;
    std::size_t horizon = 0, samples = 0, max_iter = 0;
    std::uint64_t seed = 0;
    double tol = 0.0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("file", path, "problem file (JSON)")->required();
        sub->add_flag("--json", flags.json, "structured JSON report");
        sub->add_flag("--trace", flags.trace, "append the residual sequence");
        sub->add_option("--horizon", horizon, "simulation horizon T")->check(CLI::NonNegativeNumber);
        sub->add_option("--samples", samples, "samples per property check")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "seed for all sampling");
        sub->add_option("--tol", tol, "convergence tolerance")->check(CLI::PositiveNumber);
        sub->add_option("--max-iter", max_iter, "iteration limit")->check(CLI::PositiveNumber);
    };
    auto* solve = app.add_subcommand("solve", "solve for λ* and report the value λ*ᵀx0");
    auto* simulate = app.add_subcommand("simulate", "closed-loop trajectory as CSV");
    auto* verify = app.add_subcommand("verify", "run the property checks");
    auto* emit = app.add_subcommand("emit-lp", "write the LP of a polyhedral problem");
    for (auto* sub : {solve, simulate, verify, emit}) common(sub);
    std::string out;
    emit->add_option("--out", out, "write the listing here instead of stdout");
    emit->add_flag("--solve", flags.solve_lp, "also solve the LP and print its value");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kParseError;
    }

    auto set = [](auto& opt, const CLI::App* sub, const char* name, auto value) {
        if (sub->count(name) > 0) opt = value;
    };
    const CLI::App* used = app.get_subcommands().front();
    set(flags.horizon, used, "--horizon", horizon);
    set(flags.samples, used, "--samples", samples);
    set(flags.seed, used, "--seed", seed);
    set(flags.tol, used, "--tol", tol);
    set(flags.max_iter, used, "--max-iter", max_iter);
    if (used == emit && emit->count("--out") > 0) flags.out = out;

    if (used == solve) return cli::cmd_solve(path, flags, std::cout, std::cerr);
    if (used == simulate) return cli::cmd_simulate(path, flags, std::cout, std::cerr);
    if (used == verify) return cli::cmd_verify(path, flags, std::cout, std::cerr);
    return cli::cmd_emit_lp(path, flags, std::cout, std::cerr);
}
