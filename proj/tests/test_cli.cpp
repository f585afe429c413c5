#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "conelqr/cli.hpp"
#include "conelqr/polyhedral.hpp"
#include "conelqr/problem.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_support.hpp"

using namespace conelqr;
namespace cli = conelqr::cli;

namespace {

std::string fixture(const std::string& name) { return std::string(CONELQR_FIXTURES) + "/" + name + ".json"; }

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

template <class Fn>
Run run(Fn fn, const std::string& name, const cli::Flags& flags = {}) {
    std::ostringstream out, err;
    const int code = fn(fixture(name), flags, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::vector<std::string>> csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

double lp_value(const std::string& text) {
    const auto at = text.find("lp_value: ");
    REQUIRE(at != std::string::npos);
    return std::stod(text.substr(at + 10));
}

const std::vector<std::string> kValid = {"poly_scalar", "poly_bad_invariance", "poly_diverge", "poly_3x2", "psd_golden",
                                         "psd_indefinite", "psd_2x1", "structured_circulant", "structured_noncommuting"};

}  // namespace

TEST_CASE("problem files round-trip through serialization") {
    for (const auto& name : kValid) {
        CAPTURE(name);
        const ProblemFile a = load_problem(fixture(name));
        const std::string text = serialize_problem(a);
        const ProblemFile b = parse_problem(text);
        CHECK(a == b);
        CHECK(serialize_problem(b) == text);
    }
}

TEST_CASE("parse diagnostics carry location and field") {
    try {
        load_problem(fixture("bad_syntax"));
        FAIL("expected a parse error");
    } catch (const ProblemParseError& e) {
        CHECK(e.line() == 5);
        CHECK(std::string(e.what()).find("bad_syntax.json:5:") != std::string::npos);
    }
    try {
        load_problem(fixture("bad_dims"));
        FAIL("expected a parse error");
    } catch (const ProblemParseError& e) {
        CHECK(e.field() == "B");
        CHECK(e.line() == 4);
    }

    const std::string base = R"({
  "cone_kind": "polyhedral",
  "A": [[0.5]], "B": [[0.25]], "E": [[1]],
  "s": [1], "r": [0], "x0": [1])";
    CHECK_NOTHROW(parse_problem(base + "\n}"));
    CHECK_THROWS_AS(parse_problem(base + ",\n  \"bogus\": 1\n}"), ProblemParseError);
    CHECK_THROWS_AS(parse_problem(R"({"cone_kind": "hyperbolic"})"), ProblemParseError);
    CHECK_THROWS_AS(parse_problem(R"({"cone_kind": "polyhedral", "A": [[1]]})"), ProblemParseError);
    try {
        parse_problem(R"({"cone_kind": "psd", "F": [[1]], "G": [[1]], "S": [[1]], "R1": [[0]], "R2": [[1]],
  "X0": [[1]], "x0": [1]})");
        FAIL("expected a parse error");
    } catch (const ProblemParseError& e) {
        CHECK(e.line() == 2);
    }
    try {
        parse_problem(R"({"cone_kind": "psd", "F": [[1]], "G": [[1]], "S": [[1, 2], [0, 1]], "R1": [[0]], "R2": [[1]], "x0": [1]})");
        FAIL("expected a parse error");
    } catch (const ProblemParseError& e) {
        CHECK(e.field() == "S");
    }
}

TEST_CASE("solve exit codes") {
    const std::vector<std::pair<std::string, int>> expected = {
        {"poly_scalar", cli::kOk},           {"poly_bad_invariance", cli::kAssumption},
        {"poly_diverge", cli::kNotConverged}, {"poly_3x2", cli::kOk},
        {"psd_golden", cli::kOk},            {"psd_indefinite", cli::kAssumption},
        {"psd_2x1", cli::kOk},               {"structured_circulant", cli::kOk},
        {"structured_noncommuting", cli::kAssumption}, {"bad_syntax", cli::kParseError},
        {"bad_dims", cli::kParseError},
    };
    for (const auto& [name, code] : expected) {
        CAPTURE(name);
        CHECK(run(cli::cmd_solve, name).code == code);
    }
    std::ostringstream out, err;
    CHECK(cli::cmd_solve(fixture("does_not_exist"), {}, out, err) == cli::kParseError);

    cli::Flags few;
    few.max_iter = 3;
    CHECK(run(cli::cmd_solve, "poly_scalar", few).code == cli::kNotConverged);
}

TEST_CASE("solve reports the value") {
    const Run r = run(cli::cmd_solve, "poly_scalar");
    CHECK(r.out.find("value: 1.3333333333") != std::string::npos);
    const Run g = run(cli::cmd_solve, "psd_golden");
    CHECK(g.out.find("value: 1.6180339887") != std::string::npos);
}

TEST_CASE("json output is deterministic apart from timing") {
    cli::Flags flags;
    flags.json = true;
    flags.trace = true;
    for (const std::string name : {"poly_3x2", "psd_2x1", "structured_circulant"}) {
        CAPTURE(name);
        auto a = nlohmann::json::parse(run(cli::cmd_solve, name, flags).out);
        auto b = nlohmann::json::parse(run(cli::cmd_solve, name, flags).out);
        REQUIRE(a.contains("timing_ms"));
        a.erase("timing_ms");
        b.erase("timing_ms");
        CHECK(a == b);
        CHECK(a["status"] == "converged");
        CHECK(a["trace"].size() == a["iterations"].get<std::size_t>());
    }
    auto bad = nlohmann::json::parse(run(cli::cmd_solve, "psd_indefinite", flags).out);
    CHECK(bad["status"] == "assumption_failure");
    CHECK(bad["assumptions"]["cost_definite"]["passed"] == false);
}

TEST_CASE("simulate with zero horizon") {
    cli::Flags flags;
    flags.horizon = 0;
    const Run r = run(cli::cmd_simulate, "poly_scalar", flags);
    REQUIRE(r.code == cli::kOk);
    const auto rows = csv(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].front() == "t");
    CHECK(rows[1].front() == "0");
}

TEST_CASE("simulate telescopes to the value") {
    for (const std::string name : {"poly_scalar", "poly_3x2", "psd_2x1", "structured_circulant"}) {
        CAPTURE(name);
        cli::Flags flags;
        flags.horizon = 50;
        const Run r = run(cli::cmd_simulate, name, flags);
        REQUIRE(r.code == cli::kOk);
        const auto rows = csv(r.out);
        REQUIRE(rows.size() == 52);
        const auto& header = rows[0];
        const std::size_t cols = header.size();
        CHECK(header[cols - 3] == "running_cost");
        const double value = std::stod(rows[1][cols - 2]);
        const auto& last = rows.back();
        REQUIRE(last.size() == cols);
        const double total = std::stod(last[cols - 3]);
        const double tail = std::stod(last[cols - 2]);
        CHECK(std::abs(total + tail - value) <= 1e-8 * (1.0 + value));
        for (std::size_t t = 1; t + 1 < rows.size(); ++t) CHECK(std::abs(std::stod(rows[t][cols - 1])) <= 1e-8 * (1.0 + value));
        if (name == "poly_scalar") CHECK(std::abs(value - 4.0 / 3.0) <= 1e-9);
    }
}

TEST_CASE("verify") {
    for (const std::string name : {"poly_scalar", "poly_3x2", "psd_golden", "psd_2x1", "structured_circulant"}) {
        CAPTURE(name);
        const Run r = run(cli::cmd_verify, name);
        CHECK(r.code == cli::kOk);
        CHECK(r.out.find("FAIL") == std::string::npos);
    }
    const Run bad = run(cli::cmd_verify, "psd_indefinite");
    CHECK(bad.code == cli::kCheckFailed);
    CHECK(bad.out.find("FAIL assumption cost_definite") != std::string::npos);
    const Run nc = run(cli::cmd_verify, "structured_noncommuting");
    CHECK(nc.code == cli::kCheckFailed);
    CHECK(run(cli::cmd_verify, "bad_dims").code == cli::kParseError);
}

TEST_CASE("emit-lp listing round-trips and solves to the value") {
    for (const std::string name : {"poly_scalar", "poly_3x2"}) {
        CAPTURE(name);
        const Instance inst = build_instance(load_problem(fixture(name)));
        REQUIRE(inst.program.has_value());
        const ProblemFile pf = load_problem(fixture(name));
        const auto& p = std::get<PolyProblem>(pf.body);
        const LPData lp = build_lp(p.A, p.B, p.E, p.s, p.r, p.x0);
        const LPData back = cli::parse_lp_listing(cli::format_lp_listing(lp));
        CHECK(back.names == lp.names);
        CHECK(testing_support::max_diff(back.c, lp.c) == 0.0);
        CHECK(testing_support::max_diff(back.b, lp.b) == 0.0);
        CHECK(testing_support::max_diff(back.M, lp.M) == 0.0);

        cli::Flags flags;
        flags.solve_lp = true;
        const Run e = run(cli::cmd_emit_lp, name, flags);
        REQUIRE(e.code == cli::kOk);
        const double value = dot(solve_fixed_point(*inst.program).final(), p.x0);
        CHECK(std::abs(lp_value(e.out) - value) <= 1e-6 * (1.0 + std::abs(value)));
    }

    const Run scalar = run(cli::cmd_emit_lp, "poly_scalar");
    CHECK(scalar.out.find("variables lambda_1 w_1 y_1 z_1") != std::string::npos);
    CHECK(scalar.out.find(" obj: 1 lambda_1\n") != std::string::npos);
    CHECK(run(cli::cmd_emit_lp, "psd_golden").code == cli::kAssumption);
    CHECK(run(cli::cmd_emit_lp, "structured_circulant").code == cli::kAssumption);
}

TEST_CASE("emit-lp writes to a file") {
    const auto path = std::filesystem::temp_directory_path() / "conelqr_test_emit.lp";
    cli::Flags flags;
    flags.out = path.string();
    const Run r = run(cli::cmd_emit_lp, "poly_scalar", flags);
    REQUIRE(r.code == cli::kOk);
    const std::string text = slurp(path.string());
    CHECK(text.rfind("\\", 0) == 0);
    CHECK(cli::parse_lp_listing(text).names.size() == 4);
    std::filesystem::remove(path);
}

TEST_CASE("malformed listings are rejected") {
    CHECK_THROWS_AS(cli::parse_lp_listing("variables a\nmaximize\n obj: 1 a\nsubject to\n c1: 1 b = 1\nbounds\nend\n"),
                    ProblemParseError);
    CHECK_THROWS_AS(cli::parse_lp_listing("variables a\nmaximize\n obj: 1 a\n"), ProblemParseError);
}
