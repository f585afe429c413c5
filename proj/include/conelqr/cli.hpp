#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "conelqr/lp_simplex.hpp"

namespace conelqr::cli {

// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kCheckFailed = 1,     // verify: at least one check failed
    kNotConverged = 2,    // divergence or iteration limit
    kAssumption = 3,      // cone assumption violated, or wrong cone kind
    kParseError = 4,      // unreadable or invalid problem file
    kNumericalError = 5,  // singular systems and other numerical breakdowns
};

// Flag values override the "options" block of the problem file.
struct Flags {
    bool json = false;
    bool trace = false;
    bool solve_lp = false;
    std::optional<std::size_t> horizon;
    std::optional<std::size_t> samples;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
    std::optional<std::size_t> max_iter;
    std::optional<std::string> out;
};

int cmd_solve(const std::string& path, const Flags& flags, std::ostream& out, std::ostream& err);
int cmd_simulate(const std::string& path, const Flags& flags, std::ostream& out, std::ostream& err);
int cmd_verify(const std::string& path, const Flags& flags, std::ostream& out, std::ostream& err);
int cmd_emit_lp(const std::string& path, const Flags& flags, std::ostream& out, std::ostream& err);

// Plain-text LP listing:
//
//   \ comment lines
//   variables lambda_1 w_1 y_1 z_1
//   maximize
//    obj: 1 lambda_1
//   subject to
//    c1: 0.5 lambda_1 + 1 w_1 + 1 y_1 + 1 z_1 = 1
//    c2: -0.25 lambda_1 - 1 y_1 + 1 z_1 = 0
//   bounds
//    all variables >= 0
//   end
//
// Only nonzero coefficients are written; an empty side is written as 0.
// Coefficients use 17 significant digits so the listing round-trips.
std::string format_lp_listing(const LPData& lp);
// Throws ProblemParseError with the offending line.
LPData parse_lp_listing(std::string_view text);

}  // namespace conelqr::cli
