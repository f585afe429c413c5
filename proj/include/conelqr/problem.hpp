#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "conelqr/cone.hpp"
#include "conelqr/errors.hpp"
#include "conelqr/linalg.hpp"
#include "conelqr/psd_lqr.hpp"
#include "conelqr/structured_lqr.hpp"

// Problem files: one JSON document per instance, discriminated by "cone_kind".
namespace conelqr {

enum class ConeKind { psd, polyhedral, structured };

std::string to_string(ConeKind k);

struct ProblemOptions {
    double tol = 1e-10;
    std::size_t max_iter = 100000;
    std::size_t horizon = 50;
    std::uint64_t seed = 1;
    std::size_t samples = 1000;

    bool operator==(const ProblemOptions&) const = default;
};

struct PolyProblem {
    Matrix A, B, E;
    Vector s, r, x0;

    bool operator==(const PolyProblem&) const = default;
};

// Exactly one of X0 / x0 is set; x0 stands for X0 = x0 x0ᵀ.
struct PsdProblem {
    LQRData data;
    std::optional<Matrix> X0;
    std::optional<Vector> x0;

    bool operator==(const PsdProblem&) const = default;
};

// Dynamics F = F_sd ⊗ Fbar, G = G_sd ⊗ Gbar with F_sd, G_sd given either as
// circulant first rows (f, g) or explicitly.
struct StructuredProblem {
    std::optional<Vector> f, g;
    std::optional<Matrix> F_sd, G_sd;
    Matrix Fbar, Gbar;
    std::optional<Matrix> Q;
    Matrix S, R1, R2;
    std::optional<Matrix> X0;
    std::optional<Vector> x0;

    bool operator==(const StructuredProblem&) const = default;
    Matrix f_sd() const;
    Matrix g_sd() const;
};

struct ProblemFile {
    ConeKind kind = ConeKind::polyhedral;
    std::string name;
    std::variant<PolyProblem, PsdProblem, StructuredProblem> body;
    ProblemOptions options;

    bool operator==(const ProblemFile&) const = default;
};

class ProblemParseError : public Error {
public:
    ProblemParseError(const std::string& what, std::size_t line, std::size_t column, std::string field)
        : Error(what), line_(line), column_(column), field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::size_t column_;
    std::string field_;
};

// Schema and dimension validation happen here; numerics never see an
// inconsistent file. `source` only labels diagnostics.
ProblemFile parse_problem(std::string_view text, std::string_view source = "<input>");
ProblemFile load_problem(const std::string& path);
std::string serialize_problem(const ProblemFile& problem);

struct AssumptionItem {
    std::string name;
    bool passed = false;
    std::string detail;
};

// A problem turned into a ConeProgram. When an assumption fails the program
// may be absent; `assumptions` then says why.
struct Instance {
    ConeKind kind = ConeKind::polyhedral;
    std::vector<AssumptionItem> assumptions;
    std::optional<ConeProgram> program;
    std::optional<LQRData> lqr;
    std::optional<QTransform> qt;

    bool assumptions_hold() const;
    const AssumptionItem* first_failure() const;
};

Instance build_instance(const ProblemFile& problem);

}  // namespace conelqr
