#include "conelqr/problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "conelqr/polyhedral.hpp"
#include "json.hpp"

namespace conelqr {

using json = nlohmann::json;

std::string to_string(ConeKind k) {
    switch (k) {
        case ConeKind::psd: return "psd";
        case ConeKind::polyhedral: return "polyhedral";
        case ConeKind::structured: return "structured";
    }
    return "unknown";
}

Matrix StructuredProblem::f_sd() const { return F_sd ? *F_sd : circulant(*f); }
Matrix StructuredProblem::g_sd() const { return G_sd ? *G_sd : circulant(*g); }

namespace {

struct Location {
    std::size_t line = 1;
    std::size_t column = 1;
};

Location locate_offset(std::string_view text, std::size_t offset) {
    Location loc;
    offset = std::min(offset, text.size());
    for (std::size_t i = 0; i < offset; ++i) {
        if (text[i] == '\n') {
            ++loc.line;
            loc.column = 1;
        } else {
            ++loc.column;
        }
    }
    return loc;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string dims(std::size_t r, std::size_t c) { return std::to_string(r) + "x" + std::to_string(c); }

class Reader {
public:
    Reader(std::string_view text, std::string_view source) : text_(text), source_(source) {}

    [[noreturn]] void fail(const std::string& field, const std::string& msg) const {
        // Point at the first occurrence of the key; JSON values carry no positions.
        const std::string leaf = field.substr(field.rfind('.') == std::string::npos ? 0 : field.rfind('.') + 1);
        const std::size_t at = leaf.empty() ? std::string_view::npos : text_.find("\"" + leaf + "\"");
        const Location loc = at == std::string_view::npos ? Location{} : locate_offset(text_, at);
        std::ostringstream os;
        os << source_ << ":" << loc.line << ":" << loc.column << ": field '" << field << "': " << msg;
        throw ProblemParseError(os.str(), loc.line, loc.column, field);
    }

    json parse() const {
        try {
            return json::parse(text_.begin(), text_.end());
        } catch (const json::parse_error& e) {
            const Location loc = locate_offset(text_, e.byte == 0 ? 0 : e.byte - 1);
            std::ostringstream os;
            os << source_ << ":" << loc.line << ":" << loc.column << ": syntax error: " << e.what();
            throw ProblemParseError(os.str(), loc.line, loc.column, "");
        }
    }

    void only_keys(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) const {
        for (const auto& [key, value] : obj.items()) {
            (void)value;
            if (!allowed.contains(key)) fail(prefix + key, "unknown field");
        }
    }

    const json& require(const json& obj, const std::string& key, const std::string& prefix) const {
        if (!obj.contains(key)) fail(prefix + key, "missing required field");
        return obj.at(key);
    }

    double number(const json& v, const std::string& field) const {
        if (!v.is_number()) fail(field, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(field, "number is not finite");
        return d;
    }

    Vector vector(const json& v, const std::string& field) const {
        if (!v.is_array() || v.empty()) fail(field, "expected a non-empty array of numbers");
        Vector out;
        for (const auto& x : v) out.push_back(number(x, field));
        return out;
    }

    Matrix matrix(const json& v, const std::string& field) const {
        if (!v.is_array() || v.empty()) fail(field, "expected a non-empty array of rows");
        std::vector<Vector> rows;
        for (const auto& row : v) {
            if (!row.is_array()) fail(field, "expected a matrix (array of numeric rows)");
            rows.push_back(vector(row, field));
            if (rows.back().size() != rows.front().size()) fail(field, "rows have different lengths");
        }
        return Matrix::from_rows(rows);
    }

    void shape(const Matrix& m, std::size_t r, std::size_t c, const std::string& field, const std::string& why) const {
        if (m.rows() != r || m.cols() != c) fail(field, "expected " + dims(r, c) + " (" + why + "), got " + dims(m.rows(), m.cols()));
    }

    void length(const Vector& v, std::size_t n, const std::string& field, const std::string& why) const {
        if (v.size() != n) fail(field, "expected length " + std::to_string(n) + " (" + why + "), got " + std::to_string(v.size()));
    }

    void symmetric(const Matrix& m, const std::string& field) const {
        if (asymmetry(m) > 1e-12 * (1.0 + m.max_abs())) fail(field, "matrix must be symmetric");
    }

    std::size_t count(const json& v, const std::string& field, std::size_t min) const {
        if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < static_cast<long long>(min))) {
            fail(field, "expected an integer >= " + std::to_string(min));
        }
        return v.get<std::size_t>();
    }

private:
    std::string_view text_;
    std::string_view source_;
};

ProblemOptions read_options(const Reader& rd, const json& root) {
    ProblemOptions opt;
    if (!root.contains("options")) return opt;
    const json& o = root.at("options");
    if (!o.is_object()) rd.fail("options", "expected an object");
    rd.only_keys(o, {"tol", "max_iter", "horizon", "seed", "samples"}, "options.");
    if (o.contains("tol")) {
        opt.tol = rd.number(o.at("tol"), "options.tol");
        if (opt.tol <= 0.0) rd.fail("options.tol", "must be positive");
    }
    if (o.contains("max_iter")) opt.max_iter = rd.count(o.at("max_iter"), "options.max_iter", 1);
    if (o.contains("horizon")) opt.horizon = rd.count(o.at("horizon"), "options.horizon", 0);
    if (o.contains("samples")) opt.samples = rd.count(o.at("samples"), "options.samples", 1);
    if (o.contains("seed")) {
        const json& s = o.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
            rd.fail("options.seed", "expected a non-negative integer");
        }
        opt.seed = s.get<std::uint64_t>();
    }
    return opt;
}

// X0 or x0, exactly one, of state size n.
void read_initial(const Reader& rd, const json& root, std::size_t n, std::optional<Matrix>& big,
                  std::optional<Vector>& small) {
    const bool has_big = root.contains("X0");
    const bool has_small = root.contains("x0");
    if (has_big == has_small) rd.fail(has_big ? "X0" : "x0", "give exactly one of X0 (matrix) or x0 (vector)");
    if (has_big) {
        big = rd.matrix(root.at("X0"), "X0");
        rd.shape(*big, n, n, "X0", "state size");
        rd.symmetric(*big, "X0");
    } else {
        small = rd.vector(root.at("x0"), "x0");
        rd.length(*small, n, "x0", "state size");
    }
}

PolyProblem read_poly(const Reader& rd, const json& root) {
    rd.only_keys(root, {"cone_kind", "name", "options", "A", "B", "E", "s", "r", "x0"}, "");
    PolyProblem p;
    p.A = rd.matrix(rd.require(root, "A", ""), "A");
    const std::size_t n = p.A.rows();
    rd.shape(p.A, n, n, "A", "A must be square");
    p.B = rd.matrix(rd.require(root, "B", ""), "B");
    const std::size_t m = p.B.cols();
    rd.shape(p.B, n, m, "B", "n rows from A");
    p.E = rd.matrix(rd.require(root, "E", ""), "E");
    rd.shape(p.E, m, n, "E", "m from B, n from A");
    p.s = rd.vector(rd.require(root, "s", ""), "s");
    rd.length(p.s, n, "s", "state dimension n");
    p.r = rd.vector(rd.require(root, "r", ""), "r");
    rd.length(p.r, m, "r", "input dimension m");
    p.x0 = rd.vector(rd.require(root, "x0", ""), "x0");
    rd.length(p.x0, n, "x0", "state dimension n");
    return p;
}

PsdProblem read_psd(const Reader& rd, const json& root) {
    rd.only_keys(root, {"cone_kind", "name", "options", "F", "G", "S", "R1", "R2", "X0", "x0"}, "");
    PsdProblem p;
    auto& d = p.data;
    d.F = rd.matrix(rd.require(root, "F", ""), "F");
    const std::size_t n = d.F.rows();
    rd.shape(d.F, n, n, "F", "F must be square");
    d.G = rd.matrix(rd.require(root, "G", ""), "G");
    const std::size_t q = d.G.cols();
    rd.shape(d.G, n, q, "G", "p rows from F");
    d.S = rd.matrix(rd.require(root, "S", ""), "S");
    rd.shape(d.S, n, n, "S", "p x p");
    rd.symmetric(d.S, "S");
    d.R1 = rd.matrix(rd.require(root, "R1", ""), "R1");
    rd.shape(d.R1, n, q, "R1", "p x q");
    d.R2 = rd.matrix(rd.require(root, "R2", ""), "R2");
    rd.shape(d.R2, q, q, "R2", "q x q");
    rd.symmetric(d.R2, "R2");
    read_initial(rd, root, n, p.X0, p.x0);
    return p;
}

StructuredProblem read_structured(const Reader& rd, const json& root) {
    rd.only_keys(root, {"cone_kind", "name", "options", "structure", "S", "R1", "R2", "X0", "x0"}, "");
    StructuredProblem p;
    const json& st = rd.require(root, "structure", "");
    if (!st.is_object()) rd.fail("structure", "expected an object");
    rd.only_keys(st, {"f", "g", "F_sd", "G_sd", "Fbar", "Gbar", "Q"}, "structure.");
    const bool rows = st.contains("f") || st.contains("g");
    const bool full = st.contains("F_sd") || st.contains("G_sd");
    if (rows == full) rd.fail("structure", "give either circulant rows (f, g) or factors (F_sd, G_sd)");
    std::size_t m = 0;
    if (rows) {
        p.f = rd.vector(rd.require(st, "f", "structure."), "structure.f");
        p.g = rd.vector(rd.require(st, "g", "structure."), "structure.g");
        m = p.f->size();
        rd.length(*p.g, m, "structure.g", "same length as f");
    } else {
        p.F_sd = rd.matrix(rd.require(st, "F_sd", "structure."), "structure.F_sd");
        m = p.F_sd->rows();
        rd.shape(*p.F_sd, m, m, "structure.F_sd", "F_sd must be square");
        p.G_sd = rd.matrix(rd.require(st, "G_sd", "structure."), "structure.G_sd");
        rd.shape(*p.G_sd, m, m, "structure.G_sd", "same size as F_sd");
    }
    p.Fbar = rd.matrix(rd.require(st, "Fbar", "structure."), "structure.Fbar");
    const std::size_t pp = p.Fbar.rows();
    rd.shape(p.Fbar, pp, pp, "structure.Fbar", "Fbar must be square");
    p.Gbar = rd.matrix(rd.require(st, "Gbar", "structure."), "structure.Gbar");
    const std::size_t qq = p.Gbar.cols();
    rd.shape(p.Gbar, pp, qq, "structure.Gbar", "p rows from Fbar");
    if (st.contains("Q")) {
        p.Q = rd.matrix(st.at("Q"), "structure.Q");
        rd.shape(*p.Q, m, m, "structure.Q", "m x m");
    }
    const std::size_t n = m * pp;
    const std::size_t k = m * qq;
    p.S = rd.matrix(rd.require(root, "S", ""), "S");
    rd.shape(p.S, n, n, "S", "m p x m p");
    rd.symmetric(p.S, "S");
    p.R1 = rd.matrix(rd.require(root, "R1", ""), "R1");
    rd.shape(p.R1, n, k, "R1", "m p x m q");
    p.R2 = rd.matrix(rd.require(root, "R2", ""), "R2");
    rd.shape(p.R2, k, k, "R2", "m q x m q");
    rd.symmetric(p.R2, "R2");
    read_initial(rd, root, n, p.X0, p.x0);
    return p;
}

json to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const auto r = m.row(i);
        rows.push_back(json(std::vector<double>(r.begin(), r.end())));
    }
    return rows;
}

json to_json(const Vector& v) { return json(v); }

}  // namespace

ProblemFile parse_problem(std::string_view text, std::string_view source) {
    const Reader rd(text, source);
    const json root = rd.parse();
    if (!root.is_object()) rd.fail("", "top level must be an object");
    const json& kind = rd.require(root, "cone_kind", "");
    if (!kind.is_string()) rd.fail("cone_kind", "expected one of \"psd\", \"polyhedral\", \"structured\"");

    ProblemFile pf;
    const std::string k = kind.get<std::string>();
    if (root.contains("name")) {
        if (!root.at("name").is_string()) rd.fail("name", "expected a string");
        pf.name = root.at("name").get<std::string>();
    }
    pf.options = read_options(rd, root);
    if (k == "polyhedral") {
        pf.kind = ConeKind::polyhedral;
        pf.body = read_poly(rd, root);
    } else if (k == "psd") {
        pf.kind = ConeKind::psd;
        pf.body = read_psd(rd, root);
    } else if (k == "structured") {
        pf.kind = ConeKind::structured;
        pf.body = read_structured(rd, root);
    } else {
        rd.fail("cone_kind", "unknown cone kind '" + k + "' (expected psd, polyhedral or structured)");
    }
    return pf;
}

ProblemFile load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ProblemParseError(path + ": cannot open file", 0, 0, "");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_problem(buf.str(), path);
}

std::string serialize_problem(const ProblemFile& problem) {
    json root;
    root["cone_kind"] = to_string(problem.kind);
    if (!problem.name.empty()) root["name"] = problem.name;
    const auto& o = problem.options;
    root["options"] = {{"tol", o.tol}, {"max_iter", o.max_iter}, {"horizon", o.horizon}, {"seed", o.seed}, {"samples", o.samples}};

    auto initial = [&](const std::optional<Matrix>& big, const std::optional<Vector>& small) {
        if (big) root["X0"] = to_json(*big);
        if (small) root["x0"] = to_json(*small);
    };
    if (const auto* p = std::get_if<PolyProblem>(&problem.body)) {
        root["A"] = to_json(p->A);
        root["B"] = to_json(p->B);
        root["E"] = to_json(p->E);
        root["s"] = to_json(p->s);
        root["r"] = to_json(p->r);
        root["x0"] = to_json(p->x0);
    } else if (const auto* p = std::get_if<PsdProblem>(&problem.body)) {
        root["F"] = to_json(p->data.F);
        root["G"] = to_json(p->data.G);
        root["S"] = to_json(p->data.S);
        root["R1"] = to_json(p->data.R1);
        root["R2"] = to_json(p->data.R2);
        initial(p->X0, p->x0);
    } else {
        const auto& s = std::get<StructuredProblem>(problem.body);
        json st;
        if (s.f) st["f"] = to_json(*s.f);
        if (s.g) st["g"] = to_json(*s.g);
        if (s.F_sd) st["F_sd"] = to_json(*s.F_sd);
        if (s.G_sd) st["G_sd"] = to_json(*s.G_sd);
        st["Fbar"] = to_json(s.Fbar);
        st["Gbar"] = to_json(s.Gbar);
        if (s.Q) st["Q"] = to_json(*s.Q);
        root["structure"] = st;
        root["S"] = to_json(s.S);
        root["R1"] = to_json(s.R1);
        root["R2"] = to_json(s.R2);
        initial(s.X0, s.x0);
    }
    return root.dump(2) + "\n";
}

bool Instance::assumptions_hold() const {
    return std::all_of(assumptions.begin(), assumptions.end(), [](const AssumptionItem& a) { return a.passed; });
}

const AssumptionItem* Instance::first_failure() const {
    for (const auto& a : assumptions)
        if (!a.passed) return &a;
    return nullptr;
}

namespace {

Instance build_poly(const PolyProblem& p) {
    Instance inst;
    inst.kind = ConeKind::polyhedral;
    const auto rep = check_poly_assumptions(p.A, p.B, p.E, p.s, p.r);
    inst.assumptions.push_back({"E_nonnegative", rep.e_nonnegative, "E >= 0 elementwise"});
    std::string inv = "min entry of A - |B|E is " + fmt("%.6g", rep.invariance_margin);
    if (rep.square_form_invariance) inv += std::string("; square form A >= |EB| ") + (*rep.square_form_invariance ? "holds" : "fails");
    inst.assumptions.push_back({"invariance", rep.invariance, inv});
    inst.assumptions.push_back({"interiority", rep.interiority, "min entry of s - Eᵀ|r| is " + fmt("%.6g", rep.interiority_margin)});
    const bool x0_ok = std::all_of(p.x0.begin(), p.x0.end(), [](double v) { return v >= 0.0; });
    inst.assumptions.push_back({"x0_in_cone", x0_ok, "x0 >= 0"});
    if (rep.e_nonnegative) inst.program = make_poly_program(p.A, p.B, p.E, p.s, p.r, p.x0);
    return inst;
}

Matrix initial_matrix(const std::optional<Matrix>& big, const std::optional<Vector>& small) {
    return big ? *big : outer(*small, *small);
}

Instance build_psd(const PsdProblem& p) {
    Instance inst;
    inst.kind = ConeKind::psd;
    inst.lqr = p.data;
    const double lo = min_eigenvalue(symmetrize(p.data.cost_matrix()));
    inst.assumptions.push_back({"cost_definite", lo > kCostDefinitenessMargin,
                                "min eigenvalue of [S R1; R1ᵀ R2] is " + fmt("%.6g", lo)});
    const Matrix x0 = initial_matrix(p.X0, p.x0);
    inst.assumptions.push_back({"x0_in_cone", is_psd(x0, 1e-9), "X0 is positive semidefinite"});
    if (inst.assumptions.front().passed) inst.program = make_psd_program(p.data, x0);
    return inst;
}

Instance build_structured(const StructuredProblem& p, std::uint64_t seed) {
    Instance inst;
    inst.kind = ConeKind::structured;
    const Matrix f_sd = p.f_sd();
    const Matrix g_sd = p.g_sd();
    LQRData data{kron(f_sd, p.Fbar), kron(g_sd, p.Gbar), p.S, p.R1, p.R2};
    inst.lqr = data;

    std::optional<Matrix> q = p.Q;
    if (!q) {
        try {
            q = simultaneous_diagonalizer(f_sd, g_sd, seed);
            inst.assumptions.push_back({"diagonalizer", true, "Q from the eigenvectors of F_sd + θ G_sd"});
        } catch (const ConfigurationError& e) {
            inst.assumptions.push_back({"diagonalizer", false, e.what()});
            return inst;
        }
    }
    try {
        inst.qt = make_qtransform(*q, p.Fbar.rows(), p.Gbar.cols());
    } catch (const SingularMatrixError&) {
        inst.assumptions.push_back({"Q_invertible", false, "Q is singular"});
        return inst;
    }
    inst.assumptions.push_back({"simdiag", simdiag_check(f_sd, g_sd, *q, 1e-8), "Q⁻¹ F_sd Q and Q⁻¹ G_sd Q diagonal"});
    const auto rep = check_structured_assumptions(*inst.qt, data);
    inst.assumptions.push_back({"dynamics_preserved", rep.dynamics_preserved, "F and G block-diagonalized by Q"});
    inst.assumptions.push_back({"cost_definite", rep.cost_definite, "stacked cost is positive definite"});
    inst.assumptions.push_back({"cost_in_dual", rep.cost_in_dual, "stacked cost lies in the dual cone P_Q*"});
    const Matrix x0 = initial_matrix(p.X0, p.x0);
    const Matrix stacked = embed::stack(x0, Matrix(x0.rows(), data.q()), Matrix(data.q(), data.q()));
    inst.assumptions.push_back({"x0_in_cone", pq_contains(*inst.qt, stacked), "[X0 0; 0 0] lies in P_Q"});
    if (rep.passed()) inst.program = make_structured_program(*inst.qt, data, x0);
    return inst;
}

}  // namespace

Instance build_instance(const ProblemFile& problem) {
    if (const auto* p = std::get_if<PolyProblem>(&problem.body)) return build_poly(*p);
    if (const auto* p = std::get_if<PsdProblem>(&problem.body)) return build_psd(*p);
    return build_structured(std::get<StructuredProblem>(problem.body), problem.options.seed);
}

}  // namespace conelqr
