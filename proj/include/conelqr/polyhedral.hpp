#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "conelqr/cone.hpp"
#include "conelqr/linalg.hpp"
#include "conelqr/lp_simplex.hpp"

// Positive systems: P = { (x, u) : x >= 0, |u| <= E x } with E >= 0.
namespace conelqr {

bool poly_contains(const Matrix& e, const Vector& x, const Vector& u, double tol = 1e-9);
// λ - Eᵀ|μ| >= -tol elementwise.
bool poly_dual_contains(const Matrix& e, const Vector& lambda, const Vector& mu, double tol = 1e-9);

/// Decomposition λ = w + Eᵀ(y + z), μ = z - y with w, y, z >= 0.
struct DualWitness {
    Vector w;
    Vector y;
    Vector z;
};

// The canonical witness w = λ - Eᵀ|μ|, y = μ₋, z = μ₊ (w may be negative if
// the pair is outside P*).
DualWitness dual_witness(const Matrix& e, const Vector& lambda, const Vector& mu);

// -Eᵀ|μ|
Vector phi_poly(const Matrix& e, const Vector& mu);

// u_i = -sign(μ_i) (E x)_i with sign(0) = 0.
Vector poly_policy(const Matrix& e, const Vector& x, const Vector& mu);

struct PolyAssumptionReport {
    bool invariance = false;       // A - |B|E >= 0 elementwise
    double invariance_margin = 0;  // min entry of A - |B|E
    bool interiority = false;      // s - Eᵀ|r| > 1e-9 (1 + ||s||_inf)
    double interiority_margin = 0; // min entry of s - Eᵀ|r|
    bool e_nonnegative = false;
    // A >= |E B|, only defined when m == n.
    std::optional<bool> square_form_invariance;
    std::string note;

    bool passed() const { return invariance && interiority && e_nonnegative; }
};

PolyAssumptionReport check_poly_assumptions(const Matrix& a, const Matrix& b, const Matrix& e, const Vector& s,
                                            const Vector& r);

class PolyCone final : public ConeOracle {
public:
    explicit PolyCone(Matrix e, double tol = 1e-9);

    std::string name() const override { return "polyhedral"; }
    std::size_t state_dim() const override { return e_.cols(); }
    std::size_t input_dim() const override { return e_.rows(); }
    const Matrix& E() const { return e_; }

    bool contains(const Vector& x, const Vector& u) const override;
    bool dual_contains(const Vector& lambda, const Vector& mu) const override;
    Vector phi(const Vector& mu) const override;
    Vector argmin_input(const Vector& x, const Vector& mu) const override;
    // x ~ |N(0,1)|, u uniform in the box |u| <= E x.
    std::vector<PrimalPoint> sample_primal(std::size_t count, std::uint64_t seed) const override;
    // w, y, z ~ sparse |N(0,1)|.
    std::vector<DualPoint> sample_dual(std::size_t count, std::uint64_t seed) const override;
    // Eᵀ|μ| first, then Eᵀ|μ| + w + Eᵀv with sparse w, v >= 0.
    std::vector<Vector> sample_dual_fiber(const Vector& mu, std::size_t count, std::uint64_t seed) const override;
    // v = 0 works whenever A x + B u >= 0.
    std::optional<Vector> completion_witness(const Vector& next_state) const override;
    bool in_state_projection(const Vector& x) const override;

private:
    Matrix e_;
    double tol_;
};

std::shared_ptr<const PolyCone> poly_cone_oracle(const Matrix& e);

ConeProgram make_poly_program(const Matrix& a, const Matrix& b, const Matrix& e, const Vector& s, const Vector& r,
                              const Vector& x0);

// maximize λᵀx0 over (λ, w, y, z) >= 0 with
//   [s; r] = [I - Aᵀ, I, Eᵀ, Eᵀ; -Bᵀ, 0, -I, I] [λ; w; y; z].
// Variable order (λ_1..λ_n, w_1..w_n, y_1..y_m, z_1..z_m).
LPData build_lp(const Matrix& a, const Matrix& b, const Matrix& e, const Vector& s, const Vector& r,
                const Vector& x0);

}  // namespace conelqr
