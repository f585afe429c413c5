#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

#include "conelqr/cone.hpp"
#include "conelqr/linalg.hpp"
#include "conelqr/matrix_cone.hpp"

namespace conelqr {

/// Matrix LQR data: dynamics X' = [F G] M [F G]ᵀ, stage cost tr([S R1; R1ᵀ R2] M).
struct LQRData {
    Matrix F;   // p x p
    Matrix G;   // p x q
    Matrix S;   // p x p symmetric
    Matrix R1;  // p x q
    Matrix R2;  // q x q symmetric

    std::size_t p() const { return F.rows(); }
    std::size_t q() const { return G.cols(); }

    // Throws DimensionError on inconsistent shapes.
    void validate_dimensions() const;
    Matrix cost_matrix() const;

    bool operator==(const LQRData&) const = default;
};

// [S R1; R1ᵀ R2] is positive definite (smallest eigenvalue > 1e-9).
bool cost_condition_holds(const LQRData& data);
inline constexpr double kCostDefinitenessMargin = 1e-9;

struct MatrixState {
    Matrix X;
    Matrix U1;
    Matrix U2;

    Matrix stacked() const { return embed::stack(X, U1, U2); }
};

struct DualCertificate {
    Matrix Lambda;
    SolveStatus status = SolveStatus::max_iterations;
    std::size_t iterations = 0;
    double residual = 0.0;  // max-norm of riccati_step(Λ) - Λ

    bool converged() const { return status == SolveStatus::converged; }
};

// -M1 M2⁺ M1ᵀ. Requires M2 ⪰ 0 and (I - M2 M2⁺) M1ᵀ = 0; otherwise the fiber
// is empty and NoMinimalElementError is thrown.
Matrix phi_psd(const Matrix& m1, const Matrix& m2);
// Whether [Λ M1; M1ᵀ M2] ⪰ 0 is solvable in Λ.
bool psd_fiber_nonempty(const Matrix& m1, const Matrix& m2);

// S + FᵀΛF - (FᵀΛG + R1)(R2 + GᵀΛG)⁻¹(GᵀΛF + R1ᵀ)
Matrix riccati_step(const LQRData& data, const Matrix& lambda);

DualCertificate solve_riccati(const LQRData& data, double tol = 1e-10, std::size_t max_iter = 100000);

// K = (R2 + GᵀΛG)⁻¹ (GᵀΛF + R1ᵀ)
Matrix gain(const LQRData& data, const Matrix& lambda);

// Λ ⪰ -tol I and [S-Λ R1; R1ᵀ R2] + [Fᵀ; Gᵀ] Λ [F G] ⪰ -tol I.
bool dual_feasibility_check(const LQRData& data, const Matrix& lambda, double tol);

MatrixState embed_rank1(std::span<const double> x0, std::size_t q = 0);

class PsdCone final : public MatrixConeBase {
public:
    PsdCone(std::size_t p, std::size_t q, double tol = 1e-9) : MatrixConeBase(p, q, tol) {}

    std::string name() const override { return "psd"; }
    Matrix min_element(const Matrix& m1, const Matrix& m2) const override;
    bool contains_matrix(const Matrix& stacked) const override;
    bool dual_contains_matrix(const Matrix& stacked) const override;

    // Gaussian factors V with random rank; returns V Vᵀ split into blocks.
    std::vector<PrimalPoint> sample_primal(std::size_t count, std::uint64_t seed) const override;
    std::vector<DualPoint> sample_dual(std::size_t count, std::uint64_t seed) const override;
    // The minimum element first, then minimum element plus random-rank PSD.
    std::vector<Vector> sample_dual_fiber(const Vector& mu, std::size_t count, std::uint64_t seed) const override;
};

// Throws ConeAssumptionError if the cost condition fails.
std::shared_ptr<const PsdCone> psd_cone_oracle(const LQRData& data);

ConeProgram make_psd_program(const LQRData& data, const Matrix& x0);

// Λ from a generic cone trace, back in matrix form.
Matrix lambda_matrix(const Vector& lambda, std::size_t p);

}  // namespace conelqr
