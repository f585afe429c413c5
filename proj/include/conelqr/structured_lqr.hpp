#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <utility>

#include "conelqr/cone.hpp"
#include "conelqr/linalg.hpp"
#include "conelqr/matrix_cone.hpp"
#include "conelqr/psd_lqr.hpp"

// The structured cone
//
//   P_Q = { M symmetric of size m(p+q) : A(T M Tᵀ) ⪰ 0 },
//   T   = blkdiag(Q⁻¹ ⊗ I_p, Q⁻¹ ⊗ I_q),
//
// where A zeroes everything outside the m diagonal blocks of each of the four
// sub-blocks. Its dual is { Tᵀ A(Y) T : Y ⪰ 0 }.
//
// Q is the diagonalizer of the dynamics: Q⁻¹ F_sd Q and Q⁻¹ G_sd Q are
// diagonal. Building T from Q⁻¹ is what makes X ↦ F X Fᵀ map P_Q into itself
// for non-orthogonal Q; for symmetric orthogonal Q the two choices agree.
namespace conelqr {

struct QTransform {
    Matrix Q;
    Matrix Q_inv;
    std::size_t m = 0;
    std::size_t p = 0;
    std::size_t q = 0;
    Matrix T;      // blkdiag(Q⁻¹ ⊗ I_p, Q⁻¹ ⊗ I_q)
    Matrix T_inv;
    double condition = 0.0;  // ||Q||_max ||Q⁻¹||_max, for reporting

    std::size_t state_size() const { return m * p; }
    std::size_t input_size() const { return m * q; }
};

// Throws SingularMatrixError if Q is singular.
QTransform make_qtransform(const Matrix& q_matrix, std::size_t p, std::size_t q);

// Keep the m diagonal blocks of size x × y, zero the rest.
Matrix diag_m_project(const Matrix& mat, std::size_t m, std::size_t x, std::size_t y);

// A(·): diag_m_project on each of the four sub-blocks of an m(p+q) square matrix.
Matrix pinch(const Matrix& mat, std::size_t m, std::size_t p, std::size_t q);

bool pq_contains(const QTransform& qt, const Matrix& stacked, double tol = 1e-9);
bool pq_dual_contains(const QTransform& qt, const Matrix& stacked, double tol = 1e-9);

// -M1 M2⁺ M1ᵀ, after checking that the completion [M1M2⁺M1ᵀ M1; M1ᵀ M2] is in
// P_Q*. Throws NoMinimalElementError otherwise.
Matrix phi_pq(const QTransform& qt, const Matrix& m1, const Matrix& m2, double tol = 1e-9);

// (U1, U2) from [X U1; U1ᵀ U2] = [I; -M2⁺M1ᵀ] X [I; -M2⁺M1ᵀ]ᵀ.
std::pair<Matrix, Matrix> pq_policy(const Matrix& x, const Matrix& m1, const Matrix& m2);

/// Block-circulant data F = F_sd ⊗ F̄, G = G_sd ⊗ Ḡ with F_sd = circ(f), G_sd = circ(g).
struct CirculantSpec {
    Vector f;
    Matrix Fbar;  // p x p
    Vector g;
    Matrix Gbar;  // p x q
};

// Row k is row 0 cyclically shifted right by k.
Matrix circulant(std::span<const double> first_row);
std::pair<Matrix, Matrix> circulant_build(const CirculantSpec& spec);

// Off-diagonal entries of Q⁻¹ F_sd Q and Q⁻¹ G_sd Q are within tol (1 + max).
bool simdiag_check(const Matrix& f_sd, const Matrix& g_sd, const Matrix& q_matrix, double tol);

// (Q⁻¹ ⊗ I_rows) M (Q ⊗ I_cols) equals its diag_m projection within tol (1 + max).
bool block_diagonalized(const Matrix& mat, const Matrix& q_inv, const Matrix& q_matrix, std::size_t m,
                        std::size_t row_block, std::size_t col_block, double tol);

// K is mq × mp; checks (Q⁻¹ ⊗ I_q) K (Q ⊗ I_p) is block diagonal.
bool structured_gain_check(const Matrix& k, const QTransform& qt, double tol);

// Real Q diagonalizing two commuting symmetric matrices, from the
// eigenvectors of F_sd + θ G_sd with θ drawn from the seed. Throws
// ConfigurationError for non-symmetric input or when the result does not
// diagonalize both.
Matrix simultaneous_diagonalizer(const Matrix& f_sd, const Matrix& g_sd, std::uint64_t seed = 1);

struct StructuredAssumptionReport {
    bool dynamics_preserved = false;  // F and G block-diagonalized by Q
    bool cost_definite = false;       // stacked cost ≻ 0
    bool cost_in_dual = false;        // stacked cost ∈ P_Q*

    bool passed() const { return dynamics_preserved && cost_definite && cost_in_dual; }
};

StructuredAssumptionReport check_structured_assumptions(const QTransform& qt, const LQRData& data,
                                                        double tol = 1e-9);

class PqCone final : public MatrixConeBase {
public:
    explicit PqCone(QTransform qt, double tol = 1e-9);

    std::string name() const override { return "structured"; }
    const QTransform& transform() const { return qt_; }

    Matrix min_element(const Matrix& m1, const Matrix& m2) const override;
    bool contains_matrix(const Matrix& stacked) const override;
    bool dual_contains_matrix(const Matrix& stacked) const override;

    // T⁻¹ (A(Y) + H) T⁻ᵀ with Y ⪰ 0 and H symmetric with A(H) = 0, so the
    // samples include members that are not PSD.
    std::vector<PrimalPoint> sample_primal(std::size_t count, std::uint64_t seed) const override;
    // Tᵀ A(Y) T with Y ⪰ 0.
    std::vector<DualPoint> sample_dual(std::size_t count, std::uint64_t seed) const override;
    // Minimum element first, then plus PᵀDP with P the state block of T and D block-diagonal PSD.
    std::vector<Vector> sample_dual_fiber(const Vector& mu, std::size_t count, std::uint64_t seed) const override;

private:
    QTransform qt_;
};

// Throws ConfigurationError when F, G do not preserve the cone or the cost is
// not a strictly positive member of P_Q*.
std::shared_ptr<const PqCone> pq_cone_oracle(const QTransform& qt, const LQRData& data);

ConeProgram make_structured_program(const QTransform& qt, const LQRData& data, const Matrix& x0);

}  // namespace conelqr
