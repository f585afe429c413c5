#pragma once

#include <cstddef>
#include <memory>

#include "conelqr/cone.hpp"
#include "conelqr/linalg.hpp"

// Vector coordinates for cones of symmetric block matrices [X U1; U1ᵀ U2].
//
// State X (p x p symmetric) maps to svec(X): the upper triangle in row-major
// order with off-diagonal entries scaled by sqrt(2). The input (U1, U2) maps
// to (sqrt(2) vec(U1), svec(U2)) with vec row-major. Both maps are
// isometries, so the Euclidean pairing of coordinate vectors equals the trace
// pairing tr([Λ M1; M1ᵀ M2][X U1; U1ᵀ U2]) of the underlying matrices, and
// matrix transposes in these coordinates are the adjoint maps.
namespace conelqr::embed {

std::size_t svec_dim(std::size_t n);
Vector svec(const Matrix& sym);
Matrix smat(std::span<const double> v, std::size_t n);

struct InputBlocks {
    Matrix U1;  // p x q
    Matrix U2;  // q x q symmetric
};

std::size_t input_dim(std::size_t p, std::size_t q);
Vector pack_input(const Matrix& u1, const Matrix& u2);
InputBlocks unpack_input(std::span<const double> u, std::size_t p, std::size_t q);

Matrix stack(const Matrix& x, const Matrix& u1, const Matrix& u2);

}  // namespace conelqr::embed

namespace conelqr {

/**
 * Shared machinery for the PSD cone and the structured cone P_Q: both use
 * the same coordinates, the same phi = -M1 M2⁺ M1ᵀ and the same minimizer
 * [I; -M2⁺M1ᵀ] X [I; -M2⁺M1ᵀ]ᵀ. Subclasses supply membership tests and the
 * fiber check.
 */
class MatrixConeBase : public ConeOracle {
public:
    MatrixConeBase(std::size_t p, std::size_t q, double tol);

    std::size_t state_dim() const override { return embed::svec_dim(p_); }
    std::size_t input_dim() const override { return embed::input_dim(p_, q_); }
    std::size_t p() const { return p_; }
    std::size_t q() const { return q_; }
    double tol() const { return tol_; }

    bool contains(const Vector& x, const Vector& u) const override;
    bool dual_contains(const Vector& lambda, const Vector& mu) const override;
    Vector phi(const Vector& mu) const override;
    Vector argmin_input(const Vector& x, const Vector& mu) const override;
    std::optional<Vector> completion_witness(const Vector& next_state) const override;

    // Minimum element M1 M2⁺ M1ᵀ of the fiber; throws NoMinimalElementError
    // if the fiber is empty.
    virtual Matrix min_element(const Matrix& m1, const Matrix& m2) const = 0;
    virtual bool contains_matrix(const Matrix& stacked) const = 0;
    virtual bool dual_contains_matrix(const Matrix& stacked) const = 0;

protected:
    Matrix state_matrix(const Vector& x) const;

    std::size_t p_;
    std::size_t q_;
    double tol_;
};

// Coordinates of X ↦ F X Fᵀ and (U1, U2) ↦ [F G][0 U1; U1ᵀ U2][F G]ᵀ.
Matrix state_map_matrix(const Matrix& f);
Matrix input_map_matrix(const Matrix& f, const Matrix& g);

ConeProgram make_matrix_program(const Matrix& f, const Matrix& g, const Matrix& s, const Matrix& r1,
                                const Matrix& r2, const Matrix& x0, std::shared_ptr<const ConeOracle> cone);

}  // namespace conelqr
