#include "conelqr/matrix_cone.hpp"

#include <cmath>
#include <functional>
#include <numbers>

#include "conelqr/errors.hpp"

namespace conelqr::embed {

std::size_t svec_dim(std::size_t n) { return n * (n + 1) / 2; }

Vector svec(const Matrix& sym) {
    if (!sym.is_square()) throw DimensionError("svec: matrix is not square");
    const std::size_t n = sym.rows();
    Vector v;
    v.reserve(svec_dim(n));
    for (std::size_t i = 0; i < n; ++i) {
        v.push_back(sym(i, i));
        for (std::size_t j = i + 1; j < n; ++j) v.push_back(std::numbers::sqrt2 * 0.5 * (sym(i, j) + sym(j, i)));
    }
    return v;
}

Matrix smat(std::span<const double> v, std::size_t n) {
    if (v.size() != svec_dim(n)) throw DimensionError("smat: vector has wrong length");
    Matrix m(n, n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = v[k++];
        for (std::size_t j = i + 1; j < n; ++j) {
            m(i, j) = m(j, i) = v[k++] / std::numbers::sqrt2;
        }
    }
    return m;
}

std::size_t input_dim(std::size_t p, std::size_t q) { return p * q + svec_dim(q); }

Vector pack_input(const Matrix& u1, const Matrix& u2) {
    if (u2.rows() != u1.cols()) throw DimensionError("pack_input: U1 and U2 disagree on q");
    Vector v = scale(std::numbers::sqrt2, u1.data());
    const Vector tail = svec(u2);
    v.insert(v.end(), tail.begin(), tail.end());
    return v;
}

InputBlocks unpack_input(std::span<const double> u, std::size_t p, std::size_t q) {
    if (u.size() != input_dim(p, q)) throw DimensionError("unpack_input: vector has wrong length");
    InputBlocks b{Matrix(p, q), Matrix()};
    for (std::size_t k = 0; k < p * q; ++k) b.U1.data()[k] = u[k] / std::numbers::sqrt2;
    b.U2 = smat(u.subspan(p * q), q);
    return b;
}

Matrix stack(const Matrix& x, const Matrix& u1, const Matrix& u2) { return block2x2(x, u1, u1.transpose(), u2); }

}  // namespace conelqr::embed

namespace conelqr {

MatrixConeBase::MatrixConeBase(std::size_t p, std::size_t q, double tol) : p_(p), q_(q), tol_(tol) {
    if (p == 0) throw DimensionError("matrix cone: state block must be non-empty");
}

Matrix MatrixConeBase::state_matrix(const Vector& x) const { return embed::smat(x, p_); }

bool MatrixConeBase::contains(const Vector& x, const Vector& u) const {
    const auto in = embed::unpack_input(u, p_, q_);
    return contains_matrix(embed::stack(state_matrix(x), in.U1, in.U2));
}

bool MatrixConeBase::dual_contains(const Vector& lambda, const Vector& mu) const {
    const auto dm = embed::unpack_input(mu, p_, q_);
    return dual_contains_matrix(embed::stack(state_matrix(lambda), dm.U1, dm.U2));
}

Vector MatrixConeBase::phi(const Vector& mu) const {
    const auto dm = embed::unpack_input(mu, p_, q_);
    return embed::svec(-min_element(dm.U1, dm.U2));
}

Vector MatrixConeBase::argmin_input(const Vector& x, const Vector& mu) const {
    const auto dm = embed::unpack_input(mu, p_, q_);
    (void)min_element(dm.U1, dm.U2);  // fiber must be non-empty
    const Matrix k = pinv(dm.U2) * dm.U1.transpose();  // q x p
    const Matrix xm = state_matrix(x);
    const Matrix u1 = -(xm * k.transpose());
    const Matrix u2 = symmetrize(k * xm * k.transpose());
    return embed::pack_input(u1, u2);
}

std::optional<Vector> MatrixConeBase::completion_witness(const Vector& next_state) const {
    (void)next_state;
    return Vector(input_dim(), 0.0);
}

namespace {

Matrix map_matrix(std::size_t in_dim, std::size_t out_dim, const std::function<Vector(const Vector&)>& fn) {
    Matrix m(out_dim, in_dim);
    Vector e(in_dim, 0.0);
    for (std::size_t k = 0; k < in_dim; ++k) {
        e[k] = 1.0;
        const Vector col = fn(e);
        for (std::size_t i = 0; i < out_dim; ++i) m(i, k) = col[i];
        e[k] = 0.0;
    }
    return m;
}

}  // namespace

Matrix state_map_matrix(const Matrix& f) {
    if (!f.is_square()) throw DimensionError("state map: F must be square");
    const std::size_t p = f.rows();
    const Matrix ft = f.transpose();
    return map_matrix(embed::svec_dim(p), embed::svec_dim(p),
                      [&](const Vector& x) { return embed::svec(f * embed::smat(x, p) * ft); });
}

Matrix input_map_matrix(const Matrix& f, const Matrix& g) {
    if (g.rows() != f.rows()) throw DimensionError("input map: F and G row counts differ");
    const std::size_t p = f.rows();
    const std::size_t q = g.cols();
    const Matrix fg = hstack(f, g);
    const Matrix fgt = fg.transpose();
    return map_matrix(embed::input_dim(p, q), embed::svec_dim(p), [&](const Vector& u) {
        const auto in = embed::unpack_input(u, p, q);
        return embed::svec(fg * embed::stack(Matrix(p, p), in.U1, in.U2) * fgt);
    });
}

ConeProgram make_matrix_program(const Matrix& f, const Matrix& g, const Matrix& s, const Matrix& r1,
                                const Matrix& r2, const Matrix& x0, std::shared_ptr<const ConeOracle> cone) {
    return ConeProgram(state_map_matrix(f), input_map_matrix(f, g), embed::svec(s), embed::pack_input(r1, r2),
                       embed::svec(x0), std::move(cone));
}

}  // namespace conelqr
