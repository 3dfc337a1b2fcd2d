#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "core.hpp"

namespace sigmasurf {

inline double algebra_tolerance = 1e-12;

// Anti-Hermitian traceless N x N matrix, an element of su(N) ~ R^(N^2-1).
// Construction validates; it never repairs (see project_to_algebra).
class AlgebraElement {
  public:
    AlgebraElement() : m_(CMatrix::Zero(2, 2)) {}

    explicit AlgebraElement(CMatrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || m_.rows() < 2)
            throw DimensionError("algebra element must be square with n >= 2");
        const double scale = std::max(1.0, m_.norm());
        const double herm = (m_ + m_.adjoint()).norm();
        if (herm > algebra_tolerance * scale)
            throw ParameterError("matrix is not anti-Hermitian (defect " + std::to_string(herm) + ")");
        const double tr = std::abs(m_.trace());
        if (tr > algebra_tolerance * scale)
            throw ParameterError("matrix is not traceless (defect " + std::to_string(tr) + ")");
    }

    static AlgebraElement zero(int n) { return AlgebraElement(CMatrix::Zero(n, n)); }

    int n() const { return static_cast<int>(m_.rows()); }
    const CMatrix& matrix() const { return m_; }

    AlgebraElement operator+(const AlgebraElement& b) const { return unchecked(m_ + b.m_); }
    AlgebraElement operator-(const AlgebraElement& b) const { return unchecked(m_ - b.m_); }
    AlgebraElement operator*(double s) const { return unchecked(m_ * s); }
    friend AlgebraElement operator*(double s, const AlgebraElement& a) { return a * s; }

    // Ad_U a = U a U^dagger.
    AlgebraElement conjugated(const CMatrix& u) const { return unchecked(u * m_ * u.adjoint()); }

  private:
    struct Unchecked {};
    AlgebraElement(CMatrix m, Unchecked) : m_(std::move(m)) {}
    static AlgebraElement unchecked(CMatrix m) { return AlgebraElement(std::move(m), Unchecked{}); }

    CMatrix m_;
};

// Anti-Hermitian traceless part of an arbitrary square matrix.
inline AlgebraElement project_to_algebra(const CMatrix& m) {
    if (m.rows() != m.cols()) throw DimensionError("project_to_algebra: matrix not square");
    CMatrix a = 0.5 * (m - m.adjoint());
    const cd t = a.trace() / static_cast<double>(m.rows());
    a.diagonal().array() -= t;
    return AlgebraElement(a);
}

// (A,B) = -1/2 tr(AB), on raw matrices.
inline double inner(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("inner: dimension mismatch");
    // tr(AB) = sum_ij A_ij B_ji
    return -0.5 * (a.cwiseProduct(b.transpose())).sum().real();
}

inline double inner(const AlgebraElement& a, const AlgebraElement& b) {
    return inner(a.matrix(), b.matrix());
}

inline double algebra_norm(const CMatrix& a) { return std::sqrt(std::max(0.0, inner(a, a))); }

enum class BasisKind { A, B, C };

struct BasisLabel {
    BasisKind kind;
    int j;  // 1-based row index (A,B) or p (C)
    int k;  // 1-based column index (A,B); 0 for C

    std::string str() const {
        switch (kind) {
            case BasisKind::A: return "A" + std::to_string(j) + std::to_string(k);
            case BasisKind::B: return "B" + std::to_string(j) + std::to_string(k);
            default: return "C" + std::to_string(j);
        }
    }
    bool operator==(const BasisLabel&) const = default;
};

// Orthonormal basis of su(n) in the order A_12..A_(n-1)n, B_12.., C_1..C_(n-1).
struct BasisSet {
    int n = 0;
    std::vector<AlgebraElement> elements;
    std::vector<BasisLabel> labels;

    std::size_t size() const { return elements.size(); }
    const AlgebraElement& operator[](std::size_t i) const { return elements[i]; }
};

inline CMatrix basis_matrix(int n, const BasisLabel& lab) {
    CMatrix m = CMatrix::Zero(n, n);
    const int j = lab.j - 1, k = lab.k - 1;
    switch (lab.kind) {
        case BasisKind::A:
            m(j, k) = I;
            m(k, j) = I;
            break;
        case BasisKind::B:
            m(j, k) = 1.0;
            m(k, j) = -1.0;
            break;
        case BasisKind::C: {
            const int p = lab.j;
            const double c = std::sqrt(2.0 / (p * (p + 1.0)));
            for (int a = 0; a < p; ++a) m(a, a) = I * c;
            m(p, p) = -I * c * static_cast<double>(p);
            break;
        }
    }
    return m;
}

inline BasisSet standard_basis(int n) {
    if (n < 2) throw DimensionError("standard_basis: n must be >= 2");
    BasisSet b;
    b.n = n;
    auto add = [&](BasisLabel lab) {
        b.labels.push_back(lab);
        b.elements.emplace_back(basis_matrix(n, lab));
    };
    for (int j = 1; j <= n; ++j)
        for (int k = j + 1; k <= n; ++k) add({BasisKind::A, j, k});
    for (int j = 1; j <= n; ++j)
        for (int k = j + 1; k <= n; ++k) add({BasisKind::B, j, k});
    for (int p = 1; p < n; ++p) add({BasisKind::C, p, 0});
    return b;
}

inline RVector coords(const CMatrix& a, const BasisSet& basis) {
    if (a.rows() != basis.n) throw DimensionError("coords: dimension mismatch");
    RVector v(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) v(static_cast<Eigen::Index>(i)) = inner(a, basis[i].matrix());
    return v;
}

inline RVector coords(const AlgebraElement& a, const BasisSet& basis) { return coords(a.matrix(), basis); }

inline AlgebraElement from_coords(const RVector& v, const BasisSet& basis) {
    if (static_cast<std::size_t>(v.size()) != basis.size())
        throw DimensionError("from_coords: length mismatch");
    CMatrix m = CMatrix::Zero(basis.n, basis.n);
    for (std::size_t i = 0; i < basis.size(); ++i) m += v(static_cast<Eigen::Index>(i)) * basis[i].matrix();
    return AlgebraElement(m);
}

inline Eigen::MatrixXd gram(const std::vector<AlgebraElement>& vs) {
    const auto n = static_cast<Eigen::Index>(vs.size());
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) g(i, j) = inner(vs[i], vs[j]);
    return g;
}

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

}  // namespace sigmasurf
