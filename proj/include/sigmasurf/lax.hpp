#pragma once

#include <cmath>
#include <string>

#include "core.hpp"
#include "cp1.hpp"
#include "projector_field.hpp"

namespace sigmasurf {

enum class LaxKind { spectral, overall };

inline std::string to_string(LaxKind k) { return k == LaxKind::spectral ? "spectral" : "overall"; }

struct LaxPairSample {
    CMatrix U, V;
    cd lambda;
    LaxKind kind;
};

// Connection built from w and its first derivatives; lambda multiplies the
// (1,2) entry of U and 1/lambda the (2,1) entry of V.
inline LaxPairSample lax_spectral(cd w, cd wl, cd wr, cd lambda) {
    if (lambda == 0.0) throw ParameterError("spectral Lax pair: lambda must be nonzero");
    const cd wb = std::conj(w), wlb = std::conj(wl), wrb = std::conj(wr);
    const double s = 1.0 / (1.0 + std::norm(w));
    LaxPairSample out{CMatrix(2, 2), CMatrix(2, 2), lambda, LaxKind::spectral};
    out.U << 0.5 * (w * wlb - wb * wl), -lambda * wlb, wl, 0.5 * (wb * wl - w * wlb);
    out.V << 0.5 * (w * wrb - wb * wr), -wrb, wr / lambda, 0.5 * (wb * wr - w * wrb);
    out.U *= s;
    out.V *= s;
    return out;
}

// inverted selects the chart 1/w; the field equation is invariant under
// w -> 1/w, so either chart gives a valid pair.
inline LaxPairSample lax_spectral(const ProjectorField& f, Point p, cd lambda, bool inverted = false) {
    if (lambda == 0.0) throw ParameterError("spectral Lax pair: lambda must be nonzero");
    const Jet w = w_chart(f, p, inverted);
    return lax_spectral(w.v, w.l, w.r, lambda);
}

// (2/(1+lambda)) M_L and (2/(1-lambda)) M_R with M_D = [d_D P, P].
inline LaxPairSample lax_overall(const DerivativeBundle& b, cd lambda) {
    if (std::abs(lambda - 1.0) == 0.0 || std::abs(lambda + 1.0) == 0.0)
        throw ParameterError("overall-factor Lax pair: lambda must differ from +1 and -1");
    LaxPairSample out{CMatrix(2.0 / (1.0 + lambda) * commutator(b.PL, b.P)),
                      CMatrix(2.0 / (1.0 - lambda) * commutator(b.PR, b.P)), lambda, LaxKind::overall};
    return out;
}
inline LaxPairSample lax_overall(const ProjectorField& f, Point p, cd lambda) {
    return lax_overall(derivatives(f, p), lambda);
}

struct ZeroCurvature {
    double norm = 0.0;
    CMatrix residual;
};

// d_R U - d_L V + [U, V] with central differences of step h.
inline ZeroCurvature zero_curvature_residual(LaxKind kind, const ProjectorField& f, Point p, cd lambda,
                                             double h = 1e-3, int order = 4) {
    check_stencil(f, p, h, order);
    // chart with |w| <= 1 at the centre, kept over the stencil
    const bool inverted = kind == LaxKind::spectral && std::abs(w_chart(f, p, false).v) > 1.0;
    auto pair = [&](Point q) {
        return kind == LaxKind::spectral ? lax_spectral(f, q, lambda, inverted) : lax_overall(f, q, lambda);
    };
    const auto c = pair(p);
    auto u = [&](Point q) { return pair(q).U; };
    auto v = [&](Point q) { return pair(q).V; };
    ZeroCurvature out;
    out.residual = fd::d1(u, p, 1, h, order) - fd::d1(v, p, 0, h, order) + commutator(c.U, c.V);
    out.norm = out.residual.norm();
    return out;
}

// Euler-Lagrange defect of w: (w_LR (1+|w|^2) - 2 conj(w) w_L w_R)/(1+|w|^2)^2.
inline cd w_equation_defect(const Jet& w) {
    const double q = 1.0 + std::norm(w.v);
    return (w.lr * q - 2.0 * std::conj(w.v) * w.l * w.r) / (q * q);
}

}  // namespace sigmasurf
