#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "grid.hpp"
#include "jet.hpp"
#include "projector_field.hpp"
#include "su_algebra.hpp"
#include "surface_geometry.hpp"

namespace sigmasurf {

inline CMatrix projector_from_w(cd w) {
    const auto e = projector_from_w_entries(w);
    CMatrix m(2, 2);
    m << e[0], e[1], e[2], e[3];
    return m;
}

// w and its derivatives at a point. With inverted set the values belong to
// the antipodal chart v = 1/w.
struct WSample {
    Jet w;
    bool inverted = false;
};

namespace detail {
inline Jet entry_jet(const DerivativeBundle& b, int i, int j) {
    Jet x;
    x.v = b.P(i, j);
    x.l = b.PL(i, j);
    x.r = b.PR(i, j);
    x.ll = b.PLL(i, j);
    x.lr = b.PLR(i, j);
    x.rr = b.PRR(i, j);
    return x;
}
}  // namespace detail

inline void require_cp1(const ProjectorField& f) {
    if (f.n() != 2 || f.rank() != 1) throw DimensionError("operation requires a CP^1 field (2x2 rank-1 projector)");
}

// w = -P21/P22 (or 1/w = -P22/P21 near poles) with derivatives.
inline WSample w_sample(const ProjectorField& f, Point p, bool allow_chart_swap = true) {
    require_cp1(f);
    if (f.analytic_mode() && f.source().has_w()) {
        if (!f.domain().contains(p)) throw DomainError("point " + fmt_point(p) + " outside the domain");
        Jet w = f.source().w_jet(p);
        if (allow_chart_swap && std::abs(w.v) > 1.0) return {1.0 / w, true};
        return {w, false};
    }
    const auto b = derivatives(f, p);
    const Jet p21 = detail::entry_jet(b, 1, 0), p22 = detail::entry_jet(b, 1, 1);
    if (std::abs(p22.v) >= std::abs(p21.v) || !allow_chart_swap) {
        if (std::abs(p22.v) < 1e-12) throw SingularityError("w has a pole at " + fmt_point(p));
        return {-(p21 / p22), false};
    }
    return {-(p22 / p21), true};
}

// w (inverted = false) or 1/w (inverted = true) with derivatives, in a
// fixed chart.
inline Jet w_chart(const ProjectorField& f, Point p, bool inverted) {
    require_cp1(f);
    if (f.analytic_mode() && f.source().has_w()) {
        if (!f.domain().contains(p)) throw DomainError("point " + fmt_point(p) + " outside the domain");
        const Jet w = f.source().w_jet(p);
        return inverted ? 1.0 / w : w;
    }
    const auto b = derivatives(f, p);
    const Jet p21 = detail::entry_jet(b, 1, 0), p22 = detail::entry_jet(b, 1, 1);
    const Jet& den = inverted ? p21 : p22;
    if (std::abs(den.v) < 1e-14) throw SingularityError("chart pole at " + fmt_point(p));
    return inverted ? -(p22 / p21) : -(p21 / p22);
}

// J_L = |w_L|^2/(1+|w|^2)^2 and J_R likewise; chart invariant.
inline std::pair<double, double> jl_jr(const ProjectorField& f, Point p) {
    const WSample s = w_sample(f, p);
    const double q = 1.0 + std::norm(s.w.v);
    return {std::norm(s.w.l) / (q * q), std::norm(s.w.r) / (q * q)};
}

// t = tr(d_L P P d_R P); e^{i phi} = -t.
inline cd phase_trace(const DerivativeBundle& b) { return (b.PL * b.P * b.PR).trace(); }

inline double phase_at(const ProjectorField& f, Point p) { return std::arg(-phase_trace(derivatives(f, p))); }

struct PhaseOptions {
    bool enforce_gauge = true;
    double gauge_tol = 1e-6;
    bool cross_check_w = true;
    double cross_tol = 1e-8;
    std::optional<Point> anchor;  // default: grid centre vertex
};

// Unwrapped phase on a grid, vertex (i,j) at grid.index(i,j).
struct PhaseField {
    Grid grid;
    std::vector<double> phi;
    std::vector<int> branch;  // multiples of 2 pi added to the principal value
    double cross_check_defect = 0.0;
    double max_gauge_defect = 0.0;

    double at(int i, int j) const { return phi[grid.index(i, j)]; }
};

inline PhaseField sg_phase(const ProjectorField& f, const Grid& g, const PhaseOptions& opt = {}) {
    require_cp1(f);
    PhaseField out;
    out.grid = g;
    std::vector<double> principal(g.size());
    const bool have_w = opt.cross_check_w;
    for (int i = 0; i < g.nl; ++i)
        for (int j = 0; j < g.nr; ++j) {
            const Point p = g.point(i, j);
            const auto b = derivatives(f, p);
            const cd t = phase_trace(b);
            const double gd = std::abs(std::abs(t) - 1.0);
            out.max_gauge_defect = std::max(out.max_gauge_defect, gd);
            if (opt.enforce_gauge && gd > opt.gauge_tol)
                throw GaugeError("|tr(dL P P dR P)| = " + std::to_string(std::abs(t)) + " at " + fmt_point(p));
            principal[g.index(i, j)] = std::arg(-t);
            if (have_w && opt.enforce_gauge) {
                const WSample s = w_sample(f, p);
                if (std::abs(s.w.r) == 0.0) throw SingularityError("d_R w vanishes at " + fmt_point(p));
                // e^{-i phi} = -d_L w / d_R w (the ratio is chart invariant).
                const cd z = -s.w.l / s.w.r;
                const double d = std::abs(std::conj(z) - (-t));
                out.cross_check_defect = std::max(out.cross_check_defect, d);
                if (d > opt.cross_tol)
                    throw Error("phase cross-check against w failed at " + fmt_point(p) + " (defect " + std::to_string(d) + ")");
            }
        }

    out.phi = principal;
    out.branch.assign(g.size(), 0);
    auto unwrap_to = [&](std::size_t from, std::size_t to) {
        const double d = out.phi[to] - out.phi[from];
        const int k = static_cast<int>(std::lround(-d / (2.0 * pi)));
        out.branch[to] = k;
        out.phi[to] += 2.0 * pi * k;
    };
    for (int i = 1; i < g.nl; ++i) unwrap_to(g.index(i - 1, 0), g.index(i, 0));
    for (int i = 0; i < g.nl; ++i)
        for (int j = 1; j < g.nr; ++j) unwrap_to(g.index(i, j - 1), g.index(i, j));

    int ai = g.nl / 2, aj = g.nr / 2;
    if (opt.anchor && !g.find(*opt.anchor, ai, aj)) throw DomainError("phase anchor is not a grid vertex");
    const double a = out.phi[g.index(ai, aj)];
    const int shift = -static_cast<int>(std::floor(a / (2.0 * pi)));
    for (std::size_t k = 0; k < out.phi.size(); ++k) {
        out.phi[k] += 2.0 * pi * shift;
        out.branch[k] += shift;
    }
    return out;
}

struct SGResidual {
    std::vector<double> values;  // NaN on the boundary band
    double max = 0.0;
    std::size_t count = 0;
};

// d_L d_R phi - 4 sin phi with the tensor-product cross stencil.
inline SGResidual sg_residual(const PhaseField& ph, int order = 4) {
    const Grid& g = ph.grid;
    const int k = fd::reach(order);
    SGResidual r;
    r.values.assign(g.size(), std::numeric_limits<double>::quiet_NaN());
    const auto w = fd::first(order);
    const double hl = g.step_l(), hr = g.step_r();
    for (int i = k; i < g.nl - k; ++i)
        for (int j = k; j < g.nr - k; ++j) {
            double m = 0.0;
            for (auto [a, wa] : w)
                for (auto [b, wb] : w) m += wa * wb * ph.at(i + a, j + b);
            m /= hl * hr;
            const double v = m - 4.0 * std::sin(ph.at(i, j));
            r.values[g.index(i, j)] = v;
            r.max = std::max(r.max, std::abs(v));
            ++r.count;
        }
    return r;
}

// ---------------------------------------------------------------------------
// Standard form: eta = 2 xi, X = eta_L + eta_R, T = eta_R - eta_L, boost by V.

inline Point xi_from_lab(double X, double T) { return {(X - T) / 4.0, (X + T) / 4.0}; }

inline std::pair<double, double> boost(double X, double T, double V) {
    if (!(std::abs(V) < 1.0)) throw ParameterError("boost velocity must satisfy |V| < 1");
    const double g = 1.0 / std::sqrt(1.0 - V * V);
    return {g * (X - V * T), g * (T - V * X)};
}
inline std::pair<double, double> unboost(double Xt, double Tt, double V) { return boost(Xt, Tt, -V); }

// Bilinear interpolation of an unwrapped phase grid.
inline double interpolate_phase(const PhaseField& ph, Point p) {
    const Grid& g = ph.grid;
    if (!g.rect.contains(p)) throw DomainError("resampling point " + fmt_point(p) + " outside the phase grid");
    const double fi = std::clamp((p.l - g.rect.l_min) / g.step_l(), 0.0, g.nl - 1.0);
    const double fj = std::clamp((p.r - g.rect.r_min) / g.step_r(), 0.0, g.nr - 1.0);
    const int i = std::min(static_cast<int>(fi), g.nl - 2), j = std::min(static_cast<int>(fj), g.nr - 2);
    const double u = fi - i, v = fj - j;
    return (1 - u) * (1 - v) * ph.at(i, j) + u * (1 - v) * ph.at(i + 1, j) + (1 - u) * v * ph.at(i, j + 1) +
           u * v * ph.at(i + 1, j + 1);
}

struct StandardPhase {
    double V = 0.0;
    std::vector<double> X, T;  // boosted coordinates X~, T~
    std::vector<double> phi;   // index t * X.size() + x

    double at(std::size_t ix, std::size_t it) const { return phi[it * X.size() + ix]; }
};

// Resamples the phase onto a rectangular (X~, T~) grid. With a pointwise
// evaluator the exact principal value is used and its branch is taken from
// the bilinear interpolant; otherwise the interpolant itself is returned.
inline StandardPhase to_standard_form(const PhaseField& ph, double V, const std::vector<double>& Xt,
                                      const std::vector<double>& Tt,
                                      const std::function<double(Point)>& pointwise = nullptr) {
    if (!(std::abs(V) < 1.0)) throw ParameterError("boost velocity must satisfy |V| < 1");
    StandardPhase out;
    out.V = V;
    out.X = Xt;
    out.T = Tt;
    out.phi.resize(Xt.size() * Tt.size());
    for (std::size_t it = 0; it < Tt.size(); ++it)
        for (std::size_t ix = 0; ix < Xt.size(); ++ix) {
            const auto [X, T] = unboost(Xt[ix], Tt[it], V);
            const Point xi = xi_from_lab(X, T);
            const double approx = interpolate_phase(ph, xi);
            double v = approx;
            if (pointwise) {
                const double p0 = pointwise(xi);
                v = p0 + 2.0 * pi * std::round((approx - p0) / (2.0 * pi));
            }
            out.phi[it * Xt.size() + ix] = v;
        }
    return out;
}

// phi_TT - phi_XX + sin phi on interior nodes (order-4 second differences).
inline SGResidual lab_residual(const StandardPhase& s) {
    SGResidual r;
    const std::size_t nx = s.X.size(), nt = s.T.size();
    r.values.assign(nx * nt, std::numeric_limits<double>::quiet_NaN());
    if (nx < 5 || nt < 5) return r;
    const double hx = s.X[1] - s.X[0], ht = s.T[1] - s.T[0];
    const auto w = fd::second(4);
    for (std::size_t it = 2; it + 2 < nt; ++it)
        for (std::size_t ix = 2; ix + 2 < nx; ++ix) {
            double dxx = 0.0, dtt = 0.0;
            for (auto [k, wk] : w) {
                dxx += wk * s.at(ix + k, it);
                dtt += wk * s.at(ix, it + k);
            }
            const double v = dtt / (ht * ht) - dxx / (hx * hx) + std::sin(s.at(ix, it));
            r.values[it * nx + ix] = v;
            r.max = std::max(r.max, std::abs(v));
            ++r.count;
        }
    return r;
}

// Velocity making the linear phase combination c_L xi_L + c_R xi_R depend
// on X~ only.
inline std::optional<double> comoving_velocity(double cl, double cr) {
    if (cl + cr == 0.0) return std::nullopt;
    const double v = (cl - cr) / (cl + cr);
    if (std::abs(v) < 1.0) return v;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Fundamental forms and mean curvature

// n = -i(1 - 2P).
inline AlgebraElement unit_normal(const CMatrix& P) {
    if (P.rows() != 2 || P.cols() != 2) throw DimensionError("unit_normal: CP^1 projector required");
    return AlgebraElement(CMatrix(-I * (CMatrix::Identity(2, 2) - 2.0 * P)));
}

struct CP1Forms {
    double E = 1.0, F = 0.0, G = 1.0;  // I = E dL^2 + 2F dL dR + G dR^2
    double II = 0.0;                   // II = II dL dR
    double II_normal_route = 0.0;      // inner(2[dL P, dR P], n)
    double phi = 0.0;                  // principal value
};

inline CP1Forms cp1_fundamental_forms(const ProjectorField& f, Point p) {
    require_cp1(f);
    const auto b = derivatives(f, p);
    const auto m = metric(b);
    if (std::abs(m.JL - 1.0) > chebyshev_point_tolerance || std::abs(m.JR - 1.0) > chebyshev_point_tolerance)
        throw GaugeError("cp1_fundamental_forms: Chebyshev gauge violated at " + fmt_point(p));
    CP1Forms out;
    out.phi = std::arg(-phase_trace(b));
    out.F = std::cos(out.phi);
    out.II = 4.0 * std::sin(out.phi);
    out.II_normal_route = inner(CMatrix(2.0 * commutator(b.PL, b.PR)), unit_normal(b.P).matrix());
    return out;
}

struct MeanCurvatureScalar {
    double value = 0.0;
    double imaginary_part = 0.0;
};

// H = 2i (1 + t^2)/(1 - t^2), t = tr(dL P P dR P).
inline MeanCurvatureScalar mean_curvature_scalar(const DerivativeBundle& b) {
    const cd t = phase_trace(b);
    const double s = std::imag(-t) / std::max(std::abs(t), 1e-300);
    if (std::abs(s) < 1e-6) throw SingularityError("mean curvature diverges (sin phi = " + std::to_string(s) + ")");
    const cd h = 2.0 * I * (1.0 + t * t) / (1.0 - t * t);
    return {h.real(), h.imag()};
}
inline MeanCurvatureScalar mean_curvature_scalar(const ProjectorField& f, Point p) {
    require_cp1(f);
    return mean_curvature_scalar(derivatives(f, p));
}

}  // namespace sigmasurf
