#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <variant>

#include "core.hpp"
#include "jacobi.hpp"
#include "jet.hpp"
#include "projector_field.hpp"

namespace sigmasurf {

// ---------------------------------------------------------------------------
// Parameters

struct TanhParams {
    double a = 0.25, b = 0.25, c = 0.0, d = 0.0;
};
struct ExpWellParams {
    double p = -1.5, chi0 = 0.0, d = 0.0;
};
struct EllipticParams {
    double K = -1.0 / 20.0, xi0 = 0.0, d = 0.0;
};
struct PietteParams {
    cd lambda{1.1, 1.1};
};
struct DressedParams {
    cd lambda{1.0 / std::numbers::sqrt2, 1.0 / std::numbers::sqrt2};
    cd alpha{-std::numbers::sqrt2, 0.0};
    cd beta{1.0, 1.0};
};
// Non-solution control w = xi_L xi_R.
struct ControlParams {};
struct VacuumParams {};

using FamilyParams = std::variant<TanhParams, ExpWellParams, EllipticParams, PietteParams, DressedParams,
                                  ControlParams, VacuumParams>;

// ---------------------------------------------------------------------------
// Formulas (scalar-generic; T is cd or Jet)

// w = tanh(alpha) exp(i beta),
// alpha = (xi_L/a - xi_R/b - c)/4, beta = (xi_L/a + xi_R/b - d)/2.
struct TanhFormula {
    TanhParams q;

    explicit TanhFormula(TanhParams p) : q(p) {
        if (q.a == 0.0 || q.b == 0.0) throw ParameterError("tanh family: a and b must be nonzero");
    }
    std::string name() const { return "tanh"; }
    template <class T>
    T w(const T& l, const T& r) const {
        const T al = (l / q.a - r / q.b - q.c) * 0.25;
        const T be = (l / q.a + r / q.b - q.d) * 0.5;
        return sc::tanh(al) * sc::exp(be * I);
    }
    template <class T>
    std::array<T, 4> projector(const T& l, const T& r) const {
        return projector_from_w_entries(w(l, r));
    }
    // Closed-form surface coordinates (alpha, beta) of a point.
    double alpha(Point p) const { return (p.l / q.a - p.r / q.b - q.c) * 0.25; }
    double beta(Point p) const { return (p.l / q.a + p.r / q.b - q.d) * 0.5; }
};

// w = R(chi) exp(i(xi_L/a - f(chi))), chi = xi_L/a - xi_R/b.
struct ExpWellFormula {
    ExpWellParams q;
    double sp, a, b;

    explicit ExpWellFormula(ExpWellParams p) : q(p) {
        if (!(q.p < -1.0)) throw ParameterError("exponential well: p must be < -1");
        sp = std::sqrt(-q.p);
        a = (q.p - 2.0 * sp - 1.0) / (4.0 * (q.p - 1.0));
        b = (q.p + 2.0 * sp - 1.0) / (4.0 * (q.p - 1.0));
    }
    std::string name() const { return "expwell"; }

    // R^2 written with sech g so that large |g| stays finite.
    template <class T>
    T r_squared(const T& chi) const {
        const double k = (q.p + 1.0) / (q.p - 1.0);
        const T g = (chi - q.chi0) * ((q.p + 1.0) / (2.0 * (q.p - 1.0)));
        const T s = sc::sech(g) * k;
        return (1.0 + s) / (1.0 - s);
    }
    template <class T>
    T w(const T& l, const T& r) const {
        const T chi = l / a - r / b;
        const T g = (chi - q.chi0) * ((q.p + 1.0) / (2.0 * (q.p - 1.0)));
        const T R = sc::sqrt(r_squared(chi));
        const T f = sc::atan(sc::tanh(g) * ((q.p + 1.0) / (2.0 * sp))) +
                    (chi * (q.p + 2.0 * sp - 1.0) - 2.0 * sp * q.chi0) / (2.0 * (q.p - 1.0)) + q.d;
        return R * sc::exp((l / a - f) * I);
    }
    template <class T>
    std::array<T, 4> projector(const T& l, const T& r) const {
        return projector_from_w_entries(w(l, r));
    }
    bool excluded(Point p) const {
        const double chi = p.l / a - p.r / b;
        const cd r2 = r_squared(cd(chi));
        return !(r2.real() > 0.0) || !std::isfinite(r2.real());
    }
};

// w = sqrt(-p) sn(sqrt(Kq)(xi0 - xi_L/a + xi_R/b) | m) exp(i(xi_L/a + xi_R/b - d)/2)
// with the parameter m = p/q.
struct EllipticFormula {
    EllipticParams q;
    double pp, qq, a, b, m, kq;

    explicit EllipticFormula(EllipticParams p) : q(p) {
        if (!(q.K > -1.0 / 16.0 && q.K < 0.0)) throw ParameterError("elliptic family: K must lie in (-1/16, 0)");
        const double s = std::sqrt(1.0 + 16.0 * q.K);
        pp = (1.0 + 8.0 * q.K - s) / (8.0 * q.K);
        qq = (1.0 + 8.0 * q.K + s) / (8.0 * q.K);
        const double sp = std::sqrt(-pp);
        a = (pp - 2.0 * sp - 1.0) / (4.0 * (pp - 1.0));
        b = (pp + 2.0 * sp - 1.0) / (4.0 * (pp - 1.0));
        m = pp / qq;
        kq = std::sqrt(q.K * qq);
    }
    std::string name() const { return "elliptic"; }
    template <class T>
    T w(const T& l, const T& r) const {
        const T u = (q.xi0 - l / a + r / b) * kq;
        const T sn = jacobi_sn_cn_dn(u, m).sn;
        return sn * std::sqrt(-pp) * sc::exp((l / a + r / b - q.d) * (0.5 * I));
    }
    template <class T>
    std::array<T, 4> projector(const T& l, const T& r) const {
        return projector_from_w_entries(w(l, r));
    }
};

// One-soliton family parametrized by lambda, |lambda| != 1, Im lambda != 0.
struct PietteFormula {
    PietteParams q;

    explicit PietteFormula(PietteParams p) : q(p) {
        if (q.lambda.imag() == 0.0) throw ParameterError("Piette family: Im lambda must be nonzero");
        if (std::abs(std::abs(q.lambda) - 1.0) < 1e-12) throw ParameterError("Piette family: |lambda| must differ from 1");
    }
    std::string name() const { return "piette"; }

    template <class T>
    std::array<T, 4> projector(const T& l, const T& r) const {
        const cd lam = q.lambda, lb = std::conj(lam);
        const double ll = std::norm(lam);
        const double rl = lam.real(), il = lam.imag();
        const T sig = (l + r) * 2.0;
        const T tau = (l / (1.0 + lb) + r / (1.0 - lb)) * 2.0;
        const T u = sc::re(tau) * 2.0;
        const T v = sc::im(tau) * 2.0;
        const T cs = sc::cos(sig), ss = sc::sin(sig);
        const T cu = sc::cos(u - sig), su = sc::sin(u - sig);
        const T chv = sc::cosh(v), shv = sc::sinh(v);
        const T ch2v = sc::cosh(v * 2.0), sh2v = sc::sinh(v * 2.0);
        const T L2 = (cu * cu * (4.0 / ((1.0 - ll) * (1.0 - ll))) + chv * chv * (1.0 / (il * il))) * ll;
        const T iL2 = 1.0 / L2;
        const T g11 = cs - iL2 * ((ss * sh2v * rl + cs * ch2v * il) / il +
                                  (sc::cos(u * 2.0 - sig * 3.0) - sc::cos(u * 2.0 - sig) * ll) / (ll - 1.0));
        const T g12 = -ss - iL2 * ((cs * sh2v * rl - ss * ch2v * il) / il +
                                   (sc::sin(u * 2.0 - sig * 3.0) + sc::sin(u * 2.0 - sig) * ll) / (ll - 1.0) +
                                   (su * chv * (rl / il) - cu * shv * ((ll + 1.0) / (ll - 1.0))) * (2.0 * I));
        return {(1.0 - g11) * 0.5, -g12 * 0.5, -sc::conj(g12) * 0.5, (1.0 + g11) * 0.5};
    }
};

// 2x2 rotation [[cos t, sin t], [-sin t, cos t]] entries row-major.
template <class T>
std::array<T, 4> rotation_entries(const T& t) {
    const T c = sc::cos(t), s = sc::sin(t);
    return {c, s, -s, c};
}

template <class T>
std::array<T, 4> mul2(const std::array<T, 4>& x, const std::array<T, 4>& y) {
    return {x[0] * y[0] + x[1] * y[2], x[0] * y[1] + x[1] * y[3], x[2] * y[0] + x[3] * y[2],
            x[2] * y[1] + x[3] * y[3]};
}

// Vacuum g = rotation by (xi_L + xi_R)/2, P = (1 - g diag(1,-1))/2.
struct VacuumFormula {
    std::string name() const { return "vacuum"; }
    template <class T>
    std::array<T, 4> g(const T& l, const T& r) const {
        return rotation_entries((l + r) * 0.5);
    }
    template <class T>
    std::array<T, 4> projector(const T& l, const T& r) const {
        const auto gg = g(l, r);
        return {(1.0 - gg[0]) * 0.5, gg[1] * 0.5, -gg[2] * 0.5, (1.0 + gg[3]) * 0.5};
    }
};

// Dressing of the vacuum with a pole at lambda on the unit circle.
// psi(L) is the rotation by xi_L/(2(1+L)) - xi_R/(2(L-1)); M = psi(conj lambda)(alpha, beta)^T,
// R = M M^dagger / (M^dagger M), U = 1 + ((conj lambda - lambda)/lambda) R, g~ = U g.
// det g~ = conj(lambda)^2, so the projector is P~ = (1 - lambda g~ diag(1,-1))/2.
struct DressedFormula {
    DressedParams q;

    explicit DressedFormula(DressedParams p) : q(p) {
        if (std::abs(std::abs(q.lambda) - 1.0) > 1e-12) throw ParameterError("dressing: |lambda| must be 1");
        if (std::abs(q.lambda - 1.0) < 1e-12 || std::abs(q.lambda + 1.0) < 1e-12)
            throw ParameterError("dressing: lambda must differ from +1 and -1");
        if (std::abs(q.alpha) == 0.0 && std::abs(q.beta) == 0.0)
            throw ParameterError("dressing: (alpha, beta) must be nonzero");
        if (std::abs(std::abs(q.alpha) - std::abs(q.beta)) > 1e-12 * std::max(1.0, std::abs(q.alpha)))
            throw ParameterError("dressing: |alpha| must equal |beta|");
    }
    std::string name() const { return "dressed"; }

    template <class T>
    std::array<T, 4> psi(const T& l, const T& r, cd L) const {
        return rotation_entries(l / (2.0 * (1.0 + L)) - r / (2.0 * (L - 1.0)));
    }
    template <class T>
    std::array<T, 4> g_tilde(const T& l, const T& r) const {
        const cd lam = q.lambda, lb = std::conj(lam);
        const auto ps = psi(l, r, lb);
        const T m1 = ps[0] * q.alpha + ps[1] * q.beta;
        const T m2 = ps[2] * q.alpha + ps[3] * q.beta;
        const T c1 = sc::conj(m1), c2 = sc::conj(m2);
        const T nn = m1 * c1 + m2 * c2;
        if (std::abs(sc::value(nn)) < 1e-300) throw SingularityError("dressing: M^dagger M is singular");
        const T inv = 1.0 / nn;
        const cd k = (lb - lam) / lam;
        const std::array<T, 4> U{1.0 + m1 * c1 * inv * k, m1 * c2 * inv * k, m2 * c1 * inv * k,
                                 1.0 + m2 * c2 * inv * k};
        return mul2(U, VacuumFormula{}.g(l, r));
    }
    template <class T>
    std::array<T, 4> projector(const T& l, const T& r) const {
        const auto gt = g_tilde(l, r);
        const cd lam = q.lambda;
        // g~ diag(1,-1) = [[g00, -g01], [g10, -g11]]
        return {(1.0 - gt[0] * lam) * 0.5, gt[1] * lam * 0.5, -gt[2] * lam * 0.5, (1.0 + gt[3] * lam) * 0.5};
    }
};

struct ControlFormula {
    std::string name() const { return "control"; }
    template <class T>
    T w(const T& l, const T& r) const {
        return l * r;
    }
    template <class T>
    std::array<T, 4> projector(const T& l, const T& r) const {
        return projector_from_w_entries(w(l, r));
    }
};

// ---------------------------------------------------------------------------
// Field constructors

inline Rect default_domain(const FamilyParams& p) {
    struct V {
        Rect operator()(const TanhParams&) const { return {-2, 2, -2, 2}; }
        Rect operator()(const ExpWellParams&) const { return {-40, 40, -40, 40}; }
        Rect operator()(const EllipticParams&) const { return {-10, 10, -10, 10}; }
        Rect operator()(const PietteParams&) const { return {-3, 3, -3, 3}; }
        Rect operator()(const DressedParams&) const { return {-12, 12, -12, 12}; }
        Rect operator()(const ControlParams&) const { return {-2, 2, -2, 2}; }
        Rect operator()(const VacuumParams&) const { return {-3, 3, -3, 3}; }
    };
    return std::visit(V{}, p);
}

// Max projector residual over a small sample of the domain.
inline double sampled_projector_residual(const ProjectorField& f, int n = 5) {
    const Rect d = f.domain();
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Point p{d.l_min + (d.l_max - d.l_min) * (i + 0.5) / n, d.r_min + (d.r_max - d.r_min) * (j + 0.5) / n};
            if (f.excluded(p)) continue;
            worst = std::max(worst, projector_residual(f.sample(p)));
        }
    return worst;
}

inline ProjectorField tanh_family(TanhParams p = {}, Rect d = {-2, 2, -2, 2}, DerivativeConfig c = {}) {
    return make_formula_field(TanhFormula(p), d, c);
}
inline ProjectorField expwell_family(ExpWellParams p = {}, Rect d = {-40, 40, -40, 40}, DerivativeConfig c = {}) {
    return make_formula_field(ExpWellFormula(p), d, c);
}
inline ProjectorField elliptic_family(EllipticParams p = {}, Rect d = {-10, 10, -10, 10}, DerivativeConfig c = {}) {
    return make_formula_field(EllipticFormula(p), d, c);
}
inline ProjectorField piette_family(PietteParams p = {}, Rect d = {-3, 3, -3, 3}, DerivativeConfig c = {}) {
    auto f = make_formula_field(PietteFormula(p), d, c);
    if (sampled_projector_residual(f) > 1e-8) throw ParameterError("Piette family: construction samples are not projectors");
    return f;
}
inline ProjectorField vacuum_field(Rect d = {-3, 3, -3, 3}, DerivativeConfig c = {}) {
    return make_formula_field(VacuumFormula{}, d, c);
}
inline ProjectorField control_field(Rect d = {-2, 2, -2, 2}, DerivativeConfig c = {}) {
    return make_formula_field(ControlFormula{}, d, c);
}

// Residual of d_R(d_L g g^-1) + d_L(d_R g g^-1) for the dressed g~.
inline double g_equation_residual(const DressedFormula& f, Point p) {
    const auto e = f.g_tilde(Jet::var_l(p.l), Jet::var_r(p.r));
    auto mat = [&](auto get) {
        CMatrix m(2, 2);
        m << get(e[0]), get(e[1]), get(e[2]), get(e[3]);
        return m;
    };
    const CMatrix g = mat([](const Jet& j) { return j.v; });
    const CMatrix gl = mat([](const Jet& j) { return j.l; });
    const CMatrix gr = mat([](const Jet& j) { return j.r; });
    const CMatrix glr = mat([](const Jet& j) { return j.lr; });
    const CMatrix gi = g.inverse();
    // d_R(g_L g^-1) = g_LR g^-1 - g_L g^-1 g_R g^-1, and symmetrically.
    const CMatrix r = 2.0 * glr * gi - gl * gi * gr * gi - gr * gi * gl * gi;
    return r.norm();
}

// || d_L psi - (1/(1+lambda)) (d_L g g^-1) psi || + the R counterpart, at spectral value L.
inline double psi_system_residual(const DressedFormula& f, Point p, cd L) {
    const auto ps = f.psi(Jet::var_l(p.l), Jet::var_r(p.r), L);
    const auto gv = VacuumFormula{}.g(Jet::var_l(p.l), Jet::var_r(p.r));
    auto mat = [](const std::array<Jet, 4>& e, auto get) {
        CMatrix m(2, 2);
        m << get(e[0]), get(e[1]), get(e[2]), get(e[3]);
        return m;
    };
    auto v = [](const Jet& j) { return j.v; };
    auto dl = [](const Jet& j) { return j.l; };
    auto dr = [](const Jet& j) { return j.r; };
    const CMatrix gi = mat(gv, v).inverse();
    const CMatrix rl = mat(ps, dl) - (1.0 / (1.0 + L)) * mat(gv, dl) * gi * mat(ps, v);
    const CMatrix rr = mat(ps, dr) - (1.0 / (1.0 - L)) * mat(gv, dr) * gi * mat(ps, v);
    return rl.norm() + rr.norm();
}

inline ProjectorField dress(DressedParams p, Rect d = {-12, 12, -12, 12}, DerivativeConfig c = {}) {
    DressedFormula form(p);
    auto f = make_formula_field(form, d, c);
    const Rect dd = f.domain();
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const Point q{dd.l_min + (dd.l_max - dd.l_min) * (i + 0.5) / 4, dd.r_min + (dd.r_max - dd.r_min) * (j + 0.5) / 4};
            const auto b = f.source().analytic(q);
            if (projector_residual(b.P) > 1e-8) throw ParameterError("dressing: result is not a projector");
            if (el_residual(b) > 1e-8) throw ParameterError("dressing: result fails the field equation");
            if (g_equation_residual(form, q) > 1e-8) throw ParameterError("dressing: g equation fails");
        }
    return f;
}

inline ProjectorField make_family(const FamilyParams& fp, Rect d, DerivativeConfig c = {}) {
    struct V {
        Rect d;
        DerivativeConfig c;
        ProjectorField operator()(const TanhParams& p) const { return tanh_family(p, d, c); }
        ProjectorField operator()(const ExpWellParams& p) const { return expwell_family(p, d, c); }
        ProjectorField operator()(const EllipticParams& p) const { return elliptic_family(p, d, c); }
        ProjectorField operator()(const PietteParams& p) const { return piette_family(p, d, c); }
        ProjectorField operator()(const DressedParams& p) const { return dress(p, d, c); }
        ProjectorField operator()(const ControlParams&) const { return control_field(d, c); }
        ProjectorField operator()(const VacuumParams&) const { return vacuum_field(d, c); }
    };
    return std::visit(V{d, c}, fp);
}

}  // namespace sigmasurf
