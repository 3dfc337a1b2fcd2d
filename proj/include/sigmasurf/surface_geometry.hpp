#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "grid.hpp"
#include "projector_field.hpp"
#include "su_algebra.hpp"

namespace sigmasurf {

inline double singular_threshold = 1e-8;

// ---------------------------------------------------------------------------
// Induced metric

struct MetricSample {
    double JL = 0.0, JR = 0.0, GLR = 0.0, det = 0.0;
    bool singular = true;
};

inline MetricSample metric(const DerivativeBundle& b) {
    MetricSample m;
    m.JL = 0.5 * p_trace(b, "L", "L");
    m.JR = 0.5 * p_trace(b, "R", "R");
    m.GLR = -0.5 * p_trace(b, "L", "R");
    m.det = m.JL * m.JR - m.GLR * m.GLR;
    m.singular = !(m.det > singular_threshold) || !(m.JL * m.JR > singular_threshold);
    return m;
}
inline MetricSample metric(const ProjectorField& f, Point p) { return metric(derivatives(f, p)); }

inline MetricSample require_regular(const DerivativeBundle& b) {
    const auto m = metric(b);
    if (m.singular) throw SingularityError("degenerate metric (det G = " + std::to_string(m.det) + ")");
    return m;
}

struct ChebyshevReport {
    bool pass = false;
    double tolerance = 0.0;
    double max_dev_l = 0.0, max_dev_r = 0.0;
    double jl_min = 0.0, jl_max = 0.0, jr_min = 0.0, jr_max = 0.0;
    double jl_mean = 0.0, jr_mean = 0.0;
    // (xi_L, xi_R) -> (scale_l xi_L, scale_r xi_R) brings J_L = J_R = 1.
    double scale_l = 1.0, scale_r = 1.0;
    std::size_t samples = 0;
};

// Checks J_L = J_R = 1 over the grid. Constant J != 1 yields the rescale
// factors (not applied); non-constant J is an error.
inline ChebyshevReport assert_chebyshev(const ProjectorField& f, const Grid& g, double tol = 1e-8,
                                        double const_tol = 1e-6) {
    ChebyshevReport rep;
    rep.tolerance = tol;
    rep.jl_min = rep.jr_min = std::numeric_limits<double>::infinity();
    rep.jl_max = rep.jr_max = -std::numeric_limits<double>::infinity();
    double sl = 0.0, sr = 0.0;
    for (int i = 0; i < g.nl; ++i)
        for (int j = 0; j < g.nr; ++j) {
            const Point p = g.point(i, j);
            if (f.excluded(p)) continue;
            const auto m = metric(derivatives(f, p));
            rep.jl_min = std::min(rep.jl_min, m.JL);
            rep.jl_max = std::max(rep.jl_max, m.JL);
            rep.jr_min = std::min(rep.jr_min, m.JR);
            rep.jr_max = std::max(rep.jr_max, m.JR);
            rep.max_dev_l = std::max(rep.max_dev_l, std::abs(m.JL - 1.0));
            rep.max_dev_r = std::max(rep.max_dev_r, std::abs(m.JR - 1.0));
            sl += m.JL;
            sr += m.JR;
            ++rep.samples;
        }
    if (rep.samples == 0) throw DomainError("assert_chebyshev: no regular grid samples");
    rep.jl_mean = sl / rep.samples;
    rep.jr_mean = sr / rep.samples;
    rep.pass = rep.max_dev_l <= tol && rep.max_dev_r <= tol;
    if (rep.pass) return rep;
    const bool cl = rep.jl_max - rep.jl_min <= const_tol * std::max(1.0, rep.jl_mean);
    const bool cr = rep.jr_max - rep.jr_min <= const_tol * std::max(1.0, rep.jr_mean);
    if (!cl || !cr || !(rep.jl_mean > 0.0) || !(rep.jr_mean > 0.0))
        throw GaugeError("assert_chebyshev: J_L or J_R is not constant on the grid (J_L in [" +
                         std::to_string(rep.jl_min) + ", " + std::to_string(rep.jl_max) + "], J_R in [" +
                         std::to_string(rep.jr_min) + ", " + std::to_string(rep.jr_max) + "])");
    rep.scale_l = std::sqrt(rep.jl_mean);
    rep.scale_r = std::sqrt(rep.jr_mean);
    return rep;
}

struct ChebyshevNormalization {
    ProjectorField field;
    Grid grid;
    ChebyshevReport before;
    ChebyshevReport after;
    bool rescaled = false;
};

// Applies the constant rescale reported by assert_chebyshev, mapping the
// grid along, and re-checks.
inline ChebyshevNormalization chebyshev_normalized(const ProjectorField& f, const Grid& g, double tol = 1e-8) {
    const auto before = assert_chebyshev(f, g, tol);
    if (before.pass) return {f, g, before, before, false};
    ProjectorField nf = rescaled(f, before.scale_l, before.scale_r);
    Grid ng(nf.domain(), g.nl, g.nr);
    ng.rect = Rect{g.rect.l_min * before.scale_l, g.rect.l_max * before.scale_l, g.rect.r_min * before.scale_r,
                   g.rect.r_max * before.scale_r};
    const auto after = assert_chebyshev(nf, ng, tol);
    return {nf, ng, before, after, true};
}

// ---------------------------------------------------------------------------
// Curvature (Chebyshev gauge)

inline double chebyshev_point_tolerance = 1e-6;

struct PTraces {
    double p = 0.0;  // p_{L|R}
    double pLL_R = 0.0, pRR_L = 0.0, pL_RR = 0.0;
    double pLR_LR = 0.0, pLL_RR = 0.0;
    double den = 0.0;  // 4 - p_{L|R}^2
};

inline PTraces chebyshev_traces(const DerivativeBundle& b) {
    const auto m = metric(b);
    if (std::abs(m.JL - 1.0) > chebyshev_point_tolerance || std::abs(m.JR - 1.0) > chebyshev_point_tolerance)
        throw GaugeError("Chebyshev gauge violated (J_L = " + std::to_string(m.JL) + ", J_R = " + std::to_string(m.JR) + ")");
    PTraces t;
    t.p = p_trace(b, "L", "R");
    t.pLL_R = p_trace(b, "LL", "R");
    t.pRR_L = p_trace(b, "RR", "L");
    t.pL_RR = p_trace(b, "L", "RR");
    t.pLR_LR = p_trace(b, "LR", "LR");
    t.pLL_RR = p_trace(b, "LL", "RR");
    t.den = 4.0 - t.p * t.p;
    if (!(t.den > singular_threshold))
        throw SingularityError("degenerate metric: 4 - p_{L|R}^2 = " + std::to_string(t.den));
    return t;
}

inline double gaussian_curvature(const DerivativeBundle& b) {
    const auto t = chebyshev_traces(b);
    return 2.0 * ((t.pLR_LR - t.pLL_RR) / t.den - t.pLL_R * t.pL_RR * t.p / (t.den * t.den));
}
inline double gaussian_curvature(const ProjectorField& f, Point p) { return gaussian_curvature(derivatives(f, p)); }

// d_L X_L = LL X_L + LR X_R + normal, d_R X_R = RL X_L + RR X_R + normal.
struct Christoffel {
    double LL = 0.0, LR = 0.0, RL = 0.0, RR = 0.0;
};

inline Christoffel christoffel(const PTraces& t) {
    return {-t.p * t.pLL_R / t.den, -2.0 * t.pLL_R / t.den, -2.0 * t.pRR_L / t.den, -t.p * t.pRR_L / t.den};
}
inline Christoffel christoffel(const DerivativeBundle& b) { return christoffel(chebyshev_traces(b)); }
inline Christoffel christoffel(const ProjectorField& f, Point p) { return christoffel(derivatives(f, p)); }

struct NormalParts {
    AlgebraElement LL, LR, RR;
};

inline NormalParts normal_parts(const DerivativeBundle& b) {
    const auto t = chebyshev_traces(b);
    const CMatrix cl = commutator(b.PL, b.P);
    const CMatrix cr = commutator(b.PR, b.P);
    const CMatrix nll = commutator(b.PLL, b.P) + (t.p * t.pLL_R / t.den) * cl - (2.0 * t.pLL_R / t.den) * cr;
    const CMatrix nrr = -commutator(b.PRR, b.P) + (2.0 * t.pRR_L / t.den) * cl - (t.p * t.pRR_L / t.den) * cr;
    const CMatrix nlr = commutator(b.PL, b.PR);
    return {AlgebraElement(nll), AlgebraElement(nlr), AlgebraElement(nrr)};
}
inline NormalParts normal_parts(const ProjectorField& f, Point p) { return normal_parts(derivatives(f, p)); }

struct SecondForm {
    NormalParts II;
    // Mean curvature vector, half the metric trace of II.
    AlgebraElement H;
};

inline SecondForm second_form_and_mean_curvature(const DerivativeBundle& b) {
    const auto n = normal_parts(b);
    const auto m = require_regular(b);
    const CMatrix tr2 = m.JR * n.LL.matrix() - 2.0 * m.GLR * n.LR.matrix() + m.JL * n.RR.matrix();
    return {n, AlgebraElement(0.5 * tr2 / m.det)};
}
inline SecondForm second_form_and_mean_curvature(const ProjectorField& f, Point p) {
    return second_form_and_mean_curvature(derivatives(f, p));
}

// ---------------------------------------------------------------------------
// Moving frame

// Discrete choices made while building a frame. Reusing them at nearby
// points keeps the frame a smooth function of the point.
struct FrameGauge {
    std::vector<int> zero_columns;  // standard vectors projected onto ker P
    std::vector<int> one_columns;   // standard vectors projected onto im P
    std::vector<int> accepted;      // indices of accepted off-block candidates
    bool fixed = false;
};

struct MovingFrame {
    AlgebraElement XL, XR;
    std::vector<AlgebraElement> normals;
    std::vector<BasisLabel> labels;
    CMatrix Phi;
    FrameGauge gauge;
    double pLR = 0.0;
};

namespace detail {

// Gram-Schmidt of projected standard vectors; returns chosen indices.
inline std::vector<int> pick_columns(const CMatrix& proj, int count, double thr, std::vector<CVector>& out,
                                     const std::vector<int>* fixed) {
    const int n = static_cast<int>(proj.rows());
    std::vector<int> chosen;
    auto residual = [&](int k) {
        CVector v = proj.col(k);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : out) v -= u * u.dot(v);
        return v;
    };
    if (fixed) {
        for (int k : *fixed) {
            CVector v = residual(k);
            const double nv = v.norm();
            if (!(nv > 1e-12)) throw SingularityError("moving frame: fixed gauge degenerates");
            out.push_back(v / nv);
            chosen.push_back(k);
        }
        return chosen;
    }
    const std::size_t base = out.size();
    for (int k = 0; k < n && static_cast<int>(chosen.size()) < count; ++k) {
        CVector v = residual(k);
        const double nv = v.norm();
        if (nv > thr) {
            out.push_back(v / nv);
            chosen.push_back(k);
        }
    }
    if (static_cast<int>(chosen.size()) < count) {
        // Fall back to largest residuals.
        out.resize(base);
        chosen.clear();
        std::vector<bool> used(n, false);
        while (static_cast<int>(chosen.size()) < count) {
            int best = -1;
            double bn = 0.0;
            CVector bv;
            for (int k = 0; k < n; ++k) {
                if (used[k]) continue;
                CVector v = residual(k);
                if (v.norm() > bn) { bn = v.norm(); best = k; bv = v; }
            }
            if (best < 0 || !(bn > 1e-12)) throw SingularityError("moving frame: cannot span eigenspace");
            used[best] = true;
            out.push_back(bv / bn);
            chosen.push_back(best);
        }
    }
    return chosen;
}

}  // namespace detail

inline MovingFrame moving_frame(const DerivativeBundle& b, int rank, const FrameGauge* gauge = nullptr) {
    const int n = static_cast<int>(b.P.rows());
    const double tr = b.P.trace().real();
    if (std::abs(tr - rank) > 1e-6) throw Error("moving frame: rank of P inconsistent with the field");
    const int m = n - rank;  // size of the zero block
    MovingFrame fr;
    const auto [xl, xr] = tangents(b);
    fr.XL = xl;
    fr.XR = xr;
    fr.pLR = p_trace(b, "L", "R");

    // Phi with P = Phi diag(0..0, 1..1) Phi^dagger.
    const CMatrix id = CMatrix::Identity(n, n);
    std::vector<CVector> cols;
    const double thr = 0.5 / std::sqrt(static_cast<double>(n));
    fr.gauge.zero_columns = detail::pick_columns(id - b.P, m, thr, cols, gauge ? &gauge->zero_columns : nullptr);
    fr.gauge.one_columns = detail::pick_columns(b.P, rank, thr, cols, gauge ? &gauge->one_columns : nullptr);
    fr.Phi.resize(n, n);
    for (int k = 0; k < n; ++k) fr.Phi.col(k) = cols[k];
    const CMatrix& Phi = fr.Phi;

    // Orthonormal tangent pair in the Phi frame.
    std::vector<CMatrix> ortho;
    const CMatrix tl = Phi.adjoint() * xl.matrix() * Phi;
    const CMatrix trr = Phi.adjoint() * xr.matrix() * Phi;
    const double nl = algebra_norm(tl);
    if (!(nl > 1e-10)) throw SingularityError("moving frame: X_L vanishes");
    ortho.push_back(tl / nl);
    CMatrix e2 = trr - inner(trr, ortho[0]) * ortho[0];
    const double n2 = algebra_norm(e2);
    if (!(n2 > 1e-10)) throw SingularityError("moving frame: tangents are parallel");
    ortho.push_back(e2 / n2);

    const BasisSet basis = standard_basis(n);
    auto off_block = [&](const BasisLabel& lab) {
        return lab.kind != BasisKind::C && lab.j <= m && lab.k > m;
    };
    // Gram-Schmidt over the off-block candidates in basis order.
    const int want = 2 * m * rank - 2;
    std::vector<CMatrix> tilde(basis.size());
    std::vector<bool> take(basis.size(), false);
    auto project_out = [&](CMatrix v) {
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& e : ortho) v -= inner(v, e) * e;
        return v;
    };
    if (gauge) {
        for (int idx : gauge->accepted) {
            CMatrix v = project_out(basis[idx].matrix());
            const double nv = algebra_norm(v);
            if (!(nv > 1e-12)) throw SingularityError("moving frame: fixed gauge degenerates");
            tilde[idx] = v / nv;
            ortho.push_back(tilde[idx]);
            take[idx] = true;
            fr.gauge.accepted.push_back(idx);
        }
    } else {
        int got = 0;
        for (std::size_t idx = 0; idx < basis.size() && got < want; ++idx) {
            if (!off_block(basis.labels[idx])) continue;
            CMatrix v = project_out(basis[idx].matrix());
            const double nv = algebra_norm(v);
            if (nv < 1e-10) continue;
            tilde[idx] = v / nv;
            ortho.push_back(tilde[idx]);
            take[idx] = true;
            fr.gauge.accepted.push_back(static_cast<int>(idx));
            ++got;
        }
        if (got != want) throw SingularityError("moving frame: normal space has the wrong dimension");
    }
    fr.gauge.fixed = true;

    for (std::size_t idx = 0; idx < basis.size(); ++idx) {
        const auto& lab = basis.labels[idx];
        CMatrix local;
        if (off_block(lab)) {
            if (!take[idx]) continue;
            local = tilde[idx];
        } else {
            local = basis[idx].matrix();
        }
        fr.normals.emplace_back(Phi * local * Phi.adjoint());
        fr.labels.push_back(lab);
    }
    if (static_cast<int>(fr.normals.size()) != n * n - 3) throw Error("moving frame: wrong number of normals");
    return fr;
}

inline MovingFrame moving_frame(const ProjectorField& f, Point p, const FrameGauge* gauge = nullptr) {
    return moving_frame(derivatives(f, p), f.rank(), gauge);
}

// Largest deviation of the frame Gram matrix from the normalization pattern
// (X_L,X_L) = (X_R,X_R) = 1, (X_L,X_R) = -p_{L|R}/2, normals orthonormal and
// orthogonal to the tangents.
inline double frame_gram_defect(const MovingFrame& fr) {
    std::vector<AlgebraElement> all{fr.XL, fr.XR};
    all.insert(all.end(), fr.normals.begin(), fr.normals.end());
    const Eigen::MatrixXd g = gram(all);
    Eigen::MatrixXd want = Eigen::MatrixXd::Identity(g.rows(), g.cols());
    want(0, 1) = want(1, 0) = -0.5 * fr.pLR;
    return (g - want).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Gauss-Weingarten coefficients

struct GWTable {
    Christoffel A;
    std::vector<double> H, QL, QR;
    std::vector<double> alphaL, betaL, alphaR, betaR;
    Eigen::MatrixXd sL, sR;        // antisymmetrized s^D_jk
    double skew_defect = 0.0;      // max |s_jk + s_kj| before antisymmetrization
    double alpha_beta_defect = 0.0;  // closed formulas vs direct projection
    double reconstruction_residual = 0.0;
    double constraint_residual = 0.0;
    double p = 0.0;
};

struct FrameDerivatives {
    std::vector<CMatrix> dnL, dnR;
};

inline FrameDerivatives frame_normal_derivatives(const ProjectorField& f, Point p, const FrameGauge& gauge, double h,
                                                 int order) {
    const auto& c = f.derivative_config();
    const double reach = fd::reach(order) * h + (f.analytic_mode() ? 0.0 : fd::reach(c.order) * c.h);
    if (!f.domain().contains({p.l - reach, p.r - reach}) || !f.domain().contains({p.l + reach, p.r + reach}))
        throw DomainError("frame derivative stencil at " + fmt_point(p) + " leaves the domain");
    const int rank = f.rank();
    auto normals_at = [&](Point q) {
        const auto fr = moving_frame(derivatives(f, q), rank, &gauge);
        std::vector<CMatrix> out;
        for (const auto& nn : fr.normals) out.push_back(nn.matrix());
        return out;
    };
    FrameDerivatives d;
    const auto& w = fd::first(order);
    for (int axis = 0; axis < 2; ++axis) {
        std::vector<CMatrix> acc;
        for (auto [k, wk] : w) {
            const Point q = axis == 0 ? Point{p.l + k * h, p.r} : Point{p.l, p.r + k * h};
            const auto ns = normals_at(q);
            if (acc.empty()) acc.assign(ns.size(), CMatrix::Zero(ns[0].rows(), ns[0].cols()));
            for (std::size_t j = 0; j < ns.size(); ++j) acc[j] += (wk / h) * ns[j];
        }
        (axis == 0 ? d.dnL : d.dnR) = std::move(acc);
    }
    return d;
}

// Gauss-Weingarten table at p for a frame built with the given gauge (or the
// gauge chosen at p). Normal derivatives are finite differences of the
// frame field with step h.
inline GWTable gw_coefficients(const ProjectorField& f, Point p, double h = 1e-4, int order = 4,
                               const FrameGauge* gauge = nullptr, MovingFrame* frame_out = nullptr,
                               FrameDerivatives* deriv_out = nullptr) {
    const DerivativeBundle b = derivatives(f, p);
    const MovingFrame fr = moving_frame(b, f.rank(), gauge);
    const PTraces t = chebyshev_traces(b);
    GWTable g;
    g.p = t.p;
    g.A = christoffel(t);
    const std::size_t nn = fr.normals.size();

    const CMatrix dLXL = commutator(b.PLL, b.P);
    const CMatrix dRXR = -commutator(b.PRR, b.P);
    const CMatrix dLXR = -commutator(b.PLR, b.P) - commutator(b.PR, b.PL);
    const CMatrix dRXL = commutator(b.PLR, b.P) + commutator(b.PL, b.PR);

    for (std::size_t j = 0; j < nn; ++j) {
        const CMatrix& n = fr.normals[j].matrix();
        const double Hj = inner(dLXR, n), QLj = inner(dLXL, n), QRj = inner(dRXR, n);
        g.H.push_back(Hj);
        g.QL.push_back(QLj);
        g.QR.push_back(QRj);
        g.alphaL.push_back(-2.0 * (t.p * Hj + 2.0 * QLj) / t.den);
        g.betaL.push_back(-2.0 * (t.p * QLj + 2.0 * Hj) / t.den);
        g.alphaR.push_back(-2.0 * (t.p * QRj + 2.0 * Hj) / t.den);
        g.betaR.push_back(-2.0 * (t.p * Hj + 2.0 * QRj) / t.den);
    }
    g.constraint_residual = std::max(std::abs(inner(dLXL, dLXR)), std::abs(inner(dRXR, dLXR)));

    const FrameDerivatives d = frame_normal_derivatives(f, p, fr.gauge, h, order);
    const auto nsz = static_cast<Eigen::Index>(nn);
    Eigen::MatrixXd rawL(nsz, nsz), rawR(nsz, nsz);
    for (std::size_t j = 0; j < nn; ++j)
        for (std::size_t k = 0; k < nn; ++k) {
            rawL(j, k) = inner(d.dnL[j], fr.normals[k].matrix());
            rawR(j, k) = inner(d.dnR[j], fr.normals[k].matrix());
        }
    g.skew_defect = nn ? std::max((rawL + rawL.transpose()).cwiseAbs().maxCoeff(),
                                  (rawR + rawR.transpose()).cwiseAbs().maxCoeff()) : 0.0;
    g.sL = 0.5 * (rawL - rawL.transpose());
    g.sR = 0.5 * (rawR - rawR.transpose());

    // Direct projection of the normal derivatives onto the tangent plane.
    const CMatrix& XL = fr.XL.matrix();
    const CMatrix& XR = fr.XR.matrix();
    Eigen::Matrix2d G;
    G << inner(XL, XL), inner(XL, XR), inner(XL, XR), inner(XR, XR);
    const Eigen::Matrix2d Gi = G.inverse();
    for (std::size_t j = 0; j < nn; ++j) {
        const Eigen::Vector2d aL = Gi * Eigen::Vector2d(inner(d.dnL[j], XL), inner(d.dnL[j], XR));
        const Eigen::Vector2d aR = Gi * Eigen::Vector2d(inner(d.dnR[j], XL), inner(d.dnR[j], XR));
        g.alpha_beta_defect = std::max({g.alpha_beta_defect, std::abs(aL(0) - g.alphaL[j]), std::abs(aL(1) - g.betaL[j]),
                                        std::abs(aR(0) - g.alphaR[j]), std::abs(aR(1) - g.betaR[j])});
    }

    // Reconstruct all frame derivatives from the table.
    auto normal_sum = [&](const std::vector<double>& c) {
        CMatrix s = CMatrix::Zero(XL.rows(), XL.cols());
        for (std::size_t j = 0; j < nn; ++j) s += c[j] * fr.normals[j].matrix();
        return s;
    };
    double res = 0.0;
    res = std::max(res, (dLXL - (g.A.LL * XL + g.A.LR * XR + normal_sum(g.QL))).norm());
    res = std::max(res, (dRXR - (g.A.RL * XL + g.A.RR * XR + normal_sum(g.QR))).norm());
    res = std::max(res, (dLXR - normal_sum(g.H)).norm());
    res = std::max(res, (dRXL - normal_sum(g.H)).norm());
    for (std::size_t j = 0; j < nn; ++j) {
        CMatrix rl = g.alphaL[j] * XL + g.betaL[j] * XR;
        CMatrix rr = g.alphaR[j] * XL + g.betaR[j] * XR;
        for (std::size_t k = 0; k < nn; ++k) {
            rl += g.sL(j, k) * fr.normals[k].matrix();
            rr += g.sR(j, k) * fr.normals[k].matrix();
        }
        res = std::max(res, (d.dnL[j] - rl).norm());
        res = std::max(res, (d.dnR[j] - rr).norm());
    }
    g.reconstruction_residual = res;
    if (frame_out) *frame_out = fr;
    if (deriv_out) *deriv_out = d;
    return g;
}

// Mixed-derivative compatibility of the Gauss-Weingarten system: the
// derivative fields F_L, F_R of every frame vector, as reconstructed from the
// table, must satisfy d_R F_L = d_L F_R. Returns the largest mismatch.
inline double frame_compatibility(const ProjectorField& f, Point p, double h_outer = 1e-3, double h_inner = 1e-4,
                                  int order = 4) {
    MovingFrame fr0;
    gw_coefficients(f, p, h_inner, order, nullptr, &fr0);
    const FrameGauge gauge = fr0.gauge;

    struct Fields {
        std::vector<CMatrix> FL, FR;
    };
    auto fields_at = [&](Point q) {
        MovingFrame fr;
        const GWTable g = gw_coefficients(f, q, h_inner, order, &gauge, &fr);
        const CMatrix& XL = fr.XL.matrix();
        const CMatrix& XR = fr.XR.matrix();
        const std::size_t nn = fr.normals.size();
        auto nsum = [&](auto coef) {
            CMatrix s = CMatrix::Zero(XL.rows(), XL.cols());
            for (std::size_t j = 0; j < nn; ++j) s += coef(j) * fr.normals[j].matrix();
            return s;
        };
        Fields out;
        out.FL.push_back(g.A.LL * XL + g.A.LR * XR + nsum([&](std::size_t j) { return g.QL[j]; }));
        out.FR.push_back(nsum([&](std::size_t j) { return g.H[j]; }));
        out.FL.push_back(nsum([&](std::size_t j) { return g.H[j]; }));
        out.FR.push_back(g.A.RL * XL + g.A.RR * XR + nsum([&](std::size_t j) { return g.QR[j]; }));
        for (std::size_t j = 0; j < nn; ++j) {
            out.FL.push_back(g.alphaL[j] * XL + g.betaL[j] * XR + nsum([&](std::size_t k) { return g.sL(j, k); }));
            out.FR.push_back(g.alphaR[j] * XL + g.betaR[j] * XR + nsum([&](std::size_t k) { return g.sR(j, k); }));
        }
        return out;
    };

    std::vector<CMatrix> dRFL, dLFR;
    for (auto [k, wk] : fd::first(order)) {
        const Fields fr = fields_at({p.l, p.r + k * h_outer});
        const Fields fl = fields_at({p.l + k * h_outer, p.r});
        if (dRFL.empty()) {
            dRFL.assign(fr.FL.size(), CMatrix::Zero(fr.FL[0].rows(), fr.FL[0].cols()));
            dLFR.assign(fl.FR.size(), CMatrix::Zero(fl.FR[0].rows(), fl.FR[0].cols()));
        }
        for (std::size_t v = 0; v < fr.FL.size(); ++v) {
            dRFL[v] += (wk / h_outer) * fr.FL[v];
            dLFR[v] += (wk / h_outer) * fl.FR[v];
        }
    }
    double worst = 0.0;
    for (std::size_t v = 0; v < dRFL.size(); ++v) worst = std::max(worst, (dRFL[v] - dLFR[v]).norm());
    return worst;
}

}  // namespace sigmasurf
