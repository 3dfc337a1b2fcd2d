#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "grid.hpp"
#include "projector_field.hpp"
#include "su_algebra.hpp"
#include "surface_geometry.hpp"

namespace sigmasurf {

struct SurfaceMesh {
    Grid grid;
    int n = 2;
    std::vector<RVector> X;  // indexed by grid.index(i, j)
    std::vector<double> K;   // NaN where undefined
    std::optional<std::vector<double>> phi;
    Point basepoint;
    RVector base_value;
};

struct QuadratureConfig {
    int panels = 4;  // Simpson panels per edge, even
};

// Integral of the tangent along one axis-parallel leg, composite Simpson.
inline RVector integrate_leg(const ProjectorField& f, const BasisSet& basis, Point from, double to, int axis,
                             double max_step, int panels) {
    const double start = axis == 0 ? from.l : from.r;
    const double len = to - start;
    RVector acc = RVector::Zero(static_cast<Eigen::Index>(basis.size()));
    if (len == 0.0) return acc;
    if (panels < 2 || panels % 2) throw ParameterError("Simpson panel count must be even and >= 2");
    const int edges = std::max(1, static_cast<int>(std::ceil(std::abs(len) / max_step - 1e-9)));
    const double eh = len / edges;
    const double ph = eh / panels;
    auto tangent = [&](double s) -> RVector {
        const Point q = axis == 0 ? Point{s, from.r} : Point{from.l, s};
        if (!f.domain().contains(q)) throw DomainError("integration path leaves the domain at " + fmt_point(q));
        if (f.excluded(q)) throw DomainError("integration path crosses the excluded set at " + fmt_point(q));
        const auto b = derivatives(f, q);
        const CMatrix t = axis == 0 ? commutator(b.PL, b.P) : CMatrix(-commutator(b.PR, b.P));
        return coords(t, basis);
    };
    for (int e = 0; e < edges; ++e) {
        const double a = start + e * eh;
        RVector s = tangent(a) + tangent(a + eh);
        for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * tangent(a + k * ph);
        acc += s * (ph / 3.0);
    }
    return acc;
}

// X(target) from X(basepoint) along basepoint -> (l, r_base) -> target
// (l_first) or along R first.
inline RVector integrate_point(const ProjectorField& f, Point basepoint, const RVector& base_value, Point target,
                               double max_step = 0.01, bool l_first = true, QuadratureConfig q = {}) {
    const BasisSet basis = standard_basis(f.n());
    if (base_value.size() != static_cast<Eigen::Index>(basis.size()))
        throw DimensionError("base value has the wrong length");
    if (l_first) {
        RVector x = base_value + integrate_leg(f, basis, basepoint, target.l, 0, max_step, q.panels);
        return x + integrate_leg(f, basis, {target.l, basepoint.r}, target.r, 1, max_step, q.panels);
    }
    RVector x = base_value + integrate_leg(f, basis, basepoint, target.r, 1, max_step, q.panels);
    return x + integrate_leg(f, basis, {basepoint.l, target.r}, target.l, 0, max_step, q.panels);
}

inline double path_independence(const ProjectorField& f, Point point, Point basepoint, double max_step = 0.01,
                                QuadratureConfig q = {}) {
    const RVector zero = RVector::Zero(f.n() * f.n() - 1);
    const RVector a = integrate_point(f, basepoint, zero, point, max_step, true, q);
    const RVector b = integrate_point(f, basepoint, zero, point, max_step, false, q);
    return (a - b).cwiseAbs().maxCoeff();
}

// || d_L X_R - d_R X_L || by first-derivative stencils over tangents.
inline double closedness_residual(const ProjectorField& f, Point p, double h = 1e-3, int order = 4) {
    auto xl = [&](Point q) -> CMatrix {
        const auto b = derivatives(f, q);
        return commutator(b.PL, b.P);
    };
    auto xr = [&](Point q) -> CMatrix {
        const auto b = derivatives(f, q);
        return -commutator(b.PR, b.P);
    };
    return (fd::d1(xr, p, 0, h, order) - fd::d1(xl, p, 1, h, order)).norm();
}

// Vertices of the grid lying in the excluded set.
inline std::vector<std::pair<int, int>> excluded_vertices(const ProjectorField& f, const Grid& g) {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < g.nl; ++i)
        for (int j = 0; j < g.nr; ++j)
            if (f.excluded(g.point(i, j))) out.emplace_back(i, j);
    return out;
}

// Canonical L-then-R immersion over the grid: the basepoint row is
// integrated along xi_L, then every column along xi_R. K is evaluated per
// vertex where the Chebyshev formula applies.
inline SurfaceMesh integrate_surface(const ProjectorField& f, const Grid& g, Point basepoint,
                                     const RVector& base_value, QuadratureConfig q = {}, bool with_curvature = true) {
    int i0 = 0, j0 = 0;
    if (!g.find(basepoint, i0, j0)) throw DomainError("basepoint " + fmt_point(basepoint) + " is not a grid vertex");
    const auto bad = excluded_vertices(f, g);
    if (!bad.empty()) {
        std::string msg = "grid intersects the excluded set at vertices";
        for (std::size_t k = 0; k < bad.size() && k < 20; ++k)
            msg += " (" + std::to_string(bad[k].first) + "," + std::to_string(bad[k].second) + ")";
        if (bad.size() > 20) msg += " ... (" + std::to_string(bad.size()) + " total)";
        throw DomainError(msg);
    }
    const BasisSet basis = standard_basis(f.n());
    if (base_value.size() != static_cast<Eigen::Index>(basis.size()))
        throw DimensionError("base value has the wrong length");

    SurfaceMesh mesh;
    mesh.grid = g;
    mesh.n = f.n();
    mesh.basepoint = g.point(i0, j0);
    mesh.base_value = base_value;
    mesh.X.assign(g.size(), RVector());
    const double sl = g.step_l() * 1.000001, sr = g.step_r() * 1.000001;

    mesh.X[g.index(i0, j0)] = base_value;
    for (int i = i0 + 1; i < g.nl; ++i)
        mesh.X[g.index(i, j0)] = mesh.X[g.index(i - 1, j0)] + integrate_leg(f, basis, g.point(i - 1, j0), g.l(i), 0, sl, q.panels);
    for (int i = i0 - 1; i >= 0; --i)
        mesh.X[g.index(i, j0)] = mesh.X[g.index(i + 1, j0)] + integrate_leg(f, basis, g.point(i + 1, j0), g.l(i), 0, sl, q.panels);
    for (int i = 0; i < g.nl; ++i) {
        for (int j = j0 + 1; j < g.nr; ++j)
            mesh.X[g.index(i, j)] = mesh.X[g.index(i, j - 1)] + integrate_leg(f, basis, g.point(i, j - 1), g.r(j), 1, sr, q.panels);
        for (int j = j0 - 1; j >= 0; --j)
            mesh.X[g.index(i, j)] = mesh.X[g.index(i, j + 1)] + integrate_leg(f, basis, g.point(i, j + 1), g.r(j), 1, sr, q.panels);
    }

    mesh.K.assign(g.size(), std::numeric_limits<double>::quiet_NaN());
    if (with_curvature) {
        for (int i = 0; i < g.nl; ++i)
            for (int j = 0; j < g.nr; ++j) {
                try {
                    mesh.K[g.index(i, j)] = gaussian_curvature(f, g.point(i, j));
                } catch (const Error&) {
                }
            }
    }
    return mesh;
}

// Projection of mesh coordinates onto the top three principal axes.
// Not an isometry; for visualization only.
struct PcaProjection {
    std::vector<Eigen::Vector3d> points;
    Eigen::MatrixXd axes;  // columns
    RVector mean;
};

inline PcaProjection pca3(const SurfaceMesh& mesh) {
    const Eigen::Index d = mesh.X.empty() ? 0 : mesh.X[0].size();
    if (d < 3) throw DimensionError("pca3: fewer than three coordinates");
    RVector mean = RVector::Zero(d);
    for (const auto& x : mesh.X) mean += x;
    mean /= static_cast<double>(mesh.X.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& x : mesh.X) cov += (x - mean) * (x - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    PcaProjection out;
    out.mean = mean;
    out.axes.resize(d, 3);
    for (int k = 0; k < 3; ++k) {
        RVector a = es.eigenvectors().col(d - 1 - k);
        Eigen::Index big = 0;
        a.cwiseAbs().maxCoeff(&big);
        if (a(big) < 0) a = -a;
        out.axes.col(k) = a;
    }
    for (const auto& x : mesh.X) out.points.emplace_back(out.axes.transpose() * (x - mean));
    return out;
}

}  // namespace sigmasurf
