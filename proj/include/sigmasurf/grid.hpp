#pragma once

#include <cmath>
#include <cstddef>

#include "core.hpp"

namespace sigmasurf {

struct Rect {
    double l_min = -1.0, l_max = 1.0;
    double r_min = -1.0, r_max = 1.0;

    bool contains(Point p, double slack = 1e-12) const {
        return p.l >= l_min - slack && p.l <= l_max + slack && p.r >= r_min - slack && p.r <= r_max + slack;
    }
};

// Regular nL x nR grid over a rectangle; vertex (i,j) has xi_L index i.
struct Grid {
    Rect rect;
    int nl = 101;
    int nr = 101;

    Grid() = default;
    Grid(Rect r, int nl_, int nr_) : rect(r), nl(nl_), nr(nr_) {
        if (nl < 2 || nr < 2) throw ParameterError("grid needs at least 2 points per direction");
        if (!(rect.l_max > rect.l_min) || !(rect.r_max > rect.r_min)) throw ParameterError("empty grid rectangle");
    }

    double step_l() const { return (rect.l_max - rect.l_min) / (nl - 1); }
    double step_r() const { return (rect.r_max - rect.r_min) / (nr - 1); }
    double l(int i) const { return i == nl - 1 ? rect.l_max : rect.l_min + i * step_l(); }
    double r(int j) const { return j == nr - 1 ? rect.r_max : rect.r_min + j * step_r(); }
    Point point(int i, int j) const { return {l(i), r(j)}; }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * nr + j; }
    std::size_t size() const { return static_cast<std::size_t>(nl) * nr; }

    // Grid vertex matching p to rounding, if any.
    bool find(Point p, int& i, int& j, double tol = 1e-9) const {
        const double fi = (p.l - rect.l_min) / step_l();
        const double fj = (p.r - rect.r_min) / step_r();
        i = static_cast<int>(std::lround(fi));
        j = static_cast<int>(std::lround(fj));
        if (i < 0 || i >= nl || j < 0 || j >= nr) return false;
        return std::abs(l(i) - p.l) <= tol * std::max(1.0, std::abs(p.l)) &&
               std::abs(r(j) - p.r) <= tol * std::max(1.0, std::abs(p.r));
    }
};

}  // namespace sigmasurf
