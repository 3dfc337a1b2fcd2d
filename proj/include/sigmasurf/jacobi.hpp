#pragma once

#include <array>
#include <cmath>

#include "core.hpp"
#include "jet.hpp"

namespace sigmasurf {

template <class T>
struct JacobiTriple {
    T sn, cn, dn;
};

// Real argument, parameter m in [0,1]. Descending Landen / AGM scheme.
inline JacobiTriple<double> jacobi_sn_cn_dn(double u, double m) {
    if (!(m >= 0.0 && m <= 1.0)) throw ParameterError("jacobi: parameter m must lie in [0,1]");
    if (m == 0.0) return {std::sin(u), std::cos(u), 1.0};
    if (m == 1.0) {
        const double s = 1.0 / std::cosh(u);
        return {std::tanh(u), s, s};
    }
    constexpr int max_steps = 64;
    std::array<double, max_steps + 1> a{}, c{};
    a[0] = 1.0;
    double b = std::sqrt(1.0 - m);
    c[0] = std::sqrt(m);
    int n = 0;
    while (std::abs(c[n]) > 1e-17 && n < max_steps) {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = std::sqrt(a[n] * b);
        ++n;
    }
    double phi = std::ldexp(a[n] * u, n);
    double prev = phi;
    for (int k = n; k > 0; --k) {
        prev = phi;
        phi = 0.5 * (phi + std::asin(c[k] / a[k] * std::sin(phi)));
    }
    const double sn = std::sin(phi), cn = std::cos(phi);
    // the square root has no cancellation for moderate m
    const double dn = n > 0 && m > 0.9 ? cn / std::cos(prev - phi) : std::sqrt(1.0 - m * sn * sn);
    return {sn, cn, dn};
}

// Complex argument through the addition formulas with the complementary
// parameter: x + iy with (x|m) and (y|1-m).
inline JacobiTriple<cd> jacobi_sn_cn_dn(cd u, double m) {
    if (u.imag() == 0.0) {
        const auto t = jacobi_sn_cn_dn(u.real(), m);
        return {t.sn, t.cn, t.dn};
    }
    const auto a = jacobi_sn_cn_dn(u.real(), m);
    const auto b = jacobi_sn_cn_dn(u.imag(), 1.0 - m);
    const double s = a.sn, c = a.cn, d = a.dn;
    const double s1 = b.sn, c1 = b.cn, d1 = b.dn;
    const double den = c1 * c1 + m * s * s * s1 * s1;
    return {cd(s * d1, c * d * s1 * c1) / den,
            cd(c * c1, -s * d * s1 * d1) / den,
            cd(d * c1 * d1, -m * s * c * s1) / den};
}

// Jet argument: sn' = cn dn, cn' = -sn dn, dn' = -m sn cn.
inline JacobiTriple<Jet> jacobi_sn_cn_dn(const Jet& u, double m) {
    const auto t = jacobi_sn_cn_dn(u.v, m);
    const cd s = t.sn, c = t.cn, d = t.dn;
    return {chain(u, s, c * d, -s * d * d - m * s * c * c),
            chain(u, c, -s * d, -c * d * d + m * s * s * c),
            chain(u, d, -m * s * c, -m * c * c * d + m * s * s * d)};
}

}  // namespace sigmasurf
