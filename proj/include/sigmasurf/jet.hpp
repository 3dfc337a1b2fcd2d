#pragma once

#include <cmath>
#include <complex>

#include "core.hpp"

namespace sigmasurf {

// Second-order Taylor jet in the two light-cone variables.
// Holds f, f_L, f_R, f_LL, f_LR, f_RR. Arithmetic propagates all of them
// exactly, so a family written once over a scalar type yields analytic
// derivatives when evaluated on jets.
struct Jet {
    cd v{};
    cd l{}, r{};
    cd ll{}, lr{}, rr{};

    Jet() = default;
    Jet(cd c) : v(c) {}
    Jet(double c) : v(c) {}

    static Jet var_l(double x, double dl = 1.0) {
        Jet j(x);
        j.l = dl;
        return j;
    }
    static Jet var_r(double x, double dr = 1.0) {
        Jet j(x);
        j.r = dr;
        return j;
    }

    Jet& operator+=(const Jet& b) {
        v += b.v; l += b.l; r += b.r; ll += b.ll; lr += b.lr; rr += b.rr;
        return *this;
    }
    Jet& operator-=(const Jet& b) {
        v -= b.v; l -= b.l; r -= b.r; ll -= b.ll; lr -= b.lr; rr -= b.rr;
        return *this;
    }
    Jet& operator*=(cd s) {
        v *= s; l *= s; r *= s; ll *= s; lr *= s; rr *= s;
        return *this;
    }
};

inline Jet operator-(const Jet& a) {
    Jet j;
    j.v = -a.v; j.l = -a.l; j.r = -a.r; j.ll = -a.ll; j.lr = -a.lr; j.rr = -a.rr;
    return j;
}
inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator+(Jet a, cd s) { a.v += s; return a; }
inline Jet operator+(cd s, Jet a) { a.v += s; return a; }
inline Jet operator-(Jet a, cd s) { a.v -= s; return a; }
inline Jet operator-(cd s, const Jet& a) { return -a + s; }
inline Jet operator+(Jet a, double s) { a.v += s; return a; }
inline Jet operator+(double s, Jet a) { a.v += s; return a; }
inline Jet operator-(Jet a, double s) { a.v -= s; return a; }
inline Jet operator-(double s, const Jet& a) { return -a + s; }
inline Jet operator*(Jet a, cd s) { return a *= s; }
inline Jet operator*(cd s, Jet a) { return a *= s; }
inline Jet operator*(Jet a, double s) { return a *= cd(s); }
inline Jet operator*(double s, Jet a) { return a *= cd(s); }
inline Jet operator/(Jet a, cd s) { return a *= (1.0 / s); }
inline Jet operator/(Jet a, double s) { return a *= cd(1.0 / s); }

inline Jet operator*(const Jet& a, const Jet& b) {
    Jet j;
    j.v = a.v * b.v;
    j.l = a.l * b.v + a.v * b.l;
    j.r = a.r * b.v + a.v * b.r;
    j.ll = a.ll * b.v + 2.0 * a.l * b.l + a.v * b.ll;
    j.lr = a.lr * b.v + a.l * b.r + a.r * b.l + a.v * b.lr;
    j.rr = a.rr * b.v + 2.0 * a.r * b.r + a.v * b.rr;
    return j;
}

// f(a) given f, f', f'' at a.v.
inline Jet chain(const Jet& a, cd f0, cd f1, cd f2) {
    Jet j;
    j.v = f0;
    j.l = f1 * a.l;
    j.r = f1 * a.r;
    j.ll = f2 * a.l * a.l + f1 * a.ll;
    j.lr = f2 * a.l * a.r + f1 * a.lr;
    j.rr = f2 * a.r * a.r + f1 * a.rr;
    return j;
}

inline Jet inverse(const Jet& a) {
    const cd q = 1.0 / a.v;
    return chain(a, q, -q * q, 2.0 * q * q * q);
}
inline Jet operator/(const Jet& a, const Jet& b) { return a * inverse(b); }
inline Jet operator/(cd s, const Jet& b) { return inverse(b) * s; }
inline Jet operator/(double s, const Jet& b) { return inverse(b) * s; }

// Scalar functions usable on both cd and Jet. Real arguments use the real
// library routines, which behave better for large magnitudes.
namespace sc {

inline bool is_real(cd z) { return z.imag() == 0.0; }

inline cd sin(cd z) { return is_real(z) ? cd(std::sin(z.real())) : std::sin(z); }
inline cd cos(cd z) { return is_real(z) ? cd(std::cos(z.real())) : std::cos(z); }
inline cd exp(cd z) { return is_real(z) ? cd(std::exp(z.real())) : std::exp(z); }
inline cd sinh(cd z) { return is_real(z) ? cd(std::sinh(z.real())) : std::sinh(z); }
inline cd cosh(cd z) { return is_real(z) ? cd(std::cosh(z.real())) : std::cosh(z); }
inline cd tanh(cd z) { return is_real(z) ? cd(std::tanh(z.real())) : std::tanh(z); }
inline cd atan(cd z) { return is_real(z) ? cd(std::atan(z.real())) : std::atan(z); }
inline cd sqrt(cd z) {
    return (is_real(z) && z.real() >= 0.0) ? cd(std::sqrt(z.real())) : std::sqrt(z);
}
inline cd sech(cd z) {
    if (is_real(z)) {
        const double x = std::abs(z.real());
        if (x > 20.0) {
            const double e = std::exp(-x);
            return 2.0 * e / (1.0 + e * e);
        }
        return 1.0 / std::cosh(x);
    }
    return 1.0 / std::cosh(z);
}
inline cd conj(cd z) { return std::conj(z); }
inline cd re(cd z) { return z.real(); }
inline cd im(cd z) { return z.imag(); }
inline cd value(cd z) { return z; }

inline Jet sin(const Jet& a) {
    const cd s = sin(a.v), c = cos(a.v);
    return chain(a, s, c, -s);
}
inline Jet cos(const Jet& a) {
    const cd s = sin(a.v), c = cos(a.v);
    return chain(a, c, -s, -c);
}
inline Jet exp(const Jet& a) {
    const cd e = exp(a.v);
    return chain(a, e, e, e);
}
inline Jet sinh(const Jet& a) {
    const cd s = sinh(a.v), c = cosh(a.v);
    return chain(a, s, c, s);
}
inline Jet cosh(const Jet& a) {
    const cd s = sinh(a.v), c = cosh(a.v);
    return chain(a, c, s, c);
}
inline Jet tanh(const Jet& a) {
    const cd t = tanh(a.v);
    const cd d = 1.0 - t * t;
    return chain(a, t, d, -2.0 * t * d);
}
inline Jet sech(const Jet& a) {
    const cd s = sech(a.v), t = tanh(a.v);
    return chain(a, s, -s * t, s * (t * t - s * s));
}
inline Jet atan(const Jet& a) {
    const cd q = 1.0 / (1.0 + a.v * a.v);
    return chain(a, atan(a.v), q, -2.0 * a.v * q * q);
}
inline Jet sqrt(const Jet& a) {
    const cd s = sqrt(a.v);
    return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline Jet conj(const Jet& a) {
    Jet j;
    j.v = std::conj(a.v); j.l = std::conj(a.l); j.r = std::conj(a.r);
    j.ll = std::conj(a.ll); j.lr = std::conj(a.lr); j.rr = std::conj(a.rr);
    return j;
}
// Componentwise real/imaginary parts; valid because the variables are real.
inline Jet re(const Jet& a) {
    Jet j;
    j.v = a.v.real(); j.l = a.l.real(); j.r = a.r.real();
    j.ll = a.ll.real(); j.lr = a.lr.real(); j.rr = a.rr.real();
    return j;
}
inline Jet im(const Jet& a) {
    Jet j;
    j.v = a.v.imag(); j.l = a.l.imag(); j.r = a.r.imag();
    j.ll = a.ll.imag(); j.lr = a.lr.imag(); j.rr = a.rr.imag();
    return j;
}
inline cd value(const Jet& a) { return a.v; }

}  // namespace sc

}  // namespace sigmasurf
