#include <catch_amalgamated.hpp>

#include "sigmasurf/families.hpp"

using namespace sigmasurf;
using Catch::Matchers::WithinAbs;

namespace {

// Taylor-series integration of the Jacobi system, used only here.
std::array<double, 3> jacobi_series(double u, double m) {
    constexpr int order = 30;
    double s = 0.0, c = 1.0, d = 1.0;
    const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(u) / 0.125)));
    const double h = u / steps;
    for (int k = 0; k < steps; ++k) {
        std::array<double, order + 1> S{}, C{}, D{};
        S[0] = s, C[0] = c, D[0] = d;
        for (int n = 0; n < order; ++n) {
            double a = 0.0, b = 0.0, e = 0.0;
            for (int i = 0; i <= n; ++i) {
                a += C[i] * D[n - i];
                b += S[i] * D[n - i];
                e += S[i] * C[n - i];
            }
            S[n + 1] = a / (n + 1);
            C[n + 1] = -b / (n + 1);
            D[n + 1] = -m * e / (n + 1);
        }
        s = c = d = 0.0;
        for (int n = order; n >= 0; --n) {
            s = s * h + S[n];
            c = c * h + C[n];
            d = d * h + D[n];
        }
    }
    return {s, c, d};
}

double sample_worst(const ProjectorField& f, int n, const std::function<double(Point)>& fn) {
    const Rect d = f.domain();
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const Point p{d.l_min + (d.l_max - d.l_min) * i / (n - 1), d.r_min + (d.r_max - d.r_min) * j / (n - 1)};
            if (f.excluded(p)) continue;
            worst = std::max(worst, fn(p));
        }
    return worst;
}

}  // namespace

TEST_CASE("jacobi functions against mpmath values") {
    struct Ref {
        double u, m, sn, cn, dn;
    };
    const std::vector<Ref> refs{
        {0.3, 0.25, 0.29446555154955623422, 0.95566209454525067506, 0.98910187025283392193},
        {1.7, 0.5, 0.99404770074086052889, 0.10894571424250056254, 0.71129078746030747039},
        {-5.2, 0.9, 0.043789155161633279804, -0.99904079490791085787, 0.99913675685624105904},
        {9.1, 0.1458980337503155, 0.63841079424423396415, -0.76969582160256422038, 0.96981265214114535597},
        {0.5, 0.25, 0.47508293602853651008, 0.87994102296375834214, 0.97137739883817884282},
        {2.0, 0.999, 0.96423296393829188426, 0.26505620395451358439, 0.26680430368253418939},
    };
    for (const auto& r : refs) {
        const auto t = jacobi_sn_cn_dn(r.u, r.m);
        CHECK_THAT(t.sn, WithinAbs(r.sn, 1e-13));
        CHECK_THAT(t.cn, WithinAbs(r.cn, 1e-13));
        CHECK_THAT(t.dn, WithinAbs(r.dn, 1e-13));
    }
    // complex argument
    const auto z = jacobi_sn_cn_dn(cd(0.4, 0.3), 0.3);
    CHECK(std::abs(z.sn - cd(0.40818091596204977354, 0.27462447515502407311)) < 1e-13);
    CHECK(std::abs(z.cn - cd(0.96043180580765190453, -0.11671465806998144055)) < 1e-13);
    CHECK(std::abs(z.dn - cd(0.98681478058153939116, -0.034078270417164418907)) < 1e-13);
    const auto z2 = jacobi_sn_cn_dn(cd(-1.2, 0.8), 0.7);
    CHECK(std::abs(z2.sn - cd(-1.043950404426077581, 0.22341010164321878886)) < 1e-13);
    CHECK(std::abs(z2.dn - cd(0.59036502429757304741, 0.27654135908299554447)) < 1e-13);
}

TEST_CASE("jacobi identities and series oracle") {
    const auto s = jacobi_series(0.5, 0.25);
    CHECK_THAT(jacobi_sn_cn_dn(0.5, 0.25).sn, WithinAbs(s[0], 1e-12));
    double ident = 0.0, oracle = 0.0;
    for (double m : {0.0, 0.25, 0.5, 0.9, 1.0})
        for (int k = 0; k <= 80; ++k) {
            const double u = -10.0 + 0.25 * k;
            const auto t = jacobi_sn_cn_dn(u, m);
            ident = std::max({ident, std::abs(t.sn * t.sn + t.cn * t.cn - 1.0), std::abs(t.dn * t.dn + m * t.sn * t.sn - 1.0)});
            const auto o = jacobi_series(u, m);
            oracle = std::max({oracle, std::abs(t.sn - o[0]), std::abs(t.cn - o[1]), std::abs(t.dn - o[2])});
        }
    CHECK(ident <= 1e-12);
    CHECK(oracle <= 1e-12);
    CHECK_THAT(jacobi_sn_cn_dn(0.7, 0.0).sn, WithinAbs(std::sin(0.7), 1e-16));
    CHECK_THAT(jacobi_sn_cn_dn(0.7, 1.0).sn, WithinAbs(std::tanh(0.7), 1e-16));
    CHECK_THROWS_AS(jacobi_sn_cn_dn(0.7, 1.5), ParameterError);

    // jet derivatives against central differences
    const double m = 0.4, u = 1.3, h = 1e-4;
    const auto j = jacobi_sn_cn_dn(Jet::var_l(u), m);
    auto sn = [&](double x) { return jacobi_sn_cn_dn(x, m).sn; };
    CHECK(std::abs(j.sn.l - (sn(u + h) - sn(u - h)) / (2 * h)) < 1e-8);
    CHECK(std::abs(j.sn.ll - (sn(u + h) - 2 * sn(u) + sn(u - h)) / (h * h)) < 1e-5);
}

TEST_CASE("tanh family") {
    CHECK_THROWS_AS(tanh_family({0.0, 0.25}), ParameterError);
    const auto f = tanh_family();
    CHECK(std::abs(f.source().w_jet({0.0, 0.0}).v) == 0.0);
    CHECK(sample_worst(f, 21, [&](Point p) { return el_residual(f, p); }) <= 1e-10);
    CHECK(sample_worst(f, 21, [&](Point p) { return projector_residual(f.sample(p)); }) <= 1e-14);
}

TEST_CASE("exponential-well and elliptic families") {
    const auto e = expwell_family();
    CHECK(e.domain().l_min == -40.0);
    CHECK(e.domain().r_max == 40.0);
    CHECK(sample_worst(e, 31, [&](Point p) { return el_residual(e, p); }) <= 1e-10);
    CHECK(sample_worst(e, 31, [&](Point p) { return projector_residual(e.sample(p)); }) <= 1e-10);

    const auto el = elliptic_family();
    CHECK(el.domain().l_max == 10.0);
    CHECK(sample_worst(el, 31, [&](Point p) { return el_residual(el, p); }) <= 1e-10);
    CHECK(sample_worst(el, 31, [&](Point p) { return projector_residual(el.sample(p)); }) <= 1e-10);
    // FD agrees with the analytic residual scale
    const auto fd = el.with_config({DerivativeMode::fd, 1e-4, 4});
    CHECK(el_residual(fd, {1.3, -2.1}) <= 1e-5);
}

TEST_CASE("Piette family over the gallery") {
    for (cd lam : {cd(1.1, 1.1), cd(1, 2), cd(pi, 0.5), cd(-2, 2)}) {
        const auto f = piette_family({lam});
        CHECK(sample_worst(f, 21, [&](Point p) { return projector_residual(f.sample(p)); }) <= 1e-8);
        CHECK(sample_worst(f, 21, [&](Point p) { return el_residual(f, p); }) <= 1e-5);
        const auto b = derivatives(f, {0.4, -0.3});
        CHECK_THAT(0.5 * p_trace(b, "L", "L"), WithinAbs(1.0, 1e-8));
        CHECK_THAT(0.5 * p_trace(b, "R", "R"), WithinAbs(1.0, 1e-8));
    }
}

TEST_CASE("vacuum and dressing") {
    const auto v = vacuum_field();
    CMatrix d01 = CMatrix::Zero(2, 2);
    d01(1, 1) = 1.0;
    CHECK((v.sample({0.0, 0.0}) - d01).norm() < 1e-15);
    CHECK(sample_worst(v, 11, [&](Point p) { return el_residual(v, p); }) <= 1e-12);

    const DressedParams dp;
    const auto f = dress(dp);
    const DressedFormula form(dp);
    CHECK(sample_worst(f, 15, [&](Point p) { return projector_residual(f.sample(p)); }) <= 1e-8);
    CHECK(sample_worst(f, 15, [&](Point p) { return el_residual(f, p); }) <= 1e-8);
    CHECK(g_equation_residual(form, {1.3, -0.7}) <= 1e-8);
    for (cd L : {cd(0.3, 0.2), cd(2.0, -1.0)}) CHECK(psi_system_residual(form, {0.8, 2.1}, L) <= 1e-10);

    CHECK_THROWS_AS(dress({cd(0.5, 0.0), dp.alpha, dp.beta}), ParameterError);
    CHECK_THROWS_AS(dress({cd(1.0, 0.0), dp.alpha, dp.beta}), ParameterError);
    CHECK_THROWS_AS(dress({dp.lambda, cd(2.0, 0.0), cd(1.0, 0.0)}), ParameterError);
    CHECK_THROWS_AS(dress({dp.lambda, cd(0.0), cd(0.0)}), ParameterError);

    // eigenvector of every rotation: R is constant, so g~ = const * g
    const DressedParams trivial{dp.lambda, cd(1.0, 0.0), cd(0.0, 1.0)};
    const auto t = dress(trivial);
    CHECK(sample_worst(t, 11, [&](Point p) { return el_residual(t, p); }) <= 1e-12);
}

TEST_CASE("family dispatch and embedding") {
    const auto f = make_family(TanhParams{}, {-1, 1, -1, 1});
    CHECK(f.name() == "tanh");
    CHECK(make_family(ControlParams{}, {-1, 1, -1, 1}).name() == "control");
    const Rect d = default_domain(EllipticParams{});
    CHECK(d.l_min == -10.0);
    const auto e = embed_block(tanh_family(), 3);
    CHECK(e.n() == 3);
    CHECK(e.rank() == 1);
    CHECK(el_residual(e, {0.2, 0.1}) <= 1e-10);
    CHECK_THROWS_AS(embed_block(tanh_family(), 2), DimensionError);
}
