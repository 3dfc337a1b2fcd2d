#pragma once

#include <array>
#include <concepts>
#include <memory>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "core.hpp"
#include "grid.hpp"
#include "jet.hpp"
#include "su_algebra.hpp"

namespace sigmasurf {

// P and its derivatives up to second order at one point.
struct DerivativeBundle {
    CMatrix P, PL, PR, PLL, PLR, PRR;
};

// Producer of projector values. Implementations are immutable.
class FieldSource {
  public:
    virtual ~FieldSource() = default;
    virtual int dim() const = 0;
    virtual int rank() const = 0;
    virtual std::string name() const = 0;
    virtual CMatrix value(Point p) const = 0;
    virtual bool has_analytic() const { return false; }
    virtual DerivativeBundle analytic(Point) const { throw Error(name() + ": no analytic derivatives"); }
    // Closed-form w chart (CP^1 only).
    virtual bool has_w() const { return false; }
    virtual Jet w_jet(Point) const { throw Error(name() + ": no closed-form w"); }
    virtual bool excluded(Point) const { return false; }
    // Rank-1 projector coming from a CP^1 field, possibly block embedded.
    virtual bool cp1_like() const { return dim() == 2 && rank() == 1; }
};

enum class DerivativeMode { analytic, fd };

struct DerivativeConfig {
    DerivativeMode mode = DerivativeMode::analytic;
    double h = 1e-4;
    int order = 4;
};

class ProjectorField {
  public:
    ProjectorField(std::shared_ptr<const FieldSource> src, Rect domain, DerivativeConfig cfg = {})
        : src_(std::move(src)), domain_(domain), cfg_(cfg) {
        if (!src_) throw ParameterError("projector field without source");
        if (cfg_.order != 2 && cfg_.order != 4) throw ParameterError("finite-difference order must be 2 or 4");
        if (!(cfg_.h > 0.0)) throw ParameterError("finite-difference step must be positive");
    }

    int n() const { return src_->dim(); }
    int rank() const { return src_->rank(); }
    std::string name() const { return src_->name(); }
    const Rect& domain() const { return domain_; }
    const DerivativeConfig& derivative_config() const { return cfg_; }
    const FieldSource& source() const { return *src_; }
    const std::shared_ptr<const FieldSource>& source_ptr() const { return src_; }
    bool analytic_mode() const { return cfg_.mode == DerivativeMode::analytic && src_->has_analytic(); }

    ProjectorField with_config(DerivativeConfig c) const { return ProjectorField(src_, domain_, c); }
    ProjectorField with_domain(Rect r) const { return ProjectorField(src_, r, cfg_); }

    bool excluded(Point p) const { return src_->excluded(p); }

    CMatrix sample(Point p) const {
        if (!domain_.contains(p)) throw DomainError("point " + fmt_point(p) + " outside the domain");
        if (src_->excluded(p)) throw DomainError("point " + fmt_point(p) + " is in the excluded set");
        return src_->value(p);
    }

  private:
    std::shared_ptr<const FieldSource> src_;
    Rect domain_;
    DerivativeConfig cfg_;
};

// ---------------------------------------------------------------------------
// Finite-difference stencils

namespace fd {

// Offsets and weights of the central first-derivative stencil (times 1/h).
inline std::vector<std::pair<int, double>> first(int order) {
    if (order == 2) return {{-1, -0.5}, {1, 0.5}};
    return {{-2, 1.0 / 12.0}, {-1, -8.0 / 12.0}, {1, 8.0 / 12.0}, {2, -1.0 / 12.0}};
}

// Central second-derivative stencil (times 1/h^2).
inline std::vector<std::pair<int, double>> second(int order) {
    if (order == 2) return {{-1, 1.0}, {0, -2.0}, {1, 1.0}};
    return {{-2, -1.0 / 12.0}, {-1, 16.0 / 12.0}, {0, -30.0 / 12.0}, {1, 16.0 / 12.0}, {2, -1.0 / 12.0}};
}

inline int reach(int order) { return order == 2 ? 1 : 2; }

template <class F>
auto d1(F&& f, Point p, int axis, double h, int order) {
    using V = std::decay_t<decltype(f(p))>;
    V acc{};
    bool init = false;
    for (auto [k, w] : first(order)) {
        const Point q = axis == 0 ? Point{p.l + k * h, p.r} : Point{p.l, p.r + k * h};
        V term = f(q) * w;
        if (!init) { acc = term; init = true; } else { acc = acc + term; }
    }
    return V(acc * (1.0 / h));
}

template <class F>
auto d2(F&& f, Point p, int axis, double h, int order) {
    using V = std::decay_t<decltype(f(p))>;
    V acc{};
    bool init = false;
    for (auto [k, w] : second(order)) {
        const Point q = axis == 0 ? Point{p.l + k * h, p.r} : Point{p.l, p.r + k * h};
        V term = f(q) * w;
        if (!init) { acc = term; init = true; } else { acc = acc + term; }
    }
    return V(acc * (1.0 / (h * h)));
}

// Tensor product of first-derivative stencils (4 or 16 points).
template <class F>
auto mixed(F&& f, Point p, double hl, double hr, int order) {
    using V = std::decay_t<decltype(f(p))>;
    V acc{};
    bool init = false;
    for (auto [i, wi] : first(order))
        for (auto [j, wj] : first(order)) {
            V term = f(Point{p.l + i * hl, p.r + j * hr}) * (wi * wj);
            if (!init) { acc = term; init = true; } else { acc = acc + term; }
        }
    return V(acc * (1.0 / (hl * hr)));
}

}  // namespace fd

inline void check_stencil(const ProjectorField& f, Point p, double h, int order) {
    const int k = fd::reach(order);
    for (int i = -k; i <= k; ++i)
        for (int j = -k; j <= k; ++j) {
            const Point q{p.l + i * h, p.r + j * h};
            if (!f.domain().contains(q))
                throw DomainError("finite-difference stencil at " + fmt_point(p) + " leaves the domain");
            if (f.excluded(q))
                throw DomainError("finite-difference stencil at " + fmt_point(p) + " touches the excluded set");
        }
}

// Analytic derivatives when the source has them and the mode asks for
// them; central finite differences otherwise.
inline DerivativeBundle derivatives(const ProjectorField& f, Point p) {
    if (!f.domain().contains(p)) throw DomainError("point " + fmt_point(p) + " outside the domain");
    if (f.excluded(p)) throw DomainError("point " + fmt_point(p) + " is in the excluded set");
    if (f.analytic_mode()) return f.source().analytic(p);

    const auto& c = f.derivative_config();
    check_stencil(f, p, c.h, c.order);
    const FieldSource& s = f.source();
    auto val = [&](Point q) -> CMatrix { return s.value(q); };
    DerivativeBundle b;
    b.P = s.value(p);
    b.PL = fd::d1(val, p, 0, c.h, c.order);
    b.PR = fd::d1(val, p, 1, c.h, c.order);
    b.PLL = fd::d2(val, p, 0, c.h, c.order);
    b.PRR = fd::d2(val, p, 1, c.h, c.order);
    b.PLR = fd::mixed(val, p, c.h, c.h, c.order);
    return b;
}

// ---------------------------------------------------------------------------
// Residuals and scalars

inline double projector_residual(const CMatrix& P) {
    return std::max((P * P - P).norm(), (P - P.adjoint()).norm());
}

inline double el_residual(const DerivativeBundle& b) { return commutator(b.PLR, b.P).norm(); }
inline double el_residual(const ProjectorField& f, Point p) { return el_residual(derivatives(f, p)); }

// dP = dP P + P dP and P dP P = 0 for both first derivatives.
inline double pprops_residual(const DerivativeBundle& b) {
    double r = 0.0;
    for (const CMatrix* d : {&b.PL, &b.PR}) {
        r = std::max(r, (*d - (*d * b.P + b.P * *d)).norm());
        r = std::max(r, (b.P * *d * b.P).norm());
    }
    return r;
}

inline std::pair<AlgebraElement, AlgebraElement> tangents(const DerivativeBundle& b) {
    return {AlgebraElement(commutator(b.PL, b.P)), AlgebraElement(-commutator(b.PR, b.P))};
}
inline std::pair<AlgebraElement, AlgebraElement> tangents(const ProjectorField& f, Point p) {
    return tangents(derivatives(f, p));
}

// Multi-index of one or two light-cone letters, e.g. "L", "LR".
inline const CMatrix& bundle_entry(const DerivativeBundle& b, std::string_view idx) {
    if (idx == "L") return b.PL;
    if (idx == "R") return b.PR;
    if (idx == "LL") return b.PLL;
    if (idx == "LR" || idx == "RL") return b.PLR;
    if (idx == "RR") return b.PRR;
    throw ParameterError("unsupported derivative multi-index '" + std::string(idx) + "'");
}

// p_{B|D} = Re tr(d_B P d_D P).
inline double p_trace(const DerivativeBundle& b, std::string_view B, std::string_view D) {
    const CMatrix& x = bundle_entry(b, B);
    const CMatrix& y = bundle_entry(b, D);
    return x.cwiseProduct(y.transpose()).sum().real();
}
inline double p_trace(const ProjectorField& f, Point p, std::string_view B, std::string_view D) {
    return p_trace(derivatives(f, p), B, D);
}

// |d_R J_L| and |d_L J_R| through p_{LR|L}, p_{LR|R}.
inline double jl_transport_residual(const DerivativeBundle& b) {
    return std::max(std::abs(p_trace(b, "LR", "L")), std::abs(p_trace(b, "LR", "R")));
}

// || d_L [d_R P, P] + d_R [d_L P, P] || by first-derivative stencils nested
// over bundles.
inline double conservation_check(const ProjectorField& f, Point p, double h = 1e-3, int order = 4) {
    auto ml = [&](Point q) -> CMatrix {
        const auto b = derivatives(f, q);
        return commutator(b.PL, b.P);
    };
    auto mr = [&](Point q) -> CMatrix {
        const auto b = derivatives(f, q);
        return commutator(b.PR, b.P);
    };
    const CMatrix r = fd::d1(mr, p, 0, h, order) + fd::d1(ml, p, 1, h, order);
    return r.norm();
}

// ---------------------------------------------------------------------------
// Sources built from a scalar-generic 2x2 formula

// P(w) = [[w wb, -wb], [-w, 1]] / (1 + w wb), entries row-major.
template <class T>
std::array<T, 4> projector_from_w_entries(const T& w) {
    const T wb = sc::conj(w);
    const T ww = w * wb;
    const T q = 1.0 / (1.0 + ww);
    return {ww * q, -wb * q, -w * q, q};
}

template <class F>
concept HasW = requires(const F& f, const Jet& x) {
    { f.w(x, x) } -> std::convertible_to<Jet>;
};

template <class F>
concept HasExcluded = requires(const F& f, Point p) {
    { f.excluded(p) } -> std::convertible_to<bool>;
};

// Adapts a formula object providing
//   template <class T> std::array<T,4> projector(const T& l, const T& r) const
// (and optionally w(l, r) and excluded(p)) to a FieldSource with exact
// second-order derivatives via Jet evaluation.
template <class F>
class FormulaSource : public FieldSource {
  public:
    explicit FormulaSource(F f) : f_(std::move(f)) {}

    int dim() const override { return 2; }
    int rank() const override { return 1; }
    std::string name() const override { return f_.name(); }
    const F& formula() const { return f_; }

    CMatrix value(Point p) const override {
        const auto e = f_.template projector<cd>(cd(p.l), cd(p.r));
        CMatrix m(2, 2);
        m << e[0], e[1], e[2], e[3];
        return m;
    }
    bool has_analytic() const override { return true; }
    DerivativeBundle analytic(Point p) const override {
        const auto e = f_.template projector<Jet>(Jet::var_l(p.l), Jet::var_r(p.r));
        DerivativeBundle b;
        auto fill = [&](CMatrix& m, auto get) {
            m.resize(2, 2);
            m << get(e[0]), get(e[1]), get(e[2]), get(e[3]);
        };
        fill(b.P, [](const Jet& j) { return j.v; });
        fill(b.PL, [](const Jet& j) { return j.l; });
        fill(b.PR, [](const Jet& j) { return j.r; });
        fill(b.PLL, [](const Jet& j) { return j.ll; });
        fill(b.PLR, [](const Jet& j) { return j.lr; });
        fill(b.PRR, [](const Jet& j) { return j.rr; });
        return b;
    }
    bool has_w() const override { return HasW<F>; }
    Jet w_jet(Point p) const override {
        if constexpr (HasW<F>) {
            return f_.w(Jet::var_l(p.l), Jet::var_r(p.r));
        } else {
            return FieldSource::w_jet(p);
        }
    }
    bool excluded(Point p) const override {
        if constexpr (HasExcluded<F>) return f_.excluded(p);
        return false;
    }

  private:
    F f_;
};

template <class F>
ProjectorField make_formula_field(F f, Rect domain, DerivativeConfig cfg = {}) {
    return ProjectorField(std::make_shared<FormulaSource<F>>(std::move(f)), domain, cfg);
}

// ---------------------------------------------------------------------------
// Generic sources and wrappers

class ConstantSource : public FieldSource {
  public:
    explicit ConstantSource(CMatrix p) : p_(std::move(p)) {
        if (p_.rows() != p_.cols() || p_.rows() < 2) throw DimensionError("constant projector must be square");
        if (projector_residual(p_) > 1e-10) throw ParameterError("constant matrix is not a Hermitian projector");
        rank_ = static_cast<int>(std::lround(p_.trace().real()));
    }
    int dim() const override { return static_cast<int>(p_.rows()); }
    int rank() const override { return rank_; }
    std::string name() const override { return "constant"; }
    CMatrix value(Point) const override { return p_; }
    bool has_analytic() const override { return true; }
    DerivativeBundle analytic(Point) const override {
        const CMatrix z = CMatrix::Zero(p_.rows(), p_.cols());
        return {p_, z, z, z, z, z};
    }

  private:
    CMatrix p_;
    int rank_ = 0;
};

inline ProjectorField constant_field(CMatrix p, Rect domain) {
    return ProjectorField(std::make_shared<ConstantSource>(std::move(p)), domain);
}

// Samples the inner field at (l / sl, r / sr).
class RescaledSource : public FieldSource {
  public:
    RescaledSource(std::shared_ptr<const FieldSource> in, double sl, double sr)
        : in_(std::move(in)), sl_(sl), sr_(sr) {
        if (sl_ == 0.0 || sr_ == 0.0) throw ParameterError("rescale factors must be nonzero");
    }
    int dim() const override { return in_->dim(); }
    int rank() const override { return in_->rank(); }
    std::string name() const override { return in_->name(); }
    bool cp1_like() const override { return in_->cp1_like(); }
    CMatrix value(Point p) const override { return in_->value(map(p)); }
    bool has_analytic() const override { return in_->has_analytic(); }
    DerivativeBundle analytic(Point p) const override {
        DerivativeBundle b = in_->analytic(map(p));
        b.PL /= sl_;
        b.PR /= sr_;
        b.PLL /= sl_ * sl_;
        b.PLR /= sl_ * sr_;
        b.PRR /= sr_ * sr_;
        return b;
    }
    bool has_w() const override { return in_->has_w(); }
    Jet w_jet(Point p) const override {
        Jet j = in_->w_jet(map(p));
        j.l /= sl_;
        j.r /= sr_;
        j.ll /= sl_ * sl_;
        j.lr /= sl_ * sr_;
        j.rr /= sr_ * sr_;
        return j;
    }
    bool excluded(Point p) const override { return in_->excluded(map(p)); }
    double scale_l() const { return sl_; }
    double scale_r() const { return sr_; }

  private:
    Point map(Point p) const { return {p.l / sl_, p.r / sr_}; }
    std::shared_ptr<const FieldSource> in_;
    double sl_, sr_;
};

// New coordinates (sl * xi_L, sr * xi_R); the domain is mapped along.
inline ProjectorField rescaled(const ProjectorField& f, double sl, double sr) {
    const Rect d = f.domain();
    Rect nd{std::min(sl * d.l_min, sl * d.l_max), std::max(sl * d.l_min, sl * d.l_max),
            std::min(sr * d.r_min, sr * d.r_max), std::max(sr * d.r_min, sr * d.r_max)};
    return ProjectorField(std::make_shared<RescaledSource>(f.source_ptr(), sl, sr), nd, f.derivative_config());
}

// P -> diag(P, 0).
class EmbeddedSource : public FieldSource {
  public:
    EmbeddedSource(std::shared_ptr<const FieldSource> in, int n) : in_(std::move(in)), n_(n) {
        if (n_ <= in_->dim()) throw DimensionError("embed_block: target dimension must exceed the field dimension");
    }
    int dim() const override { return n_; }
    int rank() const override { return in_->rank(); }
    std::string name() const override { return in_->name() + "-embedded" + std::to_string(n_); }
    bool cp1_like() const override { return in_->cp1_like(); }
    CMatrix value(Point p) const override { return pad(in_->value(p)); }
    bool has_analytic() const override { return in_->has_analytic(); }
    DerivativeBundle analytic(Point p) const override {
        const auto b = in_->analytic(p);
        return {pad(b.P), pad(b.PL), pad(b.PR), pad(b.PLL), pad(b.PLR), pad(b.PRR)};
    }
    bool excluded(Point p) const override { return in_->excluded(p); }

  private:
    CMatrix pad(const CMatrix& m) const {
        CMatrix out = CMatrix::Zero(n_, n_);
        out.topLeftCorner(m.rows(), m.cols()) = m;
        return out;
    }
    std::shared_ptr<const FieldSource> in_;
    int n_;
};

inline ProjectorField embed_block(const ProjectorField& f, int n) {
    return ProjectorField(std::make_shared<EmbeddedSource>(f.source_ptr(), n), f.domain(), f.derivative_config());
}

// P -> U P U^dagger for a constant unitary U.
class ConjugatedSource : public FieldSource {
  public:
    ConjugatedSource(std::shared_ptr<const FieldSource> in, CMatrix u) : in_(std::move(in)), u_(std::move(u)) {
        if (u_.rows() != in_->dim() || u_.cols() != in_->dim()) throw DimensionError("conjugation: size mismatch");
    }
    int dim() const override { return in_->dim(); }
    int rank() const override { return in_->rank(); }
    std::string name() const override { return in_->name() + "-rotated"; }
    bool cp1_like() const override { return in_->cp1_like(); }
    CMatrix value(Point p) const override { return c(in_->value(p)); }
    bool has_analytic() const override { return in_->has_analytic(); }
    DerivativeBundle analytic(Point p) const override {
        const auto b = in_->analytic(p);
        return {c(b.P), c(b.PL), c(b.PR), c(b.PLL), c(b.PLR), c(b.PRR)};
    }
    bool excluded(Point p) const override { return in_->excluded(p); }

  private:
    CMatrix c(const CMatrix& m) const { return u_ * m * u_.adjoint(); }
    std::shared_ptr<const FieldSource> in_;
    CMatrix u_;
};

inline ProjectorField conjugated(const ProjectorField& f, const CMatrix& u) {
    return ProjectorField(std::make_shared<ConjugatedSource>(f.source_ptr(), u), f.domain(), f.derivative_config());
}

}  // namespace sigmasurf
