#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "core.hpp"
#include "cp1.hpp"
#include "families.hpp"
#include "grid.hpp"
#include "immersion.hpp"
#include "lax.hpp"
#include "surface_geometry.hpp"

namespace sigmasurf {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Output formatting

inline std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Compact-indented JSON with 17 significant digits; non-finite numbers
// become null.
inline void write_json(std::ostream& os, const Json& j, int indent = 0) {
    const std::string pad(indent, ' '), pad2(indent + 2, ' ');
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{\n";
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) os << ",\n";
                first = false;
                os << pad2 << Json(it.key()).dump() << ": ";
                write_json(os, it.value(), indent + 2);
            }
            os << "\n" << pad << "}";
            return;
        }
        case Json::value_t::array: {
            bool flat = true;
            for (const auto& e : j)
                if (e.is_structured()) flat = false;
            if (j.empty()) {
                os << "[]";
                return;
            }
            if (flat) {
                os << "[";
                for (std::size_t k = 0; k < j.size(); ++k) {
                    if (k) os << ", ";
                    write_json(os, j[k], indent);
                }
                os << "]";
                return;
            }
            os << "[\n";
            for (std::size_t k = 0; k < j.size(); ++k) {
                if (k) os << ",\n";
                os << pad2;
                write_json(os, j[k], indent + 2);
            }
            os << "\n" << pad << "]";
            return;
        }
        case Json::value_t::number_float: {
            const double v = j.get<double>();
            os << (std::isfinite(v) ? fmt17(v) : "null");
            return;
        }
        default:
            os << j.dump();
    }
}

inline std::string json_string(const Json& j) {
    std::ostringstream os;
    write_json(os, j);
    os << "\n";
    return os.str();
}

inline Json complex_json(cd z) { return Json::array({z.real(), z.imag()}); }

inline Json params_json(const FamilyParams& p) {
    struct V {
        Json operator()(const TanhParams& q) const { return {{"a", q.a}, {"b", q.b}, {"c", q.c}, {"d", q.d}}; }
        Json operator()(const ExpWellParams& q) const { return {{"p", q.p}, {"chi0", q.chi0}, {"d", q.d}}; }
        Json operator()(const EllipticParams& q) const { return {{"K", q.K}, {"xi0", q.xi0}, {"d", q.d}}; }
        Json operator()(const PietteParams& q) const { return {{"lambda", complex_json(q.lambda)}}; }
        Json operator()(const DressedParams& q) const {
            return {{"lambda", complex_json(q.lambda)}, {"alpha", complex_json(q.alpha)}, {"beta", complex_json(q.beta)}};
        }
        Json operator()(const ControlParams&) const { return Json::object(); }
        Json operator()(const VacuumParams&) const { return Json::object(); }
    };
    return std::visit(V{}, p);
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << text;
}

// ---------------------------------------------------------------------------
// Field preparation shared by the commands

struct Prepared {
    ProjectorField field;
    Grid grid;
    double scale_l = 1.0, scale_r = 1.0;
    bool rescaled = false;
    std::optional<ChebyshevReport> report;
    std::string chebyshev_error;

    Point map(Point p) const { return {p.l * scale_l, p.r * scale_r}; }
};

// Slack around the sample grid so that finite-difference stencils at the
// boundary stay inside the field domain.
inline Rect padded(Rect r, double pad) { return {r.l_min - pad, r.l_max + pad, r.r_min - pad, r.r_max + pad}; }

inline Prepared prepare(const RunConfig& c, bool normalize) {
    RunConfig cc = c;
    const double pad = 0.01 + 8.0 * c.deriv.h;
    cc.domain = padded(c.domain, pad);
    ProjectorField f = make_field(cc);
    Grid g(c.domain, c.nl, c.nr);
    Prepared out{f, g};
    if (!normalize) return out;
    try {
        auto n = chebyshev_normalized(f, g, c.tol.chebyshev);
        out.report = n.after;
        if (n.rescaled) {
            out.field = n.field;
            out.grid = n.grid;
            out.scale_l = n.before.scale_l;
            out.scale_r = n.before.scale_r;
            out.rescaled = true;
        }
    } catch (const GaugeError& e) {
        out.chebyshev_error = e.what();
    } catch (const SingularityError& e) {
        out.chebyshev_error = e.what();
    } catch (const DomainError& e) {
        out.chebyshev_error = e.what();
    }
    return out;
}

inline Point grid_basepoint(const Prepared& pr, const RunConfig& c) {
    const Grid& g = pr.grid;
    if (!c.basepoint) return g.point(g.nl / 2, g.nr / 2);
    const Point p = pr.map(*c.basepoint);
    int i = 0, j = 0;
    if (!g.find(p, i, j)) throw ConfigError("basepoint " + fmt_point(*c.basepoint) + " is not a grid vertex");
    return g.point(i, j);
}

// ---------------------------------------------------------------------------
// verify

struct CheckResult {
    std::string name;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    bool skipped = false;
    std::size_t samples = 0;
    double wall_time = 0.0;
    std::string note;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    bool pass() const {
        for (const auto& c : checks)
            if (!c.skipped && !c.pass) return false;
        return true;
    }
};

inline const std::vector<std::string>& verify_check_names() {
    static const std::vector<std::string> names{"projector",      "euler_lagrange", "chebyshev",
                                                "curvature",      "sine_gordon",    "zero_curvature_spectral",
                                                "zero_curvature_overall"};
    return names;
}

inline const std::vector<cd>& spectral_lambdas() {
    static const std::vector<cd> v{cd(2.0), cd(0.5), cd(1.0, 1.0), cd(0.0, -3.0)};
    return v;
}
inline const std::vector<cd>& overall_lambdas() {
    static const std::vector<cd> v{cd(0.0), cd(2.0), cd(1.0, 1.0)};
    return v;
}

inline VerificationReport run_verification(const RunConfig& c, const Prepared& pr) {
    const ProjectorField& f = pr.field;
    const Grid& g = pr.grid;
    const bool analytic = f.analytic_mode();
    VerificationReport rep;
    auto timed = [&](const std::string& name, double tol, const std::function<void(CheckResult&)>& body) {
        CheckResult r;
        r.name = name;
        r.tolerance = tol;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            body(r);
            if (!r.skipped) r.pass = r.max_residual <= tol;
        } catch (const Error& e) {
            r.pass = false;
            r.max_residual = std::numeric_limits<double>::quiet_NaN();
            r.note = e.what();
        }
        r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        rep.checks.push_back(r);
    };
    auto each_vertex = [&](const std::function<void(Point)>& fn) {
        for (int i = 0; i < g.nl; ++i)
            for (int j = 0; j < g.nr; ++j) {
                const Point p = g.point(i, j);
                if (f.excluded(p)) continue;
                fn(p);
            }
    };

    timed("projector", c.tol.projector, [&](CheckResult& r) {
        each_vertex([&](Point p) {
            r.max_residual = std::max(r.max_residual, projector_residual(f.sample(p)));
            ++r.samples;
        });
    });
    timed("euler_lagrange", analytic ? c.tol.el_analytic : c.tol.el_fd, [&](CheckResult& r) {
        each_vertex([&](Point p) {
            r.max_residual = std::max(r.max_residual, el_residual(f, p));
            ++r.samples;
        });
    });
    timed("chebyshev", c.tol.chebyshev, [&](CheckResult& r) {
        if (!pr.chebyshev_error.empty()) throw GaugeError(pr.chebyshev_error);
        const auto rr = pr.report ? *pr.report : assert_chebyshev(f, g, c.tol.chebyshev);
        r.max_residual = std::max(rr.max_dev_l, rr.max_dev_r);
        r.samples = rr.samples;
        if (pr.rescaled) r.note = "coordinates rescaled by (" + fmt17(pr.scale_l) + ", " + fmt17(pr.scale_r) + ")";
    });
    timed("curvature", analytic ? c.tol.curvature_analytic : c.tol.curvature_fd, [&](CheckResult& r) {
        if (!pr.chebyshev_error.empty()) throw GaugeError("curvature formula needs Chebyshev gauge: " + pr.chebyshev_error);
        std::size_t skipped = 0;
        const double margin = analytic ? c.tol.curvature_margin_analytic : c.tol.curvature_margin_fd;
        each_vertex([&](Point p) {
            const auto b = derivatives(f, p);
            double k = 0.0;
            try {
                if (chebyshev_traces(b).den < margin) {
                    ++skipped;
                    return;
                }
                k = gaussian_curvature(b);
            } catch (const SingularityError&) {
                ++skipped;
                return;
            }
            r.max_residual = std::max(r.max_residual, std::abs(k + 4.0));
            ++r.samples;
        });
        r.note = std::to_string(skipped) + " near-singular samples skipped (4 - p^2 < " + fmt17(margin) + ")";
        if (r.samples == 0) throw SingularityError("no regular samples for the curvature check");
    });
    timed("sine_gordon", c.tol.sine_gordon, [&](CheckResult& r) {
        if (f.n() != 2 || f.rank() != 1) {
            r.skipped = true;
            r.pass = true;
            r.note = "not a CP^1 field";
            return;
        }
        const Point centre = grid_basepoint(pr, c);
        const double half = 0.5 * c.sg.step * (c.sg.points - 1);
        Rect patch{centre.l - half, centre.l + half, centre.r - half, centre.r + half};
        const Rect& d = g.rect;
        // keep the patch inside the sample rectangle
        auto shift = [](double lo, double hi, double dlo, double dhi, double& a, double& b) {
            if (hi - lo > dhi - dlo) {
                a = dlo;
                b = dhi;
                return;
            }
            double s = 0.0;
            if (lo < dlo) s = dlo - lo;
            if (hi > dhi) s = dhi - hi;
            a = lo + s;
            b = hi + s;
        };
        shift(patch.l_min, patch.l_max, d.l_min, d.l_max, patch.l_min, patch.l_max);
        shift(patch.r_min, patch.r_max, d.r_min, d.r_max, patch.r_min, patch.r_max);
        const Grid pg(patch, c.sg.points, c.sg.points);
        PhaseOptions opt;
        opt.enforce_gauge = false;
        opt.cross_check_w = false;
        const auto ph = sg_phase(f, pg, opt);
        const auto res = sg_residual(ph);
        r.max_residual = res.max;
        r.samples = res.count;
        r.note = "patch [" + fmt17(patch.l_min) + ", " + fmt17(patch.l_max) + "] x [" + fmt17(patch.r_min) + ", " +
                 fmt17(patch.r_max) + "], max gauge defect " + fmt17(ph.max_gauge_defect);
    });
    // interior 5 x 5 subgrid for the zero-curvature checks
    std::vector<Point> sub;
    for (int a = 1; a <= 5; ++a)
        for (int b = 1; b <= 5; ++b) {
            const Point p = g.point(static_cast<int>(std::lround(a * (g.nl - 1) / 6.0)),
                                    static_cast<int>(std::lround(b * (g.nr - 1) / 6.0)));
            if (!f.excluded(p)) sub.push_back(p);
        }
    timed("zero_curvature_spectral", c.tol.zero_curvature, [&](CheckResult& r) {
        if (f.n() != 2 || f.rank() != 1) {
            r.skipped = true;
            r.pass = true;
            r.note = "not a CP^1 field";
            return;
        }
        for (const Point& p : sub)
            for (cd lam : spectral_lambdas()) {
                r.max_residual = std::max(r.max_residual, zero_curvature_residual(LaxKind::spectral, f, p, lam).norm);
                ++r.samples;
            }
    });
    timed("zero_curvature_overall", c.tol.zero_curvature, [&](CheckResult& r) {
        for (const Point& p : sub)
            for (cd lam : overall_lambdas()) {
                r.max_residual = std::max(r.max_residual, zero_curvature_residual(LaxKind::overall, f, p, lam).norm);
                ++r.samples;
            }
    });
    return rep;
}

inline Json config_json(const RunConfig& c, const Prepared& pr) {
    Json j;
    j["family"] = c.family;
    j["params"] = params_json(c.params);
    j["n"] = pr.field.n();
    j["embed"] = c.embed;
    j["mode"] = c.deriv.mode == DerivativeMode::analytic ? "analytic" : "fd";
    if (c.deriv.mode == DerivativeMode::fd) {
        j["fd_step"] = c.deriv.h;
        j["fd_order"] = c.deriv.order;
    }
    j["grid"] = Json::array({c.nl, c.nr});
    j["domain"] = Json::array({c.domain.l_min, c.domain.l_max, c.domain.r_min, c.domain.r_max});
    j["normalization"] = {{"rescaled", pr.rescaled}, {"scale_l", pr.scale_l}, {"scale_r", pr.scale_r}};
    return j;
}

inline Json report_json(const RunConfig& c, const Prepared& pr, const VerificationReport& rep) {
    Json j;
    j["command"] = "verify";
    j["config"] = config_json(c, pr);
    Json checks = Json::array();
    for (const auto& r : rep.checks) {
        Json e;
        e["name"] = r.name;
        e["status"] = r.skipped ? "skipped" : (r.pass ? "pass" : "fail");
        e["max_residual"] = r.max_residual;
        e["tolerance"] = r.tolerance;
        e["pass"] = r.pass;
        e["samples"] = r.samples;
        if (c.timing) e["wall_time"] = r.wall_time;
        if (!r.note.empty()) e["note"] = r.note;
        checks.push_back(e);
    }
    j["checks"] = checks;
    j["pass"] = rep.pass();
    return j;
}

inline int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const Prepared pr = prepare(c, c.normalize);
    if (pr.rescaled)
        err << "note: Chebyshev gauge restored by rescaling xi_L by " << fmt17(pr.scale_l) << " and xi_R by "
            << fmt17(pr.scale_r) << "\n";
    const auto rep = run_verification(c, pr);
    const std::string text = json_string(report_json(c, pr, rep));
    write_file(std::filesystem::path(c.out_dir) / "report.json", text);
    out << text;
    return rep.pass() ? 0 : 1;
}

// ---------------------------------------------------------------------------
// surface

inline std::string mesh_csv(const SurfaceMesh& m, const std::optional<std::vector<double>>& phi) {
    std::string s = "xi_l,xi_r";
    const Eigen::Index d = m.X.empty() ? 0 : m.X[0].size();
    for (Eigen::Index k = 1; k <= d; ++k) s += ",X" + std::to_string(k);
    s += ",K";
    if (phi) s += ",phi";
    s += "\n";
    for (int i = 0; i < m.grid.nl; ++i)
        for (int j = 0; j < m.grid.nr; ++j) {
            const std::size_t idx = m.grid.index(i, j);
            const Point p = m.grid.point(i, j);
            s += fmt17(p.l) + "," + fmt17(p.r);
            for (Eigen::Index k = 0; k < d; ++k) s += "," + fmt17(m.X[idx](k));
            s += "," + fmt17(m.K[idx]);
            if (phi) s += "," + fmt17((*phi)[idx]);
            s += "\n";
        }
    return s;
}

inline std::string grid_obj(const Grid& g, const std::function<Eigen::Vector3d(std::size_t)>& vertex) {
    std::string s;
    for (int i = 0; i < g.nl; ++i)
        for (int j = 0; j < g.nr; ++j) {
            const Eigen::Vector3d v = vertex(g.index(i, j));
            s += "v " + fmt17(v(0)) + " " + fmt17(v(1)) + " " + fmt17(v(2)) + "\n";
        }
    for (int i = 0; i + 1 < g.nl; ++i)
        for (int j = 0; j + 1 < g.nr; ++j) {
            const auto a = g.index(i, j) + 1, b = g.index(i + 1, j) + 1, cc = g.index(i + 1, j + 1) + 1,
                       d = g.index(i, j + 1) + 1;
            s += "f " + std::to_string(a) + " " + std::to_string(b) + " " + std::to_string(cc) + " " + std::to_string(d) + "\n";
        }
    return s;
}

inline int cmd_surface(const RunConfig& c, std::ostream& out, std::ostream& err) {
    if (c.format == "json") throw ConfigError("surface output format must be csv or obj");
    const Prepared pr = prepare(c, c.normalize);
    if (pr.rescaled)
        err << "note: Chebyshev gauge restored by rescaling xi_L by " << fmt17(pr.scale_l) << " and xi_R by "
            << fmt17(pr.scale_r) << "\n";
    if (!pr.chebyshev_error.empty()) err << "note: Chebyshev check failed, coordinates left unchanged\n";
    const Point base = grid_basepoint(pr, c);
    const ProjectorField& f = pr.field;
    const SurfaceMesh mesh = integrate_surface(f, pr.grid, base, RVector::Zero(f.n() * f.n() - 1));
    std::optional<std::vector<double>> phi;
    if (f.n() == 2 && f.rank() == 1) {
        PhaseOptions opt;
        opt.enforce_gauge = false;
        opt.cross_check_w = false;
        opt.anchor = base;
        phi = sg_phase(f, pr.grid, opt).phi;
    }
    const std::filesystem::path dir(c.out_dir);
    std::vector<std::string> written;
    if (c.format == "csv") {
        write_file(dir / "surface.csv", mesh_csv(mesh, phi));
        written.push_back((dir / "surface.csv").string());
    }
    if (f.n() == 2) {
        write_file(dir / "surface.obj", grid_obj(pr.grid, [&](std::size_t k) { return Eigen::Vector3d(mesh.X[k]); }));
        written.push_back((dir / "surface.obj").string());
    } else if (c.format == "obj" && !c.pca3) {
        throw ConfigError("OBJ export needs N = 2 or --pca3");
    }
    if (c.pca3 && f.n() > 2) {
        const auto pca = pca3(mesh);
        std::string s = "xi_l,xi_r,pca1_nonisometric,pca2_nonisometric,pca3_nonisometric\n";
        for (int i = 0; i < pr.grid.nl; ++i)
            for (int j = 0; j < pr.grid.nr; ++j) {
                const auto& v = pca.points[pr.grid.index(i, j)];
                const Point p = pr.grid.point(i, j);
                s += fmt17(p.l) + "," + fmt17(p.r) + "," + fmt17(v(0)) + "," + fmt17(v(1)) + "," + fmt17(v(2)) + "\n";
            }
        write_file(dir / "surface_pca3_nonisometric.csv", s);
        write_file(dir / "surface_pca3_nonisometric.obj", grid_obj(pr.grid, [&](std::size_t k) { return pca.points[k]; }));
        written.push_back((dir / "surface_pca3_nonisometric.csv").string());
        written.push_back((dir / "surface_pca3_nonisometric.obj").string());
    }
    out << "vertices " << pr.grid.size() << "\n";
    for (const auto& w : written) out << "wrote " << w << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// sine-gordon

// Velocity of the frame in which the Piette profile is stationary up to a
// periodic modulation.
inline double piette_comoving_velocity(cd lambda) {
    const cd lb = std::conj(lambda);
    const double kl = 4.0 * std::real(1.0 / (1.0 + lb)) - 2.0, kr = 4.0 * std::real(1.0 / (1.0 - lb)) - 2.0;
    if (auto v = comoving_velocity(kl, kr)) return *v;
    const double ml = 4.0 * std::imag(1.0 / (1.0 + lb)), mr = 4.0 * std::imag(1.0 / (1.0 - lb));
    if (auto v = comoving_velocity(ml, mr)) return *v;
    return 0.0;
}

inline int cmd_sine_gordon(const RunConfig& c, std::ostream& out, std::ostream& err) {
    if (c.sg.times.empty()) {
        out << "no times requested\n";
        return 0;
    }
    const Prepared pr = prepare(c, c.normalize);
    if (pr.rescaled)
        err << "note: Chebyshev gauge restored by rescaling xi_L by " << fmt17(pr.scale_l) << " and xi_R by "
            << fmt17(pr.scale_r) << "\n";
    const ProjectorField& f = pr.field;
    require_cp1(f);
    PhaseOptions opt;
    opt.anchor = grid_basepoint(pr, c);
    const PhaseField ph = sg_phase(f, pr.grid, opt);
    const double V = c.sg.velocity;
    std::vector<double> X(c.sg.nx);
    for (int k = 0; k < c.sg.nx; ++k)
        X[k] = k == c.sg.nx - 1 ? c.sg.x_max : c.sg.x_min + k * (c.sg.x_max - c.sg.x_min) / (c.sg.nx - 1);
    const std::filesystem::path dir(c.out_dir);
    for (std::size_t t = 0; t < c.sg.times.size(); ++t) {
        const double T = c.sg.times[t];
        const auto s = to_standard_form(ph, V, X, {T}, [&](Point q) { return phase_at(f, q); });
        std::string text = "X_tilde,T_tilde,phi\n";
        for (std::size_t k = 0; k < X.size(); ++k) text += fmt17(X[k]) + "," + fmt17(T) + "," + fmt17(s.at(k, 0)) + "\n";
        char name[32];
        std::snprintf(name, sizeof name, "slice_%02zu.csv", t);
        write_file(dir / name, text);
        out << "wrote " << (dir / name).string() << " (T = " << fmt17(T) << ", V = " << fmt17(V) << ")\n";
    }
    std::string grid_text = "xi_l,xi_r,phi\n";
    for (int i = 0; i < ph.grid.nl; ++i)
        for (int j = 0; j < ph.grid.nr; ++j) {
            const Point p = ph.grid.point(i, j);
            grid_text += fmt17(p.l) + "," + fmt17(p.r) + "," + fmt17(ph.at(i, j)) + "\n";
        }
    write_file(dir / "phase.csv", grid_text);
    out << "wrote " << (dir / "phase.csv").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// frame

inline Json matrix_json(const Eigen::MatrixXd& m) {
    Json j = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(r, k));
        j.push_back(row);
    }
    return j;
}
inline Json vector_json(const RVector& v) {
    Json j = Json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) j.push_back(v(k));
    return j;
}
inline Json vector_json(const std::vector<double>& v) {
    Json j = Json::array();
    for (double x : v) j.push_back(x);
    return j;
}

inline Json frame_report(const ProjectorField& f, Point p) {
    MovingFrame fr;
    const GWTable gw = gw_coefficients(f, p, 1e-4, 4, nullptr, &fr);
    const BasisSet basis = standard_basis(f.n());
    Json j;
    j["command"] = "frame";
    j["point"] = Json::array({p.l, p.r});
    j["n"] = f.n();
    Json labels = Json::array();
    for (const auto& l : basis.labels) labels.push_back(l.str());
    j["basis"] = labels;
    j["X_L"] = vector_json(coords(fr.XL, basis));
    j["X_R"] = vector_json(coords(fr.XR, basis));
    Json normals = Json::array();
    for (const auto& nv : fr.normals) normals.push_back(vector_json(coords(nv, basis)));
    j["normals"] = normals;
    std::vector<AlgebraElement> all{fr.XL, fr.XR};
    all.insert(all.end(), fr.normals.begin(), fr.normals.end());
    j["gram"] = matrix_json(gram(all));
    j["p_LR"] = fr.pLR;
    Json g;
    g["christoffel"] = {{"LL", gw.A.LL}, {"LR", gw.A.LR}, {"RL", gw.A.RL}, {"RR", gw.A.RR}};
    g["H"] = vector_json(gw.H);
    g["Q_L"] = vector_json(gw.QL);
    g["Q_R"] = vector_json(gw.QR);
    g["alpha_L"] = vector_json(gw.alphaL);
    g["beta_L"] = vector_json(gw.betaL);
    g["alpha_R"] = vector_json(gw.alphaR);
    g["beta_R"] = vector_json(gw.betaR);
    g["s_L"] = matrix_json(gw.sL);
    g["s_R"] = matrix_json(gw.sR);
    j["gauss_weingarten"] = g;
    j["residuals"] = {{"gram", frame_gram_defect(fr)},
                      {"skew", gw.skew_defect},
                      {"alpha_beta", gw.alpha_beta_defect},
                      {"reconstruction", gw.reconstruction_residual},
                      {"constraint", gw.constraint_residual}};
    return j;
}

inline int cmd_frame(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const Prepared pr = prepare(c, c.normalize);
    if (pr.rescaled)
        err << "note: Chebyshev gauge restored by rescaling xi_L by " << fmt17(pr.scale_l) << " and xi_R by "
            << fmt17(pr.scale_r) << "\n";
    const Point p = c.frame_point ? pr.map(*c.frame_point) : grid_basepoint(pr, c);
    const std::string text = json_string(frame_report(pr.field, p));
    write_file(std::filesystem::path(c.out_dir) / "frame.json", text);
    out << text;
    return 0;
}

// ---------------------------------------------------------------------------
// entry point

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"sigmasurf: surfaces of Grassmannian sigma models"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, out_dir, format, mode, grid, domain, times, point, velocity;
    std::vector<std::string> params;
    double fd_step = 0.0;
    int fd_order = 0;
    bool pca = false, timing = false;
    app.add_option("--config", config_path, "INI configuration file");
    app.add_option("--param", params, "override, section.key=value (repeatable)");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--format", format, "csv|obj|json");
    app.add_option("--mode", mode, "analytic|fd");
    app.add_option("--fd-step", fd_step, "finite-difference step");
    app.add_option("--fd-order", fd_order, "finite-difference order (2 or 4)");
    app.add_option("--grid", grid, "nL,nR");
    app.add_option("--domain", domain, "lmin,lmax,rmin,rmax");
    app.add_flag("--pca3", pca, "also export a 3-axis PCA projection (N > 2, not isometric)");
    app.add_flag("--timing", timing, "include wall times in reports");
    auto* verify = app.add_subcommand("verify", "run the verification suite");
    auto* surface = app.add_subcommand("surface", "integrate and export the surface");
    auto* sg = app.add_subcommand("sine-gordon", "export sine-Gordon time slices");
    sg->add_option("--velocity", velocity, "boost velocity |V| < 1");
    sg->add_option("--times", times, "comma-separated T values");
    auto* frame = app.add_subcommand("frame", "moving frame report at a point");
    frame->add_option("--point", point, "l,r");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        ConfigTree t;
        if (!config_path.empty()) t = load_config_tree(config_path);
        for (const auto& kv : params) apply_param(t, kv);
        auto put_list = [&](const std::string& text, const std::vector<std::string>& keys, const std::string& flag) {
            std::vector<std::string> parts;
            std::stringstream ss(text);
            std::string item;
            while (std::getline(ss, item, ',')) parts.push_back(item);
            if (parts.size() != keys.size()) throw ConfigError(flag + " expects " + std::to_string(keys.size()) + " comma-separated values");
            for (std::size_t k = 0; k < keys.size(); ++k) t.put(keys[k], parts[k]);
        };
        if (!out_dir.empty()) t.put("output.dir", out_dir);
        if (!format.empty()) t.put("output.format", format);
        if (!mode.empty()) t.put("derivatives.mode", mode);
        if (fd_step != 0.0) t.put("derivatives.h", fmt17(fd_step));
        if (fd_order != 0) t.put("derivatives.order", std::to_string(fd_order));
        if (!grid.empty()) put_list(grid, {"grid.nl", "grid.nr"}, "--grid");
        if (!domain.empty()) put_list(domain, {"domain.l_min", "domain.l_max", "domain.r_min", "domain.r_max"}, "--domain");
        if (pca) t.put("output.pca3", "true");
        if (timing) t.put("output.timing", "true");
        if (sg->parsed()) {
            if (!velocity.empty()) t.put("sine_gordon.velocity", velocity);
            if (sg->count("--times")) t.put("sine_gordon.times", times);
        }
        if (!point.empty()) put_list(point, {"frame.l", "frame.r"}, "--point");

        // "comoving" selects the Piette co-moving frame
        const auto vel = t.get_optional<std::string>("sine_gordon.velocity");
        const bool comoving = vel && detail::trim(*vel) == "comoving";
        if (comoving) t.get_child("sine_gordon").erase("velocity");
        RunConfig c = interpret_config(t);
        if (comoving) {
            const auto* pp = std::get_if<PietteParams>(&c.params);
            if (!pp) throw ConfigError("sine_gordon.velocity = comoving needs the piette family");
            c.sg.velocity = piette_comoving_velocity(pp->lambda);
        }
        validate(c);
        if (verify->parsed()) return cmd_verify(c, out, err);
        if (surface->parsed()) return cmd_surface(c, out, err);
        if (sg->parsed()) return cmd_sine_gordon(c, out, err);
        if (frame->parsed()) return cmd_frame(c, out, err);
        return 2;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParameterError& e) {
        err << "parameter error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace sigmasurf
