#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "families.hpp"
#include "grid.hpp"
#include "projector_field.hpp"
#include "surface_geometry.hpp"

namespace sigmasurf {

struct Tolerances {
    double projector = 1e-10;
    double el_analytic = 1e-10, el_fd = 1e-5;
    double chebyshev = 1e-8;
    double curvature_analytic = 1e-6, curvature_fd = 1e-3;
    // grid truncation of the phase patch dominates, whatever the mode
    double sine_gordon = 1e-4;
    double zero_curvature = 1e-6;
    // Samples with 4 - p_{L|R}^2 below the margin are too ill-conditioned
    // for the curvature formula and are skipped.
    double curvature_margin_analytic = 0.02, curvature_margin_fd = 0.3;
};

struct SineGordonConfig {
    double velocity = 0.0;
    std::vector<double> times{0.0};
    double x_min = -4.0, x_max = 4.0;
    int nx = 161;
    // Patch used for the residual check in verify.
    double step = 0.01;
    int points = 101;
};

struct RunConfig {
    std::string family = "tanh";
    FamilyParams params = TanhParams{};
    int embed = 0;  // 0: keep the native 2x2 field
    Rect domain{-2, 2, -2, 2};
    int nl = 201, nr = 201;
    DerivativeConfig deriv;
    std::optional<Point> basepoint;  // default: grid centre vertex
    bool normalize = true;
    Tolerances tol;
    std::string out_dir = ".";
    std::string format = "csv";
    bool pca3 = false;
    bool timing = false;
    SineGordonConfig sg;
    std::optional<Point> frame_point;
};

namespace detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& s) {
    const std::string t = trim(s);
    if (t == "pi") return pi;
    if (t == "-pi") return -pi;
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key + ": not a number: '" + s + "'");
    }
    if (pos != t.size()) {
        // simple fractions such as -1/20
        if (t[pos] == '/') {
            std::size_t p2 = 0;
            const std::string rest = t.substr(pos + 1);
            double d = 0.0;
            try {
                d = std::stod(rest, &p2);
            } catch (const std::exception&) {
                throw ConfigError(key + ": not a number: '" + s + "'");
            }
            if (p2 == rest.size() && d != 0.0) return v / d;
        }
        throw ConfigError(key + ": not a number: '" + s + "'");
    }
    if (!std::isfinite(v)) throw ConfigError(key + ": value must be finite");
    return v;
}

inline int parse_int(const std::string& key, const std::string& s) {
    const double v = parse_double(key, s);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(key + ": not an integer: '" + s + "'");
    return static_cast<int>(v);
}

inline bool parse_bool(const std::string& key, const std::string& s) {
    const std::string t = trim(s);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw ConfigError(key + ": not a boolean: '" + s + "'");
}

// Accepts "x", "x+yi", "x-yi", "yi" and "x,y".
inline cd parse_complex(const std::string& key, const std::string& s) {
    std::string t;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    if (t.empty()) throw ConfigError(key + ": empty complex value");
    if (auto c = t.find(','); c != std::string::npos)
        return {parse_double(key, t.substr(0, c)), parse_double(key, t.substr(c + 1))};
    if (t.back() != 'i') return {parse_double(key, t), 0.0};
    t.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t k = t.size(); k-- > 1;)
        if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
            split = k;
            break;
        }
    auto imag_part = [&](const std::string& u) {
        if (u.empty() || u == "+") return 1.0;
        if (u == "-") return -1.0;
        return parse_double(key, u);
    };
    if (split == std::string::npos) return {0.0, imag_part(t)};
    return {parse_double(key, t.substr(0, split)), imag_part(t.substr(split))};
}

inline std::vector<double> parse_list(const std::string& key, const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (trim(item).empty()) continue;
        out.push_back(parse_double(key, item));
    }
    return out;
}

}  // namespace detail

using ConfigTree = boost::property_tree::ptree;

inline ConfigTree load_config_tree(const std::string& path) {
    ConfigTree t;
    try {
        boost::property_tree::read_ini(path, t);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("cannot read config: " + std::string(e.what()));
    }
    return t;
}

inline ConfigTree parse_config_string(const std::string& text) {
    ConfigTree t;
    std::istringstream in(text);
    try {
        boost::property_tree::read_ini(in, t);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError("cannot parse config: " + std::string(e.what()));
    }
    return t;
}

// "section.key=value"
inline void apply_param(ConfigTree& t, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--param expects section.key=value, got '" + kv + "'");
    const std::string key = detail::trim(kv.substr(0, eq));
    if (key.find('.') == std::string::npos || key.front() == '.' || key.back() == '.')
        throw ConfigError("--param key must be section.key, got '" + key + "'");
    t.put(key, detail::trim(kv.substr(eq + 1)));
}

inline RunConfig interpret_config(const ConfigTree& t) {
    using namespace detail;
    static const std::map<std::string, std::set<std::string>> known{
        {"family", {"name", "embed", "a", "b", "c", "d", "p", "chi0", "K", "xi0", "lambda", "alpha", "beta"}},
        {"domain", {"l_min", "l_max", "r_min", "r_max"}},
        {"grid", {"nl", "nr"}},
        {"derivatives", {"mode", "h", "order"}},
        {"basepoint", {"l", "r"}},
        {"geometry", {"normalize"}},
        {"tolerances",
         {"projector", "el_analytic", "el_fd", "chebyshev", "curvature_analytic", "curvature_fd",
          "sine_gordon", "zero_curvature", "curvature_margin_analytic", "curvature_margin_fd"}},
        {"output", {"dir", "format", "pca3", "timing"}},
        {"sine_gordon", {"velocity", "times", "x_min", "x_max", "nx", "step", "points"}},
        {"frame", {"l", "r"}},
    };
    for (const auto& [sec, body] : t) {
        auto it = known.find(sec);
        if (it == known.end()) throw ConfigError("unknown config section [" + sec + "]");
        if (!body.data().empty()) throw ConfigError("top-level key '" + sec + "' outside a section");
        for (const auto& [key, val] : body) {
            (void)val;
            if (!it->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + sec + "]");
        }
    }
    auto get = [&](const std::string& path) -> std::optional<std::string> {
        if (auto v = t.get_optional<std::string>(path)) return *v;
        return std::nullopt;
    };
    auto num = [&](const std::string& path, double& dst) {
        if (auto v = get(path)) dst = parse_double(path, *v);
    };
    auto inum = [&](const std::string& path, int& dst) {
        if (auto v = get(path)) dst = parse_int(path, *v);
    };
    auto flag = [&](const std::string& path, bool& dst) {
        if (auto v = get(path)) dst = parse_bool(path, *v);
    };

    RunConfig c;
    if (auto v = get("family.name")) c.family = trim(*v);
    const std::string& fam = c.family;
    std::set<std::string> allowed;
    if (fam == "tanh") {
        TanhParams p;
        num("family.a", p.a);
        num("family.b", p.b);
        num("family.c", p.c);
        num("family.d", p.d);
        c.params = p;
        allowed = {"a", "b", "c", "d"};
    } else if (fam == "expwell") {
        ExpWellParams p;
        num("family.p", p.p);
        num("family.chi0", p.chi0);
        num("family.d", p.d);
        c.params = p;
        allowed = {"p", "chi0", "d"};
    } else if (fam == "elliptic") {
        EllipticParams p;
        num("family.K", p.K);
        num("family.xi0", p.xi0);
        num("family.d", p.d);
        c.params = p;
        allowed = {"K", "xi0", "d"};
    } else if (fam == "piette") {
        PietteParams p;
        if (auto v = get("family.lambda")) p.lambda = parse_complex("family.lambda", *v);
        c.params = p;
        allowed = {"lambda"};
    } else if (fam == "dressed") {
        DressedParams p;
        if (auto v = get("family.lambda")) p.lambda = parse_complex("family.lambda", *v);
        if (auto v = get("family.alpha")) p.alpha = parse_complex("family.alpha", *v);
        if (auto v = get("family.beta")) p.beta = parse_complex("family.beta", *v);
        c.params = p;
        allowed = {"lambda", "alpha", "beta"};
    } else if (fam == "control") {
        c.params = ControlParams{};
    } else if (fam == "vacuum") {
        c.params = VacuumParams{};
    } else {
        throw ConfigError("unknown family '" + fam + "'");
    }
    if (auto f = t.get_child_optional("family"))
        for (const auto& [key, val] : *f) {
            (void)val;
            if (key != "name" && key != "embed" && !allowed.count(key))
                throw ConfigError("parameter '" + key + "' does not apply to family " + fam);
        }
    inum("family.embed", c.embed);

    c.domain = default_domain(c.params);
    num("domain.l_min", c.domain.l_min);
    num("domain.l_max", c.domain.l_max);
    num("domain.r_min", c.domain.r_min);
    num("domain.r_max", c.domain.r_max);
    inum("grid.nl", c.nl);
    inum("grid.nr", c.nr);
    if (auto v = get("derivatives.mode")) {
        const std::string m = trim(*v);
        if (m == "analytic") c.deriv.mode = DerivativeMode::analytic;
        else if (m == "fd") c.deriv.mode = DerivativeMode::fd;
        else throw ConfigError("derivatives.mode must be analytic or fd");
    }
    num("derivatives.h", c.deriv.h);
    inum("derivatives.order", c.deriv.order);
    if (get("basepoint.l") || get("basepoint.r")) {
        if (!get("basepoint.l") || !get("basepoint.r")) throw ConfigError("basepoint needs both l and r");
        c.basepoint = Point{parse_double("basepoint.l", *get("basepoint.l")), parse_double("basepoint.r", *get("basepoint.r"))};
    }
    flag("geometry.normalize", c.normalize);
    num("tolerances.projector", c.tol.projector);
    num("tolerances.el_analytic", c.tol.el_analytic);
    num("tolerances.el_fd", c.tol.el_fd);
    num("tolerances.chebyshev", c.tol.chebyshev);
    num("tolerances.curvature_analytic", c.tol.curvature_analytic);
    num("tolerances.curvature_fd", c.tol.curvature_fd);
    num("tolerances.sine_gordon", c.tol.sine_gordon);
    num("tolerances.zero_curvature", c.tol.zero_curvature);
    num("tolerances.curvature_margin_analytic", c.tol.curvature_margin_analytic);
    num("tolerances.curvature_margin_fd", c.tol.curvature_margin_fd);
    if (auto v = get("output.dir")) c.out_dir = trim(*v);
    if (auto v = get("output.format")) c.format = trim(*v);
    flag("output.pca3", c.pca3);
    flag("output.timing", c.timing);
    num("sine_gordon.velocity", c.sg.velocity);
    if (auto v = get("sine_gordon.times")) c.sg.times = parse_list("sine_gordon.times", *v);
    num("sine_gordon.x_min", c.sg.x_min);
    num("sine_gordon.x_max", c.sg.x_max);
    inum("sine_gordon.nx", c.sg.nx);
    num("sine_gordon.step", c.sg.step);
    inum("sine_gordon.points", c.sg.points);
    if (get("frame.l") || get("frame.r")) {
        if (!get("frame.l") || !get("frame.r")) throw ConfigError("frame point needs both l and r");
        c.frame_point = Point{parse_double("frame.l", *get("frame.l")), parse_double("frame.r", *get("frame.r"))};
    }
    return c;
}

inline void validate(const RunConfig& c) {
    if (c.nl < 9 || c.nr < 9) throw ConfigError("grid resolution must be at least 9 in each direction");
    if (!(c.domain.l_max > c.domain.l_min) || !(c.domain.r_max > c.domain.r_min))
        throw ConfigError("domain must satisfy l_min < l_max and r_min < r_max");
    if (c.deriv.order != 2 && c.deriv.order != 4) throw ConfigError("derivatives.order must be 2 or 4");
    if (!(c.deriv.h > 0.0)) throw ConfigError("derivatives.h must be positive");
    if (c.embed != 0 && c.embed < 3) throw ConfigError("family.embed must be 0 or at least 3");
    const Tolerances& t = c.tol;
    for (double v : {t.projector, t.el_analytic, t.el_fd, t.chebyshev, t.curvature_analytic, t.curvature_fd,
                     t.sine_gordon, t.zero_curvature, t.curvature_margin_analytic, t.curvature_margin_fd})
        if (!(v > 0.0)) throw ConfigError("tolerances must be positive");
    if (c.format != "csv" && c.format != "obj" && c.format != "json")
        throw ConfigError("output.format must be csv, obj or json");
    if (!(std::abs(c.sg.velocity) < 1.0)) throw ConfigError("sine_gordon.velocity must satisfy |V| < 1");
    if (c.sg.nx < 5) throw ConfigError("sine_gordon.nx must be at least 5");
    if (!(c.sg.x_max > c.sg.x_min)) throw ConfigError("sine_gordon.x_min must be below x_max");
    if (!(c.sg.step > 0.0) || c.sg.points < 9) throw ConfigError("sine_gordon.step > 0 and points >= 9 required");
}

// Field described by the config, before any Chebyshev rescale.
inline ProjectorField make_field(const RunConfig& c) {
    ProjectorField f = make_family(c.params, c.domain, c.deriv);
    if (c.embed) f = embed_block(f, c.embed);
    return f;
}

}  // namespace sigmasurf
