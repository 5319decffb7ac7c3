#include "nls/config.hpp"

#include "nls/errors.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <numbers>
#include <set>
#include <sstream>

namespace nls {

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::follower: return "follower";
        case ExperimentKind::leader: return "leader";
        case ExperimentKind::semilinear: return "semilinear";
        case ExperimentKind::boundary: return "boundary";
        case ExperimentKind::observability: return "observability";
    }
    return "?";
}

std::string to_string(ChannelKind kind) {
    return kind == ChannelKind::distributed ? "distributed" : "boundary";
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> words(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

double to_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) throw ConfigError("missing number for '" + key + "'");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
        throw ConfigError("malformed number for '" + key + "': '" + t + "'");
    }
    return v;
}

long to_long(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
        throw ConfigError("malformed integer for '" + key + "': '" + t + "'");
    }
    return v;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Interval to_interval(const std::string& key, const std::string& text) {
    const auto w = words(text);
    if (w.size() != 2) throw ConfigError("'" + key + "' expects two numbers 'a b'");
    Interval iv{to_double(key, w[0]), to_double(key, w[1])};
    if (!(iv.a < iv.b)) throw ConfigError("'" + key + "' needs a < b");
    return iv;
}

std::string fmt(const Interval& iv) { return fmt(iv.a) + " " + fmt(iv.b); }

struct Key {
    std::string section;
    std::string name;
    std::string doc;
    std::function<void(ScenarioConfig&, const std::string&)> set;
    std::function<std::optional<std::string>(const ScenarioConfig&)> get;
};

template <typename T>
Key number(std::string sec, std::string name, std::string doc, T ScenarioConfig::*field) {
    Key k{sec, name, std::move(doc), nullptr, nullptr};
    const std::string full = sec + "." + name;
    k.set = [field, full](ScenarioConfig& c, const std::string& v) {
        if constexpr (std::is_same_v<T, double>) {
            c.*field = to_double(full, v);
        } else {
            const long x = to_long(full, v);
            if (x < 0) throw ConfigError("'" + full + "' must be non-negative");
            c.*field = static_cast<T>(x);
        }
    };
    k.get = [field](const ScenarioConfig& c) -> std::optional<std::string> {
        if constexpr (std::is_same_v<T, double>) {
            return fmt(c.*field);
        } else {
            return std::to_string(c.*field);
        }
    };
    return k;
}

Key text(std::string sec, std::string name, std::string doc, std::string ScenarioConfig::*field) {
    return Key{sec, name, std::move(doc),
               [field](ScenarioConfig& c, const std::string& v) { c.*field = trim(v); },
               [field](const ScenarioConfig& c) -> std::optional<std::string> {
                   return c.*field;
               }};
}

Key data(std::string name, std::string doc, DataSpec ScenarioConfig::*field) {
    return Key{"data", name, std::move(doc),
               [field](ScenarioConfig& c, const std::string& v) { c.*field = DataSpec::parse(v); },
               [field](const ScenarioConfig& c) -> std::optional<std::string> {
                   return (c.*field).text();
               }};
}

const std::vector<Key>& registry() {
    static const std::vector<Key> keys = [] {
        std::vector<Key> k;
        k.push_back({"experiment", "kind",
                     "follower | leader | semilinear | boundary | observability (required)",
                     [](ScenarioConfig& c, const std::string& v) {
                         const std::string t = trim(v);
                         if (t == "follower") c.kind = ExperimentKind::follower;
                         else if (t == "leader") c.kind = ExperimentKind::leader;
                         else if (t == "semilinear") c.kind = ExperimentKind::semilinear;
                         else if (t == "boundary") c.kind = ExperimentKind::boundary;
                         else if (t == "observability") c.kind = ExperimentKind::observability;
                         else throw ConfigError("unknown experiment kind '" + t + "'");
                     },
                     [](const ScenarioConfig& c) -> std::optional<std::string> {
                         return to_string(c.kind);
                     }});
        k.push_back({"experiment", "channel",
                     "distributed | boundary follower (default: boundary for kind = boundary)",
                     [](ScenarioConfig& c, const std::string& v) {
                         const std::string t = trim(v);
                         if (t == "distributed") c.channel = ChannelKind::distributed;
                         else if (t == "boundary") c.channel = ChannelKind::boundary;
                         else throw ConfigError("unknown channel '" + t + "'");
                     },
                     [](const ScenarioConfig& c) -> std::optional<std::string> {
                         return to_string(c.channel);
                     }});
        k.push_back(number("experiment", "seed", "seed of the mt19937_64 sample stream (1)",
                           &ScenarioConfig::seed));
        k.push_back(text("experiment", "output", "output directory, relative to $NLS_OUTPUT_ROOT (out)",
                         &ScenarioConfig::output));
        k.push_back(number("grid", "n", "interior nodes (required)", &ScenarioConfig::n));
        k.push_back(number("grid", "n_steps", "time steps (required)", &ScenarioConfig::n_steps));
        k.push_back(number("grid", "length", "domain length L (1)", &ScenarioConfig::length));
        k.push_back(number("grid", "horizon", "final time T (0.2)", &ScenarioConfig::horizon));
        k.push_back({"regions", "omega", "leader region 'a b' (required)",
                     [](ScenarioConfig& c, const std::string& v) {
                         c.omega = to_interval("regions.omega", v);
                     },
                     [](const ScenarioConfig& c) -> std::optional<std::string> {
                         return fmt(c.omega);
                     }});
        k.push_back({"regions", "omega_prime", "region of the weight construction (middle half of omega)",
                     [](ScenarioConfig& c, const std::string& v) {
                         c.omega_prime = to_interval("regions.omega_prime", v);
                     },
                     [](const ScenarioConfig& c) -> std::optional<std::string> {
                         if (!c.omega_prime) return std::nullopt;
                         return fmt(*c.omega_prime);
                     }});
        k.push_back({"regions", "follower", "follower region O (required for distributed followers)",
                     [](ScenarioConfig& c, const std::string& v) {
                         c.follower = to_interval("regions.follower", v);
                     },
                     [](const ScenarioConfig& c) -> std::optional<std::string> {
                         if (!c.follower) return std::nullopt;
                         return fmt(*c.follower);
                     }});
        k.push_back({"regions", "target_region", "tracking region O_d (required)",
                     [](ScenarioConfig& c, const std::string& v) {
                         c.target_region = to_interval("regions.target_region", v);
                     },
                     [](const ScenarioConfig& c) -> std::optional<std::string> {
                         return fmt(c.target_region);
                     }});
        k.push_back({"regions", "gamma_side", "boundary control side, left | right (right)",
                     [](ScenarioConfig& c, const std::string& v) {
                         const std::string t = trim(v);
                         if (t == "left") c.gamma_side = Side::left;
                         else if (t == "right") c.gamma_side = Side::right;
                         else throw ConfigError("gamma_side must be left or right");
                     },
                     [](const ScenarioConfig& c) -> std::optional<std::string> {
                         return to_string(c.gamma_side);
                     }});
        k.push_back(number("regions", "gamma_profile", "profile value at the boundary node (1)",
                           &ScenarioConfig::gamma_profile));
        k.push_back(number("control", "mu", "follower penalty (1e2)", &ScenarioConfig::mu));
        k.push_back(number("control", "epsilon", "leader penalty (1e-4)", &ScenarioConfig::epsilon));
        k.push_back({"control", "eps_list", "epsilon sweep, list or 'a..b' by decades (1e-1..1e-5)",
                     [](ScenarioConfig& c, const std::string& v) { c.eps_list = parse_eps_range(v); },
                     [](const ScenarioConfig& c) -> std::optional<std::string> {
                         std::string out;
                         for (double e : c.eps_list) out += (out.empty() ? "" : " ") + fmt(e);
                         return out;
                     }});
        k.push_back(number("control", "tol", "CG tolerance (1e-8)", &ScenarioConfig::tol));
        k.push_back(number("control", "max_iter", "CG iteration cap (500)", &ScenarioConfig::max_iter));
        k.push_back(number("control", "picard_tol", "follower fixed-point tolerance (1e-12)",
                           &ScenarioConfig::picard_tol));
        k.push_back(number("control", "max_outer", "semilinear outer iteration cap (50)",
                           &ScenarioConfig::max_outer));
        k.push_back(number("weights", "s", "Carleman parameter s (2)", &ScenarioConfig::s));
        k.push_back(number("weights", "lambda", "Carleman parameter lambda (1)", &ScenarioConfig::lambda));
        k.push_back(number("weights", "eta0_max", "max of eta0 (ln 2)", &ScenarioConfig::eta0_max));
        k.push_back(text("kernel", "type", "zero | separable | gaussian_decay | tabulated (zero)",
                         &ScenarioConfig::kernel_type));
        k.push_back(number("kernel", "amplitude", "kernel amplitude (1)",
                           &ScenarioConfig::kernel_amplitude));
        k.push_back(number("kernel", "mode", "separable kernel mode, c sin(k pi x/L) sin(k pi y/L) (1)",
                           &ScenarioConfig::kernel_mode));
        k.push_back(number("kernel", "width", "gaussian_decay width (0.2)", &ScenarioConfig::kernel_width));
        k.push_back(number("kernel", "decay", "gaussian_decay strength c_d (0)",
                           &ScenarioConfig::kernel_decay));
        k.push_back(text("kernel", "file", "tabulated kernel file with header 'k i j value'",
                         &ScenarioConfig::kernel_file));
        k.push_back(text("nonlinearity", "name", "zero | tanh | clip | linear (zero)",
                         &ScenarioConfig::nonlinearity));
        k.push_back(number("nonlinearity", "amplitude", "nonlinearity amplitude (0)",
                           &ScenarioConfig::nonlinearity_amplitude));
        k.push_back(text("nonlinearity", "placement", "reaction | kernel (reaction)",
                         &ScenarioConfig::placement));
        k.push_back(data("initial", "initial state y0 (eigenmode 1)", &ScenarioConfig::initial));
        k.push_back(data("target", "target y_d, constant in time (zero)", &ScenarioConfig::target));
        k.push_back(data("initial_reference", "initial state of the reference trajectory (zero)",
                         &ScenarioConfig::initial_reference));
        k.push_back(data("leader", "leader control for the follower experiment (zero)",
                         &ScenarioConfig::leader));
        k.push_back(number("data", "samples", "observability samples (50)", &ScenarioConfig::samples));
        k.push_back(number("data", "modes", "modes per observability sample (16)", &ScenarioConfig::modes));
        return k;
    }();
    return keys;
}

const std::set<std::string> kRequired = {"experiment.kind", "grid.n", "grid.n_steps",
                                         "regions.omega", "regions.target_region"};

}  // namespace

DataSpec DataSpec::parse(const std::string& text) {
    const auto w = words(text);
    if (w.empty()) throw ConfigError("empty data generator");
    DataSpec d;
    d.kind = w[0];
    if (d.kind == "zero" && w.size() == 1) return d;
    if (d.kind == "eigenmode" && w.size() == 2) {
        const long k = to_long("eigenmode", w[1]);
        if (k < 1) throw ConfigError("eigenmode index must be >= 1");
        d.mode = static_cast<int>(k);
        return d;
    }
    if (d.kind == "bump" && w.size() == 3) {
        d.center = to_double("bump center", w[1]);
        d.width = to_double("bump width", w[2]);
        if (!(d.width > 0.0)) throw ConfigError("bump width must be positive");
        return d;
    }
    if (d.kind == "file" && w.size() == 2) {
        d.path = w[1];
        return d;
    }
    throw ConfigError("bad data generator '" + trim(text) +
                      "' (expected zero | eigenmode k | bump c w | file path)");
}

std::string DataSpec::text() const {
    if (kind == "eigenmode") return "eigenmode " + std::to_string(mode);
    if (kind == "bump") return "bump " + fmt(center) + " " + fmt(width);
    if (kind == "file") return "file " + path;
    return "zero";
}

Vector generate(const DataSpec& spec, const Grid& grid, const std::string& base_dir) {
    Vector v = Vector::Zero(grid.nodes());
    const double L = grid.length();
    if (spec.kind == "eigenmode") {
        for (int i = 1; i <= grid.interior(); ++i) {
            v[i] = std::sin(spec.mode * std::numbers::pi * grid.x(i) / L);
        }
    } else if (spec.kind == "bump") {
        for (int i = 1; i <= grid.interior(); ++i) {
            const double d = (grid.x(i) - spec.center) / spec.width;
            v[i] = std::exp(-d * d);
        }
    } else if (spec.kind == "file") {
        std::filesystem::path p(spec.path);
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        std::ifstream in(p);
        if (!in) throw ConfigError("cannot open data file: " + p.string());
        std::vector<bool> seen(grid.nodes(), false);
        std::string line;
        while (std::getline(in, line)) {
            const std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            const auto w = words(t);
            if (w.size() != 2) throw ConfigError("data file lines must read 'node value': " + t);
            const long i = to_long("node", w[0]);
            if (i < 0 || i >= grid.nodes()) throw ConfigError("data file node out of range: " + t);
            v[i] = to_double("value", w[1]);
            seen[i] = true;
        }
        for (int i = 1; i <= grid.interior(); ++i) {
            if (!seen[i]) throw ConfigError("data file misses node " + std::to_string(i));
        }
        v[0] = v[grid.nodes() - 1] = 0.0;
    }
    return v;
}

Interval ScenarioConfig::omega_prime_or_default() const {
    if (omega_prime) return *omega_prime;
    const double q = 0.25 * omega.length();
    return {omega.a + q, omega.b - q};
}

ScenarioConfig parse_config(std::istream& in, const std::string& base_dir) {
    ScenarioConfig c;
    c.base_dir = base_dir;
    std::set<std::string> seen;
    std::set<std::string> sections;
    for (const Key& k : registry()) sections.insert(k.section);
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string t = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (t.empty()) continue;
        const std::string where = "line " + std::to_string(lineno) + ": ";
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError(where + "malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (!sections.count(section)) throw ConfigError(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
        if (section.empty()) throw ConfigError(where + "key outside of a section");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        const auto it = std::find_if(registry().begin(), registry().end(), [&](const Key& k) {
            return k.section == section && k.name == key;
        });
        if (it == registry().end()) {
            throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
        }
        const std::string full = section + "." + key;
        if (!seen.insert(full).second) throw ConfigError(where + "duplicate key '" + full + "'");
        try {
            it->set(c, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    for (const std::string& r : kRequired) {
        if (!seen.count(r)) throw ConfigError("missing required key '" + r + "'");
    }
    if (!seen.count("experiment.channel")) {
        c.channel = c.kind == ExperimentKind::boundary ? ChannelKind::boundary
                                                        : ChannelKind::distributed;
    }
    validate(c);
    return c;
}

ScenarioConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    return parse_config(in, std::filesystem::path(path).parent_path().string());
}

std::string emit_config(const ScenarioConfig& config) {
    std::ostringstream out;
    std::string section;
    for (const Key& k : registry()) {
        const auto v = k.get(config);
        if (!v) continue;
        if (k.section != section) {
            out << (section.empty() ? "" : "\n") << '[' << k.section << "]\n";
            section = k.section;
        }
        out << k.name << " = " << *v << '\n';
    }
    return out.str();
}

void validate(const ScenarioConfig& c) {
    if (c.n < 2) throw ConfigError("grid.n must be at least 2");
    if (c.n > 512) throw ConfigError("grid.n must not exceed 512");
    if (c.n_steps < 1 || c.n_steps > 4096) throw ConfigError("grid.n_steps must lie in [1, 4096]");
    if (!(c.length > 0.0)) throw ConfigError("grid.length must be positive");
    if (!(c.horizon > 0.0)) throw ConfigError("grid.horizon must be positive");
    auto inside = [&](const Interval& iv, const char* name) {
        if (!(iv.a > 0.0 && iv.b < c.length)) {
            throw ConfigError(std::string(name) + " must lie strictly inside (0, L)");
        }
    };
    inside(c.omega, "regions.omega");
    inside(c.target_region, "regions.target_region");
    inside(c.omega_prime_or_default(), "regions.omega_prime");
    if (!c.omega.intersects(c.target_region)) {
        throw ConfigError("omega and O_d are disjoint: the controllability result assumes "
                          "O_d and omega intersect");
    }
    const bool distributed_kind = c.kind == ExperimentKind::follower || c.kind == ExperimentKind::leader;
    if (distributed_kind && c.channel != ChannelKind::distributed) {
        throw ConfigError("follower and leader experiments use a distributed follower");
    }
    if (c.kind == ExperimentKind::boundary && c.channel != ChannelKind::boundary) {
        throw ConfigError("boundary experiments use a boundary follower");
    }
    if (c.channel == ChannelKind::distributed) {
        if (!c.follower) throw ConfigError("regions.follower is required for a distributed follower");
        inside(*c.follower, "regions.follower");
        if (c.omega.intersects(*c.follower)) {
            throw ConfigError("omega and the follower region O must be disjoint");
        }
    }
    if (!std::isfinite(c.gamma_profile) || c.gamma_profile == 0.0) {
        throw ConfigError("regions.gamma_profile must be nonzero");
    }
    if (!(c.mu > 0.0)) throw ConfigError("control.mu must be positive");
    if (!(c.epsilon > 0.0)) throw ConfigError("control.epsilon must be positive");
    if (c.eps_list.empty()) throw ConfigError("control.eps_list must not be empty");
    for (double e : c.eps_list) {
        if (!(e >= 1e-8)) throw ConfigError("control.eps_list entries must be >= 1e-8");
    }
    if (!(c.tol > 0.0) || !(c.picard_tol > 0.0)) throw ConfigError("tolerances must be positive");
    if (c.max_iter < 1 || c.max_outer < 1) throw ConfigError("iteration caps must be positive");
    if (!(c.s >= 1.0) || !(c.lambda >= 1.0)) throw ConfigError("weights.s and weights.lambda must be >= 1");
    if (!(c.eta0_max > 0.0)) throw ConfigError("weights.eta0_max must be positive");
    static const std::set<std::string> kernels = {"zero", "separable", "gaussian_decay", "tabulated"};
    if (!kernels.count(c.kernel_type)) throw ConfigError("unknown kernel type '" + c.kernel_type + "'");
    if (c.kernel_type == "tabulated" && c.kernel_file.empty()) {
        throw ConfigError("kernel.file is required for a tabulated kernel");
    }
    if (c.kernel_mode < 1) throw ConfigError("kernel.mode must be >= 1");
    static const std::set<std::string> nls = {"zero", "tanh", "clip", "linear"};
    if (!nls.count(c.nonlinearity)) throw ConfigError("unknown nonlinearity '" + c.nonlinearity + "'");
    if (c.placement != "reaction" && c.placement != "kernel") {
        throw ConfigError("nonlinearity.placement must be reaction or kernel");
    }
    if (c.samples < 1 || c.modes < 1) throw ConfigError("data.samples and data.modes must be >= 1");
}

std::string config_reference() {
    std::ostringstream out;
    std::string section;
    for (const Key& k : registry()) {
        if (k.section != section) {
            out << '[' << k.section << "]\n";
            section = k.section;
        }
        out << "  " << k.name << ": " << k.doc << '\n';
    }
    return out.str();
}

std::vector<double> parse_eps_range(const std::string& text) {
    const std::string t = trim(text);
    const auto dots = t.find("..");
    std::vector<double> out;
    if (dots != std::string::npos) {
        const double a = to_double("eps range", t.substr(0, dots));
        const double b = to_double("eps range", t.substr(dots + 2));
        if (!(a > 0.0 && b > 0.0)) throw ConfigError("eps range bounds must be positive");
        const double la = std::log10(a), lb = std::log10(b);
        const int n = static_cast<int>(std::lround(std::abs(lb - la)));
        const double step = la > lb ? -1.0 : 1.0;
        for (int i = 0; i <= n; ++i) out.push_back(std::pow(10.0, la + step * i));
        return out;
    }
    for (const std::string& w : words(t)) out.push_back(to_double("eps_list", w));
    if (out.empty()) throw ConfigError("empty eps list");
    return out;
}

}  // namespace nls
