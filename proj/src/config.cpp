#include "icelines/config.hpp"

#include "icelines/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <variant>

namespace icelines {

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

// Minimal TOML subset: [section] headers, bare keys, floats/integers (inf, nan),
// booleans, basic strings and single-line arrays of numbers. Comments start with #.
using Value = std::variant<double, bool, std::string, std::vector<double>>;

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view text) {
    std::string s(trim(text));
    s.erase(std::remove(s.begin(), s.end(), '_'), s.end());
    if (!s.empty() && s.front() == '+') s.erase(0, 1);
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw ConfigError("not a number: '" + s + "'");
    }
    return x;
}

// Strip a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (c == '\\' && in_string) {
            ++i;
        } else if (c == '"') {
            in_string = !in_string;
        } else if (c == '#' && !in_string) {
            return line.substr(0, i);
        }
    }
    return line;
}

Value parse_value(std::string_view raw) {
    const std::string_view text = trim(raw);
    if (text.empty()) throw ConfigError("missing value");
    if (text == "true") return true;
    if (text == "false") return false;
    if (text.front() == '"') {
        if (text.size() < 2 || text.back() != '"') throw ConfigError("unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < text.size(); ++i) {
            char c = text[i];
            if (c == '\\') {
                if (i + 2 >= text.size()) throw ConfigError("dangling escape in string");
                c = text[++i];
                switch (c) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    case '"': case '\\': break;
                    default: throw ConfigError(std::string("unsupported escape \\") + c);
                }
            } else if (c == '"') {
                throw ConfigError("unescaped quote inside string");
            }
            out.push_back(c);
        }
        return out;
    }
    if (text.front() == '[') {
        if (text.back() != ']') throw ConfigError("arrays must close on the same line");
        std::vector<double> items;
        std::string_view body = trim(text.substr(1, text.size() - 2));
        while (!body.empty()) {
            const auto comma = body.find(',');
            const std::string_view item = trim(body.substr(0, comma));
            if (item.empty()) {
                if (comma == std::string_view::npos) break;  // trailing comma
                throw ConfigError("empty array element");
            }
            items.push_back(parse_number(item));
            if (comma == std::string_view::npos) break;
            body = trim(body.substr(comma + 1));
        }
        return items;
    }
    return parse_number(text);
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out.push_back(c);
        }
    }
    return out + "\"";
}

struct Entry {
    std::string section;  // "" for top level
    std::string key;
    std::function<void(ScenarioConfig&, const Value&)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

std::string where(const Entry& e) { return e.section.empty() ? e.key : e.section + "." + e.key; }

template <class T>
using Access = T& (*)(ScenarioConfig&);

template <class T>
Entry make_entry(std::string section, std::string key, Access<T> access) {
    Entry e{std::move(section), std::move(key), {}, {}};
    const std::string name = where(e);
    e.set = [access, name](ScenarioConfig& c, const Value& v) {
        if constexpr (std::is_same_v<T, double>) {
            if (!std::holds_alternative<double>(v)) throw ConfigError(name + " expects a number");
            access(c) = std::get<double>(v);
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!std::holds_alternative<bool>(v)) throw ConfigError(name + " expects true or false");
            access(c) = std::get<bool>(v);
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!std::holds_alternative<std::string>(v)) throw ConfigError(name + " expects a string");
            access(c) = std::get<std::string>(v);
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            if (!std::holds_alternative<std::vector<double>>(v)) throw ConfigError(name + " expects an array");
            access(c) = std::get<std::vector<double>>(v);
        } else {
            if (!std::holds_alternative<double>(v)) throw ConfigError(name + " expects an integer");
            const double x = std::get<double>(v);
            if (!(std::isfinite(x) && x == std::trunc(x) && std::abs(x) < 9e15)) {
                throw ConfigError(name + " expects an integer");
            }
            access(c) = static_cast<T>(x);
        }
    };
    e.get = [access](const ScenarioConfig& c) -> std::string {
        const T& x = access(const_cast<ScenarioConfig&>(c));
        if constexpr (std::is_same_v<T, double>) {
            return format_double(x);
        } else if constexpr (std::is_same_v<T, bool>) {
            return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
            return quote(x);
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            std::string out = "[";
            for (std::size_t i = 0; i < x.size(); ++i) out += (i ? ", " : "") + format_double(x[i]);
            return out + "]";
        } else {
            return std::to_string(x);
        }
    };
    return e;
}

#define ICELINES_ENTRY(T, section, key, expr) \
    make_entry<T>(section, key, +[](ScenarioConfig& c) -> T& { return expr; })

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        ICELINES_ENTRY(std::string, "", "scenario", c.scenario),
        ICELINES_ENTRY(double, "params", "R", c.params.R),
        ICELINES_ENTRY(double, "params", "Q", c.params.Q),
        ICELINES_ENTRY(double, "params", "A", c.params.A),
        ICELINES_ENTRY(double, "params", "B", c.params.B),
        ICELINES_ENTRY(double, "params", "C", c.params.C),
        ICELINES_ENTRY(double, "params", "alpha1", c.params.alpha1),
        ICELINES_ENTRY(double, "params", "alpha2", c.params.alpha2),
        ICELINES_ENTRY(double, "params", "T_cS", c.params.T_cS),
        ICELINES_ENTRY(double, "params", "T_cN_plus", c.params.T_cN_plus),
        ICELINES_ENTRY(double, "params", "T_cN_minus", c.params.T_cN_minus),
        ICELINES_ENTRY(double, "params", "rho", c.params.rho),
        ICELINES_ENTRY(double, "params", "a", c.params.a),
        ICELINES_ENTRY(double, "params", "b", c.params.b),
        ICELINES_ENTRY(double, "params", "b_minus", c.params.b_minus),
        ICELINES_ENTRY(double, "params", "b_plus", c.params.b_plus),
        ICELINES_ENTRY(double, "params", "eps", c.params.eps),
        ICELINES_ENTRY(double, "params", "beta", c.params.insolation.beta),
        ICELINES_ENTRY(int, "params", "M", c.params.insolation.M),
        ICELINES_ENTRY(double, "reduced", "T_cN", c.reduced_T_cN),
        ICELINES_ENTRY(std::string, "simulate", "mode", c.simulate.mode),
        ICELINES_ENTRY(double, "simulate", "w0", c.simulate.w0),
        ICELINES_ENTRY(double, "simulate", "eta_S0", c.simulate.eta_S0),
        ICELINES_ENTRY(double, "simulate", "eta_N0", c.simulate.eta_N0),
        ICELINES_ENTRY(double, "simulate", "xi_N0", c.simulate.xi_N0),
        ICELINES_ENTRY(double, "simulate", "t_end", c.simulate.t_end),
        ICELINES_ENTRY(double, "simulate", "output_dt", c.simulate.output_dt),
        ICELINES_ENTRY(double, "cycle", "tol", c.cycle.tol),
        ICELINES_ENTRY(int, "cycle", "max_iter", c.cycle.max_iter),
        ICELINES_ENTRY(int, "cycle", "samples", c.cycle.samples),
        ICELINES_ENTRY(double, "cycle", "contraction_delta", c.cycle.contraction_delta),
        ICELINES_ENTRY(bool, "cycle", "contraction", c.cycle.estimate_contraction),
        ICELINES_ENTRY(std::vector<double>, "sweep", "eps", c.sweep.eps),
        ICELINES_ENTRY(std::vector<double>, "sweep", "T_cN_minus", c.sweep.T_cN_minus),
        ICELINES_ENTRY(double, "classify", "w", c.classify.w),
        ICELINES_ENTRY(double, "classify", "eta_S", c.classify.eta_S),
        ICELINES_ENTRY(double, "classify", "eta_N", c.classify.eta_N),
        ICELINES_ENTRY(double, "integrator", "rel_tol", c.integrator.rel_tol),
        ICELINES_ENTRY(double, "integrator", "abs_tol", c.integrator.abs_tol),
        ICELINES_ENTRY(double, "integrator", "max_step", c.integrator.max_step),
        ICELINES_ENTRY(double, "integrator", "event_tol", c.integrator.event_tol),
        ICELINES_ENTRY(double, "integrator", "max_time", c.integrator.max_time),
        ICELINES_ENTRY(std::int64_t, "integrator", "max_steps", c.integrator.max_steps),
        ICELINES_ENTRY(std::string, "output", "dir", c.output_dir),
    };
    return entries;
}

#undef ICELINES_ENTRY

const Entry& lookup(std::string_view section, std::string_view key) {
    for (const auto& e : registry()) {
        if (e.section == section && e.key == key) return e;
    }
    throw ConfigError("unknown setting '" + (section.empty() ? std::string(key)
                                                              : std::string(section) + "." + std::string(key)) +
                      "'");
}

bool finite_all(const std::vector<double>& xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void ScenarioConfig::finalize() {
    static const std::vector<std::string> scenarios{"equilibria", "simulate", "cycle", "sweep", "classify"};
    if (std::find(scenarios.begin(), scenarios.end(), scenario) == scenarios.end()) {
        throw ConfigError("unknown scenario '" + scenario + "'");
    }
    try {
        params.insolation = insolation_coeffs(params.insolation.beta, params.insolation.M);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("invalid insolation settings: ") + e.what());
    }
    params.validate();
    if (!std::isfinite(reduced_T_cN)) throw ConfigError("reduced.T_cN must be finite");

    if (simulate.mode != "reduced" && simulate.mode != "flipflop") {
        throw ConfigError("simulate.mode must be \"reduced\" or \"flipflop\"");
    }
    if (!(simulate.t_end > 0.0 && std::isfinite(simulate.t_end))) {
        throw ConfigError("simulate.t_end must be positive");
    }
    if (!(simulate.output_dt >= 0.0 && std::isfinite(simulate.output_dt))) {
        throw ConfigError("simulate.output_dt must be >= 0");
    }
    const ClimateState3 s0{simulate.w0, simulate.eta_S0, simulate.eta_N0};
    if (!in_interior(s0)) {
        throw ConfigError("simulate initial state must satisfy -1 < eta_S0 < eta_N0 < 1");
    }
    if (simulate.mode == "flipflop" && !(std::abs(simulate.xi_N0) < 1.0)) {
        throw ConfigError("simulate.xi_N0 must lie in (-1, 1)");
    }

    if (!(cycle.tol > 0.0)) throw ConfigError("cycle.tol must be positive");
    if (cycle.max_iter < 1) throw ConfigError("cycle.max_iter must be >= 1");
    if (cycle.samples < 2000) throw ConfigError("cycle.samples must be >= 2000");
    if (!(cycle.contraction_delta > 0.0)) throw ConfigError("cycle.contraction_delta must be positive");
    integrator.validate();

    if (!finite_all(sweep.eps) || !finite_all(sweep.T_cN_minus)) {
        throw ConfigError("sweep grids must be finite");
    }
    if (std::any_of(sweep.eps.begin(), sweep.eps.end(), [](double e) { return !(e > 0.0); })) {
        throw ConfigError("sweep.eps values must be positive");
    }
    if (!(std::isfinite(classify.w) && std::abs(classify.eta_S) <= 1.0 && std::abs(classify.eta_N) <= 1.0)) {
        throw ConfigError("classify point must be finite with |eta| <= 1");
    }
    if (output_dir.empty()) throw ConfigError("output.dir must not be empty");
}

ScenarioConfig parse_config(std::string_view text, ScenarioConfig base) {
    std::string section;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view body = trim(strip_comment(line));
        if (body.empty()) continue;
        try {
            if (body.front() == '[') {
                if (body.back() != ']') throw ConfigError("malformed section header");
                section = std::string(trim(body.substr(1, body.size() - 2)));
                const bool known = std::any_of(registry().begin(), registry().end(),
                                               [&](const Entry& e) { return e.section == section; });
                if (!known || section.empty()) throw ConfigError("unknown section [" + section + "]");
                continue;
            }
            const auto eq = body.find('=');
            if (eq == std::string_view::npos) throw ConfigError("expected key = value");
            const std::string_view key = trim(body.substr(0, eq));
            lookup(section, key).set(base, parse_value(body.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    base.finalize();
    return base;
}

ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void apply_override(ScenarioConfig& config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) throw ConfigError("override must look like KEY=VALUE");
    const std::string_view name = trim(assignment.substr(0, eq));
    const Value value = parse_value(assignment.substr(eq + 1));
    const auto dot = name.find('.');
    if (dot != std::string_view::npos) {
        lookup(name.substr(0, dot), name.substr(dot + 1)).set(config, value);
        return;
    }
    const Entry* match = nullptr;
    int hits = 0;
    for (const auto& e : registry()) {
        if (e.key != name) continue;
        if (e.section == "params" || e.section.empty()) {
            e.set(config, value);
            return;
        }
        match = &e;
        ++hits;
    }
    if (hits == 0) throw ConfigError("unknown setting '" + std::string(name) + "'");
    if (hits > 1) throw ConfigError("ambiguous setting '" + std::string(name) + "'; use section.key");
    match->set(config, value);
}

std::string dump_config(const ScenarioConfig& config) {
    std::string out;
    std::string current;
    for (const auto& e : registry()) {
        if (e.section != current) {
            out += "\n[" + e.section + "]\n";
            current = e.section;
        }
        out += e.key + " = " + e.get(config) + "\n";
    }
    return out;
}

}  // namespace icelines
