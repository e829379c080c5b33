#include "btlab/config.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "btlab/errors.hpp"

namespace btlab {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& v, int line) {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size() || v.empty() || errno == ERANGE ||
        !std::isfinite(x))
        fail(line, "'" + v + "' is not a finite number");
    return x;
}

long parse_long(const std::string& v, int line) {
    errno = 0;
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || v.empty() || errno == ERANGE)
        fail(line, "'" + v + "' is not an integer");
    return x;
}

std::uint64_t parse_u64(const std::string& v, int line) {
    errno = 0;
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (v.empty() || v[0] == '-' || end != v.c_str() + v.size() ||
        errno == ERANGE)
        fail(line, "'" + v + "' is not an unsigned integer");
    return static_cast<std::uint64_t>(x);
}

std::vector<double> parse_list(const std::string& v, int line) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) out.push_back(parse_double(trim(item), line));
    if (out.empty()) fail(line, "empty list");
    return out;
}

void set_key(Config& c, const std::string& section, const std::string& key,
             const std::string& value, int line) {
    if (section == "grid") {
        if (key == "x0") c.x0 = parse_double(value, line);
        else if (key == "dx") {
            c.dx = parse_double(value, line);
            if (!(c.dx > 0.0)) fail(line, "dx must be > 0");
        } else if (key == "n") {
            c.n = parse_long(value, line);
            if (c.n < 2) fail(line, "grid n must be >= 2");
        } else fail(line, "unknown key '" + key + "' in [grid]");
    } else if (section == "lattice") {
        if (key == "j0") c.j0 = parse_long(value, line);
        else if (key == "n") {
            c.lattice_n = parse_long(value, line);
            if (c.lattice_n < 2) fail(line, "lattice n must be >= 2");
        } else fail(line, "unknown key '" + key + "' in [lattice]");
    } else if (section == "system") {
        if (key == "a") {
            c.a = parse_double(value, line);
            if (!(c.a > 0.0 && c.a < 1.0)) fail(line, "a must lie in (0, 1)");
        } else if (key == "delta") c.delta = parse_double(value, line);
        else if (key == "kappa") {
            c.kappa = parse_list(value, line);
            for (double k : c.kappa)
                if (!(k > 0.0)) fail(line, "kappa values must be > 0");
        } else if (key == "gamma_phase") c.gamma_phase = parse_list(value, line);
        else fail(line, "unknown key '" + key + "' in [system]");
    } else if (section == "perturbation") {
        if (key == "kind") {
            if (value != "gaussian_u" && value != "gaussian_v" &&
                value != "gaussian_q" && value != "gaussian_p" &&
                value != "seeded_noise")
                fail(line, "unknown perturbation kind '" + value + "'");
            c.kind = value;
        } else if (key == "amplitude") {
            c.amplitude = parse_double(value, line);
            if (c.amplitude < 0.0) fail(line, "amplitude must be >= 0");
        } else if (key == "width") {
            c.width = parse_double(value, line);
            if (!(c.width > 0.0)) fail(line, "width must be > 0");
        } else if (key == "center") c.center = parse_double(value, line);
        else if (key == "seed") c.seed = parse_u64(value, line);
        else fail(line, "unknown key '" + key + "' in [perturbation]");
    } else if (section == "experiment") {
        if (key == "T") {
            c.T = parse_double(value, line);
            if (c.T < 0.0) fail(line, "T must be >= 0");
        } else if (key == "dt") {
            c.dt = parse_double(value, line);
            if (!(c.dt > 0.0)) fail(line, "dt must be > 0");
        } else if (key == "stride") {
            c.stride = parse_long(value, line);
            if (c.stride < 1) fail(line, "stride must be >= 1");
        } else if (key == "c_max") {
            c.c_max = parse_double(value, line);
            if (!(c.c_max > 0.0)) fail(line, "c_max must be > 0");
        } else fail(line, "unknown key '" + key + "' in [experiment]");
    } else if (section == "output") {
        if (key == "out_dir") c.out_dir = value;
        else if (key == "format") {
            if (value != "csv" && value != "json")
                fail(line, "format must be csv or json");
            c.format = value;
        } else fail(line, "unknown key '" + key + "' in [output]");
    } else {
        fail(line, "unknown section [" + section + "]");
    }
}

} // namespace

Config parse_config(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const std::string s = trim(raw);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail(line, "malformed section header");
            section = trim(s.substr(1, s.size() - 2));
            if (section.empty()) fail(line, "empty section header");
            continue;
        }
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos) fail(line, "expected key = value");
        if (section.empty()) fail(line, "key before any [section] header");
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        if (key.empty()) fail(line, "empty key");
        set_key(cfg, section, key, value, line);
    }
    validate_config(cfg);
    return cfg;
}

void apply_override(Config& cfg, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--set expects section.key=value");
    const std::string dotted = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    const std::size_t dot = dotted.find('.');
    if (dot == std::string::npos)
        throw ConfigError("--set expects section.key=value");
    set_key(cfg, dotted.substr(0, dot), dotted.substr(dot + 1), value, 0);
}

void validate_config(const Config& cfg) {
    if (cfg.gamma_phase.size() > cfg.kappa.size())
        throw ConfigError("more gamma_phase values than kappa values");
    for (double g : cfg.gamma_phase)
        if (!std::isfinite(g)) throw ConfigError("gamma_phase must be finite");
}

std::string serialize_config(const Config& c) {
    char buf[64];
    const auto g17 = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    const auto list = [&g17](const std::vector<double>& vs) {
        std::string out;
        for (std::size_t i = 0; i < vs.size(); ++i) {
            if (i) out += ", ";
            out += g17(vs[i]);
        }
        return out;
    };
    std::ostringstream out;
    out << "[grid]\n"
        << "x0 = " << g17(c.x0) << "\n"
        << "dx = " << g17(c.dx) << "\n"
        << "n = " << c.n << "\n"
        << "[lattice]\n"
        << "j0 = " << c.j0 << "\n"
        << "n = " << c.lattice_n << "\n"
        << "[system]\n"
        << "a = " << g17(c.a) << "\n"
        << "delta = " << g17(c.delta) << "\n"
        << "kappa = " << list(c.kappa) << "\n"
        << "gamma_phase = " << list(c.gamma_phase) << "\n"
        << "[perturbation]\n"
        << "kind = " << c.kind << "\n"
        << "amplitude = " << g17(c.amplitude) << "\n"
        << "width = " << g17(c.width) << "\n"
        << "center = " << g17(c.center) << "\n"
        << "seed = " << c.seed << "\n"
        << "[experiment]\n"
        << "T = " << g17(c.T) << "\n"
        << "dt = " << g17(c.dt) << "\n"
        << "stride = " << c.stride << "\n"
        << "c_max = " << g17(c.c_max) << "\n"
        << "[output]\n"
        << "out_dir = " << c.out_dir << "\n"
        << "format = " << c.format << "\n";
    return out.str();
}

} // namespace btlab
