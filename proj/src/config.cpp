#include "gcflow/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gcflow/csv.hpp"

namespace gcflow {

const char* const kStageNames[7] = {"check", "solve-ode", "solve-pde", "certify",
                                    "glue",  "immerse",   "report"};

bool ExperimentConfig::stage_enabled(const std::string& name) const {
    if (stages.empty()) return true;
    return std::find(stages.begin(), stages.end(), name) != stages.end();
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_num(const std::string& v, size_t line) {
    const char* p = v.c_str();
    char* end = nullptr;
    double d = std::strtod(p, &end);
    if (end == p || *end != '\0') throw ConfigError(line, "expected a number, got '" + v + "'");
    return d;
}

size_t parse_count(const std::string& v, size_t line) {
    double d = parse_num(v, line);
    if (d < 0 || d != double(size_t(d))) throw ConfigError(line, "expected a count, got '" + v + "'");
    return size_t(d);
}

std::optional<double> parse_auto(const std::string& v, size_t line) {
    if (v == "auto") return std::nullopt;
    return parse_num(v, line);
}

std::string emit_auto(const std::optional<double>& v) {
    return v ? fmt_double(*v) : std::string("auto");
}

bool valid_stage(const std::string& s) {
    for (const char* n : kStageNames)
        if (s == n) return true;
    return false;
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig c;
    std::istringstream in(text);
    std::string raw, section;
    size_t ln = 0;
    while (std::getline(in, raw)) {
        ++ln;
        std::string line = raw;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(ln, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(ln, "expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(ln, "empty key");
        if (val.empty()) throw ConfigError(ln, "empty value for '" + key + "'");

        if (section == "profile") {
            if (key == "kind") {
                if (val != "constant" && val != "power" && val != "log_example" && val != "efimov")
                    throw ConfigError(ln, "unknown profile kind '" + val + "'");
                c.profile.kind = val;
            } else if (key == "k0") c.profile.k0 = parse_num(val, ln);
            else if (key == "c") c.profile.c = parse_num(val, ln);
            else if (key == "delta") c.profile.delta = parse_num(val, ln);
            else if (key == "mod_amplitude") c.profile.mod_amplitude = parse_num(val, ln);
            else if (key == "mod_width") c.profile.mod_width = parse_num(val, ln);
            else throw ConfigError(ln, "unknown key 'profile." + key + "'");
        } else if (section == "grid") {
            if (key == "x_min") c.grid.x_min = parse_num(val, ln);
            else if (key == "x_max") c.grid.x_max = parse_num(val, ln);
            else if (key == "dx") c.grid.dx = parse_num(val, ln);
            else if (key == "t_start") c.grid.t_start = parse_num(val, ln);
            else if (key == "t_max") c.grid.t_max = parse_num(val, ln);
            else if (key == "snapshots") c.grid.snapshots = parse_count(val, ln);
            else throw ConfigError(ln, "unknown key 'grid." + key + "'");
        } else if (section == "scheme") {
            if (key == "cfl") c.scheme.cfl = parse_num(val, ln);
            else if (key == "dt_cap_scale") c.scheme.dt_cap_scale = parse_num(val, ln);
            else throw ConfigError(ln, "unknown key 'scheme." + key + "'");
        } else if (section == "data") {
            if (key == "size") c.data.size = parse_num(val, ln);
            else if (key == "width") c.data.width = parse_num(val, ln);
            else if (key == "offset") c.data.offset = parse_num(val, ln);
            else throw ConfigError(ln, "unknown key 'data." + key + "'");
        } else if (section == "certify") {
            if (key == "epsilon") c.certify.epsilon = parse_num(val, ln);
            else if (key == "mu") c.certify.mu = parse_auto(val, ln);
            else if (key == "t0") c.certify.t0 = parse_auto(val, ln);
            else if (key == "horizon") c.certify.horizon = parse_num(val, ln);
            else throw ConfigError(ln, "unknown key 'certify." + key + "'");
        } else if (section == "gluing") {
            if (key == "R") c.gluing.R = parse_num(val, ln);
            else if (key == "sigma") c.gluing.sigma = parse_auto(val, ln);
            else if (key == "epsilon") c.gluing.epsilon = parse_num(val, ln);
            else if (key == "mu") c.gluing.mu = parse_auto(val, ln);
            else if (key == "window_lo") c.gluing.window_lo = parse_num(val, ln);
            else if (key == "window_hi") c.gluing.window_hi = parse_num(val, ln);
            else if (key == "boundary_samples") c.gluing.boundary_samples = parse_count(val, ln);
            else throw ConfigError(ln, "unknown key 'gluing." + key + "'");
        } else if (section == "run") {
            if (key == "out") c.out_dir = val;
            else if (key == "stages") {
                c.stages.clear();
                if (val != "all") {
                    std::istringstream ss(val);
                    std::string item;
                    while (std::getline(ss, item, ',')) {
                        item = trim(item);
                        if (!valid_stage(item))
                            throw ConfigError(ln, "unknown stage '" + item + "'");
                        c.stages.push_back(item);
                    }
                }
            } else throw ConfigError(ln, "unknown key 'run." + key + "'");
        } else if (section.empty()) {
            throw ConfigError(ln, "key outside any [section]");
        } else {
            throw ConfigError(ln, "unknown section '" + section + "'");
        }
    }

    if (!(c.grid.dx > 0)) throw ConfigError(0, "grid.dx must be positive");
    if (!(c.grid.x_max > c.grid.x_min)) throw ConfigError(0, "grid x range is empty");
    if (!(c.grid.t_max > c.grid.t_start)) throw ConfigError(0, "grid t range is empty");
    if (!(c.scheme.cfl > 0) || c.scheme.cfl > 0.5)
        throw ConfigError(0, "scheme.cfl must lie in (0, 0.5]");
    if (c.grid.snapshots < 2) throw ConfigError(0, "grid.snapshots must be at least 2");
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

std::string serialize_config(const ExperimentConfig& c) {
    std::ostringstream o;
    o << "[profile]\n";
    o << "kind = " << c.profile.kind << "\n";
    o << "k0 = " << fmt_double(c.profile.k0) << "\n";
    o << "c = " << fmt_double(c.profile.c) << "\n";
    o << "delta = " << fmt_double(c.profile.delta) << "\n";
    o << "mod_amplitude = " << fmt_double(c.profile.mod_amplitude) << "\n";
    o << "mod_width = " << fmt_double(c.profile.mod_width) << "\n";
    o << "\n[grid]\n";
    o << "x_min = " << fmt_double(c.grid.x_min) << "\n";
    o << "x_max = " << fmt_double(c.grid.x_max) << "\n";
    o << "dx = " << fmt_double(c.grid.dx) << "\n";
    o << "t_start = " << fmt_double(c.grid.t_start) << "\n";
    o << "t_max = " << fmt_double(c.grid.t_max) << "\n";
    o << "snapshots = " << c.grid.snapshots << "\n";
    o << "\n[scheme]\n";
    o << "cfl = " << fmt_double(c.scheme.cfl) << "\n";
    o << "dt_cap_scale = " << fmt_double(c.scheme.dt_cap_scale) << "\n";
    o << "\n[data]\n";
    o << "size = " << fmt_double(c.data.size) << "\n";
    o << "width = " << fmt_double(c.data.width) << "\n";
    o << "offset = " << fmt_double(c.data.offset) << "\n";
    o << "\n[certify]\n";
    o << "epsilon = " << fmt_double(c.certify.epsilon) << "\n";
    o << "mu = " << emit_auto(c.certify.mu) << "\n";
    o << "t0 = " << emit_auto(c.certify.t0) << "\n";
    o << "horizon = " << fmt_double(c.certify.horizon) << "\n";
    o << "\n[gluing]\n";
    o << "R = " << fmt_double(c.gluing.R) << "\n";
    o << "sigma = " << emit_auto(c.gluing.sigma) << "\n";
    o << "epsilon = " << fmt_double(c.gluing.epsilon) << "\n";
    o << "mu = " << emit_auto(c.gluing.mu) << "\n";
    o << "window_lo = " << fmt_double(c.gluing.window_lo) << "\n";
    o << "window_hi = " << fmt_double(c.gluing.window_hi) << "\n";
    o << "boundary_samples = " << c.gluing.boundary_samples << "\n";
    o << "\n[run]\n";
    o << "out = " << c.out_dir << "\n";
    o << "stages = ";
    if (c.stages.empty()) o << "all";
    else
        for (size_t i = 0; i < c.stages.size(); ++i) o << (i ? "," : "") << c.stages[i];
    o << "\n";
    return o.str();
}

} // namespace gcflow
