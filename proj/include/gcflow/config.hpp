#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gcflow {

// Plain-text config: "[section]" headers, "key = value" lines, "#" comments.
// Values that accept "auto" are optionals; the canonical serializer writes
// every key in a fixed order so serialize(parse(serialize(c))) is a fixed
// point byte for byte.

struct ProfileConfig {
    std::string kind = "log_example"; // constant | power | log_example | efimov
    double k0 = 1.0;                  // constant
    double c = 1.0, delta = 0.6;      // power: c (1+t)^{-(1+delta)}
    double mod_amplitude = 0.0;       // bounded x-modulation
    double mod_width = 1.0;
};

struct GridConfig {
    // the valid region loses one cell per side per step, so the x span must
    // budget roughly ln(t_max)/ln(1 + dt_cap_scale) cells beyond the window
    // of interest
    double x_min = -8.0, x_max = 8.0, dx = 0.05;
    double t_start = 0.0, t_max = 520.0;
    size_t snapshots = 9;
};

struct SchemeConfig {
    double cfl = 0.4;
    double dt_cap_scale = 0.05;
};

struct DataConfig {
    double size = 0.01;  // bump amplitude; also the ODE stage's w(t_start)
    double width = 1.0;
    double offset = 0.6; // r0 = size·(offset + (1-offset)·bump); a positive
                         // offset keeps r - s bounded below across the grid
};

struct CertifyConfig {
    double epsilon = 0.01;
    std::optional<double> mu;  // auto = sqrt(epsilon)
    std::optional<double> t0;  // auto = hypothesis checker's choice
    double horizon = 200.0;    // certify window [t0, t0 + horizon]; a certifying
                               // run integrates at least this far
};

struct GluingConfig {
    double R = 400.0; // barrier apex; t0(x) = R(1+x^2) must stay inside the run.
                      // Larger R flattens the pushforward traces: their theta
                      // slope scales like 1/(k(R) R^2).
    std::optional<double> sigma = 1.0; // "auto" = bisected data scale
    double epsilon = 0.1;        // trace thresholds along the barrier
    std::optional<double> mu;    // auto = sqrt(epsilon)
    double window_lo = 0.1, window_hi = 0.5;
    size_t boundary_samples = 8;
};

struct ExperimentConfig {
    ProfileConfig profile;
    GridConfig grid;
    SchemeConfig scheme;
    DataConfig data;
    CertifyConfig certify;
    GluingConfig gluing;
    std::string out_dir = "out";
    std::vector<std::string> stages; // empty = all

    bool stage_enabled(const std::string& name) const;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(size_t line, const std::string& what)
        : std::runtime_error("config line " + std::to_string(line) + ": " + what), line_(line) {}
    size_t line() const { return line_; }

private:
    size_t line_;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& c);

extern const char* const kStageNames[7]; // canonical stage order

} // namespace gcflow
