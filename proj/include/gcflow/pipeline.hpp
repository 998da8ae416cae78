#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcflow/config.hpp"
#include "gcflow/curvature.hpp"

namespace gcflow {

struct StageStatus {
    std::string name;
    std::string status = "skipped"; // skipped | pass | fail | error
    std::string message;
    double seconds = 0.0; // informative only, never serialized
};

struct Measured {
    std::string key;
    double value = 0.0;
};

struct ManifestEntry {
    std::string name; // relative to the output directory
    uint64_t digest = 0;
    size_t bytes = 0;
};

struct RunReport {
    std::vector<StageStatus> stages;
    std::vector<Measured> constants;
    std::vector<ManifestEntry> manifest;
    bool violation = false; // blowup / lost certificate / failed check
    bool errored = false;   // a stage could not run to completion

    const StageStatus* stage(const std::string& name) const;
    double constant(const std::string& key) const; // throws if absent
    bool has_constant(const std::string& key) const;

    std::string text() const; // canonical, timing-free
    void write(const std::string& path) const;
};

struct RunOptions {
    double resolution_scale = 1.0;        // divides dx; snapshot times stay fixed
    std::vector<std::string> stage_filter; // overrides config when nonempty
    std::string out_override;              // overrides config when nonempty
};

CurvatureProfile make_profile(const ProfileConfig& pc);

// Initial invariant profile r0(x) = amp·(offset + (1-offset)·exp(-(x/width)²)).
std::vector<double> shaped_data(const std::vector<double>& xs, double amp, double width,
                                double offset);

RunReport run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {});

// 0 pass, 1 violation or stage error (inverted by expect_blowup: a detected
// violation is then the expected outcome).
int exit_code(const RunReport& rep, bool expect_blowup);

} // namespace gcflow
