#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "btlab/errors.hpp"

namespace btlab {

// Flat `key = value` configuration under [section] headers. Unknown sections
// or keys are rejected with the offending line number; missing keys keep the
// defaults below.
struct Config {
    // [grid]
    double x0 = -40.0;
    double dx = 0.01;
    long n = 8001;
    // [lattice]
    long j0 = -60;
    long lattice_n = 121;
    // [system]
    double a = 0.5;
    double delta = 0.0;
    std::vector<double> kappa = {1.0};
    std::vector<double> gamma_phase = {0.0};
    // [perturbation]
    std::string kind = "gaussian_v";
    double amplitude = 0.01;
    double width = 2.0;
    double center = 0.0;
    std::uint64_t seed = 12345;
    // [experiment]
    double T = 50.0;
    double dt = 0.009;
    long stride = 50;
    double c_max = 5.0;
    // [output]
    std::string out_dir = ".";
    std::string format = "csv";
};

Config parse_config(const std::string& text);

// Apply a `section.key=value` override (the CLI --set flag).
void apply_override(Config& cfg, const std::string& assignment);

// Cross-field validation; parse_config calls this, callers re-run it after
// overrides.
void validate_config(const Config& cfg);

// Canonical serialization; parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const Config& cfg);

} // namespace btlab
