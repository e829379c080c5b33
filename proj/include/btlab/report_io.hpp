#pragma once

#include <string>
#include <vector>

#include "btlab/config.hpp"

namespace btlab {

// Headline numbers for summary.json; NaN serializes as null.
struct Metrics {
    double sup_distance;
    double empirical_c;
    double energy_drift;
    double max_residual;
    Metrics();
};

// Round-trip-exact float formatting (17 significant digits), the one format
// used for every CSV cell so repeated runs are byte-identical.
std::string format_g17(double v);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Same rows as a JSON array of objects (the optional `format = json` output).
void write_rows_json(const std::string& path,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

void write_summary(const std::string& path, const std::string& command,
                   const Config& cfg, bool pass, const Metrics& metrics,
                   double runtime_seconds);

std::string summary_line(const std::string& command, bool pass,
                         const Metrics& metrics, double runtime_seconds);

} // namespace btlab
