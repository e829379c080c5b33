#include "btlab/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "btlab/errors.hpp"

namespace btlab {

namespace {

using nlohmann::json;

json number_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    return out;
}

json config_json(const Config& c) {
    return json{
        {"grid", {{"x0", c.x0}, {"dx", c.dx}, {"n", c.n}}},
        {"lattice", {{"j0", c.j0}, {"n", c.lattice_n}}},
        {"system",
         {{"a", c.a},
          {"delta", c.delta},
          {"kappa", c.kappa},
          {"gamma_phase", c.gamma_phase}}},
        {"perturbation",
         {{"kind", c.kind},
          {"amplitude", c.amplitude},
          {"width", c.width},
          {"center", c.center},
          {"seed", c.seed}}},
        {"experiment",
         {{"T", c.T}, {"dt", c.dt}, {"stride", c.stride}, {"c_max", c.c_max}}},
        {"output", {{"out_dir", c.out_dir}, {"format", c.format}}}};
}

} // namespace

Metrics::Metrics()
    : sup_distance(std::numeric_limits<double>::quiet_NaN()),
      empirical_c(std::numeric_limits<double>::quiet_NaN()),
      energy_drift(std::numeric_limits<double>::quiet_NaN()),
      max_residual(std::numeric_limits<double>::quiet_NaN()) {}

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out = open_out(path);
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) out << ',';
        out << header[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << format_g17(row[i]);
        }
        out << '\n';
    }
}

void write_rows_json(const std::string& path,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
    json arr = json::array();
    for (const auto& row : rows) {
        json obj;
        for (std::size_t i = 0; i < row.size() && i < header.size(); ++i)
            obj[header[i]] = number_or_null(row[i]);
        arr.push_back(std::move(obj));
    }
    std::ofstream out = open_out(path);
    out << arr.dump(2) << '\n';
}

void write_summary(const std::string& path, const std::string& command,
                   const Config& cfg, bool pass, const Metrics& metrics,
                   double runtime_seconds) {
    const json doc{{"command", command},
                   {"config", config_json(cfg)},
                   {"pass", pass},
                   {"metrics",
                    {{"sup_distance", number_or_null(metrics.sup_distance)},
                     {"empirical_C", number_or_null(metrics.empirical_c)},
                     {"energy_drift", number_or_null(metrics.energy_drift)},
                     {"max_residual", number_or_null(metrics.max_residual)}}},
                   {"runtime_seconds", runtime_seconds}};
    std::ofstream out = open_out(path);
    out << doc.dump(2) << '\n';
}

std::string summary_line(const std::string& command, bool pass,
                         const Metrics& metrics, double runtime_seconds) {
    std::ostringstream out;
    out << command << " pass=" << (pass ? 1 : 0);
    const auto field = [&out](const char* name, double v) {
        out << ' ' << name << '=';
        if (std::isnan(v))
            out << "n/a";
        else
            out << format_g17(v);
    };
    field("sup_distance", metrics.sup_distance);
    field("empirical_C", metrics.empirical_c);
    field("energy_drift", metrics.energy_drift);
    field("max_residual", metrics.max_residual);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", runtime_seconds);
    out << " runtime_s=" << buf;
    return out.str();
}

} // namespace btlab
