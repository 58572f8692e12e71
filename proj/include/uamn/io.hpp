#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "uamn/dro.hpp"
#include "uamn/model.hpp"

namespace uamn::io {

inline constexpr const char* kSchemaVersion = "uamn-instance/1";

// Solver settings stored with an instance; command-line flags override them.
struct InstanceDefaults {
  std::optional<double> theta;
  std::optional<double> beta;
  std::optional<BatteryRhsMode> battery;
  std::optional<int> y_max;

  bool operator==(const InstanceDefaults&) const = default;
};

// Distance-based cost data: Ct = transport_per_distance * d and
// l = energy_per_distance * d for every arc without explicit values.
struct Calibration {
  std::vector<std::vector<double>> distance;  // node x node
  double transport_per_distance = 1.0;
  double energy_per_distance = 1.0;

  bool operator==(const Calibration&) const = default;
};

struct Instance {
  NetworkSpec spec;
  DemandModel demand;
  InstanceDefaults defaults;
  std::optional<Calibration> calibration;
  std::string notes;

  bool operator==(const Instance&) const = default;
};

// Parse or validation failure. Every entry names where the problem is.
class InstanceError : public std::runtime_error {
 public:
  explicit InstanceError(std::vector<Diagnostic> diagnostics);
  std::vector<Diagnostic> diagnostics;
};

// Reads an instance document. A relative "samples_file" is resolved
// against the document's directory. Throws InstanceError.
Instance parse_instance(const std::filesystem::path& path);
Instance parse_instance_text(const std::string& text, const std::filesystem::path& base_dir = {});

// Canonical document: fixed key order, every arc written with explicit
// energies and costs, samples inline.
std::string serialize_instance(const Instance& instance);

// Samples table: header "Date,<label>,...", then one row per O-D pair
// (name, then one value per sample). Rows may come in any order.
void read_samples_csv(const std::filesystem::path& path, const NetworkSpec& spec, DemandModel& demand);
std::string samples_csv(const NetworkSpec& spec, const DemandModel& demand);

// Censored Gaussian draws: W- = max(0, mean - 3 sd), W+ = mean + 3 sd,
// samples clamped into [W-, W+]. mt19937_64 seeded with seed.
DemandModel generate_demand(const std::vector<double>& mean, const std::vector<double>& sd, std::size_t count,
                            std::uint64_t seed);

// Report files. All output is deterministic for fixed inputs: no timings.
std::string report_json(const SolveReport& report, const NetworkSpec& spec, const DemandModel& demand);
// Pairs x samples, worst-case demand per cell.
std::string worst_case_csv(const SolveReport& report, const NetworkSpec& spec, const DemandModel& demand);
// One row per arc with installed channels, then one row per open node.
std::string design_edges_csv(const SolveReport& report, const NetworkSpec& spec);

struct SweepPoint {
  std::string parameter;
  double value = 0.0;
  SolveReport report;
};
std::string sweep_csv(const std::vector<SweepPoint>& points, const NetworkSpec& spec);

std::string error_json(const std::string& kind, const std::string& message,
                       const std::vector<Diagnostic>& diagnostics = {});

void write_file(const std::filesystem::path& path, const std::string& contents);

// Writes report.json, worst_case.csv and design_edges.csv into dir.
void emit_report(const SolveReport& report, const NetworkSpec& spec, const DemandModel& demand,
                 const std::filesystem::path& dir);

}  // namespace uamn::io
