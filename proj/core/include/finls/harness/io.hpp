#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "finls/diagnostics.hpp"
#include "finls/harness/config.hpp"

namespace finls::harness {

/// Snapshot file: one JSON header line (grid, params, time, endianness,
/// layout) followed by raw little-endian float64 (re, im) pairs in row-major
/// order.
struct Snapshot {
  spectral::Field u;
  double t = 0.0;
  std::optional<model::ModelParams> params;
};

void write_snapshot(const std::filesystem::path& path, const spectral::Field& u, double t,
                    const std::optional<model::ModelParams>& params = std::nullopt);
/// Throws ValidationError on a malformed or truncated file.
Snapshot read_snapshot(const std::filesystem::path& path);

/// Fixed column list of the diagnostics CSV for the given radii.
std::vector<std::string> record_columns(const std::vector<double>& radii);
/// %.17g formatting; NaN becomes an empty cell.
std::string format_number(double v);

/// Streams DiagnosticsRecords as CSV rows.
class RecordCsv {
 public:
  RecordCsv(const std::filesystem::path& path, const std::vector<double>& radii);
  void write(const diagnostics::DiagnosticsRecord& rec);
  void flush() { out_.flush(); }

 private:
  std::ofstream out_;
};

/// Writes a CSV with a header row; every row must match the header width.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Ordered key-value result set stored in manifests.
class Results {
 public:
  void set(const std::string& key, double v);
  void set(const std::string& key, long long v);
  void set(const std::string& key, bool v);
  void set(const std::string& key, const std::string& v);
  void set(const std::string& key, const char* v) { set(key, std::string(v)); }
  void set_series(const std::string& key, const std::vector<double>& v);
  /// Serialized JSON object.
  std::string json() const;

 private:
  std::map<std::string, std::string> entries_;  // key -> JSON text
};

/// Manifest with config hash, tool version, tolerances, creation time and
/// command results. Everything except created_at is a pure function of the
/// inputs.
void write_manifest(const std::filesystem::path& path, const std::string& command, const ExperimentConfig& config,
                    const Results& results);

/// Library version string.
std::string version();

}  // namespace finls::harness
