#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "finls/dynamics.hpp"
#include "finls/ground_state.hpp"
#include "finls/quadrature.hpp"

namespace finls::harness {

struct GridSpec {
  int points = 256;
  double half_width = 16.0;
};

enum class InitialKind { ground_scaled, gaussian, file };
std::string to_string(InitialKind kind);

struct InitialData {
  InitialKind kind = InitialKind::ground_scaled;
  double amplitude = 0.8;  // c for ground_scaled, peak for gaussian
  double width = 1.0;
  std::array<double, 3> drift{0.0, 0.0, 0.0};
  std::filesystem::path path;  // snapshot file for kind == file
};

struct GroundSpec {
  ground::GroundStateOptions options;
  /// Optional persisted Q; solved from scratch when empty.
  std::filesystem::path path;
};

struct DiagnosticsSpec {
  std::vector<double> radii{2.0, 4.0, 8.0};
  /// Radius of the localized virial; 0 selects L/4.
  double virial_radius = 0.0;
  diagnostics::MQuadratureSpec quadrature;
  double scattering_tolerance = 1e-2;
  double scattering_radius = 4.0;
};

struct LinearSpec {
  double t_start = 1.0;
  double t_end = 8.0;
  int samples = 8;  // log-spaced
};

struct VerifySpec {
  int corpus_size = 50;
};

struct SweepAxes {
  std::vector<double> s;
  std::vector<double> b;
  std::vector<double> p;
  std::vector<double> c;
};

struct ExperimentConfig {
  model::ModelParams params;
  GridSpec grid;
  dynamics::EvolveControls controls;
  InitialData initial;
  GroundSpec ground;
  DiagnosticsSpec diagnostics;
  LinearSpec linear;
  VerifySpec verify;
  SweepAxes sweep;
  int workers = 1;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "finls_out";

  spectral::Grid make_grid() const;
  double virial_radius() const;
  diagnostics::RecordSpec record_spec(const std::optional<model::ThresholdReference>& ref) const;
};

/// Parses a JSON document. Unknown keys, wrong types and inadmissible values
/// raise ValidationError; relative file paths resolve against base_dir.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of every numerically relevant setting (output_dir and
/// workers excluded), keys sorted.
std::string canonical_json(const ExperimentConfig& config);
/// FNV-1a 64-bit hash of canonical_json, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);
std::string fnv1a_hex(const std::string& bytes);

/// Applies FINLS_OUTPUT_DIR and FINLS_WORKERS when set.
void apply_environment(ExperimentConfig& config);

}  // namespace finls::harness
