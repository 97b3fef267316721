#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "finls/dynamics.hpp"
#include "finls/ground_state.hpp"
#include "finls/harness/config.hpp"

namespace finls::harness {

enum ExitCode : int { kSuccess = 0, kInternal = 1, kValidation = 2, kNumerical = 3, kPropertyFailure = 4 };

/// Q for the config's parameters and grid: read from ground.path when set,
/// solved otherwise.
ground::GroundStateResult obtain_ground_state(const ExperimentConfig& config);

/// u0 described by initial_data; q is required for ground_scaled.
spectral::Field initial_field(const ExperimentConfig& config, const ground::GroundStateResult* q);

enum class Verdict { agree, disagree, no_verdict };
std::string to_string(Verdict verdict);

struct DichotomyReport {
  model::ThresholdReport classification;
  dynamics::Outcome outcome = dynamics::Outcome::completed;
  Verdict verdict = Verdict::no_verdict;
  std::string note;
  // sup_t P[u] M[u]^{gamma_c} against P[Q] M[Q]^{gamma_c}
  double sup_potential_mass = 0.0;
  double potential_mass_threshold = 0.0;
  double sup_virial = 0.0;  // sup_t I[u]
  double sup_kinetic = 0.0;
  double kinetic_bound = 0.0;         // (B/(B-2)) E[u0] (1 + 1e-2)
  double kinetic_growth = 0.0;        // max_t ||D^s u(t)|| / ||D^s u0||
  double final_dt = 0.0;
  bool dt_at_floor = false;
  bool virial_R_decreasing = false;   // strictly, over the final window
  std::optional<double> collapse_time;
  double final_time = 0.0;
  long steps = 0;
  double max_mass_drift = 0.0;
  double max_energy_drift = 0.0;
  bool boundary_flag = false;
  double max_boundary_tail = 0.0;
  std::optional<dynamics::ScatteringReport> scattering;
  std::vector<diagnostics::DecayRow> decay;
};

/// Number of trailing records over which M_R must strictly decrease.
inline constexpr std::size_t kFinalWindow = 8;

/// Classifies u0, runs the flow and compares prediction with outcome.
DichotomyReport run_dichotomy(const ExperimentConfig& config, const ground::GroundStateResult& q,
                              const spectral::Field& u0, const dynamics::RecordSink& sink = {},
                              dynamics::TrajectoryResult* trajectory = nullptr);

struct VerifyCheck {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

/// Property suite over seeded corpora. Groups: balakrishnan, pohozaev,
/// gagliardo_nirenberg, coercivity, localized_energy, cutoff, radial_sobolev.
std::vector<VerifyCheck> run_verify_suite(const ExperimentConfig& config, const ground::GroundStateResult& q);

struct SweepOptions {
  bool resume = false;
  /// Terminates the process after this many newly journaled points (testing aid).
  int abort_after = 0;
};

struct SweepPoint {
  double s, b, p, c;
};
std::vector<SweepPoint> sweep_points(const ExperimentConfig& config);
std::vector<std::string> sweep_columns();
/// One phase-diagram row; failures are recorded in the status column.
std::vector<std::string> sweep_row(const ExperimentConfig& config, std::size_t index, const SweepPoint& point);

int cmd_ground(const ExperimentConfig& config, std::ostream& log);
int cmd_evolve(const ExperimentConfig& config, std::ostream& log);
int cmd_dichotomy(const ExperimentConfig& config, std::ostream& log);
int cmd_sweep(const ExperimentConfig& config, std::ostream& log, const SweepOptions& options = {});
int cmd_verify(const ExperimentConfig& config, std::ostream& log);
int cmd_linear(const ExperimentConfig& config, std::ostream& log);

/// Dispatches by name, mapping exceptions to exit codes and writing an error
/// manifest into the output directory.
int run_command(const std::string& name, const ExperimentConfig& config, std::ostream& log,
                const SweepOptions& sweep = {});

}  // namespace finls::harness
