#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "finls/diagnostics.hpp"

namespace finls::dynamics {

using diagnostics::DiagnosticsRecord;
using diagnostics::RecordSpec;
using model::ModelParams;
using spectral::Field;
using spectral::Grid;

struct EvolveControls {
  double dt = 1e-3;             // base step
  double t_end = 1.0;
  int snapshot_stride = 10;     // steps between diagnostics records
  double dt_floor = 0.0;        // 0 selects dt / 1024
  double gradient_cap = 10.0;   // blow-up needs ||D^s u|| >= gradient_cap ||D^s u0||
  bool dealias = false;         // 2/3 truncation after each nonlinear substep
  bool adaptive = true;         // amplitude-driven step control
  double boundary_threshold = 1e-6;
  double boundary_band = 0.125;
  /// When false a boundary excursion only sets boundary_flag and the run goes on.
  bool stop_on_boundary = true;
  double mass_drift_tolerance = 1e-10;
  double energy_drift_tolerance = 1e-6;
  /// Times at which full states are kept; empty selects scattering_snapshots
  /// equispaced times over the last third of the run.
  std::vector<double> snapshot_times;
  int scattering_snapshots = 6;

  double effective_dt_floor() const { return dt_floor > 0.0 ? dt_floor : dt / 1024.0; }
  /// Throws ValidationError on inconsistent settings.
  void validate() const;
};

enum class Outcome { completed, blow_up_detected, boundary_contaminated };
std::string to_string(Outcome outcome);

struct Snapshot {
  double t;
  Field u;
};

struct TrajectoryResult {
  std::vector<DiagnosticsRecord> records;
  Outcome outcome = Outcome::completed;
  Field final_state;
  std::optional<Field> scattering_profile;
  std::vector<Snapshot> snapshots;
  double final_time = 0.0;
  long steps = 0;
  double max_mass_drift = 0.0;    // relative, over all records
  double max_energy_drift = 0.0;  // relative, over all records
  bool mass_drift_flag = false;
  bool energy_drift_flag = false;
  bool boundary_flag = false;        // tail exceeded boundary_threshold at some record
  double max_boundary_tail = 0.0;
  /// Time at which the blow-up monitor fired.
  std::optional<double> collapse_time;
};

/// Exact nonlinear phase u exp(i dt sign w |u|^{p-1}).
void nonlinear_phase(Field& u, double dt, const ModelParams& params, const model::WeightField& w);

/// One Strang step: half linear, full nonlinear, half linear.
Field strang_step(const Field& u, double dt, const ModelParams& params, const model::WeightField& w,
                  bool dealias = false);

/// base / (1 + ||u||_inf^{p-1} h^{-b}), clamped below at the floor.
double adapt_dt(double sup_norm, const ModelParams& params, const EvolveControls& controls, double w_max);
double adapt_dt(const Field& u, const ModelParams& params, const EvolveControls& controls);

/// Receives every diagnostics record as soon as it is produced.
using RecordSink = std::function<void(const DiagnosticsRecord&)>;

/// Integrates to t_end or until a monitor fires. Throws NumericalFailure on a
/// non-finite state.
TrajectoryResult evolve(const Field& u0, const ModelParams& params, const EvolveControls& controls,
                        const RecordSpec& record_spec, const RecordSink& sink = {});

struct ScatteringReport {
  bool applicable = true;
  bool converged = false;
  bool monotone = false;
  std::optional<Field> profile;
  std::vector<double> times;
  std::vector<double> cauchy_differences;  // ||phi(t_{i+1}) - phi(t_i)||_{H^s}
  double cauchy_tail = 0.0;
  std::vector<double> local_mass;  // int_{|x|<R} |u(t_i)|^2 at the snapshot times
  std::string note;
};

/// Back-propagates the stored snapshots with the free flow and checks the
/// H^s Cauchy property of phi(t) = e^{itD^{2s}} u(t).
ScatteringReport scattering_monitor(const TrajectoryResult& trajectory, const ModelParams& params,
                                    double tol = 1e-2, double local_radius = 1.0, std::size_t min_snapshots = 6);

struct DecayFit {
  double r;
  double slope;
  double predicted;  // -N (1/2 - 1/r)
  std::vector<double> norms;
};
struct DispersiveReport {
  std::vector<double> times;
  std::vector<DecayFit> fits;
  double max_boundary_tail = 0.0;
};

/// Least-squares slope of log ||e^{-itD^{2s}} phi||_{L^r} against log t.
/// Throws WindowTooLong when the free evolution reaches the boundary band.
DispersiveReport dispersive_decay_check(const Field& phi, const ModelParams& params, const std::vector<double>& times,
                                        const std::vector<double>& exponents, double boundary_threshold = 1e-6,
                                        double band = 0.125);

}  // namespace finls::dynamics
