#pragma once

#include <optional>
#include <span>
#include <vector>

#include "finls/cutoff.hpp"
#include "finls/model.hpp"
#include "finls/quadrature.hpp"
#include "finls/spectral.hpp"

namespace finls::diagnostics {

using model::ModelParams;

/// One time sample of every monitored functional.
struct DiagnosticsRecord {
  double t = 0.0;
  double dt = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  double virial = 0.0;
  double virial_R = 0.0;  // localized virial M_R at RecordSpec::virial_radius
  double me = 0.0;        // NaN without a ground-state reference
  double mg = 0.0;
  double sup_norm = 0.0;
  double boundary_tail = 0.0;
  std::vector<double> local_mass;       // one entry per RecordSpec::radii
  std::vector<double> local_potential;  // one entry per RecordSpec::radii
};

struct RecordSpec {
  std::vector<double> radii;
  double virial_radius = 1.0;
  std::optional<model::ThresholdReference> reference;
  /// Points with max_a |x_a| >= (1 - boundary_band) L form the boundary band.
  double boundary_band = 0.125;
};

/// Evaluates DiagnosticsRecords on a fixed grid, caching the weight, the
/// derivative symbols and the cutoff vector field.
class Recorder {
 public:
  Recorder(const Grid& grid, const ModelParams& params, RecordSpec spec);

  DiagnosticsRecord sample(const Field& u, double t, double dt) const;

  const Grid& grid() const noexcept { return grid_; }
  const ModelParams& params() const noexcept { return params_; }
  const RecordSpec& spec() const noexcept { return spec_; }
  const model::WeightField& weight() const noexcept { return weight_; }

 private:
  Grid grid_;
  ModelParams params_;
  RecordSpec spec_;
  model::WeightField weight_;
  std::vector<spectral::Multiplier> derivative_;
  std::vector<std::vector<double>> virial_field_;  // components of grad f_R
};

/// i xi_a with the Nyquist mode removed.
spectral::Multiplier derivative_multiplier(const Grid& grid, int axis);

/// max |u| over the outer boundary band of the box.
double boundary_tail(const Field& u, double band = 0.125);
/// int_{|x|<R} |u|^2.
double local_mass(const Field& u, double R);
/// int_{|x|<R} |x|^{-b} |u|^{p+1}.
double local_potential(const Field& u, const model::WeightField& w, double p, double R);

/// M_R[u] = 2 Im int conj(u) grad f_R . grad u.
double localized_virial(const Field& u, const CutoffSpec& cutoff);

/// Terms of d/dt M_R. The kinetic part uses the full Hessian of f_R;
/// potential terms carry the focusing/defocusing sign.
struct VirialRhs {
  double kinetic_inner = 0.0;          // 4 int m^s int_{|x|<R} |grad u_m|^2
  double kinetic_outer = 0.0;          // 4 int m^s int_{|x|>R} D^2 f_R(grad u_m, grad u_m)
  double bilaplacian = 0.0;            // -int m^s int Delta^2 f_R |u_m|^2
  double potential_inner = 0.0;        // -4sB/(p+1) int_{|x|<R} w |u|^{p+1}
  double potential_outer_laplacian = 0.0;  // -2(p-1)/(p+1) int_{|x|>R} Delta f_R w |u|^{p+1}
  double potential_outer_radial = 0.0;     // -4b/(p+1) int_{|x|>R} (x.grad f_R/|x|^2) w |u|^{p+1}
  double tail_estimate = 0.0;          // bound on the truncated m-range contribution

  double total() const {
    return kinetic_inner + kinetic_outer + bilaplacian + potential_inner + potential_outer_laplacian +
           potential_outer_radial;
  }
};

VirialRhs virial_rhs(const Field& u, const ModelParams& params, const CutoffSpec& cutoff, const MQuadrature& q);

struct BalakrishnanResult {
  double lhs;  // s ||D^s u||^2
  double rhs;  // int m^s int |grad u_m|^2
};
BalakrishnanResult balakrishnan_identity(const Field& u, double s, const MQuadrature& q);

/// s ||D^s (psi_R u)||^2 and s ||D^s u||^2 at one radius.
struct LocalizedEnergyPoint {
  double R;
  double lhs;
  double rhs;
  double slack;  // rhs + C/R - lhs with the fitted C
};
struct LocalizedEnergyReport {
  std::vector<LocalizedEnergyPoint> points;
  double constant = 0.0;     // smallest C >= 0 with lhs - rhs <= C/R on the sweep
  double fitted_rate = 0.0;  // log-log slope of |lhs - rhs| against R
  double min_slack = 0.0;
  double max_slack_times_R = 0.0;
};
LocalizedEnergyPoint localized_energy_terms(const Field& u, double s, double R);
LocalizedEnergyReport localized_energy_inequality(const Field& u, double s, const std::vector<double>& radii);

/// Space-time local potential int_0^T local_potential(R) dt by the trapezoid
/// rule, compared with R + T R^{-b}.
struct MorawetzResult {
  double R;
  double integral;
  double scale;  // R + T R^{-b}
  double ratio;
};
MorawetzResult morawetz_spacetime(std::span<const DiagnosticsRecord> records, const std::vector<double>& radii,
                                  double R, double b);
/// max ratio / min ratio over a set of radii.
double morawetz_spread(std::span<const MorawetzResult> results);

struct DecayRow {
  double R;
  double local_mass_start;      // at the first record with t >= T/2
  double local_mass_min;        // min over t in [T/2, T]
  double local_mass_end;
  double local_potential_start;
  double local_potential_min;
  double local_potential_end;
  double mass_decay_ratio;      // start / end
  bool decaying;                // end below start for both quantities
};
std::vector<DecayRow> local_decay_scan(std::span<const DiagnosticsRecord> records, const std::vector<double>& radii);

struct RadialSobolevResult {
  double lhs_sup;  // max_{|x|>=h} |x|^{N/2-alpha} |u|
  double rhs;      // ||D^alpha u||
  double ratio;
};
RadialSobolevResult radial_sobolev_check(const Field& u, double alpha);

}  // namespace finls::diagnostics
