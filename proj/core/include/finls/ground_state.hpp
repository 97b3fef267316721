#pragma once

#include <optional>
#include <vector>

#include "finls/model.hpp"

namespace finls::ground {

using model::DerivedExponents;
using model::ModelParams;
using spectral::Field;
using spectral::Grid;

struct GroundStateOptions {
  int max_iterations = 5000;
  /// Stop once ||Q_{n+1} - Q_n|| <= change_tolerance * ||Q_{n+1}||.
  double change_tolerance = 1e-10;
  /// Stop once the equation residual is <= residual_tolerance * ||Q||.
  double residual_tolerance = 1e-8;
  /// Average over the grid symmetry group every this many iterations (0 = off).
  int radialize_every = 10;
};

struct GroundStateResult {
  Field Q;
  double mass_Q = 0.0;       // ||Q||^2
  double kinetic_Q = 0.0;    // ||D^s Q||^2
  double potential_Q = 0.0;  // P[Q]
  double k_opt = 0.0;        // closed-form sharp GN constant
  double residual = 0.0;     // ||-D^{2s}Q - Q + |x|^{-b} Q^p||
  int iterations = 0;
  std::vector<double> residual_history;

  /// E[Q] with the focusing sign, the normalisation used by ME.
  double energy_Q(double p) const { return kinetic_Q - 2.0 / (p + 1.0) * potential_Q; }
  model::ThresholdReference reference(double p) const {
    return {mass_Q, kinetic_Q, potential_Q, energy_Q(p)};
  }
};

/// Isotropic Gaussian exp(-|x|^2 / (2 width^2)).
Field gaussian(const Grid& grid, double width, double amplitude = 1.0);

/// Averages f over the hyperoctahedral symmetry group of the grid
/// (axis permutations and reflections through the origin point).
Field radialize(const Field& f);

/// Residual -D^{2s}Q - Q + w |Q|^{p-1} Q.
Field ground_state_residual(const Field& q, const ModelParams& params, const model::WeightField& w);

/// Stabilised fixed-point (Petviashvili) solve of D^{2s}Q + Q = |x|^{-b} Q^p.
/// Throws ConvergenceFailure carrying the residual history when the
/// stabilising factor degenerates, the iterate collapses, or max_iterations is
/// exhausted.
GroundStateResult solve_ground_state(const ModelParams& params, const Grid& grid,
                                     const std::optional<Field>& init = std::nullopt,
                                     const GroundStateOptions& opts = {});

/// Norms and K_opt of an arbitrary candidate profile (used for re-validation
/// of persisted or perturbed ground states).
GroundStateResult measure_profile(const Field& q, const ModelParams& params);

struct PohozaevResiduals {
  double kinetic;    // | ||D^s Q||^2 - (B/A) ||Q||^2 |
  double potential;  // | P[Q] - ((p+1)/A) ||Q||^2 |
};
PohozaevResiduals pohozaev_residuals(const GroundStateResult& r, const ModelParams& params);

struct GnConstant {
  double closed_form;  // ((p+1)/A) (A/B)^{B/2} ||Q||^{1-p}
  double empirical;    // P[Q] / (||Q||^A ||D^s Q||^B)
};
GnConstant sharp_gn_constant(const GroundStateResult& r, const DerivedExponents& exps, double p);

/// P[u] / (||u||^A ||D^s u||^B) for an arbitrary field.
double gn_ratio(const Field& u, const ModelParams& params, const model::WeightField& w);

}  // namespace finls::ground
