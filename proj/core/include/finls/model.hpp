#pragma once

#include <string>
#include <vector>

#include "finls/field.hpp"

namespace finls::model {

using spectral::Field;
using spectral::Grid;

enum class Sign { focusing, defocusing };

std::string to_string(Sign sign);
Sign sign_from_string(const std::string& name);

/// Physical parameters of i u_t - D^{2s} u = -+ |x|^{-b} |u|^{p-1} u.
struct ModelParams {
  int dim = 2;
  double s = 0.8;
  double b = 0.4;
  double p = 3.0;
  Sign sign = Sign::focusing;

  /// +1 for focusing, -1 for defocusing; multiplies the potential term.
  double sign_factor() const noexcept { return sign == Sign::focusing ? 1.0 : -1.0; }
};

struct DerivedExponents {
  double s_c;      // critical Sobolev index N/2 - (2s-b)/(p-1)
  double gamma_c;  // (s - s_c) / s_c
  double B;        // (N(p-1) + 2b) / (2s)
  double A;        // p + 1 - B
  double p_star;   // mass-critical power
  double p_upper;  // energy-critical power
};

/// Lower mass-critical and upper energy-critical powers for (N, s, b).
double mass_critical_power(int dim, double s, double b);
double energy_critical_power(int dim, double s, double b);

/// Throws ValidationError naming the first violated admissibility bound.
void validate(const ModelParams& params);
DerivedExponents derive_exponents(const ModelParams& params);

/// Extra hypotheses under which global solutions are known to scatter
/// (N >= 3, s > N/(N+1), p > 2(1 - b/N), and p < (N-2b)/(N-2s) when N = 3).
bool scattering_hypotheses_hold(const ModelParams& params);

/// Samples of |x|^{-b}. The origin cell carries the exact cell average of the
/// singular weight instead of a point value.
class WeightField {
 public:
  WeightField(const Grid& grid, double b);

  const Grid& grid() const noexcept { return grid_; }
  double exponent() const noexcept { return b_; }
  const std::vector<double>& values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  /// Largest weight over grid points outside the origin cell, h^{-b}.
  double max_off_origin() const noexcept { return max_off_origin_; }

 private:
  Grid grid_;
  double b_;
  std::vector<double> values_;
  double max_off_origin_;
};

/// Average of |x|^{-b} over the cube [-a, a]^N.
double cube_average_of_weight(int dim, double half_side, double b);

double mass(const Field& u);
/// P[u] = int |x|^{-b} |u|^{p+1}.
double potential(const Field& u, const WeightField& w, double p);
/// ||D^s u||^2.
double kinetic(const Field& u, double s);
/// E[u] = ||D^s u||^2 -+ 2/(p+1) P[u]; the sign follows params.sign.
double energy(const Field& u, const ModelParams& params, const WeightField& w);
/// I[u] = ||D^s u||^2 - B/(p+1) P[u].
double virial_functional(const Field& u, const ModelParams& params, const WeightField& w);

struct Functionals {
  double mass;
  double kinetic;
  double potential;
  double energy;
  double virial;
};

/// Mass, kinetic, potential, energy and virial from one transform.
Functionals evaluate(const Field& u, const ModelParams& params, const WeightField& w);

/// Ground-state quantities against which ME and MG are normalised.
struct ThresholdReference {
  double mass;
  double kinetic;
  double potential;
  double energy;
};

struct MeMg {
  double me;
  double mg;
};

/// ME = (M[u]/M[Q])^{gamma_c} E[u]/E[Q] and
/// MG = (||u||/||Q||)^{gamma_c} ||D^s u||/||D^s Q||.
MeMg me_mg(const Functionals& f, const ThresholdReference& ref, const DerivedExponents& exps);
MeMg me_mg(const Field& u, const ModelParams& params, const WeightField& w,
           const ThresholdReference& ref);

enum class Regime { global_scattering, blowup, indeterminate };
std::string to_string(Regime regime);

struct ThresholdReport {
  Regime regime;
  double me;
  double mg;
  /// P[u] M[u]^{gamma_c} and the ground-state value it is compared against.
  double potential_mass;
  double potential_mass_threshold;
  double virial;
  bool scattering_hypotheses;
};

/// Values within this distance of 1 count as the boundary.
inline constexpr double kThresholdBoundaryBand = 1e-6;

ThresholdReport classify_threshold(const Field& u, const ModelParams& params, const WeightField& w,
                                   const ThresholdReference& ref);

}  // namespace finls::model
