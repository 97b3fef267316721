#include "finls/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "fft.hpp"
#include "finls/error.hpp"
#include "finls/spectral.hpp"

namespace finls::dynamics {

using spectral::cplx;
using spectral::Representation;

void EvolveControls::validate() const {
  std::ostringstream why;
  if (!(dt > 0.0) || !std::isfinite(dt)) why << "dt must be positive";
  else if (!(t_end > 0.0) || !std::isfinite(t_end)) why << "t_end must be positive";
  else if (snapshot_stride < 1) why << "snapshot_stride must be >= 1";
  else if (!(effective_dt_floor() > 0.0 && effective_dt_floor() < dt)) why << "need 0 < dt_floor < dt";
  else if (!(gradient_cap > 1.0)) why << "gradient_cap must exceed 1";
  else if (!(boundary_threshold > 0.0)) why << "boundary_threshold must be positive";
  else if (!(boundary_band > 0.0 && boundary_band < 1.0)) why << "boundary_band must lie in (0, 1)";
  else if (scattering_snapshots < 2 && snapshot_times.empty()) why << "need at least two scattering snapshots";
  for (double t : snapshot_times) {
    if (!(t > 0.0 && t <= t_end)) {
      why << "snapshot time " << t << " outside (0, t_end]";
      break;
    }
  }
  if (!why.str().empty()) throw ValidationError(why.str());
}

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::completed:
      return "completed";
    case Outcome::blow_up_detected:
      return "blow_up_detected";
    case Outcome::boundary_contaminated:
      return "boundary_contaminated";
  }
  return "completed";
}

namespace {

double nonlinear_exponent_power(double modulus2, double p) {
  return p == 3.0 ? modulus2 : std::pow(modulus2, 0.5 * (p - 1.0));
}

// Applies the nonlinear phase in place and returns the max modulus.
double nonlinear_phase_inplace(spectral::ComplexBuffer& u, double dt, const ModelParams& params,
                               const model::WeightField& w) {
  const double a = dt * params.sign_factor();
  double sup = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n) {
    const double m2 = std::norm(u[n]);
    sup = std::max(sup, m2);
    const double phase = a * w[n] * nonlinear_exponent_power(m2, params.p);
    u[n] *= cplx(std::cos(phase), std::sin(phase));
  }
  return std::sqrt(sup);
}

std::vector<double> dispersion(const Grid& g, double s) {
  const auto k2 = g.xi_squared();
  std::vector<double> out(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) out[n] = k2[n] == 0.0 ? 0.0 : std::pow(k2[n], s);
  return out;
}

// Caches exp(-i tau |xi|^{2s}) for the few distinct tau values a run uses.
class PhaseCache {
 public:
  explicit PhaseCache(std::vector<double> omega) : omega_(std::move(omega)) {}

  const spectral::ComplexBuffer& get(double tau) {
    auto it = cache_.find(tau);
    if (it != cache_.end()) return it->second;
    if (cache_.size() >= kMaxEntries) cache_.clear();
    spectral::ComplexBuffer ph(omega_.size());
    for (std::size_t n = 0; n < omega_.size(); ++n) {
      const double a = -tau * omega_[n];
      ph[n] = cplx(std::cos(a), std::sin(a));
    }
    return cache_.emplace(tau, std::move(ph)).first->second;
  }

 private:
  static constexpr std::size_t kMaxEntries = 8;
  std::vector<double> omega_;
  std::map<double, spectral::ComplexBuffer> cache_;
};

void multiply(spectral::ComplexBuffer& a, const spectral::ComplexBuffer& b) {
  for (std::size_t n = 0; n < a.size(); ++n) a[n] *= b[n];
}

// Step sizes are rounded down onto base * 2^{-k/8} so propagator phases repeat.
double quantize_dt(double dt, double base) {
  if (dt >= base) return base;
  const double k = std::ceil(-8.0 * std::log2(dt / base) - 1e-9);
  return base * std::exp2(-k / 8.0);
}

bool finite_state(const spectral::ComplexBuffer& u) {
  for (const auto& v : u) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  }
  return true;
}

}  // namespace

void nonlinear_phase(Field& u, double dt, const ModelParams& params, const model::WeightField& w) {
  if (!u.is_physical()) throw ContractViolation("nonlinear phase acts on physical fields");
  nonlinear_phase_inplace(u.buffer(), dt, params, w);
}

Field strang_step(const Field& u, double dt, const ModelParams& params, const model::WeightField& w, bool dealias) {
  if (!u.is_physical()) throw ContractViolation("strang_step expects a physical field");
  if (!(dt > 0.0)) throw DomainError("strang_step needs dt > 0");
  Field v = spectral::free_propagator(u, 0.5 * dt, params.s);
  nonlinear_phase(v, dt, params, w);
  if (!finite_state(v.buffer())) throw NumericalFailure("non-finite state in nonlinear substep", 0.0);
  if (dealias) {
    Field hat = spectral::forward_transform(v);
    spectral::dealias_two_thirds(hat);
    v = spectral::inverse_transform(hat);
  }
  return spectral::free_propagator(v, 0.5 * dt, params.s);
}

double adapt_dt(double sup_norm, const ModelParams& params, const EvolveControls& controls, double w_max) {
  const double dt = controls.dt / (1.0 + std::pow(sup_norm, params.p - 1.0) * w_max);
  return std::max(dt, controls.effective_dt_floor());
}

double adapt_dt(const Field& u, const ModelParams& params, const EvolveControls& controls) {
  return adapt_dt(spectral::sup_norm(u), params, controls, std::pow(u.grid().spacing(), -params.b));
}

TrajectoryResult evolve(const Field& u0, const ModelParams& params, const EvolveControls& controls,
                        const RecordSpec& record_spec, const RecordSink& sink) {
  controls.validate();
  model::validate(params);
  const Grid& grid = u0.grid();
  Field phys0 = spectral::to_physical(u0);
  if (!finite_state(phys0.buffer())) throw NumericalFailure("initial data is not finite", 0.0);

  RecordSpec rs = record_spec;
  rs.boundary_band = controls.boundary_band;
  const diagnostics::Recorder recorder(grid, params, rs);
  const auto& w = recorder.weight();
  const double w_max = w.max_off_origin();
  const double floor = controls.effective_dt_floor();
  const double T = controls.t_end;
  const double t_eps = 1e-12 * T;

  std::vector<double> snap_times = controls.snapshot_times;
  if (snap_times.empty()) {
    const int k = controls.scattering_snapshots;
    for (int i = 0; i < k; ++i) snap_times.push_back(T * (2.0 / 3.0 + i / (3.0 * (k - 1))));
  }
  std::sort(snap_times.begin(), snap_times.end());
  std::size_t next_snap = 0;

  const auto omega = dispersion(grid, params.s);
  PhaseCache phases(omega);

  TrajectoryResult out{{}, Outcome::completed, phys0, std::nullopt, {}, 0.0, 0, 0.0, 0.0,
                       false, false, false, 0.0, std::nullopt};

  spectral::ComplexBuffer hat = phys0.buffer();
  spectral::detail::fft_forward_inplace(grid, hat);
  double pending = 0.0;  // linear time owed to hat
  double t = 0.0;

  auto materialize = [&]() {
    spectral::ComplexBuffer v = hat;
    if (pending != 0.0) multiply(v, phases.get(pending));
    spectral::detail::fft_inverse_inplace(grid, v);
    return Field(grid, std::move(v), Representation::physical);
  };
  const double pw = grid.cell_volume() / static_cast<double>(grid.size());
  auto kinetic_now = [&]() {
    double acc = 0.0;
    for (std::size_t n = 0; n < hat.size(); ++n) acc += omega[n] * std::norm(hat[n]);
    return acc * pw;
  };

  double mass0 = 0.0;
  double energy0 = 0.0;
  auto push_record = [&](const Field& u, double dt_used) {
    auto rec = recorder.sample(u, t, dt_used);
    if (out.records.empty()) {
      mass0 = rec.mass;
      energy0 = rec.energy;
    } else {
      const double md = mass0 > 0.0 ? std::abs(rec.mass - mass0) / mass0 : std::abs(rec.mass);
      const double escale = std::abs(energy0) > 0.0 ? std::abs(energy0) : 1.0;
      const double ed = std::abs(rec.energy - energy0) / escale;
      out.max_mass_drift = std::max(out.max_mass_drift, md);
      out.max_energy_drift = std::max(out.max_energy_drift, ed);
    }
    out.max_boundary_tail = std::max(out.max_boundary_tail, rec.boundary_tail);
    const bool contaminated = rec.boundary_tail > controls.boundary_threshold;
    out.boundary_flag = out.boundary_flag || contaminated;
    if (sink) sink(rec);
    out.records.push_back(std::move(rec));
    return contaminated && controls.stop_on_boundary;
  };

  double sup = spectral::sup_norm(phys0);
  double dt_used = controls.adaptive ? quantize_dt(adapt_dt(sup, params, controls, w_max), controls.dt) : controls.dt;
  if (push_record(phys0, dt_used)) out.outcome = Outcome::boundary_contaminated;
  const double kinetic0 = out.records.front().kinetic;

  while (out.outcome == Outcome::completed && t < T - t_eps) {
    double dt = controls.dt;
    if (controls.adaptive) {
      const double raw = controls.dt / (1.0 + std::pow(sup, params.p - 1.0) * w_max);
      if (raw <= floor) {
        dt = floor;
        if (kinetic_now() >= controls.gradient_cap * controls.gradient_cap * kinetic0) {
          out.outcome = Outcome::blow_up_detected;
          out.collapse_time = t;
          break;
        }
      } else {
        dt = std::max(quantize_dt(raw, controls.dt), floor);
      }
    }
    double target = T;
    while (next_snap < snap_times.size() && snap_times[next_snap] <= t + t_eps) ++next_snap;
    if (next_snap < snap_times.size()) target = std::min(target, snap_times[next_snap]);
    bool landed = false;
    if (t + dt >= target - t_eps) {
      dt = target - t;
      landed = true;
    }

    multiply(hat, phases.get(pending + 0.5 * dt));
    spectral::detail::fft_inverse_inplace(grid, hat);
    sup = nonlinear_phase_inplace(hat, dt, params, w);
    if (!std::isfinite(sup)) {
      std::ostringstream msg;
      msg << "non-finite state after step " << out.steps << " at t=" << t;
      throw NumericalFailure(msg.str(), t);
    }
    spectral::detail::fft_forward_inplace(grid, hat);
    if (controls.dealias) {
      Field f(grid, std::move(hat), Representation::frequency);
      spectral::dealias_two_thirds(f);
      hat = std::move(f.buffer());
    }
    pending = 0.5 * dt;
    t = landed ? target : t + dt;
    dt_used = dt;
    ++out.steps;

    const bool at_end = t >= T - t_eps;
    const bool snap_now = landed && next_snap < snap_times.size() && std::abs(t - snap_times[next_snap]) <= t_eps;
    const bool record_now = out.steps % controls.snapshot_stride == 0 || at_end;
    if (snap_now || record_now) {
      Field u = materialize();
      if (snap_now) {
        out.snapshots.push_back({t, u});
        ++next_snap;
      }
      if (record_now && push_record(u, dt_used)) out.outcome = Outcome::boundary_contaminated;
    }
  }

  out.final_time = t;
  out.final_state = materialize();
  if (out.records.empty() || out.records.back().t != t) push_record(out.final_state, dt_used);
  out.mass_drift_flag = out.max_mass_drift > controls.mass_drift_tolerance;
  out.energy_drift_flag = out.max_energy_drift > controls.energy_drift_tolerance;
  if (out.outcome == Outcome::completed && !out.snapshots.empty()) {
    out.scattering_profile = spectral::free_propagator(out.snapshots.back().u, -out.snapshots.back().t, params.s);
  }
  return out;
}

ScatteringReport scattering_monitor(const TrajectoryResult& trajectory, const ModelParams& params, double tol,
                                    double local_radius, std::size_t min_snapshots) {
  ScatteringReport rep;
  if (trajectory.outcome != Outcome::completed) {
    rep.applicable = false;
    rep.note = "trajectory outcome is " + to_string(trajectory.outcome);
    return rep;
  }
  if (trajectory.snapshots.size() < std::max<std::size_t>(min_snapshots, 2)) {
    throw InsufficientData("scattering monitor needs at least " + std::to_string(min_snapshots) + " snapshots");
  }
  std::vector<Field> phi;
  for (const auto& snap : trajectory.snapshots) {
    rep.times.push_back(snap.t);
    phi.push_back(spectral::free_propagator(snap.u, -snap.t, params.s));
    rep.local_mass.push_back(diagnostics::local_mass(snap.u, local_radius));
  }
  const double scale = spectral::sobolev_norm(phi.back(), params.s);
  for (std::size_t i = 1; i < phi.size(); ++i) {
    rep.cauchy_differences.push_back(spectral::sobolev_norm(phi[i] - phi[i - 1], params.s));
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.cauchy_differences.size(); ++i) {
    if (rep.cauchy_differences[i] > rep.cauchy_differences[i - 1] + 1e-12 * std::max(scale, 1.0)) {
      rep.monotone = false;
    }
  }
  rep.cauchy_tail = rep.cauchy_differences.back();
  rep.converged = rep.monotone && rep.cauchy_tail <= tol;
  rep.profile = phi.back();
  return rep;
}

DispersiveReport dispersive_decay_check(const Field& phi, const ModelParams& params, const std::vector<double>& times,
                                        const std::vector<double>& exponents, double boundary_threshold,
                                        double band) {
  if (times.size() < 2) throw InsufficientData("decay fit needs at least two times");
  DispersiveReport rep;
  rep.times = times;
  for (double r : exponents) rep.fits.push_back({r, 0.0, std::isinf(r) ? -phi.grid().dim() / 2.0
                                                                        : -phi.grid().dim() * (0.5 - 1.0 / r), {}});
  const Field hat = spectral::to_frequency(phi);
  for (double t : times) {
    if (!(t > 0.0)) throw DomainError("decay times must be positive");
    const Field u = spectral::to_physical(spectral::free_propagator(hat, t, params.s));
    const double tail = diagnostics::boundary_tail(u, band);
    rep.max_boundary_tail = std::max(rep.max_boundary_tail, tail);
    if (tail > boundary_threshold) {
      std::ostringstream msg;
      msg << "free evolution reaches the boundary band at t=" << t << " (tail " << tail << ")";
      throw WindowTooLong(msg.str());
    }
    for (auto& fit : rep.fits) fit.norms.push_back(spectral::lp_norm(u, fit.r));
  }
  for (auto& fit : rep.fits) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double k = static_cast<double>(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double x = std::log(times[i]);
      const double y = std::log(fit.norms[i]);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    fit.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  }
  return rep;
}

}  // namespace finls::dynamics
