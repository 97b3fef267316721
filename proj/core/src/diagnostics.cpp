#include "finls/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "finls/error.hpp"
#include "finls/spectral.hpp"

namespace finls::diagnostics {

using spectral::cplx;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::vector<double>> virial_vector_field(const Grid& grid, double R) {
  std::vector<std::vector<double>> out(grid.dim(), std::vector<double>(grid.size()));
  const auto r = grid.radius();
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const auto x = grid.position(n);
    // grad f_R = (f_R'(r) / r) x.
    const double t = virial_cutoff(r[n], R, grid.dim()).tangential;
    for (int a = 0; a < grid.dim(); ++a) out[a][n] = t * x[a];
  }
  return out;
}

double localized_virial_impl(const Field& hat, const Field& phys, const std::vector<spectral::Multiplier>& deriv,
                             const std::vector<std::vector<double>>& field) {
  const Grid& g = phys.grid();
  std::vector<cplx> acc(g.size(), cplx(0.0));
  double total = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    const Field d = spectral::to_physical(spectral::apply_multiplier(hat, deriv[a]));
    for (std::size_t n = 0; n < g.size(); ++n) {
      total += field[a][n] * (std::conj(phys[n]) * d[n]).imag();
    }
  }
  return 2.0 * total * g.cell_volume();
}

std::vector<spectral::Multiplier> derivative_multipliers(const Grid& g) {
  std::vector<spectral::Multiplier> out;
  for (int a = 0; a < g.dim(); ++a) out.push_back(derivative_multiplier(g, a));
  return out;
}

}  // namespace

spectral::Multiplier derivative_multiplier(const Grid& grid, int axis) {
  if (axis < 0 || axis >= grid.dim()) throw ContractViolation("derivative axis out of range");
  spectral::ComplexBuffer vals(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const int i = grid.unravel(n)[axis];
    vals[n] = grid.is_nyquist(i) ? cplx(0.0) : cplx(0.0, grid.frequency(i));
  }
  return spectral::Multiplier(grid, std::move(vals));
}

double boundary_tail(const Field& u, double band) {
  const Field phys = spectral::to_physical(u);
  const Grid& g = phys.grid();
  const double edge = (1.0 - band) * g.half_width();
  double tail = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    const auto x = g.position(n);
    double m = 0.0;
    for (int a = 0; a < g.dim(); ++a) m = std::max(m, std::abs(x[a]));
    if (m >= edge) tail = std::max(tail, std::abs(phys[n]));
  }
  return tail;
}

double local_mass(const Field& u, double R) {
  const Field phys = spectral::to_physical(u);
  const auto r = phys.grid().radius();
  double acc = 0.0;
  for (std::size_t n = 0; n < phys.size(); ++n) {
    if (r[n] < R) acc += std::norm(phys[n]);
  }
  return acc * phys.grid().cell_volume();
}

double local_potential(const Field& u, const model::WeightField& w, double p, double R) {
  const Field phys = spectral::to_physical(u);
  const auto r = phys.grid().radius();
  double acc = 0.0;
  for (std::size_t n = 0; n < phys.size(); ++n) {
    if (r[n] < R) acc += w[n] * std::pow(std::abs(phys[n]), p + 1.0);
  }
  return acc * phys.grid().cell_volume();
}

double localized_virial(const Field& u, const CutoffSpec& cutoff) {
  if (cutoff.kind != CutoffKind::f_virial) throw ContractViolation("localized virial needs an f_virial cutoff");
  const Field phys = spectral::to_physical(u);
  const Field hat = spectral::to_frequency(u);
  return localized_virial_impl(hat, phys, derivative_multipliers(phys.grid()),
                               virial_vector_field(phys.grid(), cutoff.radius));
}

Recorder::Recorder(const Grid& grid, const ModelParams& params, RecordSpec spec)
    : grid_(grid),
      params_(params),
      spec_(std::move(spec)),
      weight_(grid, params.b),
      derivative_(derivative_multipliers(grid)),
      virial_field_(virial_vector_field(grid, spec_.virial_radius)) {
  model::validate(params_);
}

DiagnosticsRecord Recorder::sample(const Field& u, double t, double dt) const {
  const Field phys = spectral::to_physical(u);
  const Field hat = spectral::to_frequency(phys);
  DiagnosticsRecord rec;
  rec.t = t;
  rec.dt = dt;
  const auto f = model::evaluate(hat, params_, weight_);
  rec.mass = f.mass;
  rec.kinetic = f.kinetic;
  rec.potential = model::potential(phys, weight_, params_.p);
  rec.energy = f.kinetic - params_.sign_factor() * 2.0 / (params_.p + 1.0) * rec.potential;
  rec.virial = f.kinetic - model::derive_exponents(params_).B / (1.0 + params_.p) * rec.potential;
  rec.virial_R = localized_virial_impl(hat, phys, derivative_, virial_field_);
  if (spec_.reference) {
    model::Functionals ff = f;
    ff.potential = rec.potential;
    ff.energy = rec.energy;
    const auto r = model::me_mg(ff, *spec_.reference, model::derive_exponents(params_));
    rec.me = r.me;
    rec.mg = r.mg;
  } else {
    rec.me = kNaN;
    rec.mg = kNaN;
  }
  rec.sup_norm = spectral::sup_norm(phys);
  rec.boundary_tail = boundary_tail(phys, spec_.boundary_band);

  const auto r = grid_.radius();
  rec.local_mass.assign(spec_.radii.size(), 0.0);
  rec.local_potential.assign(spec_.radii.size(), 0.0);
  for (std::size_t n = 0; n < grid_.size(); ++n) {
    const double a2 = std::norm(phys[n]);
    const double pw = weight_[n] * std::pow(std::sqrt(a2), params_.p + 1.0);
    for (std::size_t k = 0; k < spec_.radii.size(); ++k) {
      if (r[n] < spec_.radii[k]) {
        rec.local_mass[k] += a2;
        rec.local_potential[k] += pw;
      }
    }
  }
  for (auto& v : rec.local_mass) v *= grid_.cell_volume();
  for (auto& v : rec.local_potential) v *= grid_.cell_volume();
  return rec;
}

VirialRhs virial_rhs(const Field& u, const ModelParams& params, const CutoffSpec& cutoff, const MQuadrature& q) {
  if (cutoff.kind != CutoffKind::f_virial) throw ContractViolation("virial_rhs needs an f_virial cutoff");
  const auto exps = model::derive_exponents(params);
  const Field phys = spectral::to_physical(u);
  const Field hat = spectral::to_frequency(phys);
  const Grid& g = phys.grid();
  const int dim = g.dim();
  const double R = cutoff.radius;
  const double dv = g.cell_volume();
  const auto r = g.radius();
  const auto k2 = g.xi_squared();

  std::vector<VirialCutoffValues> cut(g.size());
  std::vector<std::array<double, 3>> xhat(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    cut[n] = virial_cutoff(r[n], R, dim);
    const auto x = g.position(n);
    for (int a = 0; a < dim; ++a) xhat[n][a] = r[n] > 0.0 ? x[a] / r[n] : 0.0;
  }
  const auto deriv = derivative_multipliers(g);
  const double cs = spectral::resolvent_constant(params.s);

  // Integrands of one resolvent field: inner |grad|^2, outer Hessian form,
  // and Delta^2 f_R |u_m|^2.
  auto moments = [&](const Field& vhat) {
    std::array<double, 3> out{0.0, 0.0, 0.0};
    std::vector<Field> grad;
    for (int a = 0; a < dim; ++a) grad.push_back(spectral::to_physical(spectral::apply_multiplier(vhat, deriv[a])));
    const Field v = spectral::to_physical(vhat);
    for (std::size_t n = 0; n < g.size(); ++n) {
      double g2 = 0.0;
      cplx radial{0.0, 0.0};
      for (int a = 0; a < dim; ++a) {
        g2 += std::norm(grad[a][n]);
        radial += xhat[n][a] * grad[a][n];
      }
      if (r[n] < R) {
        out[0] += g2;
      } else {
        const double rad2 = std::norm(radial);
        out[1] += cut[n].second * rad2 + cut[n].tangential * (g2 - rad2);
      }
      out[2] += cut[n].bilaplacian * std::norm(v[n]);
    }
    for (auto& o : out) o *= dv;
    return out;
  };

  VirialRhs rhs;
  for (std::size_t j = 0; j < q.m.size(); ++j) {
    const double m = q.m[j];
    Field vhat = hat;
    auto vals = vhat.values();
    for (std::size_t n = 0; n < g.size(); ++n) vals[n] *= cs / (m + k2[n]);
    const auto mo = moments(vhat);
    const double w = q.weights[j] * std::pow(m, params.s);
    rhs.kinetic_inner += 4.0 * w * mo[0];
    rhs.kinetic_outer += 4.0 * w * mo[1];
    rhs.bilaplacian -= w * mo[2];
  }
  // Upper tail: u_m ~ c_s u / m.
  const auto mo = moments(hat);
  rhs.kinetic_inner += 4.0 * q.upper_tail_factor * mo[0];
  rhs.kinetic_outer += 4.0 * q.upper_tail_factor * mo[1];
  rhs.bilaplacian -= q.upper_tail_factor * mo[2];

  // Next-order upper remainder and the dropped lower range, both from the
  // spectrum of u.
  double hi = 0.0;
  double lo = 0.0;
  double grad2 = 0.0;
  const double m_hi = q.m_hi();
  const double m_lo = q.m_lo();
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (k2[n] == 0.0) continue;
    const double a2 = std::norm(hat[n]);
    hi += 2.0 * k2[n] * k2[n] * a2;
    lo += a2;
    grad2 += k2[n] * a2;
  }
  const double pw = dv / static_cast<double>(g.size());
  hi *= pw * cs * cs * std::pow(m_hi, params.s - 2.0) / (2.0 - params.s);
  lo *= pw * cs * cs * std::pow(m_lo, params.s + 1.0) / (1.0 + params.s);
  rhs.tail_estimate = 4.0 * (hi + lo);
  const double scale = 4.0 * params.s * grad2 * pw;
  if (scale > 0.0 && std::abs(rhs.tail_estimate) > q.tail_tolerance * scale) {
    throw QuadratureError("m-quadrature tails exceed tolerance; widen y_max");
  }

  const double sigma = params.sign_factor();
  const double p = params.p;
  double inner = 0.0;
  double outer_lap = 0.0;
  double outer_rad = 0.0;
  const model::WeightField w(g, params.b);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double dens = w[n] * std::pow(std::abs(phys[n]), p + 1.0);
    if (r[n] < R) {
      inner += dens;
    } else {
      outer_lap += cut[n].laplacian * dens;
      outer_rad += cut[n].tangential * dens;
    }
  }
  rhs.potential_inner = -sigma * 4.0 * params.s * exps.B / (p + 1.0) * inner * dv;
  rhs.potential_outer_laplacian = -sigma * 2.0 * (p - 1.0) / (p + 1.0) * outer_lap * dv;
  rhs.potential_outer_radial = -sigma * 4.0 * params.b / (p + 1.0) * outer_rad * dv;
  return rhs;
}

BalakrishnanResult balakrishnan_identity(const Field& u, double s, const MQuadrature& q) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("Balakrishnan identity needs 0 < s < 1");
  if (std::abs(q.s - s) > 1e-14) throw ContractViolation("m-quadrature built for a different s");
  BalakrishnanResult out{};
  const double ks = spectral::sobolev_seminorm(u, s);
  out.lhs = s * ks * ks;
  const Field hat = spectral::to_frequency(u);
  double rhs = 0.0;
  for (std::size_t j = 0; j < q.m.size(); ++j) {
    const Field um = spectral::resolvent(hat, q.m[j], s);
    const double gm = spectral::sobolev_seminorm(um, 1.0);
    rhs += q.weights[j] * std::pow(q.m[j], s) * gm * gm;
  }
  const double g1 = spectral::sobolev_seminorm(hat, 1.0);
  out.rhs = rhs + q.upper_tail_factor * g1 * g1;
  return out;
}

LocalizedEnergyPoint localized_energy_terms(const Field& u, double s, double R) {
  const Field phys = spectral::to_physical(u);
  const Field psi = psi_field(phys.grid(), R);
  Field cut = phys;
  for (std::size_t n = 0; n < cut.size(); ++n) cut[n] *= psi[n].real();
  const double a = spectral::sobolev_seminorm(cut, s);
  const double b = spectral::sobolev_seminorm(phys, s);
  return {R, s * a * a, s * b * b, 0.0};
}

LocalizedEnergyReport localized_energy_inequality(const Field& u, double s, const std::vector<double>& radii) {
  if (radii.empty()) throw InsufficientData("localized energy sweep needs at least one radius");
  LocalizedEnergyReport rep;
  rep.constant = 0.0;
  for (double R : radii) {
    if (R > u.grid().half_width() / 2.0) throw DomainError("localized energy radius must satisfy R <= L/2");
    auto pt = localized_energy_terms(u, s, R);
    rep.constant = std::max(rep.constant, (pt.lhs - pt.rhs) * R);
    rep.points.push_back(pt);
  }
  rep.min_slack = std::numeric_limits<double>::infinity();
  for (auto& pt : rep.points) {
    pt.slack = pt.rhs + rep.constant / pt.R - pt.lhs;
    rep.min_slack = std::min(rep.min_slack, pt.slack);
    rep.max_slack_times_R = std::max(rep.max_slack_times_R, std::abs(pt.slack) * pt.R);
  }
  if (rep.points.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (const auto& pt : rep.points) {
      const double e = std::abs(pt.lhs - pt.rhs);
      if (!(e > 0.0)) continue;
      const double x = std::log(pt.R);
      const double y = std::log(e);
      sx += x, sy += y, sxx += x * x, sxy += x * y;
      ++k;
    }
    rep.fitted_rate = k >= 2 ? (k * sxy - sx * sy) / (k * sxx - sx * sx) : kNaN;
  } else {
    rep.fitted_rate = kNaN;
  }
  return rep;
}

namespace {

std::size_t radius_index(const std::vector<double>& radii, double R) {
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (std::abs(radii[k] - R) <= 1e-12 * std::max(1.0, R)) return k;
  }
  throw ContractViolation("radius was not recorded along the trajectory");
}

}  // namespace

MorawetzResult morawetz_spacetime(std::span<const DiagnosticsRecord> records, const std::vector<double>& radii,
                                  double R, double b) {
  MorawetzResult out{R, 0.0, 0.0, 0.0};
  if (records.empty()) return out;
  const std::size_t k = radius_index(radii, R);
  for (std::size_t i = 1; i < records.size(); ++i) {
    const double h = records[i].t - records[i - 1].t;
    out.integral += 0.5 * h * (records[i].local_potential[k] + records[i - 1].local_potential[k]);
  }
  const double T = records.back().t - records.front().t;
  out.scale = R + T * std::pow(R, -b);
  out.ratio = out.integral / out.scale;
  return out;
}

double morawetz_spread(std::span<const MorawetzResult> results) {
  if (results.empty()) return kNaN;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& r : results) {
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

std::vector<DecayRow> local_decay_scan(std::span<const DiagnosticsRecord> records, const std::vector<double>& radii) {
  if (records.size() < 2) throw InsufficientData("decay scan needs at least two records");
  const double t0 = records.front().t;
  const double T = records.back().t;
  const double half = t0 + 0.5 * (T - t0);
  std::vector<DecayRow> rows;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    DecayRow row{};
    row.R = radii[k];
    row.local_mass_min = std::numeric_limits<double>::infinity();
    row.local_potential_min = std::numeric_limits<double>::infinity();
    bool started = false;
    for (const auto& rec : records) {
      if (rec.t < half) continue;
      if (!started) {
        row.local_mass_start = rec.local_mass[k];
        row.local_potential_start = rec.local_potential[k];
        started = true;
      }
      row.local_mass_min = std::min(row.local_mass_min, rec.local_mass[k]);
      row.local_potential_min = std::min(row.local_potential_min, rec.local_potential[k]);
    }
    row.local_mass_end = records.back().local_mass[k];
    row.local_potential_end = records.back().local_potential[k];
    row.mass_decay_ratio = row.local_mass_end > 0.0 ? row.local_mass_start / row.local_mass_end
                                                    : std::numeric_limits<double>::infinity();
    row.decaying = row.local_mass_end < row.local_mass_start && row.local_potential_end < row.local_potential_start;
    rows.push_back(row);
  }
  return rows;
}

RadialSobolevResult radial_sobolev_check(const Field& u, double alpha) {
  const Grid& g = u.grid();
  const double n = g.dim();
  if (!(alpha > 0.5 && alpha < n / 2.0)) throw DomainError("radial Sobolev check needs 1/2 < alpha < N/2");
  const Field phys = spectral::to_physical(u);
  const auto r = g.radius();
  RadialSobolevResult out{};
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (r[k] < g.spacing()) continue;
    out.lhs_sup = std::max(out.lhs_sup, std::pow(r[k], n / 2.0 - alpha) * std::abs(phys[k]));
  }
  out.rhs = spectral::sobolev_seminorm(phys, alpha);
  out.ratio = out.rhs > 0.0 ? out.lhs_sup / out.rhs : kNaN;
  return out;
}

}  // namespace finls::diagnostics
