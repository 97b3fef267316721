#include "finls/ground_state.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fft.hpp"
#include "finls/error.hpp"
#include "finls/spectral.hpp"

namespace finls::ground {

using spectral::cplx;
using spectral::Representation;

Field gaussian(const Grid& grid, double width, double amplitude) {
  const auto r = grid.radius();
  Field g(grid);
  for (std::size_t n = 0; n < grid.size(); ++n) {
    g[n] = amplitude * std::exp(-r[n] * r[n] / (2.0 * width * width));
  }
  return g;
}

Field radialize(const Field& f) {
  if (!f.is_physical()) throw ContractViolation("radialize expects a physical field");
  const Grid& g = f.grid();
  const int dim = g.dim();
  const int m = g.points_per_axis();
  std::array<int, 3> perm{0, 1, 2};
  std::vector<std::array<int, 3>> perms;
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.begin() + dim));

  Field out(g);
  const int n_reflect = 1 << dim;
  const double count = static_cast<double>(perms.size() * static_cast<std::size_t>(n_reflect));
  for (std::size_t n = 0; n < g.size(); ++n) {
    const auto idx = g.unravel(n);
    cplx acc{0.0, 0.0};
    for (const auto& pm : perms) {
      for (int mask = 0; mask < n_reflect; ++mask) {
        std::array<int, 3> img{0, 0, 0};
        for (int a = 0; a < dim; ++a) {
          const int i = idx[pm[a]];
          img[a] = (mask >> a) & 1 ? (m - i) % m : i;
        }
        acc += f[g.ravel(img)];
      }
    }
    out[n] = acc / count;
  }
  return out;
}

namespace {

double symbol_power(double k2, double s) { return k2 == 0.0 ? 0.0 : std::pow(k2, s); }

// |Q|^{p-1} Q weighted, real part only.
Field nonlinear_term(const Field& q, const model::WeightField& w, double p) {
  Field out(q.grid());
  const auto& wv = w.values();
  for (std::size_t n = 0; n < q.size(); ++n) {
    const double v = q[n].real();
    out[n] = wv[n] * std::pow(std::abs(v), p - 1.0) * v;
  }
  return out;
}

}  // namespace

Field ground_state_residual(const Field& q, const ModelParams& params, const model::WeightField& w) {
  Field lq = spectral::frac_laplacian(q, 2.0 * params.s);
  Field res = nonlinear_term(q, w, params.p);
  for (std::size_t n = 0; n < q.size(); ++n) res[n] -= lq[n] + q[n];
  return res;
}

GroundStateResult measure_profile(const Field& q, const ModelParams& params) {
  const auto exps = model::derive_exponents(params);
  const model::WeightField w(q.grid(), params.b);
  GroundStateResult r{q, 0.0, 0.0, 0.0, 0.0, 0.0, 0, {}};
  r.mass_Q = model::mass(q);
  r.kinetic_Q = model::kinetic(q, params.s);
  r.potential_Q = model::potential(q, w, params.p);
  r.k_opt = (params.p + 1.0) / exps.A * std::pow(exps.A / exps.B, exps.B / 2.0) *
            std::pow(std::sqrt(r.mass_Q), 1.0 - params.p);
  r.residual = spectral::l2_norm(ground_state_residual(q, params, w));
  return r;
}

GroundStateResult solve_ground_state(const ModelParams& params, const Grid& grid,
                                     const std::optional<Field>& init,
                                     const GroundStateOptions& opts) {
  model::validate(params);
  const model::WeightField w(grid, params.b);
  const double p = params.p;
  const double gamma = p / (p - 1.0);

  Field q = init ? spectral::to_physical(*init) : gaussian(grid, grid.half_width() / 6.0);
  if (!(q.grid() == grid)) throw ContractViolation("initial profile lives on a different grid");
  for (auto& v : q.values()) {
    if (v.real() < -1e-12 || std::abs(v.imag()) > 1e-12) {
      throw DomainError("ground-state init must be real and nonnegative");
    }
    v = cplx(std::max(v.real(), 0.0), 0.0);
  }
  if (!(spectral::l2_norm(q) > 0.0)) throw DomainError("ground-state init must be nonzero");

  // Symbol of 1 + D^{2s}.
  const auto k2 = grid.xi_squared();
  std::vector<double> lsym(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) lsym[n] = 1.0 + symbol_power(k2[n], params.s);
  const double pw = grid.cell_volume() / static_cast<double>(grid.size());

  std::vector<double> history;
  int it = 0;
  double residual = 0.0;
  bool converged = false;
  for (;; ++it) {
    Field nq = nonlinear_term(q, w, p);
    Field qhat = q;
    spectral::detail::fft_forward_inplace(grid, qhat.buffer());
    Field nhat = nq;
    spectral::detail::fft_forward_inplace(grid, nhat.buffer());

    double lq_q = 0.0;
    double res2 = 0.0;
    for (std::size_t n = 0; n < grid.size(); ++n) {
      lq_q += lsym[n] * std::norm(qhat[n]);
      res2 += std::norm(nhat[n] - lsym[n] * qhat[n]);
    }
    lq_q *= pw;
    residual = std::sqrt(res2 * pw);
    const double qnorm = spectral::l2_norm(q);
    history.push_back(residual / qnorm);
    if (residual <= opts.residual_tolerance * qnorm) {
      converged = true;
      break;
    }
    if (it >= opts.max_iterations) break;

    double q_n = 0.0;
    for (std::size_t n = 0; n < grid.size(); ++n) q_n += q[n].real() * nq[n].real();
    q_n *= grid.cell_volume();
    const double stab = lq_q / q_n;
    if (!std::isfinite(stab) || stab < 1e-12 || stab > 1e12) {
      std::ostringstream msg;
      msg << "Petviashvili stabilising factor degenerated (S=" << stab << ") at iteration " << it;
      throw ConvergenceFailure(msg.str(), history);
    }
    const double factor = std::pow(stab, gamma);
    for (std::size_t n = 0; n < grid.size(); ++n) nhat[n] *= factor / lsym[n];
    spectral::detail::fft_inverse_inplace(grid, nhat.buffer());
    Field next(grid);
    for (std::size_t n = 0; n < grid.size(); ++n) next[n] = cplx(nhat[n].real(), 0.0);
    if ((it + 1) % std::max(opts.radialize_every, 1) == 0 && opts.radialize_every > 0) {
      next = radialize(next);
    }

    const double next_norm = spectral::l2_norm(next);
    if (!(next_norm > 1e-12)) {
      throw ConvergenceFailure("ground-state iterate collapsed to zero", history);
    }
    const double change = spectral::l2_norm(next - q) / next_norm;
    q = std::move(next);
    if (change <= opts.change_tolerance) {
      ++it;
      residual = spectral::l2_norm(ground_state_residual(q, params, w));
      history.push_back(residual / spectral::l2_norm(q));
      converged = residual <= opts.residual_tolerance * spectral::l2_norm(q);
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "ground state did not reach residual " << opts.residual_tolerance << " after " << it
        << " iterations (last relative residual " << history.back() << ")";
    throw ConvergenceFailure(msg.str(), history);
  }

  GroundStateResult r = measure_profile(q, params);
  r.residual = residual;
  r.iterations = it;
  r.residual_history = std::move(history);
  return r;
}

PohozaevResiduals pohozaev_residuals(const GroundStateResult& r, const ModelParams& params) {
  const auto e = model::derive_exponents(params);
  return {std::abs(r.kinetic_Q - e.B / e.A * r.mass_Q),
          std::abs(r.potential_Q - (params.p + 1.0) / e.A * r.mass_Q)};
}

GnConstant sharp_gn_constant(const GroundStateResult& r, const DerivedExponents& exps, double p) {
  GnConstant k{};
  const double qn = std::sqrt(r.mass_Q);
  const double dq = std::sqrt(r.kinetic_Q);
  k.closed_form = (p + 1.0) / exps.A * std::pow(exps.A / exps.B, exps.B / 2.0) * std::pow(qn, 1.0 - p);
  k.empirical = r.potential_Q / (std::pow(qn, exps.A) * std::pow(dq, exps.B));
  return k;
}

double gn_ratio(const Field& u, const ModelParams& params, const model::WeightField& w) {
  const auto e = model::derive_exponents(params);
  const double pot = model::potential(u, w, params.p);
  return pot / (std::pow(spectral::l2_norm(u), e.A) * std::pow(spectral::sobolev_seminorm(u, params.s), e.B));
}

}  // namespace finls::ground
