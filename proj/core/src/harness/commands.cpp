#include "finls/harness/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "finls/cutoff.hpp"
#include "finls/error.hpp"
#include "finls/harness/io.hpp"
#include "finls/quadrature.hpp"
#include "finls/spectral.hpp"

namespace finls::harness {

namespace fs = std::filesystem;
using spectral::cplx;
using spectral::Field;
using spectral::Grid;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Hands records to a writer thread so file I/O never stalls the stepper.
class AsyncRecordWriter {
 public:
  AsyncRecordWriter(const fs::path& path, const std::vector<double>& radii)
      : csv_(path, radii), worker_([this] { drain(); }) {}

  ~AsyncRecordWriter() { close(); }

  void push(const diagnostics::DiagnosticsRecord& rec) {
    {
      std::lock_guard lock(mutex_);
      queue_.push_back(rec);
    }
    cv_.notify_one();
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      if (done_) return;
      done_ = true;
    }
    cv_.notify_one();
    worker_.join();
    csv_.flush();
  }

 private:
  void drain() {
    std::unique_lock lock(mutex_);
    for (;;) {
      cv_.wait(lock, [this] { return done_ || !queue_.empty(); });
      while (!queue_.empty()) {
        auto rec = std::move(queue_.front());
        queue_.pop_front();
        lock.unlock();
        csv_.write(rec);
        lock.lock();
      }
      if (done_) return;
    }
  }

  RecordCsv csv_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<diagnostics::DiagnosticsRecord> queue_;
  bool done_ = false;
  std::thread worker_;
};

bool same_params(const model::ModelParams& a, const model::ModelParams& b) {
  return a.dim == b.dim && a.s == b.s && a.b == b.b && a.p == b.p && a.sign == b.sign;
}

Field checked_snapshot(const fs::path& path, const Grid& grid, const char* what) {
  auto snap = read_snapshot(path);
  if (!(snap.u.grid() == grid)) throw ValidationError(std::string(what) + " grid does not match the config grid");
  return std::move(snap.u);
}

std::string cell(double v) { return format_number(v); }

std::string sanitize(std::string s) {
  for (auto& ch : s) {
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ';';
  }
  return s;
}

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

void write_dichotomy_results(Results& r, const DichotomyReport& d) {
  r.set("regime", model::to_string(d.classification.regime));
  r.set("ME", d.classification.me);
  r.set("MG", d.classification.mg);
  r.set("outcome", dynamics::to_string(d.outcome));
  r.set("verdict", to_string(d.verdict));
  r.set("note", d.note);
  r.set("sup_potential_mass", d.sup_potential_mass);
  r.set("potential_mass_threshold", d.potential_mass_threshold);
  r.set("sup_virial", d.sup_virial);
  r.set("sup_kinetic", d.sup_kinetic);
  r.set("kinetic_bound", d.kinetic_bound);
  r.set("kinetic_growth", d.kinetic_growth);
  r.set("final_dt", d.final_dt);
  r.set("dt_at_floor", d.dt_at_floor);
  r.set("virial_R_decreasing_final_window", d.virial_R_decreasing);
  r.set("collapse_time", d.collapse_time ? *d.collapse_time : kNaN);
  r.set("final_time", d.final_time);
  r.set("steps", static_cast<long long>(d.steps));
  r.set("max_mass_drift", d.max_mass_drift);
  r.set("max_energy_drift", d.max_energy_drift);
  r.set("boundary_flag", d.boundary_flag);
  r.set("max_boundary_tail", d.max_boundary_tail);
  if (d.scattering) {
    r.set("scattering_converged", d.scattering->converged);
    r.set("scattering_monotone", d.scattering->monotone);
    r.set("scattering_cauchy_tail", d.scattering->cauchy_tail);
    r.set_series("scattering_cauchy_differences", d.scattering->cauchy_differences);
  }
}

void write_decay_table(const fs::path& path, const std::vector<diagnostics::DecayRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& d : rows) {
    cells.push_back({cell(d.R), cell(d.local_mass_start), cell(d.local_mass_min), cell(d.local_mass_end),
                     cell(d.local_potential_start), cell(d.local_potential_min), cell(d.local_potential_end),
                     cell(d.mass_decay_ratio), d.decaying ? "1" : "0"});
  }
  write_csv(path,
            {"R", "local_mass_start", "local_mass_min", "local_mass_end", "local_potential_start",
             "local_potential_min", "local_potential_end", "mass_decay_ratio", "decaying"},
            cells);
}

// Sums of one to four randomly placed complex Gaussians.
Field random_field(const Grid& g, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_real_distribution<double> centre(-g.half_width() / 4.0, g.half_width() / 4.0);
  std::uniform_real_distribution<double> width(0.6, 2.0);
  std::uniform_real_distribution<double> amp(0.2, 2.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * M_PI);
  const int k = count(rng);
  Field u(g);
  for (int j = 0; j < k; ++j) {
    std::array<double, 3> c{0.0, 0.0, 0.0};
    for (int a = 0; a < g.dim(); ++a) c[a] = centre(rng);
    const double w = width(rng);
    const cplx a = std::polar(amp(rng), phase(rng));
    for (std::size_t n = 0; n < g.size(); ++n) {
      const auto x = g.position(n);
      double r2 = 0.0;
      for (int d = 0; d < g.dim(); ++d) r2 += (x[d] - c[d]) * (x[d] - c[d]);
      u[n] += a * std::exp(-r2 / (2.0 * w * w));
    }
  }
  return u;
}

Field plane_wave(const Grid& g, const std::array<int, 3>& modes) {
  Field u(g);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const auto x = g.position(n);
    double phase = 0.0;
    for (int a = 0; a < g.dim(); ++a) phase += M_PI * modes[a] / g.half_width() * x[a];
    u[n] = std::polar(1.0, phase);
  }
  return u;
}

VerifyCheck make_check(std::string name, double measured, double tolerance, bool pass, std::string detail = {}) {
  return {std::move(name), measured, tolerance, pass, std::move(detail)};
}

}  // namespace

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::agree:
      return "AGREE";
    case Verdict::disagree:
      return "DISAGREE";
    case Verdict::no_verdict:
      return "NO_VERDICT";
  }
  return "NO_VERDICT";
}

ground::GroundStateResult obtain_ground_state(const ExperimentConfig& config) {
  const Grid grid = config.make_grid();
  if (!config.ground.path.empty()) {
    auto snap = read_snapshot(config.ground.path);
    if (!(snap.u.grid() == grid)) throw ValidationError("ground.path grid does not match the config grid");
    if (snap.params && !same_params(*snap.params, config.params)) {
      throw ValidationError("ground.path was computed for different model parameters");
    }
    return ground::measure_profile(snap.u, config.params);
  }
  return ground::solve_ground_state(config.params, grid, std::nullopt, config.ground.options);
}

Field initial_field(const ExperimentConfig& config, const ground::GroundStateResult* q) {
  const Grid grid = config.make_grid();
  const auto& d = config.initial;
  switch (d.kind) {
    case InitialKind::ground_scaled: {
      if (!q) throw ContractViolation("ground_scaled initial data needs a ground state");
      Field u = q->Q;
      u *= d.amplitude;
      return u;
    }
    case InitialKind::gaussian: {
      Field u(grid);
      const auto r = grid.radius();
      for (std::size_t n = 0; n < grid.size(); ++n) {
        const auto x = grid.position(n);
        double phase = 0.0;
        for (int a = 0; a < grid.dim(); ++a) phase += d.drift[a] * x[a];
        u[n] = std::polar(d.amplitude * std::exp(-r[n] * r[n] / (2.0 * d.width * d.width)), phase);
      }
      return u;
    }
    case InitialKind::file: {
      Field u = checked_snapshot(d.path, grid, "initial_data.path");
      for (const auto& v : u.values()) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
          throw ValidationError("initial_data.path holds non-finite values");
        }
      }
      return u;
    }
  }
  throw ContractViolation("unknown initial data kind");
}

DichotomyReport run_dichotomy(const ExperimentConfig& config, const ground::GroundStateResult& q, const Field& u0,
                              const dynamics::RecordSink& sink, dynamics::TrajectoryResult* trajectory) {
  const auto& params = config.params;
  const model::WeightField w(u0.grid(), params.b);
  const auto ref = q.reference(params.p);
  const auto exps = model::derive_exponents(params);

  DichotomyReport rep;
  rep.classification = model::classify_threshold(u0, params, w, ref);
  if (params.sign == model::Sign::defocusing) {
    rep.classification.regime = model::Regime::global_scattering;
    rep.note = "defocusing: global regime for all data";
  }

  auto traj = dynamics::evolve(u0, params, config.controls, config.record_spec(ref), sink);
  const auto& recs = traj.records;
  rep.outcome = traj.outcome;
  rep.potential_mass_threshold = rep.classification.potential_mass_threshold;
  rep.sup_potential_mass = -std::numeric_limits<double>::infinity();
  rep.sup_virial = -std::numeric_limits<double>::infinity();
  for (const auto& r : recs) {
    rep.sup_potential_mass = std::max(rep.sup_potential_mass, r.potential * std::pow(r.mass, exps.gamma_c));
    rep.sup_virial = std::max(rep.sup_virial, r.virial);
    rep.sup_kinetic = std::max(rep.sup_kinetic, r.kinetic);
  }
  rep.kinetic_bound = exps.B / (exps.B - 2.0) * recs.front().energy * (1.0 + 1e-2);
  rep.kinetic_growth = recs.front().kinetic > 0.0 ? std::sqrt(rep.sup_kinetic / recs.front().kinetic) : 0.0;
  rep.final_dt = recs.back().dt;
  rep.dt_at_floor = config.controls.adaptive && rep.final_dt <= config.controls.effective_dt_floor() * (1.0 + 1e-12);
  if (recs.size() >= 2) {
    const std::size_t first = recs.size() > kFinalWindow ? recs.size() - kFinalWindow : 0;
    rep.virial_R_decreasing = true;
    for (std::size_t i = first + 1; i < recs.size(); ++i) {
      if (!(recs[i].virial_R < recs[i - 1].virial_R)) rep.virial_R_decreasing = false;
    }
  }
  rep.collapse_time = traj.collapse_time;
  rep.final_time = traj.final_time;
  rep.steps = traj.steps;
  rep.max_mass_drift = traj.max_mass_drift;
  rep.max_energy_drift = traj.max_energy_drift;
  rep.boundary_flag = traj.boundary_flag;
  rep.max_boundary_tail = traj.max_boundary_tail;

  if (traj.outcome == dynamics::Outcome::completed) {
    try {
      rep.scattering = dynamics::scattering_monitor(traj, params, config.diagnostics.scattering_tolerance,
                                                    config.diagnostics.scattering_radius,
                                                    static_cast<std::size_t>(config.controls.scattering_snapshots));
    } catch (const InsufficientData& e) {
      rep.note += (rep.note.empty() ? "" : "; ") + std::string(e.what());
    }
    rep.decay = diagnostics::local_decay_scan(recs, config.diagnostics.radii);
  }

  const auto regime = rep.classification.regime;
  if (regime == model::Regime::indeterminate) {
    rep.verdict = Verdict::no_verdict;
    rep.note += (rep.note.empty() ? "" : "; ") + std::string("indeterminate classification");
  } else if (traj.outcome == dynamics::Outcome::boundary_contaminated) {
    rep.verdict = Verdict::no_verdict;
    rep.note += (rep.note.empty() ? "" : "; ") + std::string("stopped by the boundary monitor");
  } else {
    const bool predicted_global = regime == model::Regime::global_scattering;
    const bool observed_global = traj.outcome == dynamics::Outcome::completed;
    rep.verdict = predicted_global == observed_global ? Verdict::agree : Verdict::disagree;
  }
  if (trajectory) *trajectory = std::move(traj);
  return rep;
}

std::vector<VerifyCheck> run_verify_suite(const ExperimentConfig& config, const ground::GroundStateResult& q) {
  const auto& params = config.params;
  const Grid grid = q.Q.grid();
  const auto exps = model::derive_exponents(params);
  const model::WeightField w(grid, params.b);
  std::vector<VerifyCheck> out;

  // Balakrishnan identity, two-sided.
  {
    double worst_gauss = 0.0;
    std::ostringstream det;
    for (double s : {params.s, 0.5}) {
      const auto mq = diagnostics::make_m_quadrature(grid, s, config.diagnostics.quadrature);
      for (double width : {0.75, 1.0, 1.5}) {
        const auto r = diagnostics::balakrishnan_identity(ground::gaussian(grid, width), s, mq);
        worst_gauss = std::max(worst_gauss, relative(r.rhs, r.lhs));
      }
    }
    out.push_back(make_check("balakrishnan gaussians", worst_gauss, 5e-3, worst_gauss <= 5e-3));
    double worst_mode = 0.0;
    const auto mq = diagnostics::make_m_quadrature(grid, params.s, config.diagnostics.quadrature);
    for (const auto& modes : {std::array<int, 3>{1, 0, 0}, {3, 2, 0}, {8, 5, 1}, {20, 7, 2}}) {
      const auto r = diagnostics::balakrishnan_identity(plane_wave(grid, modes), params.s, mq);
      worst_mode = std::max(worst_mode, relative(r.rhs, r.lhs));
    }
    out.push_back(make_check("balakrishnan single modes", worst_mode, 1e-3, worst_mode <= 1e-3));
  }

  // Pohozaev identities at Q, relative to ||Q||^2.
  {
    const auto pz = ground::pohozaev_residuals(q, params);
    out.push_back(make_check("pohozaev kinetic", pz.kinetic / q.mass_Q, 1e-3, pz.kinetic <= 1e-3 * q.mass_Q));
    out.push_back(make_check("pohozaev potential", pz.potential / q.mass_Q, 1e-3, pz.potential <= 1e-3 * q.mass_Q));
  }

  // Sharp Gagliardo-Nirenberg constant and inequality.
  std::mt19937_64 rng(config.seed);
  const auto k = ground::sharp_gn_constant(q, exps, params.p);
  {
    const double rel = relative(k.empirical, k.closed_form);
    std::ostringstream det;
    det.precision(10);
    det << "closed form " << k.closed_form << ", empirical " << k.empirical;
    out.push_back(make_check("gn closed form vs empirical", rel, 1e-3, rel <= 1e-3, det.str()));
    double worst = 0.0;
    int violations = 0;
    for (int i = 0; i < config.verify.corpus_size; ++i) {
      const double ratio = ground::gn_ratio(random_field(grid, rng), params, w) / k.closed_form;
      worst = std::max(worst, ratio);
      if (ratio > 1.0 + 1e-3) ++violations;
    }
    out.push_back(make_check("gn inequality on random fields", worst, 1.0 + 1e-3, violations == 0,
                             std::to_string(violations) + " violations"));
  }

  // Coercivity on random fields rescaled below the threshold.
  {
    std::uniform_real_distribution<double> eps_dist(0.05, 0.95);
    const double threshold = q.potential_Q * std::pow(q.mass_Q, exps.gamma_c);
    const double degree = params.p + 1.0 + 2.0 * exps.gamma_c;
    int v1 = 0, v2 = 0, v3 = 0;
    double w1 = -std::numeric_limits<double>::infinity(), w2 = w1, w3 = w1;
    for (int i = 0; i < config.verify.corpus_size; ++i) {
      Field u = random_field(grid, rng);
      const double eps = eps_dist(rng);
      const auto f0 = model::evaluate(u, params, w);
      const double lambda = std::pow((1.0 - eps) * threshold / (f0.potential * std::pow(f0.mass, exps.gamma_c)),
                                     1.0 / degree);
      u *= lambda;
      auto f = model::evaluate(u, params, w);
      if (params.sign == model::Sign::defocusing) f.energy = f.kinetic - 2.0 / (params.p + 1.0) * f.potential;
      const double shrink = std::pow(1.0 - eps, (exps.B - 2.0) / exps.B);
      const double slack = 1e-12 * f.kinetic;
      const double d1 = f.potential - (params.p + 1.0) / exps.B * shrink * f.kinetic;
      const double d2 = (1.0 - shrink) * f.kinetic - f.virial;
      const double d3 = (exps.B - 2.0) / exps.B * f.kinetic - f.energy;
      w1 = std::max(w1, d1 / f.kinetic);
      w2 = std::max(w2, d2 / f.kinetic);
      w3 = std::max(w3, d3 / f.kinetic);
      v1 += d1 > slack;
      v2 += d2 > slack;
      v3 += d3 > slack;
    }
    out.push_back(make_check("coercivity potential bound", w1, 0.0, v1 == 0, std::to_string(v1) + " violations"));
    out.push_back(make_check("coercivity virial lower bound", w2, 0.0, v2 == 0, std::to_string(v2) + " violations"));
    out.push_back(make_check("coercivity energy lower bound", w3, 0.0, v3 == 0, std::to_string(v3) + " violations"));
  }

  // Localized fractional energy across a dyadic radius sweep.
  {
    const double L = grid.half_width();
    const std::vector<double> radii{L / 8.0, L / 4.0, L / 2.0};
    const std::pair<const char*, Field> fields[] = {{"gaussian", ground::gaussian(grid, 1.0)}, {"Q", q.Q}};
    for (const auto& [label, u] : fields) {
      const auto rep = diagnostics::localized_energy_inequality(u, params.s, radii);
      std::ostringstream det;
      det << "C=" << rep.constant << " rate=" << rep.fitted_rate;
      out.push_back(make_check(std::string("localized energy slack ") + label, rep.min_slack, -1e-6,
                               rep.min_slack >= -1e-6, det.str()));
      double earlier = 0.0;
      for (std::size_t i = 0; i + 1 < rep.points.size(); ++i) {
        earlier = std::max(earlier, std::abs(rep.points[i].slack) * rep.points[i].R);
      }
      const double last = std::abs(rep.points.back().slack) * rep.points.back().R;
      out.push_back(make_check(std::string("localized energy slack*R bounded ") + label, last,
                               2.0 * earlier + 1e-9, std::isfinite(last) && last <= 2.0 * earlier + 1e-9,
                               "max slack*R " + std::to_string(rep.max_slack_times_R)));
    }
  }

  // Pointwise cutoff properties.
  {
    const double R = grid.half_width() / 4.0;
    for (auto kind : {diagnostics::CutoffKind::psi, diagnostics::CutoffKind::f_virial}) {
      for (const auto& c : diagnostics::check_cutoff(grid, {R, kind}, 1e-12)) {
        out.push_back(make_check("cutoff " + c.name, c.worst, 1e-12, c.pass));
      }
    }
  }

  // Radial Sobolev inequality at alpha = s.
  {
    std::vector<double> ratios;
    for (int i = 0; i < 20; ++i) {
      const double width = 0.5 * std::pow(4.0, i / 19.0);
      ratios.push_back(diagnostics::radial_sobolev_check(ground::gaussian(grid, width), params.s).ratio);
    }
    auto sorted = ratios;
    std::sort(sorted.begin(), sorted.end());
    const double median = 0.5 * (sorted[9] + sorted[10]);
    const double spread = std::max(sorted.back() / median, median / sorted.front());
    out.push_back(make_check("radial sobolev corpus spread", spread, 2.0, spread <= 2.0));
    const double r1 = diagnostics::radial_sobolev_check(ground::gaussian(grid, 1.0), params.s).ratio;
    const double r2 = diagnostics::radial_sobolev_check(ground::gaussian(grid, 1.5), params.s).ratio;
    out.push_back(make_check("radial sobolev scaling invariance", relative(r2, r1), 1e-2, relative(r2, r1) <= 1e-2));
    const double rq = diagnostics::radial_sobolev_check(q.Q, params.s).ratio;
    out.push_back(make_check("radial sobolev ratio at Q", rq, std::numeric_limits<double>::infinity(),
                             std::isfinite(rq) && rq > 0.0));
  }
  return out;
}

std::vector<SweepPoint> sweep_points(const ExperimentConfig& c) {
  auto axis = [](const std::vector<double>& v, double fallback) {
    return v.empty() ? std::vector<double>{fallback} : v;
  };
  std::vector<SweepPoint> pts;
  for (double s : axis(c.sweep.s, c.params.s)) {
    for (double b : axis(c.sweep.b, c.params.b)) {
      for (double p : axis(c.sweep.p, c.params.p)) {
        for (double a : axis(c.sweep.c, c.initial.amplitude)) pts.push_back({s, b, p, a});
      }
    }
  }
  return pts;
}

std::vector<std::string> sweep_columns() {
  return {"index", "s", "b", "p", "c", "ME", "MG", "predicted", "observed", "agree", "status"};
}

std::vector<std::string> sweep_row(const ExperimentConfig& config, std::size_t index, const SweepPoint& pt) {
  std::vector<std::string> row{std::to_string(index), cell(pt.s), cell(pt.b), cell(pt.p), cell(pt.c), "", "", "",
                               "", "", ""};
  ExperimentConfig pc = config;
  pc.params.s = pt.s;
  pc.params.b = pt.b;
  pc.params.p = pt.p;
  pc.initial.kind = InitialKind::ground_scaled;
  pc.initial.amplitude = pt.c;
  pc.ground.path.clear();
  try {
    model::validate(pc.params);
  } catch (const ValidationError& e) {
    row[10] = sanitize(std::string("skipped: ") + e.what());
    return row;
  }
  try {
    const auto q = ground::solve_ground_state(pc.params, pc.make_grid(), std::nullopt, pc.ground.options);
    const auto rep = run_dichotomy(pc, q, initial_field(pc, &q));
    row[5] = cell(rep.classification.me);
    row[6] = cell(rep.classification.mg);
    row[7] = model::to_string(rep.classification.regime);
    row[8] = dynamics::to_string(rep.outcome);
    row[9] = rep.verdict == Verdict::no_verdict ? "" : (rep.verdict == Verdict::agree ? "1" : "0");
    row[10] = "ok";
  } catch (const std::exception& e) {
    row[10] = sanitize(std::string("failed: ") + e.what());
  }
  return row;
}

int cmd_ground(const ExperimentConfig& config, std::ostream& log) {
  const fs::path out = config.output_dir;
  std::optional<ground::GroundStateResult> found;
  try {
    found = obtain_ground_state(config);
  } catch (const ConvergenceFailure& e) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < e.history().size(); ++i) rows.push_back({std::to_string(i), cell(e.history()[i])});
    write_csv(out / "ground_residual_history.csv", {"iteration", "relative_residual"}, rows);
    throw;
  }
  const auto& q = *found;
  const auto exps = model::derive_exponents(config.params);
  const auto pz = ground::pohozaev_residuals(q, config.params);
  const auto k = ground::sharp_gn_constant(q, exps, config.params.p);
  write_snapshot(out / "ground_state.bin", q.Q, 0.0, config.params);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < q.residual_history.size(); ++i) {
    rows.push_back({std::to_string(i), cell(q.residual_history[i])});
  }
  write_csv(out / "ground_residual_history.csv", {"iteration", "relative_residual"}, rows);

  const double qnorm = std::sqrt(q.mass_Q);
  const bool met = q.residual <= config.ground.options.residual_tolerance * qnorm;
  Results r;
  r.set("mass", q.mass_Q);
  r.set("kinetic", q.kinetic_Q);
  r.set("potential", q.potential_Q);
  r.set("energy", q.energy_Q(config.params.p));
  r.set("residual", q.residual);
  r.set("relative_residual", q.residual / qnorm);
  r.set("iterations", static_cast<long long>(q.iterations));
  r.set("k_opt_closed_form", k.closed_form);
  r.set("k_opt_empirical", k.empirical);
  r.set("pohozaev_kinetic_residual", pz.kinetic);
  r.set("pohozaev_potential_residual", pz.potential);
  r.set("residual_target_met", met);
  write_manifest(out / "ground_manifest.json", "ground", config, r);
  log << "ground: ||Q||^2=" << q.mass_Q << " ||D^sQ||^2=" << q.kinetic_Q << " P[Q]=" << q.potential_Q
      << " residual=" << q.residual / qnorm << " iterations=" << q.iterations << '\n';
  log << "ground: pohozaev residuals " << pz.kinetic << ", " << pz.potential << "; K_opt closed " << k.closed_form
      << " empirical " << k.empirical << '\n';
  return met ? kSuccess : kNumerical;
}

int cmd_evolve(const ExperimentConfig& config, std::ostream& log) {
  const fs::path out = config.output_dir;
  std::optional<ground::GroundStateResult> q;
  if (config.initial.kind == InitialKind::ground_scaled || config.params.sign == model::Sign::focusing) {
    q = obtain_ground_state(config);
  }
  const Field u0 = initial_field(config, q ? &*q : nullptr);
  std::optional<model::ThresholdReference> ref;
  if (q) ref = q->reference(config.params.p);

  std::optional<dynamics::TrajectoryResult> run;
  {
    AsyncRecordWriter writer(out / "records.csv", config.diagnostics.radii);
    run = dynamics::evolve(u0, config.params, config.controls, config.record_spec(ref),
                            [&](const diagnostics::DiagnosticsRecord& rec) { writer.push(rec); });
    writer.close();
  }
  const auto& traj = *run;
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "snapshot_%03zu.bin", i);
    write_snapshot(out / "snapshots" / name, traj.snapshots[i].u, traj.snapshots[i].t, config.params);
  }
  write_snapshot(out / "final_state.bin", traj.final_state, traj.final_time, config.params);

  Results r;
  r.set("outcome", dynamics::to_string(traj.outcome));
  r.set("final_time", traj.final_time);
  r.set("steps", static_cast<long long>(traj.steps));
  r.set("max_mass_drift", traj.max_mass_drift);
  r.set("max_energy_drift", traj.max_energy_drift);
  r.set("mass_drift_flag", traj.mass_drift_flag);
  r.set("energy_drift_flag", traj.energy_drift_flag);
  r.set("boundary_flag", traj.boundary_flag);
  r.set("max_boundary_tail", traj.max_boundary_tail);
  r.set("collapse_time", traj.collapse_time ? *traj.collapse_time : kNaN);
  if (traj.outcome == dynamics::Outcome::completed && traj.snapshots.size() >= 2) {
    const auto sm = dynamics::scattering_monitor(traj, config.params, config.diagnostics.scattering_tolerance,
                                                 config.diagnostics.scattering_radius, 2);
    r.set("scattering_converged", sm.converged);
    r.set("scattering_monotone", sm.monotone);
    r.set("scattering_cauchy_tail", sm.cauchy_tail);
    r.set_series("scattering_cauchy_differences", sm.cauchy_differences);
  }
  write_manifest(out / "evolve_manifest.json", "evolve", config, r);
  log << "evolve: outcome " << dynamics::to_string(traj.outcome) << " at t=" << traj.final_time << " after "
      << traj.steps << " steps; mass drift " << traj.max_mass_drift << ", energy drift " << traj.max_energy_drift
      << '\n';
  if (traj.collapse_time) log << "evolve: collapse detected at t=" << *traj.collapse_time << '\n';
  if (traj.boundary_flag) {
    log << "evolve: warning: boundary tail reached " << traj.max_boundary_tail << " (threshold "
        << config.controls.boundary_threshold << ")\n";
  }
  return kSuccess;
}

int cmd_dichotomy(const ExperimentConfig& config, std::ostream& log) {
  const fs::path out = config.output_dir;
  const auto q = obtain_ground_state(config);
  const Field u0 = initial_field(config, &q);
  DichotomyReport rep;
  {
    AsyncRecordWriter writer(out / "records.csv", config.diagnostics.radii);
    rep = run_dichotomy(config, q, u0, [&](const diagnostics::DiagnosticsRecord& rec) { writer.push(rec); });
    writer.close();
  }
  if (!rep.decay.empty()) write_decay_table(out / "decay_table.csv", rep.decay);
  Results r;
  write_dichotomy_results(r, rep);
  write_manifest(out / "dichotomy_manifest.json", "dichotomy", config, r);
  log << "dichotomy: ME=" << rep.classification.me << " MG=" << rep.classification.mg << " predicted "
      << model::to_string(rep.classification.regime) << ", observed " << dynamics::to_string(rep.outcome) << ": "
      << to_string(rep.verdict) << (rep.note.empty() ? "" : " (" + rep.note + ")") << '\n';
  log << "dichotomy: sup P M^gc = " << rep.sup_potential_mass << " vs " << rep.potential_mass_threshold
      << "; sup I = " << rep.sup_virial << '\n';
  return kSuccess;
}

int cmd_sweep(const ExperimentConfig& config, std::ostream& log, const SweepOptions& options) {
  const fs::path out = config.output_dir;
  fs::create_directories(out);
  const auto points = sweep_points(config);
  const fs::path journal_path = out / "sweep_journal.jsonl";
  const std::string hash = config_hash(config);
  const std::size_t width = sweep_columns().size();

  std::map<std::size_t, std::vector<std::string>> done;
  if (options.resume && fs::exists(journal_path)) {
    std::ifstream in(journal_path);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        break;  // torn final line from an interrupted write
      }
      if (header) {
        if (!j.contains("config_hash") || j["config_hash"] != hash) {
          throw ValidationError("sweep journal belongs to a different config; rerun without --resume");
        }
        header = false;
        continue;
      }
      const auto idx = j.at("index").get<std::size_t>();
      auto row = j.at("row").get<std::vector<std::string>>();
      if (idx < points.size() && row.size() == width) done[idx] = std::move(row);
    }
    log << "sweep: resuming with " << done.size() << " of " << points.size() << " points journaled\n";
  }
  // Rewrite the journal from the recovered rows so a torn tail never survives.
  std::ofstream journal(journal_path, std::ios::trunc);
  if (!journal) throw Error("cannot write " + journal_path.string());
  journal << nlohmann::json{{"config_hash", hash}, {"points", points.size()}}.dump() << '\n';
  for (const auto& [idx, row] : done) journal << nlohmann::json{{"index", idx}, {"row", row}}.dump() << '\n';
  journal.flush();

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!done.count(i)) pending.push_back(i);
  }
  std::mutex journal_mutex;
  std::atomic<std::size_t> next{0};
  int written = 0;
  auto work = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= pending.size()) return;
      const std::size_t idx = pending[k];
      auto row = sweep_row(config, idx, points[idx]);
      std::lock_guard lock(journal_mutex);
      journal << nlohmann::json{{"index", idx}, {"row", row}}.dump() << '\n';
      journal.flush();
      done[idx] = std::move(row);
      if (options.abort_after > 0 && ++written >= options.abort_after) std::_Exit(kInternal);
    }
  };
  const int n_workers = std::max(1, std::min<int>(config.workers, static_cast<int>(pending.size())));
  {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_workers; ++i) pool.emplace_back(work);
  }

  std::vector<std::vector<std::string>> rows;
  long long ok = 0, agree = 0, disagree = 0, skipped = 0, failed = 0;
  for (const auto& [idx, row] : done) {
    rows.push_back(row);
    const auto& status = row[10];
    if (status == "ok") ++ok;
    if (status.rfind("skipped", 0) == 0) ++skipped;
    if (status.rfind("failed", 0) == 0) ++failed;
    if (row[9] == "1") ++agree;
    if (row[9] == "0") ++disagree;
  }
  write_csv(out / "sweep.csv", sweep_columns(), rows);
  Results r;
  r.set("points", static_cast<long long>(points.size()));
  r.set("completed", ok);
  r.set("agree", agree);
  r.set("disagree", disagree);
  r.set("skipped", skipped);
  r.set("failed", failed);
  r.set("sweep_csv_hash", fnv1a_hex([&] {
          std::ostringstream s;
          for (const auto& row : rows) {
            for (const auto& c : row) s << c << ',';
            s << '\n';
          }
          return s.str();
        }()));
  write_manifest(out / "sweep_manifest.json", "sweep", config, r);
  log << "sweep: " << points.size() << " points, " << ok << " run, " << agree << " agree, " << disagree
      << " disagree, " << skipped << " skipped, " << failed << " failed\n";
  return kSuccess;
}

int cmd_verify(const ExperimentConfig& config, std::ostream& log) {
  const auto q = obtain_ground_state(config);
  const auto checks = run_verify_suite(config, q);
  std::vector<std::vector<std::string>> rows;
  Results r;
  int failures = 0;
  for (const auto& c : checks) {
    rows.push_back({sanitize(c.name), cell(c.measured), cell(c.tolerance), c.pass ? "PASS" : "FAIL", sanitize(c.detail)});
    r.set("check: " + c.name, c.pass);
    failures += !c.pass;
    log << (c.pass ? "PASS " : "FAIL ") << c.name << ": measured " << c.measured << " (tolerance " << c.tolerance
        << ")" << (c.detail.empty() ? "" : " " + c.detail) << '\n';
  }
  write_csv(config.output_dir / "verify.csv", {"check", "measured", "tolerance", "result", "detail"}, rows);
  r.set("failures", static_cast<long long>(failures));
  write_manifest(config.output_dir / "verify_manifest.json", "verify", config, r);
  log << "verify: " << checks.size() - failures << " of " << checks.size() << " checks passed\n";
  return failures == 0 ? kSuccess : kPropertyFailure;
}

int cmd_linear(const ExperimentConfig& config, std::ostream& log) {
  std::optional<ground::GroundStateResult> q;
  if (config.initial.kind == InitialKind::ground_scaled) q = obtain_ground_state(config);
  const Field phi = initial_field(config, q ? &*q : nullptr);
  const auto& lin = config.linear;
  std::vector<double> times;
  for (int i = 0; i < lin.samples; ++i) {
    times.push_back(lin.t_start * std::pow(lin.t_end / lin.t_start, i / static_cast<double>(lin.samples - 1)));
  }
  const double inf = std::numeric_limits<double>::infinity();
  const auto rep = dynamics::dispersive_decay_check(phi, config.params, times, {2.0, 4.0, inf},
                                                    config.controls.boundary_threshold, config.controls.boundary_band);
  std::vector<std::string> header{"t", "l2", "l4", "linf"};
  for (double R : config.diagnostics.radii) header.push_back("local_mass_" + format_number(R));
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::vector<std::string> row{cell(times[i])};
    for (const auto& f : rep.fits) row.push_back(cell(f.norms[i]));
    const Field u = spectral::free_propagator(phi, times[i], config.params.s);
    for (double R : config.diagnostics.radii) row.push_back(cell(diagnostics::local_mass(u, R)));
    rows.push_back(std::move(row));
  }
  write_csv(config.output_dir / "linear_decay.csv", header, rows);
  Results r;
  for (const auto& f : rep.fits) {
    const std::string key = std::isinf(f.r) ? "inf" : format_number(f.r);
    r.set("slope_L" + key, f.slope);
    r.set("predicted_L" + key, f.predicted);
    log << "linear: L^" << key << " slope " << f.slope << " (predicted " << f.predicted << ")\n";
  }
  r.set("max_boundary_tail", rep.max_boundary_tail);
  write_manifest(config.output_dir / "linear_manifest.json", "linear", config, r);
  return kSuccess;
}

int run_command(const std::string& name, const ExperimentConfig& config, std::ostream& log,
                const SweepOptions& sweep) {
  auto fail = [&](int code, const std::string& reason, const std::string& message, double last_time) {
    log << "error[" << reason << "]: " << message << '\n';
    try {
      Results r;
      r.set("reason", reason);
      r.set("message", message);
      r.set("exit_code", static_cast<long long>(code));
      if (std::isfinite(last_time)) r.set("last_valid_time", last_time);
      write_manifest(config.output_dir / (name + "_error.json"), name, config, r);
    } catch (const std::exception&) {
      // The error itself may be an unwritable output directory.
    }
    return code;
  };
  try {
    if (name == "ground") return cmd_ground(config, log);
    if (name == "evolve") return cmd_evolve(config, log);
    if (name == "dichotomy") return cmd_dichotomy(config, log);
    if (name == "sweep") return cmd_sweep(config, log, sweep);
    if (name == "verify") return cmd_verify(config, log);
    if (name == "linear") return cmd_linear(config, log);
    throw ValidationError("unknown command '" + name + "'");
  } catch (const ValidationError& e) {
    return fail(kValidation, "validation_error", e.what(), kNaN);
  } catch (const DomainError& e) {
    return fail(kValidation, "domain_error", e.what(), kNaN);
  } catch (const NumericalFailure& e) {
    return fail(kNumerical, "numerical_failure", e.what(), e.last_valid_time());
  } catch (const ConvergenceFailure& e) {
    return fail(kNumerical, "convergence_failure", e.what(), kNaN);
  } catch (const QuadratureError& e) {
    return fail(kNumerical, "quadrature_error", e.what(), kNaN);
  } catch (const WindowTooLong& e) {
    return fail(kNumerical, "window_too_long", e.what(), kNaN);
  } catch (const InsufficientData& e) {
    return fail(kNumerical, "insufficient_data", e.what(), kNaN);
  } catch (const std::exception& e) {
    return fail(kInternal, "internal_error", e.what(), kNaN);
  }
}

}  // namespace finls::harness
