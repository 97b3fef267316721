#include "finls/harness/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "finls/error.hpp"

namespace finls::harness {

using nlohmann::json;

std::string to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::ground_scaled:
      return "ground_scaled";
    case InitialKind::gaussian:
      return "gaussian";
    case InitialKind::file:
      return "file";
  }
  return "ground_scaled";
}

namespace {

InitialKind initial_kind_from_string(const std::string& name, const std::string& where) {
  if (name == "ground_scaled") return InitialKind::ground_scaled;
  if (name == "gaussian") return InitialKind::gaussian;
  if (name == "file") return InitialKind::file;
  throw ValidationError(where + ": unknown initial_data kind '" + name + "'");
}

// Reads one JSON object, remembering which keys were consumed so leftovers
// can be rejected.
class Reader {
 public:
  Reader(const json& node, std::string where) : node_(node), where_(std::move(where)) {
    if (!node_.is_object()) throw ValidationError(where_ + ": expected an object");
  }

  bool has(const char* key) const { return node_.contains(key); }

  void number(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) fail(key, "expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(key, "must be finite");
    }
  }

  void integer(const char* key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) fail(key, "expected an integer");
      out = v->get<int>();
    }
  }

  void unsigned_integer(const char* key, std::uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) fail(key, "expected a nonnegative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void boolean(const char* key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) fail(key, "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) fail(key, "expected a string");
      out = v->get<std::string>();
    }
  }

  void numbers(const char* key, std::vector<double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) fail(key, "expected an array of numbers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number()) fail(key, "expected an array of numbers");
        out.push_back(e.get<double>());
        if (!std::isfinite(out.back())) fail(key, "entries must be finite");
      }
    }
  }

  std::optional<Reader> child(const char* key) {
    if (const json* v = take(key)) return Reader(*v, where_ + "." + key);
    return std::nullopt;
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) throw ValidationError(where_ + ": unknown key '" + key + "'");
    }
  }

  [[noreturn]] void fail(const char* key, const std::string& why) const {
    throw ValidationError(where_ + "." + key + ": " + why);
  }

 private:
  const json* take(const char* key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  const json& node_;
  std::string where_;
  std::set<std::string> seen_;
};

void read_params(Reader r, model::ModelParams& p) {
  r.integer("dim", p.dim);
  r.number("s", p.s);
  r.number("b", p.b);
  r.number("p", p.p);
  std::string sign = model::to_string(p.sign);
  r.string("sign", sign);
  try {
    p.sign = model::sign_from_string(sign);
  } catch (const Error&) {
    r.fail("sign", "expected 'focusing' or 'defocusing'");
  }
  r.finish();
}

void read_grid(Reader r, GridSpec& g) {
  r.integer("points", g.points);
  r.number("half_width", g.half_width);
  r.finish();
}

void read_controls(Reader r, dynamics::EvolveControls& c) {
  r.number("dt", c.dt);
  r.number("t_end", c.t_end);
  r.integer("record_stride", c.snapshot_stride);
  r.number("dt_floor", c.dt_floor);
  r.number("gradient_cap", c.gradient_cap);
  r.boolean("dealias", c.dealias);
  r.boolean("adaptive", c.adaptive);
  r.number("boundary_threshold", c.boundary_threshold);
  r.number("boundary_band", c.boundary_band);
  r.boolean("stop_on_boundary", c.stop_on_boundary);
  r.number("mass_drift_tolerance", c.mass_drift_tolerance);
  r.number("energy_drift_tolerance", c.energy_drift_tolerance);
  r.numbers("snapshot_times", c.snapshot_times);
  r.integer("scattering_snapshots", c.scattering_snapshots);
  r.finish();
}

void read_initial(Reader r, InitialData& d, const std::filesystem::path& base) {
  std::string kind = to_string(d.kind);
  r.string("kind", kind);
  d.kind = initial_kind_from_string(kind, "initial_data");
  r.number("amplitude", d.amplitude);
  r.number("width", d.width);
  std::vector<double> drift;
  r.numbers("drift", drift);
  if (drift.size() > 3) r.fail("drift", "at most three components");
  for (std::size_t a = 0; a < drift.size(); ++a) d.drift[a] = drift[a];
  std::string path;
  r.string("path", path);
  if (!path.empty()) d.path = base / path;
  r.finish();
}

void read_ground(Reader r, GroundSpec& g, const std::filesystem::path& base) {
  r.integer("max_iterations", g.options.max_iterations);
  r.number("change_tolerance", g.options.change_tolerance);
  r.number("residual_tolerance", g.options.residual_tolerance);
  r.integer("radialize_every", g.options.radialize_every);
  std::string path;
  r.string("path", path);
  if (!path.empty()) g.path = base / path;
  r.finish();
}

void read_diagnostics(Reader r, DiagnosticsSpec& d) {
  r.numbers("radii", d.radii);
  r.number("virial_radius", d.virial_radius);
  if (auto q = r.child("quadrature")) {
    q->integer("nodes", d.quadrature.nodes);
    q->number("y_max", d.quadrature.y_max);
    q->number("tail_tolerance", d.quadrature.tail_tolerance);
    q->finish();
  }
  r.number("scattering_tolerance", d.scattering_tolerance);
  r.number("scattering_radius", d.scattering_radius);
  r.finish();
}

void read_linear(Reader r, LinearSpec& l) {
  r.number("t_start", l.t_start);
  r.number("t_end", l.t_end);
  r.integer("samples", l.samples);
  r.finish();
}

void read_verify(Reader r, VerifySpec& v) {
  r.integer("corpus_size", v.corpus_size);
  r.finish();
}

void read_sweep(Reader r, SweepAxes& a, int& workers) {
  r.numbers("s", a.s);
  r.numbers("b", a.b);
  r.numbers("p", a.p);
  r.numbers("c", a.c);
  r.integer("workers", workers);
  r.finish();
}

void check(bool ok, const std::string& why) {
  if (!ok) throw ValidationError(why);
}

void validate_config(const ExperimentConfig& c) {
  model::validate(c.params);
  c.make_grid();
  c.controls.validate();
  check(std::isfinite(c.initial.amplitude), "initial_data.amplitude must be finite");
  check(c.initial.width > 0.0, "initial_data.width must be positive");
  if (c.initial.kind == InitialKind::file) {
    check(!c.initial.path.empty(), "initial_data.path is required for kind 'file'");
    check(std::filesystem::is_regular_file(c.initial.path),
          "initial_data.path does not exist: " + c.initial.path.string());
  }
  if (!c.ground.path.empty()) {
    check(std::filesystem::is_regular_file(c.ground.path), "ground.path does not exist: " + c.ground.path.string());
  }
  check(c.ground.options.max_iterations > 0, "ground.max_iterations must be positive");
  check(c.ground.options.residual_tolerance > 0.0, "ground.residual_tolerance must be positive");
  check(c.ground.options.change_tolerance >= 0.0, "ground.change_tolerance must be nonnegative");
  check(c.ground.options.radialize_every >= 0, "ground.radialize_every must be nonnegative");
  check(!c.diagnostics.radii.empty(), "diagnostics.radii must not be empty");
  for (double r : c.diagnostics.radii) check(r > 0.0, "diagnostics.radii must be positive");
  check(c.diagnostics.virial_radius >= 0.0, "diagnostics.virial_radius must be nonnegative");
  check(c.diagnostics.quadrature.nodes >= 2, "diagnostics.quadrature.nodes must be >= 2");
  check(c.diagnostics.quadrature.y_max >= 0.0, "diagnostics.quadrature.y_max must be nonnegative");
  check(c.diagnostics.quadrature.tail_tolerance > 0.0, "diagnostics.quadrature.tail_tolerance must be positive");
  check(c.diagnostics.scattering_tolerance > 0.0, "diagnostics.scattering_tolerance must be positive");
  check(c.diagnostics.scattering_radius > 0.0, "diagnostics.scattering_radius must be positive");
  check(c.linear.t_start > 0.0 && c.linear.t_end > c.linear.t_start, "linear needs 0 < t_start < t_end");
  check(c.linear.samples >= 2, "linear.samples must be >= 2");
  check(c.verify.corpus_size >= 1, "verify.corpus_size must be positive");
  check(c.workers >= 1, "workers must be positive");
}

json params_json(const model::ModelParams& p) {
  return {{"dim", p.dim}, {"s", p.s}, {"b", p.b}, {"p", p.p}, {"sign", model::to_string(p.sign)}};
}

}  // namespace

spectral::Grid ExperimentConfig::make_grid() const { return {params.dim, grid.points, grid.half_width}; }

double ExperimentConfig::virial_radius() const {
  return diagnostics.virial_radius > 0.0 ? diagnostics.virial_radius : grid.half_width / 4.0;
}

diagnostics::RecordSpec ExperimentConfig::record_spec(const std::optional<model::ThresholdReference>& ref) const {
  diagnostics::RecordSpec rs;
  rs.radii = diagnostics.radii;
  rs.virial_radius = virial_radius();
  rs.reference = ref;
  rs.boundary_band = controls.boundary_band;
  return rs;
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c;
  Reader r(doc, "config");
  if (auto sub = r.child("params")) read_params(*sub, c.params);
  if (auto sub = r.child("grid")) read_grid(*sub, c.grid);
  if (auto sub = r.child("controls")) read_controls(*sub, c.controls);
  if (auto sub = r.child("initial_data")) read_initial(*sub, c.initial, base_dir);
  if (auto sub = r.child("ground")) read_ground(*sub, c.ground, base_dir);
  if (auto sub = r.child("diagnostics")) read_diagnostics(*sub, c.diagnostics);
  if (auto sub = r.child("linear")) read_linear(*sub, c.linear);
  if (auto sub = r.child("verify")) read_verify(*sub, c.verify);
  if (auto sub = r.child("sweep")) read_sweep(*sub, c.sweep, c.workers);
  r.unsigned_integer("seed", c.seed);
  std::string out = c.output_dir.string();
  r.string("output_dir", out);
  c.output_dir = out;
  r.finish();
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path());
}

std::string canonical_json(const ExperimentConfig& c) {
  const auto& k = c.controls;
  json j;
  j["params"] = params_json(c.params);
  j["grid"] = {{"points", c.grid.points}, {"half_width", c.grid.half_width}};
  j["controls"] = {{"dt", k.dt},
                   {"t_end", k.t_end},
                   {"record_stride", k.snapshot_stride},
                   {"dt_floor", k.effective_dt_floor()},
                   {"gradient_cap", k.gradient_cap},
                   {"dealias", k.dealias},
                   {"adaptive", k.adaptive},
                   {"boundary_threshold", k.boundary_threshold},
                   {"boundary_band", k.boundary_band},
                   {"stop_on_boundary", k.stop_on_boundary},
                   {"mass_drift_tolerance", k.mass_drift_tolerance},
                   {"energy_drift_tolerance", k.energy_drift_tolerance},
                   {"snapshot_times", k.snapshot_times},
                   {"scattering_snapshots", k.scattering_snapshots}};
  j["initial_data"] = {{"kind", to_string(c.initial.kind)},
                       {"amplitude", c.initial.amplitude},
                       {"width", c.initial.width},
                       {"drift", c.initial.drift},
                       {"path", c.initial.path.string()}};
  j["ground"] = {{"max_iterations", c.ground.options.max_iterations},
                 {"change_tolerance", c.ground.options.change_tolerance},
                 {"residual_tolerance", c.ground.options.residual_tolerance},
                 {"radialize_every", c.ground.options.radialize_every},
                 {"path", c.ground.path.string()}};
  j["diagnostics"] = {{"radii", c.diagnostics.radii},
                      {"virial_radius", c.virial_radius()},
                      {"quadrature",
                       {{"nodes", c.diagnostics.quadrature.nodes},
                        {"y_max", c.diagnostics.quadrature.y_max},
                        {"tail_tolerance", c.diagnostics.quadrature.tail_tolerance}}},
                      {"scattering_tolerance", c.diagnostics.scattering_tolerance},
                      {"scattering_radius", c.diagnostics.scattering_radius}};
  j["linear"] = {{"t_start", c.linear.t_start}, {"t_end", c.linear.t_end}, {"samples", c.linear.samples}};
  j["verify"] = {{"corpus_size", c.verify.corpus_size}};
  j["sweep"] = {{"s", c.sweep.s}, {"b", c.sweep.b}, {"p", c.sweep.p}, {"c", c.sweep.c}};
  j["seed"] = c.seed;
  return j.dump();
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const ExperimentConfig& config) { return fnv1a_hex(canonical_json(config)); }

void apply_environment(ExperimentConfig& config) {
  if (const char* dir = std::getenv("FINLS_OUTPUT_DIR"); dir && *dir) config.output_dir = dir;
  if (const char* w = std::getenv("FINLS_WORKERS"); w && *w) {
    char* end = nullptr;
    const long n = std::strtol(w, &end, 10);
    if (*end != '\0' || n < 1 || n > 1024) throw ValidationError(std::string("FINLS_WORKERS must be a positive integer, got '") + w + "'");
    config.workers = static_cast<int>(n);
  }
}

}  // namespace finls::harness
