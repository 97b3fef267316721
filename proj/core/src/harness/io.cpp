#include "finls/harness/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <ctime>
#include <sstream>

#include <nlohmann/json.hpp>

#include "finls/error.hpp"

#ifndef FINLS_VERSION
#define FINLS_VERSION "unknown"
#endif

namespace finls::harness {

using nlohmann::json;

namespace {

void put_le(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double get_le(const unsigned char* bytes) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string radius_label(double r) {
  std::ostringstream s;
  s << r;
  return s.str();
}

}  // namespace

std::string version() { return FINLS_VERSION; }

void write_snapshot(const std::filesystem::path& path, const spectral::Field& u, double t,
                    const std::optional<model::ModelParams>& params) {
  const spectral::Field phys = spectral::to_physical(u);
  const auto& g = phys.grid();
  json header{{"format", "finls-snapshot"},
              {"version", 1},
              {"grid", {{"dim", g.dim()}, {"points", g.points_per_axis()}, {"half_width", g.half_width()}}},
              {"time", t},
              {"endianness", "little"},
              {"layout", "row-major complex128 (re, im)"},
              {"count", g.size()}};
  if (params) {
    header["params"] = {{"dim", params->dim},
                        {"s", params->s},
                        {"b", params->b},
                        {"p", params->p},
                        {"sign", model::to_string(params->sign)}};
  }
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write snapshot " + path.string());
  out << header.dump() << '\n';
  for (const auto& v : phys.values()) {
    put_le(out, v.real());
    put_le(out, v.imag());
  }
  if (!out) throw Error("failed writing snapshot " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open snapshot " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("snapshot " + path.string() + " has no header");
  json h;
  try {
    h = json::parse(line);
    if (h.at("format") != "finls-snapshot") throw ValidationError("not a finls snapshot: " + path.string());
    if (h.at("endianness") != "little") throw ValidationError("unsupported endianness in " + path.string());
    const auto& gj = h.at("grid");
    spectral::Grid grid(gj.at("dim").get<int>(), gj.at("points").get<int>(), gj.at("half_width").get<double>());
    if (h.at("count").get<std::size_t>() != grid.size()) throw ValidationError("snapshot count does not match grid");
    std::vector<unsigned char> raw(grid.size() * 16);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
      throw ValidationError("snapshot " + path.string() + " is truncated");
    }
    Snapshot snap{spectral::Field(grid), h.at("time").get<double>(), std::nullopt};
    for (std::size_t n = 0; n < grid.size(); ++n) {
      snap.u[n] = spectral::cplx(get_le(&raw[16 * n]), get_le(&raw[16 * n + 8]));
    }
    if (h.contains("params")) {
      const auto& pj = h["params"];
      model::ModelParams p;
      p.dim = pj.at("dim").get<int>();
      p.s = pj.at("s").get<double>();
      p.b = pj.at("b").get<double>();
      p.p = pj.at("p").get<double>();
      p.sign = model::sign_from_string(pj.at("sign").get<std::string>());
      snap.params = p;
    }
    return snap;
  } catch (const json::exception& e) {
    throw ValidationError("malformed snapshot header in " + path.string() + ": " + e.what());
  }
}

std::vector<std::string> record_columns(const std::vector<double>& radii) {
  std::vector<std::string> cols{"t",      "dt",     "mass", "energy", "kinetic",  "potential",
                                "virial", "virial_R", "me", "mg",     "sup_norm", "boundary_tail"};
  for (double r : radii) cols.push_back("local_mass_" + radius_label(r));
  for (double r : radii) cols.push_back("local_potential_" + radius_label(r));
  return cols;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RecordCsv::RecordCsv(const std::filesystem::path& path, const std::vector<double>& radii) {
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  out_.open(path);
  if (!out_) throw Error("cannot write " + path.string());
  const auto cols = record_columns(radii);
  for (std::size_t i = 0; i < cols.size(); ++i) out_ << (i ? "," : "") << cols[i];
  out_ << '\n';
}

void RecordCsv::write(const diagnostics::DiagnosticsRecord& r) {
  const double fixed[] = {r.t,      r.dt,       r.mass, r.energy, r.kinetic,  r.potential,
                          r.virial, r.virial_R, r.me,   r.mg,     r.sup_norm, r.boundary_tail};
  bool first = true;
  for (double v : fixed) {
    out_ << (first ? "" : ",") << format_number(v);
    first = false;
  }
  for (double v : r.local_mass) out_ << ',' << format_number(v);
  for (double v : r.local_potential) out_ << ',' << format_number(v);
  out_ << '\n';
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  auto line = [&](const std::vector<std::string>& cells) {
    if (cells.size() != header.size()) throw ContractViolation("CSV row width does not match header");
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
}

void Results::set(const std::string& key, double v) { entries_[key] = nlohmann::json(v).dump(); }
void Results::set(const std::string& key, long long v) { entries_[key] = nlohmann::json(v).dump(); }
void Results::set(const std::string& key, bool v) { entries_[key] = nlohmann::json(v).dump(); }
void Results::set(const std::string& key, const std::string& v) { entries_[key] = nlohmann::json(v).dump(); }
void Results::set_series(const std::string& key, const std::vector<double>& v) { entries_[key] = nlohmann::json(v).dump(); }

std::string Results::json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : entries_) j[k] = nlohmann::json::parse(v);
  return j.dump();
}

void write_manifest(const std::filesystem::path& path, const std::string& command, const ExperimentConfig& config,
                    const Results& results) {
  nlohmann::json m;
  m["tool"] = "finls";
  m["version"] = version();
  m["command"] = command;
  m["config_hash"] = config_hash(config);
  m["config"] = nlohmann::json::parse(canonical_json(config));
  m["tolerances"] = {{"ground_residual", config.ground.options.residual_tolerance},
                     {"mass_drift", config.controls.mass_drift_tolerance},
                     {"energy_drift", config.controls.energy_drift_tolerance},
                     {"boundary_threshold", config.controls.boundary_threshold},
                     {"scattering", config.diagnostics.scattering_tolerance},
                     {"quadrature_tail", config.diagnostics.quadrature.tail_tolerance}};
  m["results"] = nlohmann::json::parse(results.json());
  m["created_at"] = utc_now();
  if (!path.parent_path().empty()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << m.dump(2) << '\n';
}

}  // namespace finls::harness
