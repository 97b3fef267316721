#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "finls/error.hpp"
#include "finls/ground_state.hpp"
#include "finls/harness/commands.hpp"
#include "finls/harness/config.hpp"
#include "finls/harness/io.hpp"

namespace finls::harness {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("finls_unit_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json tiny_config() {
  return {{"params", {{"dim", 2}, {"s", 0.8}, {"b", 0.4}, {"p", 3.0}, {"sign", "focusing"}}},
          {"grid", {{"points", 32}, {"half_width", 8.0}}},
          {"controls", {{"dt", 0.01}, {"t_end", 0.2}, {"record_stride", 5}, {"stop_on_boundary", false}}},
          {"initial_data", {{"kind", "ground_scaled"}, {"amplitude", 0.8}}},
          {"diagnostics", {{"radii", {1.0, 2.0}}}},
          {"seed", 3}};
}

TEST(Config, DefaultsAndRoundTrip) {
  const auto c = parse_config(tiny_config().dump());
  EXPECT_EQ(c.grid.points, 32);
  EXPECT_DOUBLE_EQ(c.controls.dt, 0.01);
  EXPECT_EQ(c.controls.snapshot_stride, 5);
  EXPECT_FALSE(c.controls.stop_on_boundary);
  EXPECT_EQ(c.initial.kind, InitialKind::ground_scaled);
  EXPECT_DOUBLE_EQ(c.virial_radius(), 2.0);
  EXPECT_EQ(c.seed, 3u);
  const auto again = parse_config(canonical_json(c));
  EXPECT_EQ(canonical_json(again), canonical_json(c));
  EXPECT_EQ(config_hash(again), config_hash(c));
}

TEST(Config, RejectsUnknownKeysAndWrongTypes) {
  auto reject = [](json j) { EXPECT_THROW(parse_config(j.dump()), ValidationError) << j.dump(); };
  json a = tiny_config();
  a["colour"] = "red";
  reject(a);
  json b = tiny_config();
  b["controls"]["dtt"] = 0.1;
  reject(b);
  json c = tiny_config();
  c["grid"]["points"] = "many";
  reject(c);
  json d = tiny_config();
  d["grid"]["points"] = 48;
  reject(d);
  json e = tiny_config();
  e["params"]["p"] = 9.0;
  reject(e);
  json f = tiny_config();
  f["params"]["sign"] = "sideways";
  reject(f);
  json g = tiny_config();
  g["initial_data"]["kind"] = "file";
  reject(g);
  json h = tiny_config();
  h["controls"]["dt"] = -1.0;
  reject(h);
  EXPECT_THROW(parse_config("{not json"), ValidationError);
  EXPECT_THROW(load_config("/nonexistent/finls.json"), ValidationError);
}

TEST(Config, HashIgnoresOutputDirAndWorkers) {
  json a = tiny_config();
  json b = tiny_config();
  b["output_dir"] = "elsewhere";
  b["sweep"] = {{"workers", 4}};
  EXPECT_EQ(config_hash(parse_config(a.dump())), config_hash(parse_config(b.dump())));
  b["seed"] = 4;
  EXPECT_NE(config_hash(parse_config(a.dump())), config_hash(parse_config(b.dump())));
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
}

TEST(Config, EnvironmentOverridesOnlyOutputAndWorkers) {
  auto c = parse_config(tiny_config().dump());
  const auto hash = config_hash(c);
  ::setenv("FINLS_OUTPUT_DIR", "/tmp/finls_env_out", 1);
  ::setenv("FINLS_WORKERS", "3", 1);
  apply_environment(c);
  EXPECT_EQ(c.output_dir, fs::path("/tmp/finls_env_out"));
  EXPECT_EQ(c.workers, 3);
  EXPECT_EQ(config_hash(c), hash);
  ::setenv("FINLS_WORKERS", "zero", 1);
  EXPECT_THROW(apply_environment(c), ValidationError);
  ::unsetenv("FINLS_OUTPUT_DIR");
  ::unsetenv("FINLS_WORKERS");
}

TEST(Snapshot, RoundTripIsBitExact) {
  const auto dir = scratch("snapshot");
  const spectral::Grid g(2, 16, 3.0);
  const auto u = spectral::sample(g, [](const std::array<double, 3>& x) {
    return spectral::cplx(std::sin(x[0]) / 3.0, std::exp(-x[1] * x[1]) * 1e-300);
  });
  const model::ModelParams p{2, 0.8, 0.4, 3.0, model::Sign::defocusing};
  write_snapshot(dir / "u.bin", u, 1.25, p);
  const auto s = read_snapshot(dir / "u.bin");
  EXPECT_EQ(s.t, 1.25);
  ASSERT_TRUE(s.params.has_value());
  EXPECT_EQ(s.params->sign, model::Sign::defocusing);
  ASSERT_TRUE(s.u.grid() == g);
  for (std::size_t n = 0; n < g.size(); ++n) EXPECT_EQ(s.u[n], u[n]);

  fs::resize_file(dir / "u.bin", fs::file_size(dir / "u.bin") - 8);
  EXPECT_THROW(read_snapshot(dir / "u.bin"), ValidationError);
  std::ofstream(dir / "junk.bin") << "{\"format\":\"other\"}\n";
  EXPECT_THROW(read_snapshot(dir / "junk.bin"), ValidationError);
  EXPECT_THROW(read_snapshot(dir / "missing.bin"), ValidationError);
}

TEST(Csv, NumbersAndMissingValues) {
  EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "");
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_number(M_PI)), M_PI);
  const auto cols = record_columns({2.0, 4.5});
  EXPECT_EQ(cols.front(), "t");
  EXPECT_EQ(cols[cols.size() - 2], "local_potential_2");
  EXPECT_EQ(cols.back(), "local_potential_4.5");

  const auto dir = scratch("csv");
  {
    RecordCsv csv(dir / "r.csv", {2.0});
    diagnostics::DiagnosticsRecord r;
    r.t = 0.5;
    r.me = std::numeric_limits<double>::quiet_NaN();
    r.local_mass = {1.0};
    r.local_potential = {2.0};
    csv.write(r);
  }
  std::ifstream in(dir / "r.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
  EXPECT_NE(row.find(",,"), std::string::npos);
  EXPECT_THROW(write_csv(dir / "bad.csv", {"a", "b"}, {{"1"}}), ContractViolation);
}

TEST(Manifest, DeterministicApartFromTheTimestamp) {
  const auto dir = scratch("manifest");
  const auto c = parse_config(tiny_config().dump());
  Results r;
  r.set("alpha", 0.25);
  r.set("count", 3LL);
  r.set("flag", true);
  r.set("label", "x");
  r.set_series("series", {1.0, 2.0});
  write_manifest(dir / "a.json", "ground", c, r);
  write_manifest(dir / "b.json", "ground", c, r);
  auto a = json::parse(read_file(dir / "a.json"));
  auto b = json::parse(read_file(dir / "b.json"));
  EXPECT_TRUE(a.contains("created_at"));
  a.erase("created_at");
  b.erase("created_at");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a["config_hash"], config_hash(c));
  EXPECT_EQ(a["results"]["series"][1], 2.0);
  EXPECT_EQ(a["version"], version());
}

#ifdef FINLS_CLI
int run_cli(const std::string& args) {
  const std::string cmd = std::string(FINLS_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, const json& j, const std::string& name = "config.json") {
  std::ofstream(dir / name) << j.dump(2);
  return dir / name;
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  const auto good = write_config(dir, tiny_config());
  EXPECT_EQ(run_cli("ground --config " + good.string() + " --out " + (dir / "g").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "g" / "ground_state.bin"));
  EXPECT_TRUE(fs::exists(dir / "g" / "ground_manifest.json"));

  json unknown = tiny_config();
  unknown["mystery"] = 1;
  EXPECT_EQ(run_cli("ground --config " + write_config(dir, unknown, "u.json").string()), 2);
  EXPECT_EQ(run_cli("ground --config " + (dir / "absent.json").string()), 2);
  EXPECT_EQ(run_cli("ground --config " + good.string() + " --workers 0"), 2);
  EXPECT_EQ(run_cli("frobnicate --config " + good.string()), 2);

  const spectral::Grid g(2, 32, 8.0);
  auto bad = spectral::Field(g);
  bad[7] = spectral::cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
  write_snapshot(dir / "nan.bin", bad, 0.0);
  json nan_cfg = tiny_config();
  nan_cfg["initial_data"] = {{"kind", "file"}, {"path", "nan.bin"}};
  const auto nan_path = write_config(dir, nan_cfg, "nan.json");
  EXPECT_EQ(run_cli("evolve --config " + nan_path.string() + " --out " + (dir / "e").string()), 2);
  EXPECT_TRUE(fs::exists(dir / "e" / "evolve_error.json"));

  json starved = tiny_config();
  starved["ground"] = {{"max_iterations", 1}};
  const auto starved_path = write_config(dir, starved, "starved.json");
  EXPECT_EQ(run_cli("ground --config " + starved_path.string() + " --out " + (dir / "s").string()), 3);
  EXPECT_TRUE(fs::exists(dir / "s" / "ground_residual_history.csv"));
}

TEST(Cli, EvolveWritesRecordsAndSnapshots) {
  const auto dir = scratch("cli_evolve");
  json cfg = tiny_config();
  cfg["initial_data"] = {{"kind", "gaussian"}, {"amplitude", 0.5}, {"width", 1.0}};
  const auto path = write_config(dir, cfg);
  ::setenv("FINLS_OUTPUT_DIR", (dir / "env").c_str(), 1);
  const int code = run_cli("evolve --config " + path.string());
  ::unsetenv("FINLS_OUTPUT_DIR");
  ASSERT_EQ(code, 0);
  EXPECT_TRUE(fs::exists(dir / "env" / "records.csv"));
  EXPECT_TRUE(fs::exists(dir / "env" / "final_state.bin"));
  const auto m = json::parse(read_file(dir / "env" / "evolve_manifest.json"));
  EXPECT_EQ(m["command"], "evolve");
  const auto final_state = read_snapshot(dir / "env" / "final_state.bin");
  EXPECT_NEAR(final_state.t, 0.2, 1e-12);
}

json sweep_config() {
  json j = tiny_config();
  j["controls"]["t_end"] = 0.1;
  j["sweep"] = {{"s", {0.8}}, {"b", {0.4}}, {"p", {2.0, 3.0}}, {"c", {0.5, 0.9}}};
  return j;
}

TEST(Cli, SweepResumeReproducesTheUninterruptedRun) {
  const auto dir = scratch("cli_sweep");
  const auto path = write_config(dir, sweep_config());
  ASSERT_EQ(run_cli("sweep --config " + path.string() + " --out " + (dir / "full").string()), 0);
  EXPECT_NE(run_cli("sweep --config " + path.string() + " --out " + (dir / "cut").string() + " --abort-after 1"), 0);
  ASSERT_TRUE(fs::exists(dir / "cut" / "sweep_journal.jsonl"));
  EXPECT_FALSE(fs::exists(dir / "cut" / "sweep.csv"));
  // Simulate a torn final line.
  std::ofstream(dir / "cut" / "sweep_journal.jsonl", std::ios::app) << "{\"index\": 3, \"ro";
  ASSERT_EQ(run_cli("sweep --config " + path.string() + " --out " + (dir / "cut").string() + " --resume --workers 2"),
            0);
  EXPECT_EQ(read_file(dir / "full" / "sweep.csv"), read_file(dir / "cut" / "sweep.csv"));
  const std::string csv = read_file(dir / "full" / "sweep.csv");
  EXPECT_NE(csv.find("skipped"), std::string::npos);  // p = 2 is below the mass-critical power

  json other = sweep_config();
  other["seed"] = 99;
  const auto other_path = write_config(dir, other, "other.json");
  EXPECT_EQ(run_cli("sweep --config " + other_path.string() + " --out " + (dir / "cut").string() + " --resume"), 2);
}
#endif

TEST(Commands, DichotomyOnATinyGrid) {
  auto c = parse_config(tiny_config().dump());
  const auto q = obtain_ground_state(c);
  const auto u0 = initial_field(c, &q);
  const auto rep = run_dichotomy(c, q, u0);
  EXPECT_EQ(rep.classification.regime, model::Regime::global_scattering);
  EXPECT_LT(rep.classification.me, 1.0);
  EXPECT_LT(rep.classification.mg, 1.0);
  EXPECT_NEAR(rep.classification.mg, 0.8 * 0.8, 1e-9);  // gamma_c = 1
  EXPECT_EQ(rep.outcome, dynamics::Outcome::completed);
  EXPECT_EQ(to_string(Verdict::no_verdict), "NO_VERDICT");
  EXPECT_THROW(initial_field(c, nullptr), Error);
}

TEST(Commands, SweepPointsAreTheCartesianProduct) {
  const auto c = parse_config(sweep_config().dump());
  const auto pts = sweep_points(c);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_DOUBLE_EQ(pts[0].p, 2.0);
  EXPECT_EQ(sweep_columns().size(), 11u);
  const auto row = sweep_row(c, 0, pts[0]);
  EXPECT_EQ(row[10].rfind("skipped", 0), 0u);
}

}  // namespace
}  // namespace finls::harness
