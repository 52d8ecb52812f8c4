#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "accelwave/accelwave.hpp"
#include "accelwave/cli.hpp"
#include "test_support.hpp"

namespace accelwave {
namespace {

namespace fs = std::filesystem;
using testing::rel_err;

std::string config(const std::string& name) { return std::string(ACCELWAVE_CONFIG_DIR) + "/" + name + ".json"; }

Json read_json(const std::string& path) {
  std::ifstream in(path);
  return Json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// Strips the CSV footer and returns it as JSON.
Json csv_footer(const std::string& csv) {
  const auto pos = csv.rfind("\n# ");
  if (pos == std::string::npos) return nullptr;
  return Json::parse(csv.substr(pos + 3));
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("accelwave_test_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = path_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p.string();
  }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

// ------------------------------------------------------------------ config

TEST(ConfigRoundTrip, BundledScenarios) {
  for (const char* name : {"rubber", "rubber_mooney_rivlin", "newtonian", "shear_thinning", "shear_thickening_eps"}) {
    const ScenarioConfig c1 = load_scenario(config(name));
    const Json j1 = to_json(c1);
    const Json j2 = to_json(parse_scenario(j1));
    EXPECT_EQ(j1, j2) << name;
    EXPECT_EQ(j1.dump(), j2.dump()) << name;
  }
}

TEST(ConfigRoundTrip, BundledFileIsAFixedPoint) {
  // every key in the file survives parse -> serialize
  for (const char* name : {"rubber", "rubber_mooney_rivlin", "newtonian", "shear_thinning", "shear_thickening_eps"}) {
    const Json raw = read_json(config(name)).flatten();
    const Json out = to_json(load_scenario(config(name))).flatten();
    for (const auto& [key, value] : raw.items()) {
      ASSERT_TRUE(out.contains(key)) << name << key;
      if (value.is_number()) {
        EXPECT_EQ(out[key].get<double>(), value.get<double>()) << name << key;
      } else {
        EXPECT_EQ(out[key], value) << name << key;
      }
    }
  }
}

TEST(ConfigRoundTripProperty, RandomMaterials) {
  std::mt19937_64 rng(61);
  for (int i = 0; i < 500; ++i) {
    const MaterialModel m = testing::random_model(rng, i);
    const Json j = to_json(m);
    const MaterialModel back = parse_material(j);
    EXPECT_EQ(to_json(back), j) << i;
    // lossless doubles through text
    EXPECT_EQ(to_json(parse_material(Json::parse(j.dump()))), j) << i;
  }
}

TEST(ConfigErrors, Rejected) {
  const Json good = read_json(config("rubber"));
  auto expect_config_error = [](const Json& j, const char* what) {
    EXPECT_THROW(parse_scenario(j), ConfigError) << what;
  };
  EXPECT_THROW(parse_json_text("{\"kind\": "), ConfigError);
  EXPECT_THROW(load_scenario("/nonexistent/accelwave.json"), ConfigError);

  Json j = good;
  j["colour"] = "red";
  expect_config_error(j, "unknown top-level key");
  j = good;
  j["solid"]["E3"] = 1.0;
  expect_config_error(j, "unknown material key");
  j = good;
  j["solid"].erase("rho_star");
  expect_config_error(j, "missing field");
  j = good;
  j["solid"]["E1"] = "2e6";
  expect_config_error(j, "string for number");
  j = good;
  j["solid"]["E1"] = -2e6;
  expect_config_error(j, "non-physical constant");
  j = good;
  j["kind"] = "plasma";
  expect_config_error(j, "unknown kind");
  j = good;
  j["sweep"]["parameter"] = "solid.nope";
  expect_config_error(j, "bad sweep parameter");
  j = good;
  j["sweep"]["parameter"] = "fluid.mu0";
  expect_config_error(j, "parameter of the other kind");
  j = good;
  j["sweep"]["count"] = 0;
  expect_config_error(j, "empty range");
  j = good;
  j["sweep"]["from"] = -1.0;
  expect_config_error(j, "log spacing through zero");
  j = good;
  j["sim"]["n_cells"] = 8;
  expect_config_error(j, "too few cells");
  j = good;
  j["sim"]["pi0"] = 1.0;
  expect_config_error(j, "both amplitudes");
  j = good;
  j["sim"]["cfl"] = 1.5;
  expect_config_error(j, "cfl");
}

TEST(ConfigSweep, Values) {
  const ScenarioConfig c = load_scenario(config("rubber"));
  const auto v = c.sweep->values();
  ASSERT_EQ(v.size(), 9u);
  EXPECT_DOUBLE_EQ(v.front(), 0.01);
  EXPECT_DOUBLE_EQ(v.back(), 1.0);
  EXPECT_LT(rel_err(v[4], 0.1), 1e-14);
  const MaterialModel m = with_parameter(c.material, "solid.tau0", 0.5);
  EXPECT_EQ(std::get<SolidParams>(m).tau0, 0.5);
  EXPECT_THROW(with_parameter(c.material, "solid.nope", 1.0), ConfigError);
}

// ----------------------------------------------------------------- analyze

TEST(Analyze, RubberGoldenNumbers) {
  const CliRun r = run({"analyze", "--config", config("rubber"), "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_LT(rel_err(j["lambda0"].get<double>(), 74.21), 5e-3);
  EXPECT_LT(rel_err(j["a"].get<double>(), -0.009), 5e-2);
  EXPECT_LT(rel_err(j["b"].get<double>(), 2.93), 5e-3);
  EXPECT_LT(rel_err(j["pi_cr"].get<double>(), 321.41), 5e-3);
  EXPECT_LT(rel_err(j["pi_cr_g"].get<double>(), 32.8), 1e-2);
  EXPECT_EQ(j["case"], "dissipative_finite");
  EXPECT_TRUE(j["k_condition"]["full_K"].get<bool>());
  EXPECT_EQ(j["pi0"], 100.0);
  EXPECT_TRUE(j["global_existence"].get<bool>());
  EXPECT_TRUE(j["t_c"].is_null());
  EXPECT_EQ(j["input"], to_json(load_scenario(config("rubber")).material));
}

TEST(Analyze, MooneyRivlinRubber) {
  const CliRun r = run({"analyze", "--config", config("rubber_mooney_rivlin"), "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_LT(rel_err(j["pi_cr"].get<double>(), 321.41), 5e-3);
  EXPECT_LT(rel_err(j["lambda0"].get<double>(), 74.21), 5e-3);
}

TEST(Analyze, FluidCases) {
  Json j = Json::parse(run({"analyze", "--config", config("newtonian"), "--format", "json"}).out);
  EXPECT_LT(rel_err(j["b"].get<double>(), 0.25), 1e-12);
  EXPECT_TRUE(j["k_condition"]["weak_K"].get<bool>());
  EXPECT_EQ(j["case"], "dissipative_finite");

  j = Json::parse(run({"analyze", "--config", config("shear_thinning"), "--format", "json"}).out);
  EXPECT_EQ(j["case"], "degenerate");
  EXPECT_EQ(j["b"].get<double>(), 0.0);
  EXPECT_FALSE(j["k_condition"]["weak_K"].get<bool>());
  EXPECT_FALSE(j["global_existence"].get<bool>());
  EXPECT_LT(rel_err(j["t_c"].get<double>(), std::sqrt(8.0) / 0.05), 1e-12);

  j = Json::parse(run({"analyze", "--config", config("shear_thickening_eps"), "--format", "json"}).out);
  EXPECT_EQ(j["case"], "singular_limit");
  EXPECT_EQ(j["singular_limit"]["n"].get<double>(), 0.5);
}

TEST(Analyze, PiOverrideAndCsv) {
  const CliRun r = run({"analyze", "--config", config("rubber"), "--pi0", "1000"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("lambda0,a,b,pi_cr,pi_cr_g,case,full_K,weak_K,pi0,global_existence,t_c\n", 0), 0u);
  EXPECT_EQ(r.out.find('\r'), std::string::npos);
  const Json j = Json::parse(run({"analyze", "--config", config("rubber"), "--pi0", "1000", "--format", "json"}).out);
  EXPECT_FALSE(j["global_existence"].get<bool>());
  const auto c = coefficients_ab(load_scenario(config("rubber")).material);
  EXPECT_EQ(j["t_c"].get<double>(), *classify(c.a, c.b, 1000.0).t_c);
}

TEST(AnalyzeReport, JsonRoundTripIsBitwise) {
  for (const char* name : {"rubber", "rubber_mooney_rivlin", "newtonian", "shear_thinning", "shear_thickening_eps"}) {
    const ScenarioConfig cfg = load_scenario(config(name));
    const AnalysisReport rep = cmd_analyze(cfg.material, 0.37);
    const Json j = to_json(rep);
    const Json back = Json::parse(j.dump());
    EXPECT_EQ(back["lambda0"].get<double>(), rep.coefficients.lambda0) << name;
    EXPECT_EQ(back["a"].get<double>(), rep.coefficients.a) << name;
    EXPECT_EQ(extended_from_json(back["b"]), rep.coefficients.b) << name;
    EXPECT_EQ(extended_from_json(back["pi_cr"]), rep.coefficients.pi_cr) << name;
    EXPECT_EQ(back.dump(), j.dump()) << name;
  }
}

TEST(AnalyzeReport, InfiniteDissipationIsSerializable) {
  const MaterialModel m = FluidParams{1.0, 1.0, 1.0, 1.0, PowerLaw{1.0, 2.0}};
  const Json j = to_json(cmd_analyze(m, 1.0));
  EXPECT_EQ(j["b"], "inf");
  EXPECT_EQ(j["pi_cr"], "inf");
  EXPECT_TRUE(extended_from_json(j["b"]).is_infinite());
}

// --------------------------------------------------------------- amplitude

TEST(Amplitude, SubcriticalRubberAgrees) {
  const MaterialModel m = load_scenario(config("rubber")).material;
  const auto c = coefficients_ab(m);
  const AmplitudeRun run = cmd_amplitude(m, 0.5 * c.pi_cr.value(), std::nullopt, std::nullopt);
  EXPECT_TRUE(run.outcome.global_existence);
  EXPECT_LE(run.max_relative_difference, 1e-8);
  EXPECT_EQ(run.rk4.t.size(), 201u);
  for (std::size_t i = 1; i < run.closed.size(); ++i) EXPECT_LT(run.closed[i], run.closed[i - 1]);
}

TEST(Amplitude, SupercriticalBlowUpTime) {
  const MaterialModel m = load_scenario(config("rubber")).material;
  const auto c = coefficients_ab(m);
  const std::string pi0 = std::to_string(2.0 * c.pi_cr.value());
  const CliRun r = run({"amplitude", "--config", config("rubber"), "--pi0", pi0});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json meta = csv_footer(r.out);
  EXPECT_FALSE(meta["global_existence"].get<bool>());
  EXPECT_LT(rel_err(meta["t_c"].get<double>(), std::log(2.0) / c.b.value()), 1e-5);
  EXPECT_FALSE(meta["rk4_blew_up"].get<bool>());  // default horizon stops short of t_c
  EXPECT_LE(meta["max_relative_difference"].get<double>(), 1e-8);

  const CliRun past = run({"amplitude", "--config", config("rubber"), "--pi0", pi0, "--t-end", "1"});
  ASSERT_EQ(past.code, 0);
  const Json pm = csv_footer(past.out);
  EXPECT_TRUE(pm["rk4_blew_up"].get<bool>());
  EXPECT_LT(rel_err(pm["rk4_blowup_time"].get<double>(), pm["t_c"].get<double>()), 1e-2);
}

TEST(Amplitude, ZeroAmplitude) {
  const MaterialModel m = load_scenario(config("newtonian")).material;
  const AmplitudeRun zero = cmd_amplitude(m, 0.0, 2.0, 0.1);
  ASSERT_EQ(zero.rk4.t.size(), 21u);
  for (std::size_t i = 0; i < zero.rk4.t.size(); ++i) {
    EXPECT_EQ(zero.rk4.pi[i], 0.0);
    EXPECT_EQ(zero.closed[i], 0.0);
  }
  const CliRun r = run({"amplitude", "--config", config("newtonian"), "--pi0", "0", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& x : Json::parse(r.out)["rk4"]) EXPECT_EQ(x.get<double>(), 0.0);
}

TEST(Amplitude, NeedsAnAmplitude) {
  const CliRun r = run({"amplitude", "--config", config("newtonian")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("pi0"), std::string::npos);
  EXPECT_EQ(run({"amplitude", "--config", config("newtonian"), "--pi0", "1", "--dt", "0"}).code, 2);
}

// ---------------------------------------------------------------- simulate

TEST(Simulate, EndToEndWritesTraceAndSnapshot) {
  TempDir dir;
  const std::string out = (dir / "trace.csv").string();
  const CliRun r = run({"simulate", "--config", config("rubber"), "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  const std::string csv = slurp(out);
  EXPECT_EQ(csv.rfind("t,measured_pi,predicted_pi,front_x,predicted_front_x,energy\n", 0), 0u);
  const Json meta = csv_footer(csv);
  EXPECT_LE(meta["max_relative_error"].get<double>(), 0.05);
  EXPECT_EQ(meta["dissipation_violations"].get<int>(), 0);
  EXPECT_LE(meta["max_relative_step_increase"].get<double>(), 1e-9);
  const std::string snap = slurp(out + ".snapshot.csv");
  EXPECT_EQ(snap.rfind("x,v,F,sigma\n", 0), 0u);
  EXPECT_EQ(std::count(snap.begin(), snap.end(), '\n'), 2000 + 2);
}

TEST(Simulate, ShearThinningTracksConstantAmplitudeDecayFree) {
  const CliRun r = run({"simulate", "--config", config("shear_thinning"), "--t-end", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json meta = csv_footer(r.out);
  EXPECT_LE(meta["max_relative_error"].get<double>(), 0.02);
}

TEST(Simulate, ExitCodes) {
  TempDir dir;
  Json j = read_json(config("rubber"));
  j.erase("sim");
  EXPECT_EQ(run({"simulate", "--config", dir.write("nosim.json", j.dump())}).code, 2);

  // a compressive tent large enough to lose hyperbolicity in the initial data
  j = read_json(config("rubber"));
  j["sim"]["pi0_over_pi_cr"] = -5.0;
  j["sim"]["t_end"] = 0.01;
  const CliRun r = run({"simulate", "--config", dir.write("hyper.json", j.dump())});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("hyperbolicity"), std::string::npos);

  // shear thinning has no finite nonzero critical amplitude to scale by
  j = read_json(config("shear_thinning"));
  j["sim"].erase("pi0");
  j["sim"]["pi0_over_pi_cr"] = 0.1;
  EXPECT_EQ(run({"simulate", "--config", dir.write("nocr.json", j.dump())}).code, 2);
  EXPECT_EQ(run({"simulate", "--config", config("rubber"), "--t-end", "-1"}).code, 2);
}

// ------------------------------------------------------------------- sweep

TEST(Sweep, EpsilonScanSlope) {
  const ScenarioConfig cfg = load_scenario(config("shear_thickening_eps"));
  const SweepResult r = cmd_sweep(cfg.material, *cfg.sweep, std::nullopt);
  ASSERT_EQ(r.rows.size(), 7u);
  ASSERT_TRUE(r.loglog_slope_pi_cr.has_value());
  EXPECT_NEAR(*r.loglog_slope_pi_cr, -0.5, 0.01);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    EXPECT_GT(r.rows[i].report.coefficients.pi_cr.value(), r.rows[i - 1].report.coefficients.pi_cr.value());
  }
}

TEST(Sweep, RelaxationTimeScanSlope) {
  const CliRun r = run({"sweep", "--config", config("rubber"), "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["parameter"], "solid.tau0");
  EXPECT_NEAR(j["loglog_slope_pi_cr"].get<double>(), -1.0, 1e-6);
  EXPECT_EQ(j["rows"].size(), 9u);
}

TEST(Sweep, CsvLayout) {
  const CliRun r = run({"sweep", "--config", config("newtonian")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("fluid.mu0,lambda0,", 0), 0u);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1 + 8 + 1);
  EXPECT_EQ(csv_footer(r.out)["parameter"], "fluid.mu0");
}

TEST(Sweep, SinglePointMatchesAnalyze) {
  const ScenarioConfig cfg = load_scenario(config("rubber"));
  SweepConfig one{"solid.tau0", 0.1, 0.1, 1, Spacing::Linear};
  const SweepResult r = cmd_sweep(cfg.material, one, 100.0);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(to_json(r.rows[0].report).dump(), to_json(cmd_analyze(cfg.material, 100.0)).dump());
  EXPECT_FALSE(r.loglog_slope_pi_cr.has_value());
}

TEST(Sweep, NeedsASweepBlock) {
  EXPECT_EQ(run({"sweep", "--config", config("shear_thinning")}).code, 2);
}

// ---------------------------------------------------------------- CLI misc

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"analyze"}).code, 2);
  EXPECT_EQ(run({"analyze", "--config", config("rubber"), "--format", "xml"}).code, 2);
  EXPECT_EQ(run({"analyze", "--config", config("rubber"), "--pi0", "abc"}).code, 2);
  EXPECT_EQ(run({"analyze", "--config", "/nonexistent.json"}).code, 2);
  TempDir dir;
  EXPECT_EQ(run({"analyze", "--config", dir.write("bad.json", "{not json")}).code, 2);
  EXPECT_EQ(run({"analyze", "--config", config("rubber"), "--out", "/nonexistent/dir/x.csv"}).code, 2);
}

TEST(Cli, Help) {
  const CliRun r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  for (const char* sub : {"analyze", "amplitude", "simulate", "sweep", "paper-tables"}) {
    EXPECT_NE(r.out.find(sub), std::string::npos) << sub;
  }
}

TEST(Cli, ReferenceTables) {
  const CliRun r = run({"paper-tables"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("overall: PASS"), std::string::npos);
  EXPECT_TRUE(cmd_reference_tables().all_pass());
}

TEST(Cli, Determinism) {
  const std::vector<std::vector<std::string>> cases{
      {"analyze", "--config", config("rubber"), "--format", "json"},
      {"amplitude", "--config", config("rubber"), "--pi0", "500"},
      {"sweep", "--config", config("shear_thickening_eps")},
      {"simulate", "--config", config("shear_thickening_eps"), "--t-end", "0.2"},
      {"paper-tables"}};
  for (const auto& args : cases) {
    const CliRun a = run(args);
    const CliRun b = run(args);
    ASSERT_EQ(a.code, 0) << args[0] << ": " << a.err;
    EXPECT_EQ(a.out, b.out) << args[0];
  }
}

TEST(Cli, SweepIndependentOfThreadCount) {
  const std::vector<std::string> args{"sweep", "--config", config("rubber")};
  ::setenv("ACCELWAVE_THREADS", "1", 1);
  EXPECT_EQ(sweep_thread_count(100), 1u);
  const CliRun serial = run(args);
  ::setenv("ACCELWAVE_THREADS", "4", 1);
  const CliRun parallel = run(args);
  ::unsetenv("ACCELWAVE_THREADS");
  ASSERT_EQ(serial.code, 0);
  EXPECT_EQ(serial.out, parallel.out);
}

TEST(Csv, Formatting) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-2.5e-300), "-2.5e-300");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  std::ostringstream s;
  CsvWriter csv(s);
  csv.header({"a", "b", "c"});
  csv.row(1.0, true, std::string("x"));
  csv.footer("{}");
  EXPECT_EQ(s.str(), "a,b,c\n1,true,x\n# {}\n");
}

}  // namespace
}  // namespace accelwave
