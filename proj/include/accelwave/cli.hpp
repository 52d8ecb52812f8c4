#pragma once

// accelwave command line: analyze | amplitude | simulate | sweep | paper-tables.
// Exit codes: 0 success, 2 configuration or usage error, 3 numerical error.

#include <CLI11.hpp>

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "accelwave/config.hpp"
#include "accelwave/errors.hpp"
#include "accelwave/scenario.hpp"

namespace accelwave {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

namespace detail {

// Writes to --out when given, otherwise to the default stream.
class OutputSink {
 public:
  OutputSink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw ConfigError("cannot open output file '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Acceleration-wave analysis for 1-D dissipative hyperbolic models", "accelwave"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<double> pi0;
  std::optional<double> t_end;
  std::optional<double> dt;
  OutputFormat format = OutputFormat::Csv;
  const std::map<std::string, OutputFormat> formats{{"csv", OutputFormat::Csv}, {"json", OutputFormat::Json}};

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", config_path, "JSON config file");
    if (needs_config) c->required();
    sub->add_option("--out", out_path, "output file (default: stdout)");
  };

  auto* analyze = app.add_subcommand("analyze", "wave coefficients, K-condition and optional t_c");
  add_common(analyze, true);
  analyze->add_option("--pi0", pi0, "initial amplitude [m/s^2]");
  auto* amplitude = app.add_subcommand("amplitude", "Bernoulli trajectory, closed form vs RK4");
  add_common(amplitude, true);
  amplitude->add_option("--pi0", pi0, "initial amplitude [m/s^2]");
  amplitude->add_option("--t-end", t_end, "final time [s]");
  amplitude->add_option("--dt", dt, "output spacing [s]");
  auto* simulate_cmd = app.add_subcommand("simulate", "finite-volume front tracking (needs a sim block)");
  add_common(simulate_cmd, true);
  simulate_cmd->add_option("--t-end", t_end, "override sim.t_end [s]");
  auto* sweep = app.add_subcommand("sweep", "analysis over a parameter range (needs a sweep block)");
  add_common(sweep, true);
  sweep->add_option("--pi0", pi0, "initial amplitude [m/s^2]");
  auto* tables = app.add_subcommand("paper-tables", "reference rubber and fluid tables with pass/fail");
  tables->add_option("--out", out_path, "output file (default: stdout)");

  for (auto* sub : {analyze, amplitude, sweep}) {
    sub->add_option("--format", format, "csv or json")->transform(CLI::CheckedTransformer(formats));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    if (tables->parsed()) {
      detail::OutputSink sink(out_path, out);
      const ReferenceTables t = cmd_reference_tables();
      write_reference_tables(sink.get(), t);
      return t.all_pass() ? kExitOk : kExitNumerical;
    }

    const ScenarioConfig cfg = load_scenario(config_path);
    if (analyze->parsed()) {
      const AnalysisReport r = cmd_analyze(cfg.material, pi0 ? pi0 : cfg.analysis_pi0);
      detail::OutputSink sink(out_path, out);
      write_analysis(sink.get(), r, format);
    } else if (amplitude->parsed()) {
      const std::optional<double> p = pi0 ? pi0 : cfg.analysis_pi0;
      if (!p) throw ConfigError("amplitude: --pi0 is required (or analysis.pi0 in the config)");
      const AmplitudeRun run = cmd_amplitude(cfg.material, *p, t_end, dt);
      detail::OutputSink sink(out_path, out);
      write_amplitude(sink.get(), run, format);
    } else if (simulate_cmd->parsed()) {
      if (!cfg.sim) throw ConfigError("simulate: the config has no 'sim' block");
      SimConfig sc = *cfg.sim;
      if (t_end) {
        if (!(*t_end >= 0.0)) throw ConfigError("--t-end must be >= 0");
        sc.t_end = *t_end;
      }
      const SimulationSetup setup = make_setup(cfg.material, sc);
      const SimulationResult result = simulate(cfg.material, setup.grid, setup.ic, setup.t_end, setup.options);
      detail::OutputSink sink(out_path, out);
      write_trace(sink.get(), setup, result);
      if (!out_path.empty()) {
        detail::OutputSink snap(out_path + ".snapshot.csv", out);
        write_snapshot(snap.get(), result.final_snapshot);
      }
    } else if (sweep->parsed()) {
      if (!cfg.sweep) throw ConfigError("sweep: the config has no 'sweep' block");
      const SweepResult r = cmd_sweep(cfg.material, *cfg.sweep, pi0 ? pi0 : cfg.analysis_pi0);
      detail::OutputSink sink(out_path, out);
      write_sweep(sink.get(), r, format);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SimulationError& e) {
    err << "simulation error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace accelwave
