// Command-line front end for the closed-loop IBVS simulator.
//
//   ibvs_sim run --scenario s.toml --out run.csv [--seed N] [--format csv|jsonl]
//   ibvs_sim batch --scenario s.toml --seeds 1,2,3 --threads 4 --out-dir runs/
//   ibvs_sim check --scenario s.toml
//   ibvs_sim presets list
//   ibvs_sim presets write ideal [--out ideal.toml] [--json]
//
// Exit codes: 0 converged, 1 finished without converging, 2 target lost,
// 3 configuration error, 4 I/O error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "ibvs/config.hpp"

namespace {

constexpr int kExitNotConverged = 1;
constexpr int kExitLostTarget = 2;
constexpr int kExitConfig = 3;
constexpr int kExitIo = 4;

const std::map<std::string, ibvs::TelemetryFormat> kFormats = {{"csv", ibvs::TelemetryFormat::Csv},
                                                                {"jsonl", ibvs::TelemetryFormat::JsonLines}};

void print_summary(const ibvs::RunResult& r, std::ostream& out) {
  const auto& s = r.summary;
  const char* status = r.status == ibvs::RunStatus::Converged      ? "converged"
                       : r.status == ibvs::RunStatus::LostTarget ? "lost_target"
                                                                 : "not_converged";
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "status=%s records=%zu e0=%.6g convergence_time=%s steady_state_error=%.6g peak_cond=%.6g "
                "min_target_distance=%.6g\n",
                status, s.record_count, s.initial_error,
                s.convergence_time ? std::to_string(*s.convergence_time).c_str() : "none", s.steady_state_error,
                s.peak_cond, s.min_target_distance);
  out << buf;
}

int exit_code(const ibvs::RunResult& r) {
  switch (r.status) {
    case ibvs::RunStatus::Converged: return 0;
    case ibvs::RunStatus::LostTarget: return kExitLostTarget;
    default: return kExitNotConverged;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image-based visual servoing simulator for an underactuated quadrotor"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  std::string format = "csv";
  std::uint64_t seed = 0;

  auto* run_cmd = app.add_subcommand("run", "Run one closed-loop scenario and write telemetry");
  run_cmd->add_option("--scenario", scenario_path, "Scenario file (TOML or JSON)")->required();
  run_cmd->add_option("--out", out_path, "Telemetry output path")->required();
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_option("--format", format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));

  std::vector<std::uint64_t> seeds;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::string out_dir;
  auto* batch_cmd = app.add_subcommand("batch", "Run one scenario over several seeds in parallel");
  batch_cmd->add_option("--scenario", scenario_path, "Scenario file (TOML or JSON)")->required();
  batch_cmd->add_option("--seeds", seeds, "Seeds, comma separated")->required()->delimiter(',');
  batch_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  batch_cmd->add_option("--out-dir", out_dir, "Directory for run_<seed>.<ext> files")->required();
  batch_cmd->add_option("--format", format, "csv or jsonl")->check(CLI::IsMember({"csv", "jsonl"}));

  auto* check_cmd = app.add_subcommand("check", "Validate a scenario file without running it");
  check_cmd->add_option("--scenario", scenario_path, "Scenario file (TOML or JSON)")->required();

  auto* presets_cmd = app.add_subcommand("presets", "List or write the shipped scenario presets");
  presets_cmd->require_subcommand(1);
  presets_cmd->add_subcommand("list", "Print preset names");
  std::string preset_name;
  bool as_json = false;
  auto* write_cmd = presets_cmd->add_subcommand("write", "Print or save a preset scenario file");
  write_cmd->add_option("name", preset_name, "Preset name")->required();
  write_cmd->add_option("--out", out_path, "Write to this file instead of stdout");
  write_cmd->add_flag("--json", as_json, "Emit JSON instead of TOML");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      ibvs::ScenarioConfig config = ibvs::load_scenario(scenario_path);
      if (*seed_opt) config.seed = seed;
      const ibvs::RunResult result = ibvs::run(config);
      ibvs::emit(result.records, kFormats.at(format), std::filesystem::path(out_path));
      print_summary(result, std::cout);
      return exit_code(result);
    }
    if (batch_cmd->parsed()) {
      const ibvs::ScenarioConfig config = ibvs::load_scenario(scenario_path);
      const auto results = ibvs::run_batch(config, seeds, threads);
      std::filesystem::create_directories(out_dir);
      int worst = 0;
      for (std::size_t i = 0; i < results.size(); ++i) {
        const std::string name = "run_" + std::to_string(seeds[i]) + (format == "csv" ? ".csv" : ".jsonl");
        ibvs::emit(results[i].records, kFormats.at(format), std::filesystem::path(out_dir) / name);
        std::cout << "seed=" << seeds[i] << ' ';
        print_summary(results[i], std::cout);
        worst = std::max(worst, exit_code(results[i]));
      }
      return worst;
    }
    if (check_cmd->parsed()) {
      const ibvs::ScenarioConfig config = ibvs::load_scenario(scenario_path);
      std::cout << "ok: " << config.tick_count() << " control ticks, perturbation "
                << config.perturbation.kind() << '\n';
      return 0;
    }
    if (presets_cmd->got_subcommand("list")) {
      for (const auto& n : ibvs::preset_names()) std::cout << n << '\n';
      return 0;
    }
    if (write_cmd->parsed()) {
      const ibvs::ConfigTree tree = ibvs::scenario_to_tree(ibvs::preset(preset_name));
      const std::string text = as_json ? tree.dump(2) + "\n" : ibvs::to_toml(tree);
      if (out_path.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(out_path);
        if (!(out << text)) throw ibvs::IoError("cannot write '" + out_path + "'");
      }
      return 0;
    }
  } catch (const ibvs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ibvs::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  }
  return 0;
}
