// Copyright 2026 The critical-fronts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// cfronts: quench, gap, SDRG and analysis sweeps from a JSON config.
//
//   cfronts quench  --config run.json [--out DIR] [--workers N] [--oracle]
//   cfronts gaps    --config run.json [--out DIR] [--workers N]
//   cfronts sdrg    --config run.json [--out DIR] [--workers N]
//   cfronts analyze --out DIR [--config run.json] results.csv gaps.csv ...
//
// Exit codes: 0 success, 1 more than 1% of work units failed, 2 invalid
// config or missing inputs.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "critical_fronts/errors.hpp"
#include "critical_fronts/experiment.hpp"

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cfronts::ConfigError("cannot open config " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw cfronts::ConfigError("config " + path + ": " + e.what());
  }
}

void print(const std::string& command, const cfronts::RunSummary& s) {
  std::cout << command << ": " << s.completed << " computed, " << s.resumed << " resumed, "
            << s.failed << " failed of " << s.total << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical-front annealing experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<int> workers;
  bool oracle = false;
  std::vector<std::string> inputs;

  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides config)");
    sub->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
  };
  CLI::App* quench = app.add_subcommand("quench", "Evolve and measure residual energies");
  add_run_flags(quench);
  quench->add_flag("--oracle", oracle, "Compare with dense 2^N integration (N <= 12)");
  CLI::App* gaps = app.add_subcommand("gaps", "Sample relevant gaps along moving fronts");
  add_run_flags(gaps);
  CLI::App* sdrg = app.add_subcommand("sdrg", "Export SDRG trees and causal zones");
  add_run_flags(sdrg);
  CLI::App* analyze = app.add_subcommand("analyze", "Fit and collapse reports from prior outputs");
  analyze->add_option("--out", out_dir, "Report directory")->required();
  analyze->add_option("--config", config_path, "JSON config with an analyze section");
  analyze->add_option("inputs", inputs, "results.csv / gaps.csv files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (analyze->parsed()) {
      cfronts::AnalyzeConfig config;
      if (!config_path.empty())
        config = cfronts::config_from_json(load_json(config_path), false).analyze;
      std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
      const auto s = cfronts::run_analyze(paths, out_dir, config);
      print("analyze", s);
      return s.exit_code;
    }
    cfronts::ExperimentConfig config = cfronts::config_from_json(load_json(config_path));
    if (!out_dir.empty()) config.output = out_dir;
    if (workers) config.workers = *workers;
    if (oracle) config.oracle = true;
    cfronts::RunSummary s;
    if (quench->parsed()) {
      s = cfronts::run_quench(config);
      print("quench", s);
    } else if (gaps->parsed()) {
      s = cfronts::run_gaps(config);
      print("gaps", s);
    } else {
      s = cfronts::run_sdrg(config);
      print("sdrg", s);
    }
    return s.exit_code;
  } catch (const cfronts::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
