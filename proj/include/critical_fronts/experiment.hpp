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

#pragma once

// Sweep orchestration behind the cfronts command line tool.
//
// Every run is driven by one JSON document. Unknown keys are rejected.
// Instance i of a sweep uses derive_seed(base_seed, i). Records are keyed by
// (family, N, T, alpha, seed); a rerun into the same output directory skips
// keys already on disk, and the final CSV is rewritten in key order so the
// output does not depend on the worker count.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "critical_fronts/analysis.hpp"
#include "critical_fronts/instance.hpp"
#include "critical_fronts/propagator.hpp"
#include "critical_fronts/quadratic.hpp"
#include "critical_fronts/schedules.hpp"
#include "critical_fronts/sdrg.hpp"

namespace cfronts {

enum class ScheduleFamily { kHomogeneous, kPeriodicTypeI, kTanhTypeII, kMultiFront };

std::string family_name(ScheduleFamily family);

struct GapsConfig {
  int positions = 8;
  int residual_size = 8;
  GapMethod method = GapMethod::kSdrg;
  double threshold = 1e-3;
};

struct SdrgConfig {
  std::vector<double> fields{0.8, 0.4, 0.37, 0.3};  // homogeneous snapshot fields
  double zone_cutoff = 0.2;                         // absolute energy
  std::optional<int> residual_size;                 // stop early; default: full flow
};

struct AnalyzeConfig {
  FitOptions fit;
  std::vector<double> quantiles{0.1, 0.5, 0.9};
  RescaleOptions rescale;
  int tail_bins = 40;
  double minimal_gap_q = 0.5;
};

struct ExperimentConfig {
  Model model = Model::kIsing;
  CouplingDistribution distribution = CouplingDistribution::uniform(-1.0, 1.0);
  std::optional<CouplingDistribution> three_local;  // cluster_ising only
  std::vector<int> sizes;
  std::vector<double> times;

  ScheduleFamily family = ScheduleFamily::kHomogeneous;
  std::vector<double> alphas{0.125};
  double kappa = 2.0;
  double amplitude = 0.0;   // type I
  double wavenumber = 0.0;  // type I
  std::vector<Front> fronts;               // type II
  std::optional<double> critical_field;    // type II; default exp(E log|J|) per instance
  bool start_at_midpoint = false;          // multi-front
  bool single_cluster = false;             // multi-front without weakest-link cuts
  double g_initial = 2.0;
  double g_final = 0.0;

  int instances = 1;
  std::uint64_t base_seed = 1;
  std::filesystem::path output = "out";
  int workers = 1;

  StepControl control;
  bool oracle = false;
  bool dump_bonds = false;

  GapsConfig gaps;
  SdrgConfig sdrg;
  AnalyzeConfig analyze;
};

// Throws ConfigError on unknown keys, wrong types or empty lists. With
// `require_sweep` false the N and T lists may be absent (analyze only).
ExperimentConfig config_from_json(const nlohmann::json& j, bool require_sweep = true);
nlohmann::json to_json(const ExperimentConfig& config);
// Hash of the scientific content: output path and worker count excluded.
std::string config_hash(const ExperimentConfig& config);

// Schedule of one sweep point. Multi-front schedules partition `realization`.
ScheduleSpec make_schedule(const ExperimentConfig& config, const DisorderRealization& realization,
                           int sites, double total_time, double alpha);
DisorderRealization make_realization(const ExperimentConfig& config, int sites,
                                     std::uint64_t seed);

struct RunSummary {
  std::size_t total = 0;      // work units in the sweep
  std::size_t completed = 0;  // computed in this run
  std::size_t resumed = 0;    // already on disk
  std::size_t failed = 0;
  int exit_code = 0;  // 0 ok; 1 when more than 1% of units failed
};

RunSummary run_quench(const ExperimentConfig& config);
RunSummary run_gaps(const ExperimentConfig& config);
RunSummary run_sdrg(const ExperimentConfig& config);

// Reads results.csv / gaps.csv style tables (recognised by header), writes
// report.json and quantiles.csv to `out`. Throws ConfigError on missing or
// unrecognised inputs.
RunSummary run_analyze(const std::vector<std::filesystem::path>& inputs,
                       const std::filesystem::path& out, const AnalyzeConfig& config);

// results.csv columns, in order.
inline constexpr const char* kResultsHeader =
    "family,N,T,alpha,seed,instance,schedule_hash,eps_Q,defect_density,n_clusters,energy,"
    "ground_energy,steps,max_drift,oracle_diff,wall_time";

}  // namespace cfronts
