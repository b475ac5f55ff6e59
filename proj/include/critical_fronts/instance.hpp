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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace cfronts {

// Distribution of quenched couplings: uniform on [lo, hi] or a constant.
struct CouplingDistribution {
  enum class Kind { kUniform, kConstant };
  Kind kind = Kind::kUniform;
  double lo = -1.0;
  double hi = 1.0;
  double value = 1.0;  // kConstant only

  static CouplingDistribution uniform(double lo, double hi) {
    return {Kind::kUniform, lo, hi, 0.0};
  }
  static CouplingDistribution constant(double value) {
    return {Kind::kConstant, value, value, value};
  }

  double max_magnitude() const;
  // exp(E[log|J|]) when it has a closed form.
  std::optional<double> analytic_critical_field() const;

  friend bool operator==(const CouplingDistribution&,
                         const CouplingDistribution&) = default;
};

// Quenched couplings of one chain. `couplings[n-1]` is J between sites n and
// n+1 (sites are 1-based); `three_local[n-1]` is K on the triple n, n+1, n+2.
struct DisorderRealization {
  int sites = 0;
  std::uint64_t seed = 0;
  CouplingDistribution distribution;
  std::vector<double> couplings;
  std::optional<CouplingDistribution> three_local_distribution;
  std::vector<double> three_local;

  bool has_three_local() const { return !three_local.empty(); }
};

// Uniform deviates from mt19937_64 via the top 53 bits, so regeneration is
// bit-identical on every standard library.
DisorderRealization sample_couplings(const CouplingDistribution& distribution,
                                     int sites, std::uint64_t seed);

// Same, plus K couplings drawn from `three_local` on an independent stream.
DisorderRealization sample_couplings(const CouplingDistribution& distribution,
                                     const CouplingDistribution& three_local,
                                     int sites, std::uint64_t seed);

// Counter-based stream split: seed of instance `index` under `base_seed`.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

// exp(mean log|J_n|). Throws SingularCouplingError if any J_n == 0.
double critical_field(const DisorderRealization& realization);

// Tiling of sites 1..N into clusters.
struct ClusterPartition {
  std::vector<int> lengths;        // L_k, sum == N
  std::vector<double> velocities;  // v_k = (|g_f - g_i| + alpha L_k / 2) / T
  std::vector<int> cuts;           // bond indices b (between b and b+1), ascending

  int sites() const;
  int cluster_count() const { return static_cast<int>(lengths.size()); }
  int first_site(int cluster) const;  // 1-based
  // Cluster containing site n (1-based); DomainError when out of range.
  int cluster_of(int site) const;

  static ClusterPartition uniform(int sites, int clusters, double velocity);
};

struct PartitionParams {
  double total_time = 1.0;
  double alpha = 0.125;
  double kappa = 2.0;
  double g_initial = 2.0;
  double g_final = 0.0;
};

double cluster_velocity(const PartitionParams& params, int length);

// Weakest-link preprocessing: start from the remaining chain, cut at the
// weakest internal bond until min|J| * kappa > v_k holds, accept, continue
// right of the accepted cluster.
ClusterPartition partition_clusters(const DisorderRealization& realization,
                                    const PartitionParams& params);

nlohmann::json to_json(const CouplingDistribution& d);
CouplingDistribution distribution_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DisorderRealization& r);
DisorderRealization realization_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ClusterPartition& p);
ClusterPartition partition_from_json(const nlohmann::json& j);

}  // namespace cfronts
