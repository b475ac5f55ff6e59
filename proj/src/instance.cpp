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

#include "critical_fronts/instance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "critical_fronts/errors.hpp"

namespace cfronts {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_deviate(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<double> draw(const CouplingDistribution& d, std::size_t count,
                         std::mt19937_64& rng) {
  std::vector<double> out(count);
  for (auto& value : out) {
    if (d.kind == CouplingDistribution::Kind::kConstant) {
      value = d.value;
      continue;
    }
    do {
      value = d.lo + (d.hi - d.lo) * unit_deviate(rng);
    } while (value == 0.0 && d.hi > d.lo);
  }
  return out;
}

// Antiderivative of log|x|, continuous at 0.
double log_abs_primitive(double x) {
  return x == 0.0 ? 0.0 : x * std::log(std::abs(x)) - x;
}

}  // namespace

double CouplingDistribution::max_magnitude() const {
  return kind == Kind::kConstant ? std::abs(value)
                                 : std::max(std::abs(lo), std::abs(hi));
}

std::optional<double> CouplingDistribution::analytic_critical_field() const {
  if (kind == Kind::kConstant) {
    if (value == 0.0) return std::nullopt;
    return std::abs(value);
  }
  if (!(hi > lo)) return std::nullopt;
  const double mean_log =
      (log_abs_primitive(hi) - log_abs_primitive(lo)) / (hi - lo);
  return std::exp(mean_log);
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
  return splitmix64(base_seed ^ splitmix64(index + 0x5bd1e995ULL));
}

DisorderRealization sample_couplings(const CouplingDistribution& distribution,
                                     int sites, std::uint64_t seed) {
  if (sites < 2) throw DomainError("sample_couplings: need N >= 2");
  DisorderRealization r;
  r.sites = sites;
  r.seed = seed;
  r.distribution = distribution;
  std::mt19937_64 rng(seed);
  r.couplings = draw(distribution, static_cast<std::size_t>(sites - 1), rng);
  return r;
}

DisorderRealization sample_couplings(const CouplingDistribution& distribution,
                                     const CouplingDistribution& three_local,
                                     int sites, std::uint64_t seed) {
  if (sites < 3) throw DomainError("sample_couplings: three-local terms need N >= 3");
  DisorderRealization r = sample_couplings(distribution, sites, seed);
  std::mt19937_64 rng(splitmix64(seed ^ 0x3c6ef372fe94f82bULL));
  r.three_local_distribution = three_local;
  r.three_local = draw(three_local, static_cast<std::size_t>(sites - 2), rng);
  return r;
}

double critical_field(const DisorderRealization& realization) {
  if (realization.couplings.empty())
    throw DomainError("critical_field: no couplings");
  double sum = 0.0;
  for (double j : realization.couplings) {
    if (j == 0.0) throw SingularCouplingError("critical_field: J_n == 0");
    sum += std::log(std::abs(j));
  }
  return std::exp(sum / static_cast<double>(realization.couplings.size()));
}

int ClusterPartition::sites() const {
  return std::accumulate(lengths.begin(), lengths.end(), 0);
}

int ClusterPartition::first_site(int cluster) const {
  if (cluster < 0 || cluster >= cluster_count())
    throw DomainError("ClusterPartition: cluster index out of range");
  int first = 1;
  for (int k = 0; k < cluster; ++k) first += lengths[k];
  return first;
}

int ClusterPartition::cluster_of(int site) const {
  int last = 0;
  for (int k = 0; k < cluster_count(); ++k) {
    last += lengths[k];
    if (site >= 1 && site <= last) return k;
  }
  throw DomainError("ClusterPartition: site out of range");
}

ClusterPartition ClusterPartition::uniform(int sites, int clusters,
                                           double velocity) {
  if (clusters < 1 || sites < clusters)
    throw DomainError("ClusterPartition::uniform: bad cluster count");
  ClusterPartition p;
  int first = 1;
  for (int k = 0; k < clusters; ++k) {
    const int next = 1 + static_cast<int>((static_cast<long>(sites) * (k + 1)) / clusters);
    p.lengths.push_back(next - first);
    p.velocities.push_back(velocity);
    if (k + 1 < clusters) p.cuts.push_back(next - 1);
    first = next;
  }
  return p;
}

double cluster_velocity(const PartitionParams& params, int length) {
  return (std::abs(params.g_final - params.g_initial) +
          params.alpha * length / 2.0) /
         params.total_time;
}

ClusterPartition partition_clusters(const DisorderRealization& realization,
                                    const PartitionParams& params) {
  if (!(params.total_time > 0.0) || !(params.alpha > 0.0) ||
      !(params.kappa > 0.0))
    throw DomainError("partition_clusters: need T > 0, alpha > 0, kappa > 0");
  const int n = realization.sites;
  const auto& j = realization.couplings;
  ClusterPartition p;
  int start = 1;
  while (start <= n) {
    int end = n;
    for (;;) {
      // Internal bonds of [start, end] are start .. end-1.
      double weakest = std::numeric_limits<double>::infinity();
      int weakest_bond = -1;
      for (int b = start; b < end; ++b) {
        const double m = std::abs(j[static_cast<std::size_t>(b - 1)]);
        if (m < weakest) {
          weakest = m;
          weakest_bond = b;
        }
      }
      const double v = cluster_velocity(params, end - start + 1);
      if (weakest * params.kappa > v) break;
      end = weakest_bond;
    }
    p.lengths.push_back(end - start + 1);
    p.velocities.push_back(cluster_velocity(params, end - start + 1));
    if (end < n) p.cuts.push_back(end);
    start = end + 1;
  }
  return p;
}

nlohmann::json to_json(const CouplingDistribution& d) {
  if (d.kind == CouplingDistribution::Kind::kConstant)
    return {{"kind", "constant"}, {"value", d.value}};
  return {{"kind", "uniform"}, {"lo", d.lo}, {"hi", d.hi}};
}

CouplingDistribution distribution_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant")
    return CouplingDistribution::constant(j.at("value").get<double>());
  if (kind == "uniform") {
    const double lo = j.at("lo").get<double>();
    const double hi = j.at("hi").get<double>();
    if (!(hi >= lo)) throw ConfigError("uniform distribution needs hi >= lo");
    return CouplingDistribution::uniform(lo, hi);
  }
  throw ConfigError("unknown distribution kind: " + kind);
}

nlohmann::json to_json(const DisorderRealization& r) {
  nlohmann::json j{{"N", r.sites},
                   {"seed", r.seed},
                   {"distribution", to_json(r.distribution)},
                   {"J", r.couplings},
                   {"K", r.three_local}};
  if (r.three_local_distribution)
    j["three_local_distribution"] = to_json(*r.three_local_distribution);
  return j;
}

DisorderRealization realization_from_json(const nlohmann::json& j) {
  DisorderRealization r;
  r.sites = j.at("N").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.distribution = distribution_from_json(j.at("distribution"));
  r.couplings = j.at("J").get<std::vector<double>>();
  if (j.contains("K")) r.three_local = j.at("K").get<std::vector<double>>();
  if (j.contains("three_local_distribution"))
    r.three_local_distribution =
        distribution_from_json(j.at("three_local_distribution"));
  if (r.sites < 2 || r.couplings.size() != static_cast<std::size_t>(r.sites - 1))
    throw DomainError("realization: J must have N-1 entries");
  if (!r.three_local.empty() &&
      r.three_local.size() != static_cast<std::size_t>(r.sites - 2))
    throw DomainError("realization: K must have N-2 entries");
  return r;
}

nlohmann::json to_json(const ClusterPartition& p) {
  return {{"lengths", p.lengths}, {"velocities", p.velocities}, {"cuts", p.cuts}};
}

ClusterPartition partition_from_json(const nlohmann::json& j) {
  ClusterPartition p;
  p.lengths = j.at("lengths").get<std::vector<int>>();
  p.velocities = j.at("velocities").get<std::vector<double>>();
  if (j.contains("cuts")) {
    p.cuts = j.at("cuts").get<std::vector<int>>();
  } else {
    int edge = 0;
    for (std::size_t k = 0; k + 1 < p.lengths.size(); ++k)
      p.cuts.push_back(edge += p.lengths[k]);
  }
  if (p.lengths.size() != p.velocities.size() || p.lengths.empty())
    throw DomainError("partition: lengths and velocities must match");
  return p;
}

}  // namespace cfronts
