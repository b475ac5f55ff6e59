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

// Strong-disorder renormalization of the random transverse-field Ising chain
//
//   H = -sum_i g_i X_i - sum_<ij> J_ij Z_i Z_j
//
// on a general graph. The largest scale Omega = max(|g_i|, |J_ij|) is removed
// one step at a time:
//
//   site i   (Omega = |g_i|):    J_jk <- max(|J_jk|, |J_ij J_ik / g_i|)
//   bond ij  (Omega = |J_ij|):   i, j -> macrospin with g = g_i g_j / J_ij,
//                                shared neighbours keep the larger coupling
//
// All scales are kept as magnitudes; on a tree graph the signs can be gauged
// away. Every scale carries its derivative with respect to one external
// parameter (the front position), propagated through the same rules.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "critical_fronts/instance.hpp"
#include "critical_fronts/quadratic.hpp"
#include "critical_fronts/schedules.hpp"

namespace cfronts {

// Value with a first-order derivative.
struct Dual {
  double value = 0.0;
  double deriv = 0.0;
};

enum class DecimationKind { kSite, kBond };

struct DecimationEvent {
  DecimationKind kind = DecimationKind::kSite;
  double scale = 0.0;
  int first = 0;   // site id, or the surviving id of a bond
  int second = -1; // absorbed id of a bond
};

class SdrgSystem;
// Both throw InvalidDecimation when the chosen scale is not the local maximum.
DecimationEvent decimate_site(SdrgSystem& system, int site);
DecimationEvent decimate_bond(SdrgSystem& system, int i, int j);

class SdrgSystem {
 public:
  struct Node {
    Dual field;
    std::vector<int> leaves;  // physical sites (0-based), ascending
  };

  // Chain with fields g (and optional dg/dp) and couplings J.
  static SdrgSystem chain(std::span<const double> fields, std::span<const double> couplings,
                          std::span<const double> field_derivative = {});
  // General graph; bonds are (i, j, J_ij) with 0-based ids.
  static SdrgSystem graph(std::span<const double> fields,
                          std::span<const std::tuple<int, int, double>> bonds);

  bool alive(int id) const { return nodes_.count(id) != 0; }
  const Node& node(int id) const { return nodes_.at(id); }
  const std::map<int, Node>& nodes() const { return nodes_; }
  // Neighbours of `id` with coupling magnitudes.
  const std::map<int, Dual>& neighbours(int id) const { return adjacency_.at(id); }
  std::optional<Dual> coupling(int i, int j) const;
  int size() const { return static_cast<int>(nodes_.size()); }
  std::size_t bond_count() const;
  double cutoff() const { return cutoff_; }
  // Largest remaining scale (0 for an empty system).
  double max_scale() const;
  // True when the bonds form a simple path.
  bool is_path() const;
  // Node ids along the path, left to right. Requires is_path().
  std::vector<int> path_order() const;

 private:
  friend DecimationEvent decimate_site(SdrgSystem&, int);
  friend DecimationEvent decimate_bond(SdrgSystem&, int, int);
  std::map<int, Node> nodes_;
  std::map<int, std::map<int, Dual>> adjacency_;
  double cutoff_ = 0.0;
};

struct SdrgTree {
  enum class Kind { kLeaf, kSite, kBond };
  struct TreeNode {
    int id = 0;
    Kind kind = Kind::kLeaf;
    double scale = 0.0;  // leaves: +inf
    std::vector<int> children;
    int leaf_index = -1;  // 1-based physical site for leaves
  };
  std::vector<TreeNode> nodes;  // leaves 0..N-1 first
  std::vector<int> roots;
  std::vector<DecimationEvent> events;

  int leaf_count() const;
  nlohmann::json to_json() const;
};

struct FlowStop {
  std::optional<double> cutoff;        // stop once max scale < cutoff
  std::optional<int> residual_size;    // stop at this many active nodes
};

struct FlowResult {
  SdrgTree tree;
  SdrgSystem residual;
};

FlowResult run_flow(const DisorderRealization& realization, std::span<const double> fields,
                    const FlowStop& stop, std::span<const double> field_derivative = {});

// Applies one SDRG step to the global maximum (ties: lowest id, site first).
// Returns nullopt on an empty system. Used by run_flow.
std::optional<DecimationEvent> decimate_next(SdrgSystem& system);

struct Interval {
  int first = 0;  // 1-based, inclusive
  int last = 0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

// Clusters of at least two physical spins merged by bond decimations at
// scales >= cutoff and not removed by a site decimation at scale >= cutoff.
std::vector<Interval> causal_zones(const SdrgTree& tree, double cutoff);

// Exact relevant gap of a small residual system: lower-energy parity sector,
// lowest excitation in that sector with Omega / Delta >= threshold.
// Dense for up to 12 nodes; larger paths go through the quadratic solver.
std::optional<RelevantGap> residual_gap(const SdrgSystem& residual, double threshold = 1e-3);

// A run of zero-field sites is classical: its ZZ bonds commute with H and a
// field perturbation cannot excite them. Each run of two or more such sites
// is replaced by one zero-field spin, which leaves the relevant gap unchanged.
struct CompressedChain {
  DisorderRealization realization;
  std::vector<double> fields;
  std::vector<double> derivative;
  std::vector<int> first_site;  // 0-based original site of each compressed site
};
CompressedChain compress_classical_runs(const DisorderRealization& realization,
                                        std::span<const double> fields,
                                        std::span<const double> field_derivative);

enum class GapMethod { kSdrg, kExact };

struct GapStatisticsOptions {
  int sites = 256;
  CouplingDistribution distribution = CouplingDistribution::uniform(-1.0, 1.0);
  std::vector<double> alphas{0.125};
  int instances = 10;
  int first_instance = 0;  // instance indices first_instance .. + instances - 1
  std::uint64_t base_seed = 1;
  int positions = 8;  // equidistant front positions, ends excluded
  double g_initial = 2.0;
  double g_final = 0.0;
  GapMethod method = GapMethod::kSdrg;
  int residual_size = 8;
  double threshold = 1e-3;
};

// Snapshots of a single cluster whose two fronts move outwards from the
// centre. front_pos is the distance of each front from the centre, in sites.
std::vector<GapSample> gap_statistics(const GapStatisticsOptions& options);

// Field profile and front-position derivative for one snapshot of the above.
struct FrontSnapshot {
  ScheduleSpec spec;
  double time = 0.0;
  std::vector<double> fields;
  std::vector<double> derivative;
};
FrontSnapshot front_snapshot(int sites, double alpha, double critical_field, double front_pos,
                             double g_initial = 2.0, double g_final = 0.0);

}  // namespace cfronts
