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

#include "critical_fronts/sdrg.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include <Eigen/Dense>

#include "critical_fronts/errors.hpp"

namespace cfronts {
namespace {

Dual magnitude(double x, double dx) { return x < 0.0 ? Dual{-x, -dx} : Dual{x, dx}; }

// a * b / g with its derivative; 0 when g == 0 (then a == b == 0 as well).
Dual product_over(const Dual& a, const Dual& b, const Dual& g) {
  if (g.value == 0.0) return {0.0, 0.0};
  const double v = a.value * b.value / g.value;
  const double d = (a.deriv * b.value + a.value * b.deriv - v * g.deriv) / g.value;
  return {v, d};
}

struct Candidate {
  double scale;
  int first;
  int kind;  // 0 site, 1 bond
  int second;
  std::uint64_t stamp_first = 0, stamp_second = 0;
};

bool precedes(const Candidate& a, const Candidate& b) {
  if (a.scale != b.scale) return a.scale > b.scale;
  if (a.first != b.first) return a.first < b.first;
  if (a.kind != b.kind) return a.kind < b.kind;
  return a.second < b.second;
}

DecimationEvent apply(SdrgSystem& s, const Candidate& c) {
  return c.kind == 0 ? decimate_site(s, c.first) : decimate_bond(s, c.first, c.second);
}

}  // namespace

SdrgSystem SdrgSystem::chain(std::span<const double> fields, std::span<const double> couplings,
                             std::span<const double> field_derivative) {
  const int n = static_cast<int>(fields.size());
  if (n > 0 && couplings.size() != static_cast<std::size_t>(n - 1))
    throw DomainError("SdrgSystem::chain: need N-1 couplings");
  if (!field_derivative.empty() && field_derivative.size() != fields.size())
    throw DomainError("SdrgSystem::chain: derivative has the wrong size");
  SdrgSystem s;
  for (int i = 0; i < n; ++i) {
    const double d = field_derivative.empty() ? 0.0 : field_derivative[static_cast<std::size_t>(i)];
    s.nodes_[i] = Node{magnitude(fields[static_cast<std::size_t>(i)], d), {i}};
    s.adjacency_[i];
  }
  for (int i = 0; i + 1 < n; ++i) {
    const double j = couplings[static_cast<std::size_t>(i)];
    if (j == 0.0) continue;
    s.adjacency_[i][i + 1] = magnitude(j, 0.0);
    s.adjacency_[i + 1][i] = magnitude(j, 0.0);
  }
  s.cutoff_ = s.max_scale();
  return s;
}

SdrgSystem SdrgSystem::graph(std::span<const double> fields,
                             std::span<const std::tuple<int, int, double>> bonds) {
  const int n = static_cast<int>(fields.size());
  SdrgSystem s;
  for (int i = 0; i < n; ++i) {
    s.nodes_[i] = Node{magnitude(fields[static_cast<std::size_t>(i)], 0.0), {i}};
    s.adjacency_[i];
  }
  for (const auto& [i, j, value] : bonds) {
    if (i == j || i < 0 || j < 0 || i >= n || j >= n)
      throw DomainError("SdrgSystem::graph: bond endpoints out of range");
    if (value == 0.0) continue;
    s.adjacency_[i][j] = magnitude(value, 0.0);
    s.adjacency_[j][i] = magnitude(value, 0.0);
  }
  s.cutoff_ = s.max_scale();
  return s;
}

std::optional<Dual> SdrgSystem::coupling(int i, int j) const {
  const auto it = adjacency_.find(i);
  if (it == adjacency_.end()) return std::nullopt;
  const auto jt = it->second.find(j);
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

std::size_t SdrgSystem::bond_count() const {
  std::size_t twice = 0;
  for (const auto& [id, nb] : adjacency_) twice += nb.size();
  return twice / 2;
}

double SdrgSystem::max_scale() const {
  double m = 0.0;
  for (const auto& [id, node] : nodes_) m = std::max(m, node.field.value);
  for (const auto& [id, nb] : adjacency_)
    for (const auto& [other, j] : nb) m = std::max(m, j.value);
  return m;
}

bool SdrgSystem::is_path() const {
  if (nodes_.size() <= 1) return true;
  if (bond_count() + 1 != nodes_.size()) return false;
  for (const auto& [id, nb] : adjacency_)
    if (nb.size() > 2) return false;
  return path_order().size() == nodes_.size();
}

std::vector<int> SdrgSystem::path_order() const {
  std::vector<int> order;
  if (nodes_.empty()) return order;
  // Leftmost endpoint: degree <= 1 with the smallest leaf.
  int start = -1;
  for (const auto& [id, nb] : adjacency_)
    if (nb.size() <= 1 && (start < 0 || nodes_.at(id).leaves.front() <
                                            nodes_.at(start).leaves.front()))
      start = id;
  if (start < 0) return order;
  int prev = -1, cur = start;
  while (cur >= 0) {
    order.push_back(cur);
    int next = -1;
    for (const auto& [other, j] : adjacency_.at(cur))
      if (other != prev) next = other;
    prev = cur;
    cur = next;
    if (order.size() > nodes_.size()) break;
  }
  return order;
}

DecimationEvent decimate_site(SdrgSystem& s, int site) {
  if (!s.alive(site)) throw InvalidDecimation("decimate_site: node is not active");
  const Dual g = s.nodes_.at(site).field;
  const auto nb = s.adjacency_.at(site);
  for (const auto& [other, j] : nb)
    if (j.value > g.value)
      throw InvalidDecimation("decimate_site: an adjacent coupling exceeds the field");
  for (auto it = nb.begin(); it != nb.end(); ++it) {
    for (auto jt = std::next(it); jt != nb.end(); ++jt) {
      const Dual fresh = product_over(it->second, jt->second, g);
      if (fresh.value == 0.0) continue;
      auto& link = s.adjacency_[it->first];
      const auto existing = link.find(jt->first);
      if (existing != link.end() && existing->second.value >= fresh.value) continue;
      link[jt->first] = fresh;
      s.adjacency_[jt->first][it->first] = fresh;
    }
  }
  for (const auto& [other, j] : nb) s.adjacency_[other].erase(site);
  s.adjacency_.erase(site);
  s.nodes_.erase(site);
  s.cutoff_ = g.value;
  return {DecimationKind::kSite, g.value, site, -1};
}

DecimationEvent decimate_bond(SdrgSystem& s, int i, int j) {
  const auto bond = s.coupling(i, j);
  if (!bond) throw InvalidDecimation("decimate_bond: no such bond");
  const Dual jij = *bond;
  const Dual gi = s.nodes_.at(i).field;
  const Dual gj = s.nodes_.at(j).field;
  if (gi.value > jij.value || gj.value > jij.value)
    throw InvalidDecimation("decimate_bond: a field exceeds the coupling");
  for (int end : {i, j})
    for (const auto& [other, c] : s.adjacency_.at(end))
      if (c.value > jij.value)
        throw InvalidDecimation("decimate_bond: an adjacent coupling exceeds the bond");

  const int keep = std::min(i, j);
  const int gone = std::max(i, j);
  SdrgSystem::Node merged;
  merged.field = product_over(gi, gj, jij);
  const auto& li = s.nodes_.at(i).leaves;
  const auto& lj = s.nodes_.at(j).leaves;
  std::merge(li.begin(), li.end(), lj.begin(), lj.end(), std::back_inserter(merged.leaves));

  std::map<int, Dual> links;
  for (int end : {i, j})
    for (const auto& [other, c] : s.adjacency_.at(end)) {
      if (other == i || other == j) continue;
      const auto it = links.find(other);
      if (it == links.end() || c.value > it->second.value) links[other] = c;
    }
  for (int end : {i, j}) {
    for (const auto& [other, c] : s.adjacency_.at(end)) s.adjacency_[other].erase(end);
    s.adjacency_.erase(end);
  }
  s.nodes_.erase(gone);
  s.nodes_[keep] = std::move(merged);
  s.adjacency_[keep] = links;
  for (const auto& [other, c] : links) s.adjacency_[other][keep] = c;
  s.cutoff_ = jij.value;
  return {DecimationKind::kBond, jij.value, keep, gone};
}

std::optional<DecimationEvent> decimate_next(SdrgSystem& s) {
  if (s.size() == 0) return std::nullopt;
  std::optional<Candidate> best;
  auto offer = [&best](const Candidate& c) {
    if (!best || precedes(c, *best)) best = c;
  };
  for (const auto& [id, node] : s.nodes()) {
    offer({node.field.value, id, 0, -1});
    for (const auto& [other, c] : s.neighbours(id))
      if (id < other) offer({c.value, id, 1, other});
  }
  return apply(s, *best);
}

FlowResult run_flow(const DisorderRealization& realization, std::span<const double> fields,
                    const FlowStop& stop, std::span<const double> field_derivative) {
  const int n = realization.sites;
  if (static_cast<int>(fields.size()) != n)
    throw DomainError("run_flow: need one field per site");
  if (realization.has_three_local())
    throw DomainError("run_flow: only the Ising chain is supported");
  FlowResult out;
  out.residual = SdrgSystem::chain(fields, realization.couplings, field_derivative);
  SdrgSystem& s = out.residual;
  SdrgTree& tree = out.tree;
  std::vector<int> tree_of(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    tree.nodes.push_back({i, SdrgTree::Kind::kLeaf, std::numeric_limits<double>::infinity(), {}, i + 1});
    tree_of[static_cast<std::size_t>(i)] = i;
  }

  std::vector<std::uint64_t> version(static_cast<std::size_t>(n), 0);
  auto later = [](const Candidate& a, const Candidate& b) { return precedes(b, a); };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(later)> queue(later);
  auto push_node = [&](int id) {
    const auto vi = version[static_cast<std::size_t>(id)];
    queue.push({s.node(id).field.value, id, 0, -1, vi, 0});
    for (const auto& [other, c] : s.neighbours(id)) {
      const int lo = std::min(id, other), hi = std::max(id, other);
      queue.push({c.value, lo, 1, hi, version[static_cast<std::size_t>(lo)],
                  version[static_cast<std::size_t>(hi)]});
    }
  };
  auto valid = [&](const Candidate& c) {
    if (!s.alive(c.first) || version[static_cast<std::size_t>(c.first)] != c.stamp_first)
      return false;
    if (c.kind == 0) return true;
    return s.alive(c.second) && version[static_cast<std::size_t>(c.second)] == c.stamp_second;
  };
  for (int i = 0; i < n; ++i) push_node(i);

  while (s.size() > 0) {
    if (stop.residual_size && s.size() <= *stop.residual_size) break;
    while (!queue.empty() && !valid(queue.top())) queue.pop();
    if (queue.empty()) break;
    const Candidate c = queue.top();
    if (stop.cutoff && c.scale < *stop.cutoff) break;
    queue.pop();
    std::vector<int> touched;
    if (c.kind == 0)
      for (const auto& [other, j] : s.neighbours(c.first)) touched.push_back(other);
    const DecimationEvent ev = apply(s, c);
    tree.events.push_back(ev);
    const int node_id = static_cast<int>(tree.nodes.size());
    if (ev.kind == DecimationKind::kSite) {
      tree.nodes.push_back({node_id, SdrgTree::Kind::kSite, ev.scale,
                            {tree_of[static_cast<std::size_t>(ev.first)]}, -1});
      tree.roots.push_back(node_id);
    } else {
      tree.nodes.push_back({node_id, SdrgTree::Kind::kBond, ev.scale,
                            {tree_of[static_cast<std::size_t>(ev.first)],
                             tree_of[static_cast<std::size_t>(ev.second)]},
                            -1});
      tree_of[static_cast<std::size_t>(ev.first)] = node_id;
      touched.push_back(ev.first);
      for (const auto& [other, j] : s.neighbours(ev.first)) touched.push_back(other);
    }
    for (int id : touched) ++version[static_cast<std::size_t>(id)];
    for (int id : touched) push_node(id);
  }
  for (const auto& [id, node] : s.nodes()) tree.roots.push_back(tree_of[static_cast<std::size_t>(id)]);
  return out;
}

int SdrgTree::leaf_count() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(),
                                        [](const TreeNode& t) { return t.kind == Kind::kLeaf; }));
}

nlohmann::json SdrgTree::to_json() const {
  nlohmann::json out{{"nodes", nlohmann::json::array()}, {"roots", roots}};
  for (const TreeNode& t : nodes) {
    nlohmann::json j{{"id", t.id}, {"children", t.children}};
    switch (t.kind) {
      case Kind::kLeaf:
        j["kind"] = "leaf";
        j["scale"] = nullptr;
        j["leaf_index"] = t.leaf_index;
        break;
      case Kind::kSite:
        j["kind"] = "site";
        j["scale"] = t.scale;
        break;
      case Kind::kBond:
        j["kind"] = "bond";
        j["scale"] = t.scale;
        break;
    }
    out["nodes"].push_back(std::move(j));
  }
  return out;
}

std::vector<Interval> causal_zones(const SdrgTree& tree, double cutoff) {
  const int n = tree.leaf_count();
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](int x) {
    while (parent[static_cast<std::size_t>(x)] != x)
      x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    return x;
  };
  // Any leaf under a node identifies the node's macrospin.
  std::vector<int> some_leaf(tree.nodes.size(), -1);
  std::vector<bool> hole(static_cast<std::size_t>(n), false);
  for (const auto& t : tree.nodes) {
    if (t.kind == SdrgTree::Kind::kLeaf) {
      some_leaf[static_cast<std::size_t>(t.id)] = t.id;
      continue;
    }
    some_leaf[static_cast<std::size_t>(t.id)] =
        some_leaf[static_cast<std::size_t>(t.children.front())];
    if (t.scale < cutoff) continue;
    if (t.kind == SdrgTree::Kind::kBond) {
      const int a = find(some_leaf[static_cast<std::size_t>(t.children[0])]);
      const int b = find(some_leaf[static_cast<std::size_t>(t.children[1])]);
      parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    } else {
      hole[static_cast<std::size_t>(find(some_leaf[static_cast<std::size_t>(t.id)]))] = true;
    }
  }
  std::map<int, Interval> zones;
  std::map<int, int> counts;
  for (int leaf = 0; leaf < n; ++leaf) {
    const int root = find(leaf);
    auto [it, fresh] = zones.try_emplace(root, Interval{leaf + 1, leaf + 1});
    if (!fresh) {
      it->second.first = std::min(it->second.first, leaf + 1);
      it->second.last = std::max(it->second.last, leaf + 1);
    }
    ++counts[root];
  }
  std::vector<Interval> out;
  for (const auto& [root, zone] : zones)
    if (counts[root] >= 2 && !hole[static_cast<std::size_t>(root)]) out.push_back(zone);
  std::sort(out.begin(), out.end(),
            [](const Interval& a, const Interval& b) { return a.first < b.first; });
  return out;
}

namespace {

std::optional<RelevantGap> residual_gap_dense(const SdrgSystem& s, double threshold) {
  std::vector<int> ids;
  for (const auto& [id, node] : s.nodes()) ids.push_back(id);
  const int m = static_cast<int>(ids.size());
  std::map<int, int> local;
  for (int k = 0; k < m; ++k) local[ids[static_cast<std::size_t>(k)]] = k;
  struct Edge {
    int i, j;
    Dual c;
  };
  std::vector<Edge> edges;
  for (int id : ids)
    for (const auto& [other, c] : s.neighbours(id))
      if (id < other) edges.push_back({local[id], local[other], c});

  // Scale to O(1) so tiny residual energies keep full relative precision.
  const double unit = std::max(s.max_scale(), std::numeric_limits<double>::min());

  // X basis: bit k set means X_k = -1; Z_i Z_j flips bits i and j.
  double best_e0 = std::numeric_limits<double>::infinity();
  std::optional<RelevantGap> chosen;
  for (int parity = 0; parity < 2; ++parity) {
    std::vector<std::uint32_t> basis;
    for (std::uint32_t x = 0; x < (1U << m); ++x)
      if (std::popcount(x) % 2 == parity) basis.push_back(x);
    const Eigen::Index dim = static_cast<Eigen::Index>(basis.size());
    std::vector<int> index(1U << m, -1);
    for (Eigen::Index k = 0; k < dim; ++k) index[basis[static_cast<std::size_t>(k)]] = static_cast<int>(k);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim), dh = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      const std::uint32_t x = basis[static_cast<std::size_t>(k)];
      for (int q = 0; q < m; ++q) {
        const double sx = (x >> q) & 1U ? -1.0 : 1.0;
        const Dual& g = s.node(ids[static_cast<std::size_t>(q)]).field;
        h(k, k) -= g.value / unit * sx;
        dh(k, k) -= g.deriv / unit * sx;
      }
      for (const Edge& e : edges) {
        const int y = index[x ^ (1U << e.i) ^ (1U << e.j)];
        h(y, k) -= e.c.value / unit;
        dh(y, k) -= e.c.deriv / unit;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const double e0 = es.eigenvalues()(0);
    std::optional<RelevantGap> found;
    const Eigen::VectorXd coupling = es.eigenvectors().transpose() * (dh * es.eigenvectors().col(0));
    for (Eigen::Index k = 1; k < dim; ++k) {
      const double delta = es.eigenvalues()(k) - e0;
      if (!(delta > 1e-13)) continue;
      const double omega = std::abs(coupling(k));
      if (omega / delta >= threshold) {
        found = RelevantGap{delta * unit, omega * unit, 0, static_cast<int>(k)};
        break;
      }
    }
    if (e0 < best_e0) {
      best_e0 = e0;
      chosen = found;
    }
  }
  return chosen;
}

std::optional<RelevantGap> residual_gap_quadratic(const SdrgSystem& s, double threshold) {
  const std::vector<int> order = s.path_order();
  const int m = static_cast<int>(order.size());
  DisorderRealization values, derivs;
  values.sites = derivs.sites = m;
  std::vector<double> g(static_cast<std::size_t>(m)), dg(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const Dual& f = s.node(order[static_cast<std::size_t>(k)]).field;
    g[static_cast<std::size_t>(k)] = f.value;
    dg[static_cast<std::size_t>(k)] = f.deriv;
    if (k + 1 < m) {
      const Dual c = *s.coupling(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k + 1)]);
      values.couplings.push_back(c.value);
      derivs.couplings.push_back(c.deriv);
    }
  }
  // The form is linear in (g, J), so the derivative form is the form of (dg, dJ).
  return relevant_gap_and_omega(build_quadratic(values, g), build_quadratic(derivs, dg), threshold);
}

}  // namespace

std::optional<RelevantGap> residual_gap(const SdrgSystem& residual, double threshold) {
  if (residual.size() <= 1) return std::nullopt;
  if (residual.size() <= 12) return residual_gap_dense(residual, threshold);
  if (residual.is_path()) return residual_gap_quadratic(residual, threshold);
  throw DomainError("residual_gap: non-path residual with more than 12 nodes");
}

FrontSnapshot front_snapshot(int sites, double alpha, double critical_field, double front_pos,
                             double g_initial, double g_final) {
  if (!(alpha > 0.0)) throw DomainError("front_snapshot: alpha must be positive");
  if (!(front_pos > 0.0 && front_pos < sites / 2.0))
    throw DomainError("front_snapshot: front position must lie strictly inside the cluster");
  FrontSnapshot snap;
  snap.spec.sites = sites;
  snap.spec.g_initial = g_initial;
  snap.spec.g_final = g_final;
  snap.spec.total_time = 1.0;
  MultiFrontPiecewise p;
  p.alpha = alpha;
  p.partition.lengths = {sites};
  const double v = (std::abs(g_final - g_initial) + alpha * sites / 2.0) / snap.spec.total_time;
  p.partition.velocities = {v};
  snap.spec.params = p;
  // g_i + alpha d_f - v t = g_c at the front.
  snap.time = (g_initial - critical_field + alpha * front_pos) / v;
  if (!(snap.time > 0.0 && snap.time < snap.spec.total_time))
    throw DomainError("front_snapshot: front position not reached during the sweep");
  snap.fields = fields_at(snap.spec, snap.time);
  snap.derivative = front_derivative(snap.spec, snap.time);
  return snap;
}

CompressedChain compress_classical_runs(const DisorderRealization& realization,
                                        std::span<const double> fields,
                                        std::span<const double> field_derivative) {
  const int n = realization.sites;
  if (fields.size() != static_cast<std::size_t>(n) ||
      (!field_derivative.empty() && field_derivative.size() != fields.size()))
    throw DomainError("compress_classical_runs: fields and derivative must have N entries");
  CompressedChain out;
  out.realization.sites = 0;
  out.realization.seed = realization.seed;
  out.realization.distribution = realization.distribution;
  auto field = [&](int i) { return fields[static_cast<std::size_t>(i)]; };
  auto deriv = [&](int i) {
    return field_derivative.empty() ? 0.0 : field_derivative[static_cast<std::size_t>(i)];
  };
  for (int i = 0; i < n; ++i) {
    const bool merge = i > 0 && field(i) == 0.0 && deriv(i) == 0.0 && field(i - 1) == 0.0 &&
                       deriv(i - 1) == 0.0;
    if (merge) continue;
    if (i > 0) out.realization.couplings.push_back(realization.couplings[static_cast<std::size_t>(i - 1)]);
    out.fields.push_back(field(i));
    out.derivative.push_back(deriv(i));
    out.first_site.push_back(i);
  }
  out.realization.sites = static_cast<int>(out.fields.size());
  return out;
}

std::vector<GapSample> gap_statistics(const GapStatisticsOptions& o) {
  if (o.positions < 1) throw DomainError("gap_statistics: need at least one position");
  std::vector<GapSample> out;
  for (int inst = o.first_instance; inst < o.first_instance + o.instances; ++inst) {
    const std::uint64_t seed = derive_seed(o.base_seed, static_cast<std::uint64_t>(inst));
    const DisorderRealization r = sample_couplings(o.distribution, o.sites, seed);
    const double gc = critical_field(r);
    for (double alpha : o.alphas) {
      for (int k = 1; k <= o.positions; ++k) {
        const double front = (static_cast<double>(k) / (o.positions + 1)) * (o.sites / 2.0);
        const FrontSnapshot snap = front_snapshot(o.sites, alpha, gc, front, o.g_initial, o.g_final);
        std::optional<RelevantGap> gap;
        if (o.method == GapMethod::kSdrg) {
          const CompressedChain cc = compress_classical_runs(r, snap.fields, snap.derivative);
          const FlowResult flow = run_flow(cc.realization, cc.fields,
                                           FlowStop{std::nullopt, o.residual_size}, cc.derivative);
          gap = residual_gap(flow.residual, o.threshold);
        } else {
          gap = relevant_gap_and_omega(build_quadratic(r, snap.fields),
                                       field_perturbation(snap.derivative), o.threshold);
        }
        if (!gap) continue;
        out.push_back({seed, alpha, front, gap->delta, gap->omega, snap.time});
      }
    }
  }
  return out;
}

}  // namespace cfronts
