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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <tuple>
#include <vector>

#include <doctest.h>

#include "critical_fronts/errors.hpp"
#include "critical_fronts/quadratic.hpp"
#include "critical_fronts/sdrg.hpp"

using namespace cfronts;

namespace {

using Bond = std::tuple<int, int, double>;

DisorderRealization chain_of(std::vector<double> j) {
  DisorderRealization r;
  r.sites = static_cast<int>(j.size()) + 1;
  r.couplings = std::move(j);
  return r;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<double>(k);
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d2 += (ra[i] - rb[i]) * (ra[i] - rb[i]);
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

}  // namespace

TEST_SUITE("sdrg") {
  TEST_CASE("site decimation links the neighbours") {
    const std::vector<double> g{0.1, 1.0, 0.1};
    SdrgSystem s = SdrgSystem::chain(g, std::vector<double>{0.5, 0.2});
    const std::size_t bonds = s.bond_count();
    const DecimationEvent e = decimate_site(s, 1);
    CHECK(e.kind == DecimationKind::kSite);
    CHECK(e.scale == 1.0);
    REQUIRE(s.coupling(0, 2).has_value());
    CHECK(s.coupling(0, 2)->value == doctest::Approx(0.1));
    CHECK(s.bond_count() == bonds - 1);
    CHECK(s.size() == 2);
  }

  TEST_CASE("site decimation keeps the stronger of two couplings") {
    const std::vector<double> g{0.1, 1.0, 0.1};
    const std::vector<Bond> bonds{{0, 1, 0.5}, {1, 2, 0.2}, {0, 2, 0.5}};
    SdrgSystem s = SdrgSystem::graph(g, bonds);
    decimate_site(s, 1);
    CHECK(s.coupling(0, 2)->value == 0.5);
  }

  TEST_CASE("bond decimation builds a macrospin") {
    const std::vector<double> g{0.5, 0.2};
    SdrgSystem s = SdrgSystem::chain(g, std::vector<double>{1.0});
    const DecimationEvent e = decimate_bond(s, 0, 1);
    CHECK(e.kind == DecimationKind::kBond);
    CHECK(s.size() == 1);
    CHECK(s.node(e.first).field.value == doctest::Approx(0.1));
    CHECK(s.node(e.first).leaves == std::vector<int>{0, 1});
  }

  TEST_CASE("classical pair merges with zero field") {
    const std::vector<double> g{0.0, 0.0};
    SdrgSystem s = SdrgSystem::chain(g, std::vector<double>{1.0});
    const DecimationEvent e = decimate_bond(s, 0, 1);
    CHECK(s.node(e.first).field.value == 0.0);
  }

  TEST_CASE("shared neighbour inherits the larger coupling") {
    const std::vector<double> g{0.1, 0.1, 0.05};
    const std::vector<Bond> bonds{{0, 1, 1.0}, {0, 2, 0.3}, {1, 2, 0.4}};
    SdrgSystem s = SdrgSystem::graph(g, bonds);
    const DecimationEvent e = decimate_bond(s, 0, 1);
    CHECK(s.coupling(e.first, 2)->value == 0.4);
    CHECK(s.bond_count() == 1);
  }

  TEST_CASE("decimations below the local maximum are refused") {
    const std::vector<double> g{0.1, 0.3, 0.1};
    SdrgSystem s = SdrgSystem::chain(g, std::vector<double>{0.5, 0.2});
    CHECK_THROWS_AS(decimate_site(s, 1), InvalidDecimation);
    CHECK_THROWS_AS(decimate_bond(s, 1, 2), InvalidDecimation);
    CHECK_THROWS_AS(decimate_bond(s, 0, 2), InvalidDecimation);
  }

  TEST_CASE("field dominated pair") {
    const std::vector<double> g{10.0, 10.0};
    const FlowResult f = run_flow(chain_of({0.1}), g, {});
    CHECK(f.residual.size() == 0);
    CHECK(f.tree.leaf_count() == 2);
    REQUIRE(f.tree.events.size() == 2);
    for (const auto& e : f.tree.events) {
      CHECK(e.kind == DecimationKind::kSite);
      CHECK(e.scale == 10.0);
    }
    CHECK(f.tree.roots.size() == 2);
  }

  TEST_CASE("bond dominated pair") {
    const std::vector<double> g{0.1, 0.1};
    const FlowResult f = run_flow(chain_of({10.0}), g, {});
    REQUIRE_FALSE(f.tree.events.empty());
    CHECK(f.tree.events.front().kind == DecimationKind::kBond);
    CHECK(f.tree.events.front().scale == 10.0);
  }

  TEST_CASE("flow invariants on random chains") {
    const auto d = CouplingDistribution::uniform(-1.0, 1.0);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const DisorderRealization r = sample_couplings(d, 80, seed);
      std::vector<double> g(80);
      for (int i = 0; i < 80; ++i) g[i] = 0.2 + 0.5 * std::abs(std::sin(1.7 * i + seed));
      SdrgSystem s = SdrgSystem::chain(g, r.couplings);
      double last = s.cutoff();
      int size = s.size();
      while (auto e = decimate_next(s)) {
        CHECK(e->scale <= last);
        CHECK(s.cutoff() == e->scale);
        CHECK(s.size() == size - 1);
        CHECK(s.is_path());
        last = e->scale;
        size = s.size();
      }
      const FlowResult f = run_flow(r, g, {});
      CHECK(f.tree.leaf_count() == 80);
      CHECK(f.tree.events.size() == 80);
      std::set<int> seen;
      for (const auto& node : f.tree.nodes)
        for (int c : node.children) {
          CHECK(seen.insert(c).second);
          CHECK(f.tree.nodes[static_cast<std::size_t>(c)].scale >= node.scale);
        }
    }
  }

  TEST_CASE("flow stops at the requested size or cutoff") {
    const DisorderRealization r = sample_couplings(CouplingDistribution::uniform(-1.0, 1.0), 40, 3);
    const std::vector<double> g(40, 0.37);
    CHECK(run_flow(r, g, FlowStop{std::nullopt, 8}).residual.size() == 8);
    const FlowResult f = run_flow(r, g, FlowStop{0.1, std::nullopt});
    CHECK(f.residual.max_scale() < 0.1);
  }

  TEST_CASE("zones of fully ordered and fully disordered flows") {
    const std::vector<double> ordered(6, 0.01), disordered(6, 5.0);
    const DisorderRealization r = chain_of({1.0, 0.9, 0.8, 0.7, 0.6});
    const auto zones = causal_zones(run_flow(r, ordered, {}).tree, 0.2);
    REQUIRE(zones.size() == 1);
    CHECK(zones.front() == Interval{1, 6});
    CHECK(causal_zones(run_flow(r, disordered, {}).tree, 0.2).empty());
  }

  TEST_CASE("homogeneous snapshots fragment into more zones than a single front") {
    const auto d = CouplingDistribution::uniform(-1.0, 1.0);
    int wins = 0;
    for (int i = 0; i < 100; ++i) {
      const DisorderRealization r = sample_couplings(d, 64, derive_seed(606, i));
      const std::vector<double> flat(64, 0.37);
      const auto homogeneous = causal_zones(run_flow(r, flat, {}).tree, 0.2);
      const FrontSnapshot snap = front_snapshot(64, 0.125, critical_field(r), 2.0);
      const auto front = causal_zones(run_flow(r, snap.fields, {}).tree, 0.2);
      if (homogeneous.size() >= 2 && front.size() == 1) ++wins;
    }
    CHECK(wins > 50);
  }

  TEST_CASE("unrenormalized residual reproduces the exact relevant gap") {
    const DisorderRealization r = sample_couplings(CouplingDistribution::uniform(-1.0, 1.0), 10, 4);
    const FrontSnapshot snap = front_snapshot(10, 0.25, critical_field(r), 2.0);
    const FlowResult f = run_flow(r, snap.fields, FlowStop{std::nullopt, 10}, snap.derivative);
    const auto approx = residual_gap(f.residual);
    const auto exact = relevant_gap_and_omega(build_quadratic(r, snap.fields),
                                              field_perturbation(snap.derivative));
    REQUIRE(approx);
    REQUIRE(exact);
    CHECK(approx->delta == doctest::Approx(exact->delta).epsilon(1e-9));
    CHECK(approx->omega == doctest::Approx(exact->omega).epsilon(1e-9));
  }

  TEST_CASE("compressing zero-field runs preserves the exact relevant gap") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const DisorderRealization r =
          sample_couplings(CouplingDistribution::uniform(-1.0, 1.0), 128, seed);
      const FrontSnapshot snap = front_snapshot(128, 0.125, critical_field(r), 40.0);
      const CompressedChain c = compress_classical_runs(r, snap.fields, snap.derivative);
      REQUIRE(c.realization.sites < 96);
      REQUIRE(c.first_site.size() == static_cast<std::size_t>(c.realization.sites));
      const auto full = relevant_gap_and_omega(build_quadratic(r, snap.fields),
                                               field_perturbation(snap.derivative));
      const auto small = relevant_gap_and_omega(build_quadratic(c.realization, c.fields),
                                                field_perturbation(c.derivative));
      REQUIRE(full);
      REQUIRE(small);
      CHECK(small->delta == doctest::Approx(full->delta).epsilon(1e-9));
      CHECK(small->omega == doctest::Approx(full->omega).epsilon(1e-9));
    }
  }

  TEST_CASE("renormalized gaps rank-correlate with exact gaps") {
    GapStatisticsOptions o;
    o.sites = 64;
    o.instances = 60;
    o.positions = 1;
    o.base_seed = 91;
    const auto approx = gap_statistics(o);
    o.method = GapMethod::kExact;
    const auto exact = gap_statistics(o);
    std::vector<double> a, b;
    for (const auto& s : approx)
      for (const auto& e : exact)
        if (s.seed == e.seed && s.front_pos == e.front_pos) {
          a.push_back(std::log(s.delta));
          b.push_back(std::log(e.delta));
        }
    REQUIRE(a.size() > 40);
    CHECK(spearman(a, b) >= 0.9);
  }

  TEST_CASE("front positions exclude the ends of the sweep") {
    GapStatisticsOptions o;
    o.sites = 32;
    o.instances = 2;
    o.positions = 3;
    o.alphas = {0.125, 0.25};
    for (const auto& s : gap_statistics(o)) {
      CHECK(s.front_pos > 0.0);
      CHECK(s.front_pos < 16.0);
      CHECK(s.delta > 0.0);
      CHECK(s.omega / s.delta >= 1e-3);
    }
    CHECK_THROWS_AS(front_snapshot(32, 0.125, 0.37, 16.0), DomainError);
  }

  TEST_CASE("tree json lists every node") {
    const DisorderRealization r = sample_couplings(CouplingDistribution::uniform(-1.0, 1.0), 12, 5);
    const std::vector<double> g(12, 0.4);
    const SdrgTree t = run_flow(r, g, {}).tree;
    const nlohmann::json j = t.to_json();
    CHECK(j.at("nodes").size() == t.nodes.size());
    CHECK(j.at("roots").size() == t.roots.size());
  }
}
