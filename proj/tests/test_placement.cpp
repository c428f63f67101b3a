#include "cnfdiff/placement.hpp"

#include "cnfdiff/generate.hpp"
#include "cnfdiff/rng.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace cnfdiff;
using namespace cnfdiff::test;

TEST_CASE("flatten_index maps single chain in order") {
  Instance inst = single_cloud_instance();
  inst.sfcs[0].node_types = {0, 0, 0};
  inst.sfcs[0].dag_edges = {{0, 1, 1.0}, {1, 2, 1.0}};
  const FlatIndex flat = flatten_index(inst);
  REQUIRE(flat.rows() == 3);
  for (int j = 0; j < 3; ++j) {
    CHECK(flat.to_pos[j] == std::pair<int, int>{0, j});
    CHECK(flat.row(0, j) == j);
  }
}

TEST_CASE("flatten_index uses cumulative offsets across SFCs") {
  Instance inst = two_cloud_chain_instance();
  inst.sfcs.push_back(inst.sfcs[0]);
  inst.sfcs[1].sfc_id = 1;
  const FlatIndex flat = flatten_index(inst);
  REQUIRE(flat.rows() == 4);
  CHECK(flat.to_pos[3] == std::pair<int, int>{1, 1});
  CHECK(flat.row(1, 1) == 3);
}

TEST_CASE("flatten_index of empty SFC set is empty") {
  Instance inst = single_cloud_instance();
  inst.sfcs.clear();
  CHECK(flatten_index(inst).rows() == 0);
}

TEST_CASE("total_cost trivia") {
  Instance empty = single_cloud_instance();
  empty.sfcs.clear();
  CHECK(total_cost(empty, Placement(0, 1)) == 0.0);

  const Instance inst = single_cloud_instance();
  CHECK(total_cost(inst, place_all(inst, {0})) == 5.0);
}

TEST_CASE("total_cost throws on incomplete rows") {
  const Instance inst = two_cloud_chain_instance();
  Placement p(2, 2);
  p.assign(0, 0) = 1;  // row 1 left empty
  CHECK_THROWS_AS(total_cost(inst, p), IncompletePlacement);
  p.assign(1, 0) = 1;
  p.assign(1, 1) = 1;  // row 1 doubly assigned
  CHECK_THROWS_AS(total_cost(inst, p), IncompletePlacement);
}

TEST_CASE("total_cost matches the independent re-summation on random data") {
  Rng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    Instance inst = diamond_instance();
    for (double& v : inst.placement_cost.flat()) v = rng.uniform(0.0, 50.0);
    std::vector<int> clouds(4);
    for (int& c : clouds) c = static_cast<int>(rng.uniform_int(0, 1));
    const Placement p = place_all(inst, clouds);
    CHECK(total_cost(inst, p) == doctest::Approx(oracle_total_cost(inst, p)).epsilon(1e-12));
  }
}

TEST_CASE("sfc_delay of a single CNF is its processing delay") {
  const Instance inst = single_cloud_instance();
  CHECK(sfc_delay(inst, place_all(inst, {0}), 0) == 2.0);
}

TEST_CASE("sfc_delay of a two-node chain follows the hop formula") {
  const Instance inst = two_cloud_chain_instance();
  // tau_A + kappa/c + tau_B = 1 + 100/50 + 2 = 5 across clouds
  CHECK(sfc_delay(inst, place_all(inst, {0, 1}), 0) == doctest::Approx(5.0));
  // co-located: no transmission
  CHECK(sfc_delay(inst, place_all(inst, {0, 0}), 0) == doctest::Approx(3.0));
}

TEST_CASE("sfc_delay throws DisconnectedHop when the link is missing") {
  Instance inst = two_cloud_chain_instance();
  inst.network.bandwidth = Grid<double>(2, 2, 0.0);  // unlink (validation bypassed on purpose)
  CHECK_THROWS_AS(sfc_delay(inst, place_all(inst, {0, 1}), 0), DisconnectedHop);
}

TEST_CASE("sfc_delay on DAGs equals the exhaustive path enumeration") {
  Rng rng(4242);
  for (int trial = 0; trial < 50; ++trial) {
    Instance inst = diamond_instance();
    for (auto& t : inst.cnf_catalog) t.proc_delay = rng.uniform(0.1, 3.0);
    std::vector<int> clouds(4);
    for (int& c : clouds) c = static_cast<int>(rng.uniform_int(0, 1));
    const Placement p = place_all(inst, clouds);
    const auto expected = oracle_sfc_delay(inst, p, 0);
    REQUIRE(expected.has_value());
    CHECK(sfc_delay(inst, p, 0) == doctest::Approx(*expected).epsilon(1e-12));
  }
}

TEST_CASE("branch delay dominates every individual path") {
  const Instance diamond = diamond_instance();
  const Placement q = place_all(diamond, {0, 1, 0, 1});
  const double with_branch = sfc_delay(diamond, q, 0);
  // max over a superset of paths dominates each individual path
  for (const auto& path : enumerate_paths(diamond.sfcs[0])) {
    double d = 0.0;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      d += diamond.cnf_catalog[diamond.sfcs[0].node_types[path[k]]].proc_delay;
      const int a = q.cloud_of(path[k]), b = q.cloud_of(path[k + 1]);
      if (a != b) d += diamond.message_size / diamond.network.bandwidth(a, b);
    }
    d += diamond.cnf_catalog[diamond.sfcs[0].node_types[path.back()]].proc_delay;
    CHECK(with_branch >= d - 1e-12);
  }
}

TEST_CASE("resource_usage basics") {
  Instance inst = two_cloud_chain_instance();
  inst.cnf_catalog[0].cpu_demand = 2.0;
  inst.cnf_catalog[1].cpu_demand = 3.0;
  const auto usage = resource_usage(inst, place_all(inst, {0, 0}));
  CHECK(usage.cpu[0] == 5.0);
  CHECK(usage.cpu[1] == 0.0);
  CHECK(usage.bandwidth(0, 1) == 0.0);

  const auto crossing = resource_usage(inst, place_all(inst, {0, 1}));
  CHECK(crossing.bandwidth(0, 1) == 10.0);
  CHECK(crossing.bandwidth(1, 0) == 0.0);
}

TEST_CASE("resource_usage counts only crossing edges, per-edge recount") {
  // 4-CNF chain split 2/2: only the middle edge crosses.
  Instance inst = diamond_instance();
  inst.sfcs[0].dag_edges = {{0, 1, 3.0}, {1, 2, 4.0}, {2, 3, 5.0}};
  const Placement p = place_all(inst, {0, 0, 1, 1});
  const auto usage = resource_usage(inst, p);
  CHECK(usage.bandwidth(0, 1) == 4.0);
  CHECK(usage.bandwidth(1, 0) == 0.0);

  // independent recount edge by edge
  double recount = 0.0;
  for (const auto& e : inst.sfcs[0].dag_edges) {
    if (p.cloud_of(e.from) == 0 && p.cloud_of(e.to) == 1) recount += e.rate;
  }
  CHECK(usage.bandwidth(0, 1) == recount);
}

TEST_CASE("resource_usage is additive over disjoint SFC sets") {
  Instance both = two_cloud_chain_instance();
  both.sfcs.push_back(both.sfcs[0]);
  both.sfcs[1].sfc_id = 1;
  both.sfcs[1].dag_edges = {{0, 1, 4.0}};
  const Placement p = place_all(both, {0, 1, 1, 0});

  Instance first = both;
  first.sfcs.pop_back();
  Instance second = both;
  second.sfcs.erase(second.sfcs.begin());
  const auto u_both = resource_usage(both, p);
  const auto u1 = resource_usage(first, place_all(first, {0, 1}));
  const auto u2 = resource_usage(second, place_all(second, {1, 0}));
  for (int i = 0; i < 2; ++i) {
    CHECK(u_both.cpu[i] == doctest::Approx(u1.cpu[i] + u2.cpu[i]));
    CHECK(u_both.ram[i] == doctest::Approx(u1.ram[i] + u2.ram[i]));
    for (int k = 0; k < 2; ++k) {
      CHECK(u_both.bandwidth(i, k) == doctest::Approx(u1.bandwidth(i, k) + u2.bandwidth(i, k)));
    }
  }
}

TEST_CASE("check_feasibility: ample single-cloud placement is feasible") {
  const Instance inst = two_cloud_chain_instance();
  const auto report = check_feasibility(inst, place_all(inst, {0, 0}));
  CHECK(report.feasible);
  CHECK(report.violations.empty());
}

TEST_CASE("check_feasibility flags adjacency when c_ii' = 0") {
  Instance inst = diamond_instance();
  inst.network.num_clouds = 3;
  inst.network.cpu_capacity = {20.0, 20.0, 20.0};
  inst.network.ram_capacity = {20.0, 20.0, 20.0};
  // line topology 0-1-2: clouds 0 and 2 are not linked
  inst.network.bandwidth = Grid<double>::from_flat(
      3, 3, {0.0, 40.0, 0.0, 40.0, 0.0, 40.0, 0.0, 40.0, 0.0});
  inst.network.allowed_types = {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}};
  inst.placement_cost = Grid<double>(3, 3, 1.0);
  inst.sfcs[0].dag_edges = {{0, 1, 5.0}, {1, 2, 5.0}, {2, 3, 5.0}};
  const auto report = check_feasibility(inst, place_all(inst, {0, 2, 2, 2}));
  CHECK_FALSE(report.feasible);
  REQUIRE(report.violations.size() >= 1);
  bool has_adjacency = false;
  for (const auto& v : report.violations) has_adjacency |= v.kind == ViolationKind::Adjacency;
  CHECK(has_adjacency);
}

TEST_CASE("check_feasibility agrees with the inequality-by-inequality oracle") {
  Rng rng(9001);
  GenConfig cfg = preset_config("tiny");
  cfg.guarantee_feasible = false;  // tighter instances produce more violations
  cfg.restriction_prob = 0.3;
  int disagreements = 0;
  for (int trial = 0; trial < 60; ++trial) {
    cfg.seed = derive_seed(555, trial);
    const Instance inst = generate_instance(cfg);
    const FlatIndex flat = flatten_index(inst);
    std::vector<int> clouds(flat.rows());
    for (int& c : clouds) c = static_cast<int>(rng.uniform_int(0, inst.num_clouds() - 1));
    const Placement p = place_all(inst, clouds);

    const auto report = check_feasibility(inst, p);
    const auto expected = oracle_violations(inst, p);
    CHECK(report.feasible == expected.empty());
    const auto got_kinds = by_kind(report.violations);
    const auto want_kinds = by_kind(expected);
    REQUIRE(got_kinds.size() == want_kinds.size());
    for (const auto& [kind, mags] : want_kinds) {
      REQUIRE(got_kinds.count(kind) == 1);
      const auto& got = got_kinds.at(kind);
      REQUIRE(got.size() == mags.size());
      for (std::size_t i = 0; i < mags.size(); ++i) {
        if (std::abs(got[i] - mags[i]) > 1e-9) ++disagreements;
      }
    }
  }
  CHECK(disagreements == 0);
}

TEST_CASE("check_feasibility is deterministic and idempotent") {
  const Instance inst = diamond_instance();
  const Placement p = place_all(inst, {0, 1, 0, 1});
  const auto a = check_feasibility(inst, p);
  const auto b = check_feasibility(inst, p);
  CHECK(a.feasible == b.feasible);
  REQUIRE(a.violations.size() == b.violations.size());
  for (std::size_t i = 0; i < a.violations.size(); ++i) {
    CHECK(a.violations[i].kind == b.violations[i].kind);
    CHECK(a.violations[i].magnitude == b.violations[i].magnitude);
    CHECK(a.violations[i].location == b.violations[i].location);
  }
}

TEST_CASE("scaling all bandwidths up never introduces violations") {
  GenConfig cfg = preset_config("tiny");
  for (int trial = 0; trial < 20; ++trial) {
    cfg.seed = derive_seed(808, trial);
    const Instance inst = generate_instance(cfg);
    Instance scaled = inst;
    for (double& v : scaled.network.bandwidth.flat()) v *= 3.0;
    // budgets depend on kappa/c; rescale budgets to keep delay semantics fixed
    for (std::size_t h = 0; h < scaled.sfcs.size(); ++h) {
      scaled.sfcs[h].delay_budget = inst.sfcs[h].delay_budget;
    }
    Rng rng(derive_seed(909, trial));
    std::vector<int> clouds(flatten_index(inst).rows());
    for (int& c : clouds) c = static_cast<int>(rng.uniform_int(0, inst.num_clouds() - 1));
    const Placement p = place_all(inst, clouds);
    const auto base = check_feasibility(inst, p);
    const auto after = check_feasibility(scaled, p);
    // every violation kind present after scaling was present before
    const auto before_kinds = by_kind(base.violations);
    for (const auto& [kind, mags] : by_kind(after.violations)) {
      CHECK(before_kinds.count(kind) == 1);
    }
    if (base.feasible) CHECK(after.feasible);
  }
}

TEST_CASE("validate rejects malformed instances") {
  Instance inst = two_cloud_chain_instance();
  CHECK_NOTHROW(validate(inst));

  Instance disconnected = inst;
  disconnected.network.bandwidth = Grid<double>(2, 2, 0.0);
  CHECK_THROWS_AS(validate(disconnected), ValidationError);

  Instance asym = inst;
  asym.network.bandwidth(0, 1) = 10.0;  // breaks declared symmetry
  CHECK_THROWS_AS(validate(asym), ValidationError);

  Instance bad_edge = inst;
  bad_edge.sfcs[0].dag_edges = {{1, 0, 1.0}};  // backwards edge
  CHECK_THROWS_AS(validate(bad_edge), ValidationError);

  Instance two_roots = diamond_instance();
  two_roots.sfcs[0].dag_edges = {{0, 2, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}};
  CHECK_THROWS_AS(validate(two_roots), ValidationError);

  Instance bad_type = inst;
  bad_type.sfcs[0].node_types = {0, 7};
  CHECK_THROWS_AS(validate(bad_type), ValidationError);

  Instance bad_kappa = inst;
  bad_kappa.message_size = 0.0;
  CHECK_THROWS_AS(validate(bad_kappa), ValidationError);
}
