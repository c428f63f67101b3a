#include "cnfdiff/exact.hpp"

#include "cnfdiff/generate.hpp"
#include "cnfdiff/rng.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace cnfdiff;
using namespace cnfdiff::test;

TEST_CASE("solve_exact places a fitting single CNF") {
  const Instance inst = single_cloud_instance();
  const ExactResult res = solve_exact(inst);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(*res.cost == 5.0);
  CHECK(res.placement->cloud_of(0) == 0);
}

TEST_CASE("solve_exact reports infeasibility when demands exceed every capacity") {
  Instance inst = single_cloud_instance();
  inst.cnf_catalog[0].cpu_demand = 99.0;
  const ExactResult res = solve_exact(inst);
  CHECK(res.status == SolveStatus::Infeasible);
  CHECK_FALSE(res.cost.has_value());
  CHECK_FALSE(res.placement.has_value());
}

TEST_CASE("solve_exact reports infeasibility when a type is allowed nowhere") {
  Instance inst = two_cloud_chain_instance();
  inst.network.allowed_types = {{0}, {0}};
  CHECK(solve_exact(inst).status == SolveStatus::Infeasible);
}

TEST_CASE("brute_force_oracle trivia") {
  const Instance two = two_cloud_chain_instance();
  Instance one_cnf = two;
  one_cnf.sfcs[0].node_types = {0};
  one_cnf.sfcs[0].dag_edges.clear();
  const auto entries = brute_force_oracle(one_cnf);
  CHECK(entries.size() == 2);
  CHECK(entries.front().cost <= entries.back().cost);

  Instance infeasible = one_cnf;
  infeasible.cnf_catalog[0].cpu_demand = 99.0;
  CHECK(brute_force_oracle(infeasible).empty());
}

TEST_CASE("brute_force_oracle enforces the enumeration guard") {
  GenConfig cfg = preset_config("medium");
  cfg.num_clouds = {10, 10};
  cfg.num_sfcs = {4, 4};
  cfg.chain_length = {4, 4};
  cfg.seed = 3;
  const Instance inst = generate_instance(cfg);  // 10^16 assignments
  CHECK_THROWS_AS(brute_force_oracle(inst), TooLarge);
}

TEST_CASE("capacity pinning yields a singleton feasible set") {
  // Two clouds, two CNFs of distinct types; each cloud admits one type.
  Instance inst = two_cloud_chain_instance();
  inst.network.allowed_types = {{0}, {1}};
  const auto entries = brute_force_oracle(inst);
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].placement.cloud_of(0) == 0);
  CHECK(entries[0].placement.cloud_of(1) == 1);
  const ExactResult res = solve_exact(inst);
  REQUIRE(res.status == SolveStatus::Optimal);
  CHECK(*res.cost == entries[0].cost);
}

TEST_CASE("solve_exact matches brute force on random tiny instances") {
  GenConfig base = preset_config("tiny");
  for (int trial = 0; trial < 30; ++trial) {
    GenConfig cfg = base;
    cfg.guarantee_feasible = trial % 3 != 2;  // mix in possibly-infeasible ones
    if (!cfg.guarantee_feasible) cfg.restriction_prob = 0.4;
    cfg.seed = derive_seed(0xbeefULL, trial);
    const Instance inst = generate_instance(cfg);
    const auto entries = brute_force_oracle(inst);
    const ExactResult res = solve_exact(inst);
    if (entries.empty()) {
      CHECK(res.status == SolveStatus::Infeasible);
    } else {
      REQUIRE(res.status == SolveStatus::Optimal);
      CHECK(*res.cost == entries[0].cost);  // zero tolerance
      // tie-break: lexicographically smallest assignment vector
      CHECK(res.placement->to_assignment() == entries[0].placement.to_assignment());
      CHECK(check_feasibility(inst, *res.placement).feasible);
    }
  }
}

TEST_CASE("solve_exact is deterministic") {
  GenConfig cfg = preset_config("tiny");
  cfg.seed = 11;
  const Instance inst = generate_instance(cfg);
  const ExactResult a = solve_exact(inst);
  const ExactResult b = solve_exact(inst);
  CHECK(a.status == b.status);
  CHECK(a.cost == b.cost);
  CHECK(a.nodes_explored == b.nodes_explored);
  if (a.placement) CHECK(a.placement->assign == b.placement->assign);
}

TEST_CASE("solve_exact respects the wall-clock limit") {
  GenConfig cfg = preset_config("hard");
  cfg.num_clouds = {10, 10};
  cfg.num_sfcs = {3, 3};
  cfg.chain_length = {4, 4};
  cfg.seed = 5;
  const Instance inst = generate_instance(cfg);
  const ExactResult res = solve_exact(inst, 1e-4);
  CHECK(res.status == SolveStatus::TimedOut);
}

TEST_CASE("nodes_explored stays within the branching-product bound") {
  GenConfig cfg = preset_config("tiny");
  cfg.seed = 21;
  const Instance inst = generate_instance(cfg);
  const ExactResult res = solve_exact(inst);
  const FlatIndex flat = flatten_index(inst);
  // sum over depth d of prod_{f<=d} (candidate count) bounds the tree size
  double bound = 0.0, prefix = 1.0;
  for (int f = 0; f < flat.rows(); ++f) {
    prefix *= inst.num_clouds();
    bound += prefix;
  }
  CHECK(static_cast<double>(res.nodes_explored) <= bound);
}
