#pragma once

#include "cnfdiff/placement.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cnfdiff {

struct IntRange {
  int lo = 0;
  int hi = 0;  // inclusive
};

struct RealRange {
  double lo = 0.0;
  double hi = 0.0;  // inclusive
};

// All distributional knobs of the instance generator. The reference presets
// below are version-controlled so experiments reproduce without external
// data.
struct GenConfig {
  IntRange num_clouds{3, 4};
  IntRange num_sfcs{1, 2};
  IntRange chain_length{2, 3};
  IntRange num_cnf_types{2, 3};
  double dag_branch_prob = 0.0;       // probability of a diamond branch per eligible step
  RealRange cpu_capacity{8.0, 16.0};
  RealRange ram_capacity{8.0, 32.0};
  RealRange cpu_demand{1.0, 4.0};
  RealRange ram_demand{1.0, 8.0};
  RealRange bandwidth{50.0, 200.0};   // per-link capacity
  RealRange rate{1.0, 20.0};          // per-DAG-edge demanded rate
  double link_density = 0.5;          // extra-link probability beyond the spanning tree
  RealRange cost{1.0, 100.0};         // t_im entries
  RealRange proc_delay{0.5, 2.0};
  RealRange message_size{50.0, 150.0};
  double delay_budget_slack = 1.5;    // budget = reference chain delay x slack
  double restriction_prob = 0.0;      // probability a cloud excludes a type
  bool guarantee_feasible = true;
  std::uint64_t seed = 0;
};

// Throws ValidationError on empty ranges or out-of-range probabilities.
void validate(const GenConfig& config);

// Deterministic instance construction: connected cloud graph (random
// spanning tree plus extra links), chain-with-diamonds SFC DAGs, and - when
// guarantee_feasible is set - capacities and budgets inflated around a
// hidden witness placement that is then discarded.
Instance generate_instance(const GenConfig& config);

// Fan-out over configs with per-instance seeds derived from `seed`.
// instances[k].meta.seed records the derived seed; the config index is the
// position in the list.
std::vector<Instance> generate_dataset(const std::vector<GenConfig>& configs, std::uint64_t seed);

struct DatasetSplit {
  std::vector<int> train;  // indices into the instance list, ascending
  std::vector<int> eval;
};

// Seeded disjoint partition; each side keeps the input order.
DatasetSplit split_dataset(std::size_t num_instances, int train_count, std::uint64_t seed);

// Named presets: `tiny` (brute-forceable, feasibility guaranteed), `small`,
// `medium`, and `hard` (cloud counts cycling 4/6/8/10 for scaling studies).
GenConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

// Per-instance config list for a dataset of `count` scenarios drawn from the
// preset. Most presets repeat the base config (variety comes from derived
// seeds); `hard` cycles its cloud-count buckets.
std::vector<GenConfig> preset_dataset_configs(const std::string& name, int count);

}  // namespace cnfdiff
