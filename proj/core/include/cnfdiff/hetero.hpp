#pragma once

#include "cnfdiff/placement.hpp"

#include <utility>
#include <vector>

namespace cnfdiff {

// Per-column standardization constants recorded for reproducibility.
struct StandardStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

// Conditioning graph for the denoiser. Two node sets (clouds, CNF
// positions), typed edge lists with attributes, and the F x C placement
// mask of allowed pairs. Feature columns are standardized per instance.
struct HeteroGraph {
  int num_clouds = 0;
  int num_positions = 0;

  Grid<double> cloud_feats;             // C x 3: [cpu cap, ram cap, mean placement cost]
  std::vector<int> cloud_type_ids;      // capacity-tier bucket per cloud
  Grid<double> cnf_feats;               // F x 3: [cpu demand, ram demand, proc delay]
  std::vector<int> cnf_restriction_ids; // pinned cloud index, or C for unrestricted

  std::vector<std::pair<int, int>> cc_edges;  // directed cloud links
  Grid<double> cc_attrs;                      // |cc| x 1: [bandwidth]
  std::vector<std::pair<int, int>> tt_edges;  // DAG edges over flattened positions
  Grid<double> tt_attrs;                      // |tt| x 4: [rate, delay budget, sfc id, hop index]
  std::vector<std::pair<int, int>> tc_edges;  // (position, cloud), allowed pairs only
  std::vector<std::pair<int, int>> ct_edges;  // reversed

  Grid<std::uint8_t> mask;  // F x C, 1 = allowed

  StandardStats cloud_stats, cnf_stats, cc_stats, tt_stats;
};

// Number of capacity tiers used for the cloud type ids.
inline constexpr int kCloudTypeBuckets = 3;

// Deterministic encoding of an instance. The mask row of a position is the
// set of clouds whose type set admits it; a fully masked row means the
// instance cannot be placed at all and raises UnplaceableCnf.
HeteroGraph build_hetero_graph(const Instance& instance);

}  // namespace cnfdiff
