#pragma once

#include "cnfdiff/errors.hpp"
#include "cnfdiff/grid.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cnfdiff {

// Feasibility comparisons use this slack so that capacity checks are stable
// at the relative scale of generated instances.
inline constexpr double kFeasibilityTol = 1e-9;

struct CloudNetwork {
  int num_clouds = 0;
  std::vector<double> cpu_capacity;               // X_i
  std::vector<double> ram_capacity;               // D_i
  Grid<double> bandwidth;                         // c_ij in bits/s, 0 = no link
  bool symmetric = true;                          // bandwidth matrix symmetry flag
  std::vector<std::vector<int>> allowed_types;    // per cloud, sorted type ids

  // Intra-cloud pairs are always adjacent; anything else needs a link.
  bool adjacent(int i, int j) const { return i == j || bandwidth(i, j) > 0.0; }
  bool type_allowed(int cloud, int type_id) const;
};

struct CnfType {
  int type_id = 0;
  double cpu_demand = 0.0;
  double ram_demand = 0.0;
  double proc_delay = 0.0;
};

struct DagEdge {
  int from = 0;  // position index within the SFC's node list
  int to = 0;
  double rate = 0.0;  // bits/s demanded on the hop
};

struct Sfc {
  int sfc_id = 0;
  std::vector<int> node_types;   // CNF positions in topological order, catalog ids
  std::vector<DagEdge> dag_edges;
  double delay_budget = 0.0;

  int length() const { return static_cast<int>(node_types.size()); }
};

struct InstanceMeta {
  std::uint64_t seed = 0;
  std::string name;
};

struct Instance {
  CloudNetwork network;
  std::vector<Sfc> sfcs;
  std::vector<CnfType> cnf_catalog;
  Grid<double> placement_cost;  // C x M, t_im
  double message_size = 0.0;    // kappa, bits per inter-CNF message
  InstanceMeta meta;

  int num_clouds() const { return network.num_clouds; }
  int num_types() const { return static_cast<int>(cnf_catalog.size()); }
  int num_positions() const;  // F = sum of SFC lengths
  const CnfType& type_of(int h, int j) const { return cnf_catalog[sfcs[h].node_types[j]]; }
};

// Throws ValidationError when any structural invariant fails: connectivity,
// symmetry (when flagged), DAG shape (single root and sink, forward edges),
// catalog references, nonnegative demands/costs, positive message size.
void validate(const Instance& instance);

// Binary F x C assignment matrix over flattened CNF positions. A complete
// placement has exactly one 1 per row; all-zero rows mark unassigned
// positions inside the exact solver's search.
struct Placement {
  Grid<std::uint8_t> assign;

  Placement() = default;
  Placement(std::size_t rows, std::size_t clouds) : assign(rows, clouds, 0) {}

  // Builds a complete placement from a per-row cloud index vector.
  static Placement from_assignment(const std::vector<int>& cloud_of, std::size_t num_clouds);

  std::size_t rows() const { return assign.rows(); }
  std::size_t clouds() const { return assign.cols(); }

  int row_sum(std::size_t f) const;
  // Cloud hosting row f, or -1 unless the row has exactly one 1.
  int cloud_of(std::size_t f) const;
  bool complete() const;
  // Per-row cloud indices; throws IncompletePlacement on malformed rows.
  std::vector<int> to_assignment() const;
};

enum class ViolationKind {
  OneCloud,
  Adjacency,
  Cpu,
  Ram,
  Bandwidth,
  Delay,
  TypeRestriction,
};

const char* to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string location;
  double magnitude = 0.0;  // always > 0
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<Violation> violations;

  double total_magnitude() const;
};

// Bijection between (sfc h, position j) and flattened row index f. Rows are
// ordered by (h ascending, topological position ascending).
struct FlatIndex {
  std::vector<std::pair<int, int>> to_pos;  // f -> (h, j)
  std::vector<int> offsets;                 // h -> first row of SFC h

  int rows() const { return static_cast<int>(to_pos.size()); }
  int row(int h, int j) const { return offsets[h] + j; }
};

FlatIndex flatten_index(const Instance& instance);

// Sum of t_im over all assigned (position, cloud) pairs.
// Throws IncompletePlacement if any row does not sum to exactly 1.
double total_cost(const Instance& instance, const Placement& placement);

// Maximum delay over all root->sink paths of SFC h under the placement:
// every traversed node contributes its processing delay and every hop
// between distinct clouds contributes message_size / bandwidth. Co-located
// hops cost zero. Throws DisconnectedHop when consecutive CNFs sit on
// non-adjacent clouds and the delay is undefined.
double sfc_delay(const Instance& instance, const Placement& placement, int h);

struct ResourceUsage {
  std::vector<double> cpu;   // per cloud
  std::vector<double> ram;   // per cloud
  Grid<double> bandwidth;    // per ordered cloud pair, diagonal unused
};

ResourceUsage resource_usage(const Instance& instance, const Placement& placement);

// Evaluates all seven violation kinds on an arbitrary binary matrix of the
// right shape. Violations are data, not errors; the report is deterministic
// and idempotent.
FeasibilityReport check_feasibility(const Instance& instance, const Placement& placement);

}  // namespace cnfdiff
