#pragma once

#include "cnfdiff/io.hpp"
#include "cnfdiff/placement.hpp"

#include <optional>
#include <vector>

namespace cnfdiff {

struct ExactResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::optional<Placement> placement;  // present for Optimal, or TimedOut incumbent
  std::optional<double> cost;
  double elapsed_s = 0.0;
  long long nodes_explored = 0;
};

// Default wall-clock budget per desk instance.
inline constexpr double kDefaultExactTimeLimit = 600.0;

// Depth-first branch-and-bound over CNF positions in flattened order.
// Branches over clouds whose type set admits the position; prunes on
// resource overuse, missing links between assigned DAG neighbours, the
// per-position min-cost completion bound, and completed-chain delay.
// Deterministic: equal-cost optima resolve to the lexicographically
// smallest flattened assignment vector.
ExactResult solve_exact(const Instance& instance,
                        double time_limit_s = kDefaultExactTimeLimit);

struct OracleEntry {
  Placement placement;
  double cost = 0.0;
};

// Exhaustive enumeration guard: refuses instances with more than this many
// complete assignment matrices.
inline constexpr double kBruteForceGuard = 1e7;

// Enumerates all C^F complete placements, keeps the feasible ones and sorts
// them by (cost, assignment vector) ascending. Throws TooLarge past the
// guard. Test oracle for the branch-and-bound path.
std::vector<OracleEntry> brute_force_oracle(const Instance& instance);

}  // namespace cnfdiff
