#include "cnfdiff/exact.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace cnfdiff {

namespace {

using Clock = std::chrono::steady_clock;

struct PositionInfo {
  int type_id = 0;
  double cpu = 0.0;
  double ram = 0.0;
  std::vector<int> candidates;          // clouds allowing the type, ascending
  std::vector<std::pair<int, double>> in_edges;   // (source row, rate)
  bool last_of_sfc = false;
  int sfc = 0;
};

struct Search {
  const Instance& inst;
  FlatIndex flat;
  std::vector<PositionInfo> pos;
  std::vector<double> suffix_min_cost;  // f -> min completion cost of rows f..F-1

  std::vector<int> assigned;            // f -> cloud or -1
  std::vector<double> cpu_used, ram_used;
  Grid<double> bw_used;

  double incumbent_cost = std::numeric_limits<double>::infinity();
  std::vector<int> best;
  bool have_best = false;

  long long nodes = 0;
  Clock::time_point deadline;
  bool has_deadline = false;
  bool timed_out = false;

  explicit Search(const Instance& instance) : inst(instance), flat(flatten_index(instance)) {}

  bool out_of_time() {
    if (!has_deadline) return false;
    if ((nodes & 1023) == 0 && Clock::now() >= deadline) timed_out = true;
    return timed_out;
  }

  // Delay of SFC h under the partial assignment; every position of h must be
  // assigned. Mirrors sfc_delay but works off the assignment vector.
  double chain_delay(int h) const {
    const Sfc& sfc = inst.sfcs[h];
    const int len = sfc.length();
    std::vector<std::vector<const DagEdge*>> out(len);
    for (const auto& e : sfc.dag_edges) out[e.from].push_back(&e);
    std::vector<double> dist(len, 0.0);
    for (int j = len - 1; j >= 0; --j) {
      const double proc = inst.type_of(h, j).proc_delay;
      if (out[j].empty()) {
        dist[j] = proc;
        continue;
      }
      double worst = -std::numeric_limits<double>::infinity();
      for (const DagEdge* e : out[j]) {
        const int ca = assigned[flat.row(h, j)];
        const int cb = assigned[flat.row(h, e->to)];
        const double hop = ca == cb ? 0.0 : inst.message_size / inst.network.bandwidth(ca, cb);
        worst = std::max(worst, hop + dist[e->to]);
      }
      dist[j] = proc + worst;
    }
    return dist[0];
  }

  void dfs(int f, double partial_cost) {
    if (timed_out || out_of_time()) return;
    if (f == flat.rows()) {
      if (partial_cost < incumbent_cost) {
        // Leaf re-verification through the reference evaluators keeps the
        // incremental bookkeeping honest.
        Placement p = Placement::from_assignment(assigned, inst.num_clouds());
        if (check_feasibility(inst, p).feasible) {
          incumbent_cost = partial_cost;
          best = assigned;
          have_best = true;
        }
      }
      return;
    }
    const PositionInfo& info = pos[f];
    for (int c : info.candidates) {
      if (partial_cost + inst.placement_cost(c, info.type_id) + suffix_min_cost[f + 1] >=
          incumbent_cost) {
        continue;
      }
      if (cpu_used[c] + info.cpu > inst.network.cpu_capacity[c] + kFeasibilityTol) continue;
      if (ram_used[c] + info.ram > inst.network.ram_capacity[c] + kFeasibilityTol) continue;

      bool ok = true;
      for (const auto& [src, rate] : info.in_edges) {
        const int cs = assigned[src];
        if (cs == c) continue;
        if (!(inst.network.bandwidth(cs, c) > 0.0)) {
          ok = false;
          break;
        }
        if (bw_used(cs, c) + rate > inst.network.bandwidth(cs, c) + kFeasibilityTol) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;

      assigned[f] = c;
      cpu_used[c] += info.cpu;
      ram_used[c] += info.ram;
      for (const auto& [src, rate] : info.in_edges) {
        if (assigned[src] != c) bw_used(assigned[src], c) += rate;
      }
      ++nodes;

      // All root->sink paths of an SFC complete exactly when its sink (the
      // last flattened position of the chain) is assigned.
      bool delay_ok = true;
      if (info.last_of_sfc) {
        delay_ok = chain_delay(info.sfc) <= inst.sfcs[info.sfc].delay_budget + kFeasibilityTol;
      }
      if (delay_ok) dfs(f + 1, partial_cost + inst.placement_cost(c, info.type_id));

      for (const auto& [src, rate] : info.in_edges) {
        if (assigned[src] != c) bw_used(assigned[src], c) -= rate;
      }
      cpu_used[c] -= info.cpu;
      ram_used[c] -= info.ram;
      assigned[f] = -1;
      if (timed_out) return;
    }
  }
};

}  // namespace

ExactResult solve_exact(const Instance& instance, double time_limit_s) {
  const auto start = Clock::now();
  Search s(instance);
  const int f_total = s.flat.rows();
  const int c_total = instance.num_clouds();

  s.pos.resize(f_total);
  for (int f = 0; f < f_total; ++f) {
    const auto [h, j] = s.flat.to_pos[f];
    PositionInfo& info = s.pos[f];
    info.sfc = h;
    info.type_id = instance.sfcs[h].node_types[j];
    const CnfType& t = instance.cnf_catalog[info.type_id];
    info.cpu = t.cpu_demand;
    info.ram = t.ram_demand;
    info.last_of_sfc = (j == instance.sfcs[h].length() - 1);
    for (int c = 0; c < c_total; ++c) {
      if (instance.network.type_allowed(c, info.type_id)) info.candidates.push_back(c);
    }
    for (const auto& e : instance.sfcs[h].dag_edges) {
      if (e.to == j) info.in_edges.emplace_back(s.flat.row(h, e.from), e.rate);
    }
  }

  s.suffix_min_cost.assign(f_total + 1, 0.0);
  for (int f = f_total - 1; f >= 0; --f) {
    double best = std::numeric_limits<double>::infinity();
    for (int c : s.pos[f].candidates) {
      best = std::min(best, instance.placement_cost(c, s.pos[f].type_id));
    }
    if (s.pos[f].candidates.empty()) best = std::numeric_limits<double>::infinity();
    s.suffix_min_cost[f] = best + s.suffix_min_cost[f + 1];
  }

  s.assigned.assign(f_total, -1);
  s.cpu_used.assign(c_total, 0.0);
  s.ram_used.assign(c_total, 0.0);
  s.bw_used = Grid<double>(c_total, c_total, 0.0);
  if (std::isfinite(time_limit_s)) {
    s.deadline = start + std::chrono::duration_cast<Clock::duration>(
                             std::chrono::duration<double>(time_limit_s));
    s.has_deadline = true;
  }

  // A position with no admissible cloud makes the whole instance infeasible.
  const bool unplaceable = std::any_of(s.pos.begin(), s.pos.end(),
                                       [](const PositionInfo& p) { return p.candidates.empty(); });
  if (!unplaceable) s.dfs(0, 0.0);

  ExactResult result;
  result.nodes_explored = s.nodes;
  result.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
  if (s.timed_out) {
    result.status = SolveStatus::TimedOut;
    if (s.have_best) {
      result.placement = Placement::from_assignment(s.best, c_total);
      result.cost = total_cost(instance, *result.placement);
    }
  } else if (s.have_best) {
    result.status = SolveStatus::Optimal;
    result.placement = Placement::from_assignment(s.best, c_total);
    result.cost = total_cost(instance, *result.placement);
  } else {
    result.status = SolveStatus::Infeasible;
  }
  return result;
}

std::vector<OracleEntry> brute_force_oracle(const Instance& instance) {
  const FlatIndex flat = flatten_index(instance);
  const int f_total = flat.rows();
  const int c_total = instance.num_clouds();

  double combos = 1.0;
  for (int f = 0; f < f_total; ++f) {
    combos *= c_total;
    if (combos > kBruteForceGuard) {
      throw TooLarge("brute_force_oracle: C^F exceeds enumeration guard");
    }
  }

  std::vector<OracleEntry> feasible;
  std::vector<int> digits(f_total, 0);
  while (true) {
    Placement p = Placement::from_assignment(digits, c_total);
    if (check_feasibility(instance, p).feasible) {
      feasible.push_back({p, total_cost(instance, p)});
    }
    int k = f_total - 1;
    while (k >= 0 && digits[k] == c_total - 1) digits[k--] = 0;
    if (k < 0) break;
    ++digits[k];
  }
  // Enumeration emits assignment vectors in ascending lexicographic order, so
  // a stable sort keeps equal-cost entries in the solver's tie-break order.
  std::stable_sort(feasible.begin(), feasible.end(),
                   [](const OracleEntry& a, const OracleEntry& b) { return a.cost < b.cost; });
  return feasible;
}

}  // namespace cnfdiff
