#include "cnfdiff/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace cnfdiff {

bool CloudNetwork::type_allowed(int cloud, int type_id) const {
  const auto& list = allowed_types[cloud];
  return std::binary_search(list.begin(), list.end(), type_id);
}

int Instance::num_positions() const {
  int f = 0;
  for (const auto& sfc : sfcs) f += sfc.length();
  return f;
}

namespace {

void validate_network(const CloudNetwork& net) {
  const int c = net.num_clouds;
  if (c <= 0) throw ValidationError("network: num_clouds must be positive");
  if (static_cast<int>(net.cpu_capacity.size()) != c ||
      static_cast<int>(net.ram_capacity.size()) != c) {
    throw ValidationError("network: capacity vector size mismatch");
  }
  if (net.bandwidth.rows() != static_cast<std::size_t>(c) ||
      net.bandwidth.cols() != static_cast<std::size_t>(c)) {
    throw ValidationError("network: bandwidth matrix must be C x C");
  }
  if (static_cast<int>(net.allowed_types.size()) != c) {
    throw ValidationError("network: allowed_types must have one entry per cloud");
  }
  for (int i = 0; i < c; ++i) {
    if (net.cpu_capacity[i] < 0 || net.ram_capacity[i] < 0) {
      throw ValidationError("network: negative capacity");
    }
    if (!std::is_sorted(net.allowed_types[i].begin(), net.allowed_types[i].end())) {
      throw ValidationError("network: allowed_types lists must be sorted");
    }
    for (int j = 0; j < c; ++j) {
      const double b = net.bandwidth(i, j);
      if (b < 0 || !std::isfinite(b)) throw ValidationError("network: bad bandwidth entry");
      if (net.symmetric && net.bandwidth(j, i) != b) {
        throw ValidationError("network: bandwidth flagged symmetric but is not");
      }
    }
  }
  // Connectivity over the link graph (intra-cloud adjacency does not help).
  std::vector<char> seen(c, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < c; ++v) {
      if (!seen[v] && net.bandwidth(u, v) > 0) {
        seen[v] = 1;
        stack.push_back(v);
      }
    }
  }
  if (c > 1 && std::count(seen.begin(), seen.end(), 1) != c) {
    throw ValidationError("network: cloud graph is not connected");
  }
}

void validate_sfc(const Sfc& sfc, int num_types) {
  const int len = sfc.length();
  if (len <= 0) throw ValidationError("sfc: empty node list");
  for (int t : sfc.node_types) {
    if (t < 0 || t >= num_types) throw ValidationError("sfc: node references unknown CNF type");
  }
  std::vector<int> in_deg(len, 0), out_deg(len, 0);
  std::vector<std::vector<char>> seen_edge(len, std::vector<char>(len, 0));
  for (const auto& e : sfc.dag_edges) {
    if (e.from < 0 || e.to < 0 || e.from >= len || e.to >= len) {
      throw ValidationError("sfc: edge endpoint out of range");
    }
    if (e.from >= e.to) {
      throw ValidationError("sfc: edges must go forward in the stored topological order");
    }
    if (seen_edge[e.from][e.to]) throw ValidationError("sfc: duplicate DAG edge");
    seen_edge[e.from][e.to] = 1;
    if (e.rate < 0 || !std::isfinite(e.rate)) throw ValidationError("sfc: bad edge rate");
    ++out_deg[e.from];
    ++in_deg[e.to];
  }
  if (len > 1) {
    int roots = 0, sinks = 0;
    for (int j = 0; j < len; ++j) {
      if (in_deg[j] == 0) ++roots;
      if (out_deg[j] == 0) ++sinks;
    }
    if (roots != 1 || sinks != 1) {
      throw ValidationError("sfc: DAG must have exactly one root and one sink");
    }
  }
  if (sfc.delay_budget < 0 || !std::isfinite(sfc.delay_budget)) {
    throw ValidationError("sfc: bad delay budget");
  }
}

}  // namespace

void validate(const Instance& instance) {
  validate_network(instance.network);
  const int m = instance.num_types();
  if (m <= 0) throw ValidationError("instance: empty CNF catalog");
  for (int k = 0; k < m; ++k) {
    const auto& t = instance.cnf_catalog[k];
    if (t.type_id != k) throw ValidationError("instance: catalog ids must be dense 0..M-1");
    if (t.cpu_demand < 0 || t.ram_demand < 0 || t.proc_delay < 0) {
      throw ValidationError("instance: negative CNF demand or delay");
    }
  }
  for (const auto& list : instance.network.allowed_types) {
    for (int t : list) {
      if (t < 0 || t >= m) throw ValidationError("network: allowed_types references unknown type");
    }
  }
  for (const auto& sfc : instance.sfcs) validate_sfc(sfc, m);
  const auto c = static_cast<std::size_t>(instance.num_clouds());
  if (instance.placement_cost.rows() != c ||
      instance.placement_cost.cols() != static_cast<std::size_t>(m)) {
    throw ValidationError("instance: placement_cost must be C x M");
  }
  for (double v : instance.placement_cost.flat()) {
    if (v < 0 || !std::isfinite(v)) throw ValidationError("instance: bad placement cost");
  }
  if (!(instance.message_size > 0) || !std::isfinite(instance.message_size)) {
    throw ValidationError("instance: message_size must be positive");
  }
}

Placement Placement::from_assignment(const std::vector<int>& cloud_of, std::size_t num_clouds) {
  Placement p(cloud_of.size(), num_clouds);
  for (std::size_t f = 0; f < cloud_of.size(); ++f) {
    const int c = cloud_of[f];
    if (c < 0 || static_cast<std::size_t>(c) >= num_clouds) {
      throw ShapeMismatch("Placement::from_assignment: cloud index out of range");
    }
    p.assign(f, static_cast<std::size_t>(c)) = 1;
  }
  return p;
}

int Placement::row_sum(std::size_t f) const {
  int s = 0;
  for (std::size_t c = 0; c < assign.cols(); ++c) s += assign(f, c);
  return s;
}

int Placement::cloud_of(std::size_t f) const {
  int found = -1;
  for (std::size_t c = 0; c < assign.cols(); ++c) {
    if (assign(f, c)) {
      if (found >= 0) return -1;
      found = static_cast<int>(c);
    }
  }
  return found;
}

bool Placement::complete() const {
  for (std::size_t f = 0; f < assign.rows(); ++f) {
    if (row_sum(f) != 1) return false;
  }
  return true;
}

std::vector<int> Placement::to_assignment() const {
  std::vector<int> out(rows());
  for (std::size_t f = 0; f < rows(); ++f) {
    const int c = cloud_of(f);
    if (c < 0) throw IncompletePlacement("placement row does not sum to 1");
    out[f] = c;
  }
  return out;
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::OneCloud: return "OneCloud";
    case ViolationKind::Adjacency: return "Adjacency";
    case ViolationKind::Cpu: return "Cpu";
    case ViolationKind::Ram: return "Ram";
    case ViolationKind::Bandwidth: return "Bandwidth";
    case ViolationKind::Delay: return "Delay";
    case ViolationKind::TypeRestriction: return "TypeRestriction";
  }
  return "?";
}

double FeasibilityReport::total_magnitude() const {
  double s = 0.0;
  for (const auto& v : violations) s += v.magnitude;
  return s;
}

FlatIndex flatten_index(const Instance& instance) {
  FlatIndex idx;
  idx.offsets.reserve(instance.sfcs.size());
  for (std::size_t h = 0; h < instance.sfcs.size(); ++h) {
    idx.offsets.push_back(idx.rows());
    for (int j = 0; j < instance.sfcs[h].length(); ++j) {
      idx.to_pos.emplace_back(static_cast<int>(h), j);
    }
  }
  return idx;
}

double total_cost(const Instance& instance, const Placement& placement) {
  const FlatIndex flat = flatten_index(instance);
  if (placement.rows() != static_cast<std::size_t>(flat.rows()) ||
      placement.clouds() != static_cast<std::size_t>(instance.num_clouds())) {
    throw ShapeMismatch("total_cost: placement shape does not match instance");
  }
  double cost = 0.0;
  for (int f = 0; f < flat.rows(); ++f) {
    if (placement.row_sum(f) != 1) {
      throw IncompletePlacement("total_cost: row " + std::to_string(f) + " does not sum to 1");
    }
    const auto [h, j] = flat.to_pos[f];
    const int type_id = instance.sfcs[h].node_types[j];
    cost += instance.placement_cost(static_cast<std::size_t>(placement.cloud_of(f)),
                                    static_cast<std::size_t>(type_id));
  }
  return cost;
}

namespace {

// Transmission delay of one hop; infinity-free: co-located hops are free,
// disconnected hops are reported through the optional.
std::optional<double> hop_delay(const Instance& inst, int cloud_a, int cloud_b) {
  if (cloud_a == cloud_b) return 0.0;
  const double bw = inst.network.bandwidth(cloud_a, cloud_b);
  if (bw <= 0.0) return std::nullopt;
  return inst.message_size / bw;
}

}  // namespace

double sfc_delay(const Instance& instance, const Placement& placement, int h) {
  if (h < 0 || static_cast<std::size_t>(h) >= instance.sfcs.size()) {
    throw ValidationError("sfc_delay: sfc index out of range");
  }
  const FlatIndex flat = flatten_index(instance);
  const Sfc& sfc = instance.sfcs[h];
  const int len = sfc.length();
  std::vector<int> cloud(len);
  for (int j = 0; j < len; ++j) {
    const int c = placement.cloud_of(flat.row(h, j));
    if (c < 0) throw IncompletePlacement("sfc_delay: SFC has unassigned positions");
    cloud[j] = c;
  }
  std::vector<std::vector<const DagEdge*>> out(len);
  for (const auto& e : sfc.dag_edges) out[e.from].push_back(&e);

  // Longest root->sink path over the DAG, computed backwards over the stored
  // topological order. dist[j] = delay of the worst path starting at j.
  std::vector<double> dist(len, 0.0);
  for (int j = len - 1; j >= 0; --j) {
    const double proc = instance.type_of(h, j).proc_delay;
    if (out[j].empty()) {
      dist[j] = proc;
      continue;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const DagEdge* e : out[j]) {
      const auto hop = hop_delay(instance, cloud[j], cloud[e->to]);
      if (!hop) {
        std::ostringstream msg;
        msg << "sfc_delay: consecutive CNFs (" << h << "," << e->from << ")->(" << h << ","
            << e->to << ") on non-adjacent clouds " << cloud[j] << "," << cloud[e->to];
        throw DisconnectedHop(msg.str());
      }
      best = std::max(best, *hop + dist[e->to]);
    }
    dist[j] = proc + best;
  }
  return dist[0];
}

ResourceUsage resource_usage(const Instance& instance, const Placement& placement) {
  const int c = instance.num_clouds();
  const FlatIndex flat = flatten_index(instance);
  ResourceUsage usage;
  usage.cpu.assign(c, 0.0);
  usage.ram.assign(c, 0.0);
  usage.bandwidth = Grid<double>(c, c, 0.0);

  for (int f = 0; f < flat.rows(); ++f) {
    const auto [h, j] = flat.to_pos[f];
    const CnfType& t = instance.type_of(h, j);
    for (int i = 0; i < c; ++i) {
      if (placement.assign(f, i)) {
        usage.cpu[i] += t.cpu_demand;
        usage.ram[i] += t.ram_demand;
      }
    }
  }
  for (std::size_t h = 0; h < instance.sfcs.size(); ++h) {
    for (const auto& e : instance.sfcs[h].dag_edges) {
      const int fa = flat.row(static_cast<int>(h), e.from);
      const int fb = flat.row(static_cast<int>(h), e.to);
      for (int i = 0; i < c; ++i) {
        if (!placement.assign(fa, i)) continue;
        for (int k = 0; k < c; ++k) {
          if (i != k && placement.assign(fb, k)) usage.bandwidth(i, k) += e.rate;
        }
      }
    }
  }
  return usage;
}

FeasibilityReport check_feasibility(const Instance& instance, const Placement& placement) {
  const int c = instance.num_clouds();
  const FlatIndex flat = flatten_index(instance);
  if (placement.rows() != static_cast<std::size_t>(flat.rows()) ||
      placement.clouds() != static_cast<std::size_t>(c)) {
    throw ShapeMismatch("check_feasibility: placement shape does not match instance");
  }

  FeasibilityReport report;
  auto add = [&](ViolationKind kind, std::string where, double magnitude) {
    report.violations.push_back({kind, std::move(where), magnitude});
  };

  for (int f = 0; f < flat.rows(); ++f) {
    const int s = placement.row_sum(f);
    if (s != 1) {
      add(ViolationKind::OneCloud, "row " + std::to_string(f), std::abs(s - 1.0));
    }
    const auto [h, j] = flat.to_pos[f];
    const int type_id = instance.sfcs[h].node_types[j];
    for (int i = 0; i < c; ++i) {
      if (placement.assign(f, i) && !instance.network.type_allowed(i, type_id)) {
        add(ViolationKind::TypeRestriction,
            "cnf " + std::to_string(f) + " on cloud " + std::to_string(i), 1.0);
      }
    }
  }

  const ResourceUsage usage = resource_usage(instance, placement);
  for (int i = 0; i < c; ++i) {
    if (usage.cpu[i] > instance.network.cpu_capacity[i] + kFeasibilityTol) {
      add(ViolationKind::Cpu, "cloud " + std::to_string(i),
          usage.cpu[i] - instance.network.cpu_capacity[i]);
    }
    if (usage.ram[i] > instance.network.ram_capacity[i] + kFeasibilityTol) {
      add(ViolationKind::Ram, "cloud " + std::to_string(i),
          usage.ram[i] - instance.network.ram_capacity[i]);
    }
  }
  // Bandwidth is checked per ordered pair of linked clouds; flows between
  // non-adjacent clouds are adjacency violations, not bandwidth ones.
  for (int i = 0; i < c; ++i) {
    for (int k = 0; k < c; ++k) {
      if (i == k || instance.network.bandwidth(i, k) <= 0.0) continue;
      const double cap = instance.network.bandwidth(i, k);
      if (usage.bandwidth(i, k) > cap + kFeasibilityTol) {
        add(ViolationKind::Bandwidth, "link " + std::to_string(i) + "->" + std::to_string(k),
            usage.bandwidth(i, k) - cap);
      }
    }
  }

  for (std::size_t h = 0; h < instance.sfcs.size(); ++h) {
    const Sfc& sfc = instance.sfcs[h];
    bool rows_ok = true;
    for (int j = 0; j < sfc.length(); ++j) {
      if (placement.row_sum(flat.row(static_cast<int>(h), j)) != 1) rows_ok = false;
    }
    bool hops_ok = true;
    for (const auto& e : sfc.dag_edges) {
      const int fa = flat.row(static_cast<int>(h), e.from);
      const int fb = flat.row(static_cast<int>(h), e.to);
      for (int i = 0; i < c; ++i) {
        if (!placement.assign(fa, i)) continue;
        for (int k = 0; k < c; ++k) {
          if (placement.assign(fb, k) && !instance.network.adjacent(i, k)) {
            add(ViolationKind::Adjacency,
                "sfc " + std::to_string(h) + " edge " + std::to_string(e.from) + "->" +
                    std::to_string(e.to) + " clouds " + std::to_string(i) + "," +
                    std::to_string(k),
                1.0);
            hops_ok = false;
          }
        }
      }
    }
    // Delay is only defined once every position of the chain is placed and
    // every hop has a link.
    if (rows_ok && hops_ok) {
      const double d = sfc_delay(instance, placement, static_cast<int>(h));
      if (d > sfc.delay_budget + kFeasibilityTol) {
        add(ViolationKind::Delay, "sfc " + std::to_string(h), d - sfc.delay_budget);
      }
    }
  }

  report.feasible = report.violations.empty();
  return report;
}

}  // namespace cnfdiff
