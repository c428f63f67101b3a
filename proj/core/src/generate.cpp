#include "cnfdiff/generate.hpp"

#include "cnfdiff/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace cnfdiff {

namespace {

void check_range(const IntRange& r, const char* what) {
  if (r.lo > r.hi || r.lo < 0) throw ValidationError(std::string("gen config: bad range for ") + what);
}

void check_range(const RealRange& r, const char* what) {
  if (r.lo > r.hi || !(r.lo >= 0)) {
    throw ValidationError(std::string("gen config: bad range for ") + what);
  }
}

void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError(std::string("gen config: probability out of [0,1] for ") + what);
  }
}

int draw(Rng& rng, const IntRange& r) { return static_cast<int>(rng.uniform_int(r.lo, r.hi)); }
double draw(Rng& rng, const RealRange& r) { return rng.uniform(r.lo, r.hi); }

// Chain with optional diamond branches: a branch step spends three positions
// (two parallel nodes and the merge) and keeps the node list topologically
// ordered with a single root and sink.
std::vector<DagEdge> build_dag(Rng& rng, int len, double branch_prob, const RealRange& rate) {
  std::vector<DagEdge> edges;
  int last = 0;
  int i = 1;
  while (i < len) {
    if (len - i >= 3 && rng.bernoulli(branch_prob)) {
      edges.push_back({last, i, draw(rng, rate)});
      edges.push_back({last, i + 1, draw(rng, rate)});
      edges.push_back({i, i + 2, draw(rng, rate)});
      edges.push_back({i + 1, i + 2, draw(rng, rate)});
      last = i + 2;
      i += 3;
    } else {
      edges.push_back({last, i, draw(rng, rate)});
      last = i;
      i += 1;
    }
  }
  return edges;
}

// Greedy adjacency-respecting assignment used as the hidden feasibility
// witness. Positions take random admissible clouds adjacent to all already
// assigned DAG predecessors; fails (nullopt) when a position has none.
std::optional<std::vector<int>> build_witness(Rng& rng, const Instance& inst) {
  const FlatIndex flat = flatten_index(inst);
  const int c_total = inst.num_clouds();
  std::vector<int> witness(flat.rows(), -1);
  for (std::size_t h = 0; h < inst.sfcs.size(); ++h) {
    const Sfc& sfc = inst.sfcs[h];
    for (int j = 0; j < sfc.length(); ++j) {
      std::vector<int> options;
      for (int c = 0; c < c_total; ++c) {
        if (!inst.network.type_allowed(c, sfc.node_types[j])) continue;
        bool ok = true;
        for (const auto& e : sfc.dag_edges) {
          if (e.to != j) continue;
          const int pc = witness[flat.row(static_cast<int>(h), e.from)];
          if (!inst.network.adjacent(pc, c)) {
            ok = false;
            break;
          }
        }
        if (ok) options.push_back(c);
      }
      if (options.empty()) return std::nullopt;
      witness[flat.row(static_cast<int>(h), j)] =
          options[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(options.size()) - 1))];
    }
  }
  return witness;
}

Instance try_generate(Rng& rng, const GenConfig& cfg) {
  Instance inst;
  const int c_total = draw(rng, cfg.num_clouds);
  const int m_total = draw(rng, cfg.num_cnf_types);
  const int h_total = draw(rng, cfg.num_sfcs);

  CloudNetwork& net = inst.network;
  net.num_clouds = c_total;
  net.symmetric = true;
  net.cpu_capacity.resize(c_total);
  net.ram_capacity.resize(c_total);
  for (int i = 0; i < c_total; ++i) {
    net.cpu_capacity[i] = draw(rng, cfg.cpu_capacity);
    net.ram_capacity[i] = draw(rng, cfg.ram_capacity);
  }
  net.bandwidth = Grid<double>(c_total, c_total, 0.0);
  auto link = [&](int a, int b) {
    const double bw = draw(rng, cfg.bandwidth);
    net.bandwidth(a, b) = bw;
    net.bandwidth(b, a) = bw;
  };
  for (int i = 1; i < c_total; ++i) link(static_cast<int>(rng.uniform_int(0, i - 1)), i);
  for (int i = 0; i < c_total; ++i) {
    for (int j = i + 1; j < c_total; ++j) {
      if (net.bandwidth(i, j) == 0.0 && rng.bernoulli(cfg.link_density)) link(i, j);
    }
  }

  inst.cnf_catalog.resize(m_total);
  for (int m = 0; m < m_total; ++m) {
    inst.cnf_catalog[m] = {m, draw(rng, cfg.cpu_demand), draw(rng, cfg.ram_demand),
                           draw(rng, cfg.proc_delay)};
  }

  net.allowed_types.assign(c_total, {});
  for (int m = 0; m < m_total; ++m) {
    std::vector<int> allowing;
    for (int i = 0; i < c_total; ++i) {
      if (!rng.bernoulli(cfg.restriction_prob)) allowing.push_back(i);
    }
    // Every type must stay placeable somewhere.
    if (allowing.empty()) {
      allowing.push_back(static_cast<int>(rng.uniform_int(0, c_total - 1)));
    }
    for (int i : allowing) net.allowed_types[i].push_back(m);
  }

  inst.sfcs.resize(h_total);
  for (int h = 0; h < h_total; ++h) {
    Sfc& sfc = inst.sfcs[h];
    sfc.sfc_id = h;
    const int len = draw(rng, cfg.chain_length);
    sfc.node_types.resize(len);
    for (int j = 0; j < len; ++j) {
      sfc.node_types[j] = static_cast<int>(rng.uniform_int(0, m_total - 1));
    }
    sfc.dag_edges = build_dag(rng, len, cfg.dag_branch_prob, cfg.rate);
    sfc.delay_budget = 0.0;  // set below from the reference assignment
  }

  inst.placement_cost = Grid<double>(c_total, m_total, 0.0);
  for (double& v : inst.placement_cost.flat()) v = draw(rng, cfg.cost);
  inst.message_size = draw(rng, cfg.message_size);
  return inst;
}

}  // namespace

void validate(const GenConfig& cfg) {
  check_range(cfg.num_clouds, "num_clouds");
  if (cfg.num_clouds.lo < 1) throw ValidationError("gen config: need at least one cloud");
  check_range(cfg.num_sfcs, "num_sfcs");
  if (cfg.num_sfcs.lo < 1) throw ValidationError("gen config: need at least one SFC");
  check_range(cfg.chain_length, "chain_length");
  if (cfg.chain_length.lo < 1) throw ValidationError("gen config: need chain length >= 1");
  check_range(cfg.num_cnf_types, "num_cnf_types");
  if (cfg.num_cnf_types.lo < 1) throw ValidationError("gen config: need at least one CNF type");
  check_prob(cfg.dag_branch_prob, "dag_branch_prob");
  check_prob(cfg.link_density, "link_density");
  check_prob(cfg.restriction_prob, "restriction_prob");
  check_range(cfg.cpu_capacity, "cpu_capacity");
  check_range(cfg.ram_capacity, "ram_capacity");
  check_range(cfg.cpu_demand, "cpu_demand");
  check_range(cfg.ram_demand, "ram_demand");
  check_range(cfg.bandwidth, "bandwidth");
  if (!(cfg.bandwidth.lo > 0)) throw ValidationError("gen config: bandwidth must be positive");
  check_range(cfg.rate, "rate");
  check_range(cfg.cost, "cost");
  check_range(cfg.proc_delay, "proc_delay");
  check_range(cfg.message_size, "message_size");
  if (!(cfg.message_size.lo > 0)) throw ValidationError("gen config: message_size must be positive");
  if (!(cfg.delay_budget_slack >= 1.0)) {
    throw ValidationError("gen config: delay_budget_slack must be >= 1");
  }
}

Instance generate_instance(const GenConfig& cfg) {
  validate(cfg);
  constexpr int kMaxAttempts = 64;
  Rng rng(cfg.seed);

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Instance inst = try_generate(rng, cfg);
    const auto witness = build_witness(rng, inst);
    if (!witness && cfg.guarantee_feasible) continue;

    if (witness) {
      // Budgets come from the witness chain delay; with guarantee_feasible
      // the witness load also inflates capacities so it stays admissible.
      Placement wp = Placement::from_assignment(*witness, inst.num_clouds());
      if (cfg.guarantee_feasible) {
        const ResourceUsage used = resource_usage(inst, wp);
        for (int i = 0; i < inst.num_clouds(); ++i) {
          inst.network.cpu_capacity[i] = std::max(inst.network.cpu_capacity[i], used.cpu[i]);
          inst.network.ram_capacity[i] = std::max(inst.network.ram_capacity[i], used.ram[i]);
        }
        for (int i = 0; i < inst.num_clouds(); ++i) {
          for (int k = 0; k < inst.num_clouds(); ++k) {
            if (i == k || used.bandwidth(i, k) == 0.0) continue;
            const double need = inst.network.symmetric
                                    ? std::max(used.bandwidth(i, k), used.bandwidth(k, i))
                                    : used.bandwidth(i, k);
            if (inst.network.bandwidth(i, k) < need) {
              inst.network.bandwidth(i, k) = need;
              if (inst.network.symmetric) inst.network.bandwidth(k, i) = need;
            }
          }
        }
      }
      for (std::size_t h = 0; h < inst.sfcs.size(); ++h) {
        inst.sfcs[h].delay_budget =
            sfc_delay(inst, wp, static_cast<int>(h)) * cfg.delay_budget_slack;
      }
    } else {
      // No adjacency-respecting reference exists; fall back to a formula
      // budget so the instance is still well-formed (feasibility unknown).
      for (auto& sfc : inst.sfcs) {
        double proc = 0.0;
        for (int t : sfc.node_types) proc += inst.cnf_catalog[t].proc_delay;
        sfc.delay_budget =
            (proc + static_cast<double>(sfc.dag_edges.size()) * inst.message_size / cfg.bandwidth.lo) *
            cfg.delay_budget_slack;
      }
    }

    inst.meta.seed = cfg.seed;
    validate(inst);
    return inst;
  }
  throw GenerationFailed("generate_instance: no valid instance after retries");
}

std::vector<Instance> generate_dataset(const std::vector<GenConfig>& configs, std::uint64_t seed) {
  std::vector<Instance> out;
  out.reserve(configs.size());
  for (std::size_t k = 0; k < configs.size(); ++k) {
    GenConfig cfg = configs[k];
    cfg.seed = derive_seed(seed, k);
    out.push_back(generate_instance(cfg));
  }
  return out;
}

DatasetSplit split_dataset(std::size_t num_instances, int train_count, std::uint64_t seed) {
  if (train_count < 0 || static_cast<std::size_t>(train_count) > num_instances) {
    throw BadCount("split_dataset: train_count out of range");
  }
  std::vector<int> order(num_instances);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = num_instances; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1));
    std::swap(order[i - 1], order[j]);
  }
  DatasetSplit split;
  split.train.assign(order.begin(), order.begin() + train_count);
  split.eval.assign(order.begin() + train_count, order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.eval.begin(), split.eval.end());
  return split;
}

GenConfig preset_config(const std::string& name) {
  GenConfig cfg;
  if (name == "tiny") {
    // Brute-forceable sizes: C <= 4 and F <= 6 keeps C^F <= 4096.
    cfg.num_clouds = {3, 4};
    cfg.num_sfcs = {1, 2};
    cfg.chain_length = {2, 3};
    cfg.num_cnf_types = {2, 3};
    cfg.dag_branch_prob = 0.25;
    cfg.link_density = 0.6;
    cfg.restriction_prob = 0.15;
    cfg.guarantee_feasible = true;
    return cfg;
  }
  if (name == "small") {
    cfg.num_clouds = {4, 6};
    cfg.num_sfcs = {2, 3};
    cfg.chain_length = {2, 4};
    cfg.num_cnf_types = {3, 5};
    cfg.dag_branch_prob = 0.25;
    cfg.link_density = 0.5;
    cfg.restriction_prob = 0.15;
    cfg.guarantee_feasible = true;
    return cfg;
  }
  if (name == "medium") {
    cfg.num_clouds = {6, 10};
    cfg.num_sfcs = {3, 5};
    cfg.chain_length = {3, 5};
    cfg.num_cnf_types = {4, 8};
    cfg.dag_branch_prob = 0.3;
    cfg.link_density = 0.4;
    cfg.restriction_prob = 0.2;
    cfg.guarantee_feasible = true;
    return cfg;
  }
  if (name == "hard") {
    // Scaling preset: wide cost spread and loose resources keep the exact
    // search cost-bound-driven so runtime tracks the cloud count.
    cfg.num_clouds = {4, 4};  // cycled over 4/6/8/10 by preset_dataset_configs
    cfg.num_sfcs = {2, 2};
    cfg.chain_length = {3, 4};
    cfg.num_cnf_types = {4, 6};
    cfg.dag_branch_prob = 0.2;
    cfg.cpu_capacity = {24.0, 48.0};
    cfg.ram_capacity = {32.0, 96.0};
    cfg.link_density = 0.7;
    cfg.restriction_prob = 0.0;
    cfg.guarantee_feasible = true;
    return cfg;
  }
  throw ValidationError("unknown preset '" + name + "'");
}

std::vector<std::string> preset_names() { return {"tiny", "small", "medium", "hard"}; }

std::vector<GenConfig> preset_dataset_configs(const std::string& name, int count) {
  if (count < 0) throw BadCount("preset_dataset_configs: negative count");
  std::vector<GenConfig> configs;
  configs.reserve(static_cast<std::size_t>(count));
  const GenConfig base = preset_config(name);
  const int cloud_buckets[] = {4, 6, 8, 10};
  for (int k = 0; k < count; ++k) {
    GenConfig cfg = base;
    if (name == "hard") {
      const int c = cloud_buckets[k % 4];
      cfg.num_clouds = {c, c};
    }
    configs.push_back(cfg);
  }
  return configs;
}

}  // namespace cnfdiff
