#include "cnfdiff/hetero.hpp"

#include <algorithm>
#include <cmath>

namespace cnfdiff {

namespace {

// Standardizes each column in place; zero-variance columns are centered
// only. Statistics are computed over rows, so relabeling nodes never
// changes them.
StandardStats standardize_columns(Grid<double>& g) {
  StandardStats stats;
  const std::size_t r = g.rows(), c = g.cols();
  stats.mean.assign(c, 0.0);
  stats.stddev.assign(c, 1.0);
  if (r == 0) return stats;
  for (std::size_t j = 0; j < c; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < r; ++i) sum += g(i, j);
    const double mean = sum / static_cast<double>(r);
    double var = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      const double d = g(i, j) - mean;
      var += d * d;
    }
    double sd = std::sqrt(var / static_cast<double>(r));
    if (sd < 1e-12) sd = 1.0;
    stats.mean[j] = mean;
    stats.stddev[j] = sd;
    for (std::size_t i = 0; i < r; ++i) g(i, j) = (g(i, j) - mean) / sd;
  }
  return stats;
}

// Capacity tier by value position within [min, max]; value-based so that
// relabeling clouds relabels tiers identically.
int capacity_tier(double value, double lo, double hi) {
  if (hi - lo < 1e-12) return 0;
  const double x = (value - lo) / (hi - lo);
  const int tier = static_cast<int>(x * kCloudTypeBuckets);
  return std::clamp(tier, 0, kCloudTypeBuckets - 1);
}

}  // namespace

HeteroGraph build_hetero_graph(const Instance& inst) {
  const FlatIndex flat = flatten_index(inst);
  const int c_total = inst.num_clouds();
  const int f_total = flat.rows();
  const int m_total = inst.num_types();

  HeteroGraph g;
  g.num_clouds = c_total;
  g.num_positions = f_total;

  g.cloud_feats = Grid<double>(c_total, 3, 0.0);
  for (int i = 0; i < c_total; ++i) {
    double mean_cost = 0.0;
    for (int m = 0; m < m_total; ++m) mean_cost += inst.placement_cost(i, m);
    mean_cost /= static_cast<double>(m_total);
    g.cloud_feats(i, 0) = inst.network.cpu_capacity[i];
    g.cloud_feats(i, 1) = inst.network.ram_capacity[i];
    g.cloud_feats(i, 2) = mean_cost;
  }
  const double cap_lo = *std::min_element(inst.network.cpu_capacity.begin(),
                                          inst.network.cpu_capacity.end());
  const double cap_hi = *std::max_element(inst.network.cpu_capacity.begin(),
                                          inst.network.cpu_capacity.end());
  g.cloud_type_ids.resize(c_total);
  for (int i = 0; i < c_total; ++i) {
    g.cloud_type_ids[i] = capacity_tier(inst.network.cpu_capacity[i], cap_lo, cap_hi);
  }

  g.cnf_feats = Grid<double>(f_total, 3, 0.0);
  g.mask = Grid<std::uint8_t>(f_total, c_total, 0);
  g.cnf_restriction_ids.resize(f_total);
  for (int f = 0; f < f_total; ++f) {
    const auto [h, j] = flat.to_pos[f];
    const CnfType& t = inst.type_of(h, j);
    g.cnf_feats(f, 0) = t.cpu_demand;
    g.cnf_feats(f, 1) = t.ram_demand;
    g.cnf_feats(f, 2) = t.proc_delay;
    int allowed = 0, only = -1;
    for (int i = 0; i < c_total; ++i) {
      if (inst.network.type_allowed(i, t.type_id)) {
        g.mask(f, i) = 1;
        ++allowed;
        only = i;
      }
    }
    if (allowed == 0) {
      throw UnplaceableCnf("build_hetero_graph: position " + std::to_string(f) +
                           " has no admissible cloud");
    }
    // Pinned positions embed their cloud; anything looser embeds the shared
    // "unrestricted" id -- the mask still enforces the true set.
    g.cnf_restriction_ids[f] = allowed == 1 ? only : c_total;
  }

  for (int i = 0; i < c_total; ++i) {
    for (int j = 0; j < c_total; ++j) {
      if (i != j && inst.network.bandwidth(i, j) > 0.0) g.cc_edges.emplace_back(i, j);
    }
  }
  g.cc_attrs = Grid<double>(g.cc_edges.size(), 1, 0.0);
  for (std::size_t e = 0; e < g.cc_edges.size(); ++e) {
    g.cc_attrs(e, 0) = inst.network.bandwidth(g.cc_edges[e].first, g.cc_edges[e].second);
  }

  for (std::size_t h = 0; h < inst.sfcs.size(); ++h) {
    const Sfc& sfc = inst.sfcs[h];
    for (const auto& e : sfc.dag_edges) {
      g.tt_edges.emplace_back(flat.row(static_cast<int>(h), e.from),
                              flat.row(static_cast<int>(h), e.to));
    }
  }
  g.tt_attrs = Grid<double>(g.tt_edges.size(), 4, 0.0);
  {
    std::size_t e = 0;
    for (std::size_t h = 0; h < inst.sfcs.size(); ++h) {
      const Sfc& sfc = inst.sfcs[h];
      for (const auto& edge : sfc.dag_edges) {
        g.tt_attrs(e, 0) = edge.rate;
        g.tt_attrs(e, 1) = sfc.delay_budget;
        g.tt_attrs(e, 2) = static_cast<double>(h);
        g.tt_attrs(e, 3) = static_cast<double>(edge.from);  // hop index within the chain
        ++e;
      }
    }
  }

  for (int f = 0; f < f_total; ++f) {
    for (int i = 0; i < c_total; ++i) {
      if (g.mask(f, i)) {
        g.tc_edges.emplace_back(f, i);
        g.ct_edges.emplace_back(i, f);
      }
    }
  }

  g.cloud_stats = standardize_columns(g.cloud_feats);
  g.cnf_stats = standardize_columns(g.cnf_feats);
  g.cc_stats = standardize_columns(g.cc_attrs);
  g.tt_stats = standardize_columns(g.tt_attrs);
  return g;
}

}  // namespace cnfdiff
