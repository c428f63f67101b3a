#include "cnfdiff/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace cnfdiff {

namespace {

constexpr double kAlphaBarFloor = 1e-8;
constexpr double kSigmaFloor = 1e-8;  // log-sigma input guard at t = 0

double cosine_profile(double t, double timesteps) {
  constexpr double s = 0.008;
  const double x = ((t / timesteps) + s) / (1.0 + s) * 1.5707963267948966;
  const double c = std::cos(x);
  return c * c;
}

}  // namespace

std::uint64_t NoiseSchedule::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  mix(&timesteps, sizeof(timesteps));
  mix(alpha_bar.data(), alpha_bar.size() * sizeof(double));
  mix(sigma.data(), sigma.size() * sizeof(double));
  return h;
}

NoiseSchedule cosine_schedule(int timesteps) {
  if (timesteps < 1) throw ValidationError("cosine_schedule: need at least one step");
  NoiseSchedule s;
  s.timesteps = timesteps;
  s.alpha_bar.resize(timesteps + 1);
  s.sigma.resize(timesteps + 1);
  const double f0 = cosine_profile(0.0, timesteps);
  for (int t = 0; t <= timesteps; ++t) {
    double ab = cosine_profile(static_cast<double>(t), timesteps) / f0;
    ab = std::max(ab, kAlphaBarFloor);  // only the endpoint ever clamps
    s.alpha_bar[t] = ab;
    s.sigma[t] = std::sqrt(1.0 - ab);
  }
  return s;
}

Grid<double> forward_noise(const Grid<double>& y0, int t, const Grid<double>& noise,
                           const Grid<std::uint8_t>& mask, const NoiseSchedule& schedule) {
  if (t < 0 || t > schedule.timesteps) throw ValidationError("forward_noise: t out of range");
  if (!y0.same_shape(noise) || y0.rows() != mask.rows() || y0.cols() != mask.cols()) {
    throw ShapeMismatch("forward_noise: shape mismatch");
  }
  const double root_ab = std::sqrt(schedule.alpha_bar[t]);
  const double sig = schedule.sigma[t];
  Grid<double> out(y0.rows(), y0.cols(), 0.0);
  for (std::size_t i = 0; i < y0.size(); ++i) {
    if (mask.flat()[i]) {
      out.flat()[i] = root_ab * y0.flat()[i] + sig * noise.flat()[i];
    }
  }
  return out;
}

Grid<double> reconstruct_y0(const Grid<double>& y_t, const Grid<double>& eps, int t,
                            const NoiseSchedule& schedule) {
  if (t < 0 || t > schedule.timesteps) throw ValidationError("reconstruct_y0: t out of range");
  if (!y_t.same_shape(eps)) throw ShapeMismatch("reconstruct_y0: shape mismatch");
  const double ab = std::max(schedule.alpha_bar[t], 1e-12);
  const double inv_root_ab = 1.0 / std::sqrt(ab);
  const double sig = schedule.sigma[t];
  Grid<double> out(y_t.rows(), y_t.cols(), 0.0);
  for (std::size_t i = 0; i < y_t.size(); ++i) {
    out.flat()[i] = (y_t.flat()[i] - sig * eps.flat()[i]) * inv_root_ab;
  }
  return out;
}

Grid<double> masked_softmax(const Grid<double>& scores, const Grid<std::uint8_t>& mask) {
  if (scores.rows() != mask.rows() || scores.cols() != mask.cols()) {
    throw ShapeMismatch("masked_softmax: shape mismatch");
  }
  Grid<double> out(scores.rows(), scores.cols(), 0.0);
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    double mx = -1e308;
    bool any = false;
    for (std::size_t c = 0; c < scores.cols(); ++c) {
      if (mask(r, c)) {
        any = true;
        mx = std::max(mx, scores(r, c));
      }
    }
    if (!any) throw AllMaskedRow("masked_softmax: row " + std::to_string(r) + " fully masked");
    double denom = 0.0;
    for (std::size_t c = 0; c < scores.cols(); ++c) {
      if (mask(r, c)) denom += std::exp(scores(r, c) - mx);
    }
    for (std::size_t c = 0; c < scores.cols(); ++c) {
      if (mask(r, c)) out(r, c) = std::exp(scores(r, c) - mx) / denom;
    }
  }
  return out;
}

Grid<double> masked_normal(Rng& rng, const Grid<std::uint8_t>& mask) {
  Grid<double> out(mask.rows(), mask.cols(), 0.0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    // Draw unconditionally so the stream length never depends on the mask.
    const double z = rng.normal();
    if (mask.flat()[i]) out.flat()[i] = z;
  }
  return out;
}

std::vector<Tensor> DenoiserModel::parameters() const {
  std::vector<Tensor> params;
  for (const auto& [name, t] : named_parameters()) params.push_back(t);
  return params;
}

std::vector<std::pair<std::string, Tensor>> DenoiserModel::named_parameters() const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back("cloud_type_embedding", cloud_type_embedding);
  out.emplace_back("cnf_restriction_embedding", cnf_restriction_embedding);
  auto add_mlp = [&out](const std::string& prefix, const Mlp& mlp) {
    for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
      out.emplace_back(prefix + ".w" + std::to_string(i), mlp.layers[i].weight);
      out.emplace_back(prefix + ".b" + std::to_string(i), mlp.layers[i].bias);
    }
  };
  auto add_sage = [&out](const std::string& prefix, const SageLayer& layer) {
    out.emplace_back(prefix + ".self_weight", layer.self_weight);
    out.emplace_back(prefix + ".neigh_weight", layer.neigh_weight);
    out.emplace_back(prefix + ".bias", layer.bias);
  };
  add_mlp("time_mlp", time_mlp);
  add_sage("cloud_enc0", cloud_enc0);
  add_sage("cloud_enc1", cloud_enc1);
  add_sage("cnf_enc0", cnf_enc0);
  add_sage("cnf_enc1", cnf_enc1);
  add_sage("cross_t2c", cross_t2c);
  add_sage("cross_c2t", cross_c2t);
  add_mlp("decoder", decoder);
  return out;
}

DenoiserModel make_denoiser(const DenoiserConfig& config, std::uint64_t seed) {
  if (config.hidden_dim < 1 || config.embed_dim < 1 || config.max_clouds < 1) {
    throw ValidationError("make_denoiser: bad architecture dimensions");
  }
  const auto d = static_cast<std::size_t>(config.hidden_dim);
  const auto e = static_cast<std::size_t>(config.embed_dim);
  const std::size_t in_dim = 3 + e;

  Rng rng(derive_seed(seed, 0x6d6f64656cULL));
  DenoiserModel m;
  m.config = config;
  m.init_seed = seed;
  m.cloud_type_embedding =
      Tensor::param({static_cast<std::size_t>(kCloudTypeBuckets), e},
                    glorot_uniform(rng, static_cast<std::size_t>(kCloudTypeBuckets), e));
  m.cnf_restriction_embedding =
      Tensor::param({static_cast<std::size_t>(config.max_clouds) + 1, e},
                    glorot_uniform(rng, static_cast<std::size_t>(config.max_clouds) + 1, e));
  m.time_mlp = Mlp(rng, {1, d, d});
  m.cloud_enc0 = SageLayer(rng, d, in_dim, in_dim, 1);
  m.cloud_enc1 = SageLayer(rng, d, d, d, 1);
  m.cnf_enc0 = SageLayer(rng, d, in_dim, in_dim, 4);
  m.cnf_enc1 = SageLayer(rng, d, d, d, 4);
  m.cross_t2c = SageLayer(rng, d, d, d, 0);
  m.cross_c2t = SageLayer(rng, d, d, d, 0);
  m.decoder = Mlp(rng, {2 * d + 1, d, d, 1});
  return m;
}

Tensor denoise_predict(const DenoiserModel& model, const HeteroGraph& graph,
                       const Grid<double>& y_t, double sigma_t) {
  const auto f_total = static_cast<std::size_t>(graph.num_positions);
  const auto c_total = static_cast<std::size_t>(graph.num_clouds);
  if (y_t.rows() != f_total || y_t.cols() != c_total) {
    throw ShapeMismatch("denoise_predict: assignment matrix shape mismatch");
  }
  if (graph.num_clouds > model.config.max_clouds) {
    throw ShapeMismatch("denoise_predict: instance exceeds the model's cloud capacity");
  }

  // Raw features augmented with the learned embeddings.
  const Tensor cloud_emb = gather_rows(model.cloud_type_embedding, graph.cloud_type_ids);
  std::vector<int> restr_ids = graph.cnf_restriction_ids;
  const int unrestricted = model.config.max_clouds;  // last table row
  for (int& id : restr_ids) {
    if (id >= graph.num_clouds) id = unrestricted;
  }
  const Tensor cnf_emb = gather_rows(model.cnf_restriction_embedding, restr_ids);
  Tensor x_c = concat_cols({Tensor::constant(graph.cloud_feats), cloud_emb});
  Tensor x_t = concat_cols({Tensor::constant(graph.cnf_feats), cnf_emb});

  Tensor h_c = sage_forward(model.cloud_enc0, x_c, x_c, graph.cc_edges, graph.cc_attrs);
  h_c = sage_forward(model.cloud_enc1, h_c, h_c, graph.cc_edges, graph.cc_attrs);
  Tensor h_t = sage_forward(model.cnf_enc0, x_t, x_t, graph.tt_edges, graph.tt_attrs);
  h_t = sage_forward(model.cnf_enc1, h_t, h_t, graph.tt_edges, graph.tt_attrs);

  // Noise-level conditioning, shared by every node vector.
  const double log_sigma = std::log(std::max(sigma_t, kSigmaFloor));
  const Tensor t_emb = mlp_forward(model.time_mlp, Tensor::constant({1, 1}, {log_sigma}));
  h_c = add_rowvec(h_c, t_emb);
  h_t = add_rowvec(h_t, t_emb);

  // Residual bipartite mixing (clouds first, then positions see the update).
  const Grid<double> no_attrs_tc(graph.tc_edges.size(), 0, 0.0);
  const Grid<double> no_attrs_ct(graph.ct_edges.size(), 0, 0.0);
  Tensor h_c2 = add(h_c, sage_forward(model.cross_t2c, h_t, h_c, graph.tc_edges, no_attrs_tc));
  Tensor h_t2 = add(h_t, sage_forward(model.cross_c2t, h_c2, h_t, graph.ct_edges, no_attrs_ct));

  // Pairwise decode over allowed pairs only; forbidden entries stay zero.
  std::vector<int> pair_f, pair_c;
  pair_f.reserve(graph.tc_edges.size());
  pair_c.reserve(graph.tc_edges.size());
  std::vector<double> y_vals;
  y_vals.reserve(graph.tc_edges.size());
  for (const auto& [f, c] : graph.tc_edges) {
    pair_f.push_back(f);
    pair_c.push_back(c);
    y_vals.push_back(y_t(f, c));
  }
  const Tensor y_col = Tensor::constant({y_vals.size(), 1}, y_vals);
  const Tensor pairs =
      concat_cols({gather_rows(h_t2, pair_f), gather_rows(h_c2, pair_c), y_col});
  const Tensor scores = mlp_forward(model.decoder, pairs);
  return scatter_rows(scores, pair_f, pair_c, f_total, c_total);
}

double capacity_scale(const Instance& instance) {
  double cpu = 0.0, ram = 0.0;
  const int c = instance.num_clouds();
  for (int i = 0; i < c; ++i) {
    cpu += instance.network.cpu_capacity[i];
    ram += instance.network.ram_capacity[i];
  }
  const double scale = (cpu + ram) / (2.0 * static_cast<double>(c));
  return std::max(scale, 1e-12);
}

ConstraintLossTerms constraint_losses(const Tensor& p, const Instance& instance,
                                      const HeteroGraph& graph) {
  const FlatIndex flat = flatten_index(instance);
  const auto f_total = static_cast<std::size_t>(flat.rows());
  const auto c_total = static_cast<std::size_t>(instance.num_clouds());
  if (p.rows() != f_total || p.cols() != c_total) {
    throw ShapeMismatch("constraint_losses: P shape mismatch");
  }

  ConstraintLossTerms terms;

  // Expected resource usage: usage = P^T demand.
  std::vector<double> cpu_demand(f_total), ram_demand(f_total);
  for (int f = 0; f < flat.rows(); ++f) {
    const auto [h, j] = flat.to_pos[f];
    cpu_demand[f] = instance.type_of(h, j).cpu_demand;
    ram_demand[f] = instance.type_of(h, j).ram_demand;
  }
  const Tensor cpu_vec = Tensor::constant({f_total, 1}, std::move(cpu_demand));
  const Tensor ram_vec = Tensor::constant({f_total, 1}, std::move(ram_demand));
  Tensor cpu_cap = Tensor::constant({c_total, 1}, instance.network.cpu_capacity);
  Tensor ram_cap = Tensor::constant({c_total, 1}, instance.network.ram_capacity);
  const Tensor cpu_over = relu(sub(matmul_tn(p, cpu_vec), cpu_cap));
  const Tensor ram_over = relu(sub(matmul_tn(p, ram_vec), ram_cap));
  terms.cap = scale(add(sum(cpu_over), sum(ram_over)), 1.0 / capacity_scale(instance));

  // Forbidden-pair mass; identically zero after masking but kept as a
  // safeguard against pipeline regressions.
  Grid<double> inv_mask(f_total, c_total, 0.0);
  for (std::size_t i = 0; i < inv_mask.size(); ++i) {
    inv_mask.flat()[i] = graph.mask.flat()[i] ? 0.0 : 1.0;
  }
  terms.rest = sum(mul(p, Tensor::constant(inv_mask)));

  // Pairwise cloud masks shared by the adjacency / bandwidth / delay terms.
  Grid<double> nonadj(c_total, c_total, 0.0);
  Grid<double> hop_cost(c_total, c_total, 0.0);  // kappa / c_ij over linked pairs
  for (std::size_t i = 0; i < c_total; ++i) {
    for (std::size_t k = 0; k < c_total; ++k) {
      if (i == k) continue;
      const double bw = instance.network.bandwidth(i, k);
      if (bw > 0.0) {
        hop_cost(i, k) = instance.message_size / bw;
      } else {
        nonadj(i, k) = 1.0;
      }
    }
  }
  const Tensor nonadj_t = Tensor::constant(nonadj);
  const Tensor hop_cost_t = Tensor::constant(hop_cost);

  Tensor adj_total = Tensor::scalar(0.0);
  Tensor load = Tensor::zeros({c_total, c_total});
  // Expected transmission delay per DAG edge, keyed by (sfc, edge index).
  std::vector<std::vector<Tensor>> edge_hop_delay(instance.sfcs.size());
  for (std::size_t h = 0; h < instance.sfcs.size(); ++h) {
    const Sfc& sfc = instance.sfcs[h];
    edge_hop_delay[h].reserve(sfc.dag_edges.size());
    for (const auto& e : sfc.dag_edges) {
      const int fa = flat.row(static_cast<int>(h), e.from);
      const int fb = flat.row(static_cast<int>(h), e.to);
      const Tensor row_a = gather_rows(p, {fa});
      const Tensor row_b = gather_rows(p, {fb});
      const Tensor outer = matmul_tn(row_a, row_b);  // [C, C] joint mass
      adj_total = add(adj_total, sum(mul(outer, nonadj_t)));
      edge_hop_delay[h].push_back(sum(mul(outer, hop_cost_t)));
      load = add(load, scale(outer, e.rate));
    }
  }
  terms.adj = adj_total;

  Grid<double> linked(c_total, c_total, 0.0);
  for (std::size_t i = 0; i < c_total; ++i) {
    for (std::size_t k = 0; k < c_total; ++k) {
      if (i != k && instance.network.bandwidth(i, k) > 0.0) linked(i, k) = 1.0;
    }
  }
  Grid<double> bw_cap(c_total, c_total, 0.0);
  for (std::size_t i = 0; i < bw_cap.size(); ++i) {
    bw_cap.flat()[i] = instance.network.bandwidth.flat()[i];
  }
  terms.bw = sum(relu(mul(sub(load, Tensor::constant(bw_cap)), Tensor::constant(linked))));

  // Delay: longest expected root->sink path per SFC (argmax on values, the
  // chosen edges keep their gradients), hinged against the budget.
  Tensor delay_total = Tensor::scalar(0.0);
  for (std::size_t h = 0; h < instance.sfcs.size(); ++h) {
    const Sfc& sfc = instance.sfcs[h];
    const int len = sfc.length();
    std::vector<std::vector<std::pair<int, std::size_t>>> out_edges(len);  // (to, edge index)
    for (std::size_t e = 0; e < sfc.dag_edges.size(); ++e) {
      out_edges[sfc.dag_edges[e].from].emplace_back(sfc.dag_edges[e].to, e);
    }
    std::vector<double> dist(len, 0.0);
    std::vector<std::ptrdiff_t> choice(len, -1);
    for (int j = len - 1; j >= 0; --j) {
      const double proc = instance.type_of(static_cast<int>(h), j).proc_delay;
      if (out_edges[j].empty()) {
        dist[j] = proc;
        continue;
      }
      double best = -1.0;
      for (std::size_t q = 0; q < out_edges[j].size(); ++q) {
        const auto [to, te] = out_edges[j][q];
        const double cand = edge_hop_delay[h][te].item() + dist[to];
        if (cand > best) {
          best = cand;
          choice[j] = static_cast<std::ptrdiff_t>(q);
        }
      }
      dist[j] = proc + best;
    }
    double proc_on_path = 0.0;
    Tensor path_hops = Tensor::scalar(0.0);
    int j = 0;
    while (true) {
      proc_on_path += instance.type_of(static_cast<int>(h), j).proc_delay;
      if (choice[j] < 0) break;
      const auto [to, te] = out_edges[j][static_cast<std::size_t>(choice[j])];
      path_hops = add(path_hops, edge_hop_delay[h][te]);
      j = to;
    }
    const Tensor path_delay = add(path_hops, Tensor::scalar(proc_on_path));
    delay_total = add(delay_total, relu(sub(path_delay, Tensor::scalar(sfc.delay_budget))));
  }
  terms.delay = delay_total;

  terms.place = masked_entropy_mean(p, graph.mask);
  return terms;
}

}  // namespace cnfdiff
