#include "cnfdiff/diffusion.hpp"

#include <cmath>

namespace cnfdiff {

namespace {

Grid<double> placement_to_grid(const Placement& p) {
  Grid<double> g(p.rows(), p.clouds(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) g.flat()[i] = p.assign.flat()[i];
  return g;
}

struct PreparedExample {
  const Instance* instance;
  HeteroGraph graph;
  Grid<double> y0;
  std::size_t allowed_entries;
};

}  // namespace

TrainResult train_denoiser(const std::vector<TrainExample>& data, const Hyperparams& params,
                           const LossWeights& weights, std::uint64_t seed) {
  if (data.empty()) throw ValidationError("train_denoiser: empty training set");
  if (params.epochs < 1) throw ValidationError("train_denoiser: need at least one epoch");

  std::vector<PreparedExample> prepared;
  prepared.reserve(data.size());
  for (const auto& ex : data) {
    if (!ex.optimum.complete()) {
      throw IncompletePlacement("train_denoiser: training label must be a complete placement");
    }
    PreparedExample pe{&ex.instance, build_hetero_graph(ex.instance),
                       placement_to_grid(ex.optimum), 0};
    for (std::uint8_t m : pe.graph.mask.flat()) pe.allowed_entries += m;
    prepared.push_back(std::move(pe));
  }

  TrainResult result;
  result.model = make_denoiser(params.arch, derive_seed(seed, 0));
  result.schedule = cosine_schedule(params.timesteps);

  Adam optimizer(params.learning_rate);
  optimizer.register_params(result.model.parameters());

  Rng rng(derive_seed(seed, 1));
  const int steps = params.steps_per_epoch > 0
                        ? params.steps_per_epoch
                        : static_cast<int>(std::max<std::size_t>(data.size(), 8));

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    EpochStats stats;
    for (int step = 0; step < steps; ++step) {
      const auto idx = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(prepared.size()) - 1));
      const PreparedExample& ex = prepared[idx];
      const int t = static_cast<int>(rng.uniform_int(1, params.timesteps));
      const double sigma_t = result.schedule.sigma[t];

      const Grid<double> noise = masked_normal(rng, ex.graph.mask);
      const Grid<double> y_t = forward_noise(ex.y0, t, noise, ex.graph.mask, result.schedule);

      const Tensor eps_hat = denoise_predict(result.model, ex.graph, y_t, sigma_t);

      // Masked epsilon-prediction error, averaged over allowed entries.
      const Tensor diff = sub(eps_hat, Tensor::constant(noise));
      const Tensor l_denoise =
          scale(sum(mul(diff, diff)), 1.0 / static_cast<double>(ex.allowed_entries));

      // Reconstruct Y0_hat on the graph so constraint gradients flow through
      // the prediction, then score the probability matrix.
      const double ab = std::max(result.schedule.alpha_bar[t], 1e-12);
      const Tensor y0_hat = scale(sub(Tensor::constant(y_t), scale(eps_hat, sigma_t)),
                                  1.0 / std::sqrt(ab));
      const Tensor p = masked_row_softmax(y0_hat, ex.graph.mask);
      const ConstraintLossTerms terms = constraint_losses(p, *ex.instance, ex.graph);

      Tensor total = l_denoise;
      total = add(total, scale(terms.cap, weights.cap));
      total = add(total, scale(terms.rest, weights.rest));
      total = add(total, scale(terms.adj, weights.adj));
      total = add(total, scale(terms.bw, weights.bw));
      total = add(total, scale(terms.delay, weights.delay));
      total = add(total, scale(terms.place, weights.place));

      backward(total);
      optimizer.step();

      stats.denoise += l_denoise.item();
      stats.cap += terms.cap.item();
      stats.rest += terms.rest.item();
      stats.adj += terms.adj.item();
      stats.bw += terms.bw.item();
      stats.delay += terms.delay.item();
      stats.place += terms.place.item();
      stats.total += total.item();
    }
    const double inv = 1.0 / static_cast<double>(steps);
    stats.denoise *= inv;
    stats.cap *= inv;
    stats.rest *= inv;
    stats.adj *= inv;
    stats.bw *= inv;
    stats.delay *= inv;
    stats.place *= inv;
    stats.total *= inv;
    result.trace.push_back(stats);
  }
  result.model.trained = true;
  return result;
}

}  // namespace cnfdiff
