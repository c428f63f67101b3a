#include "cnfdiff/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace cnfdiff {

namespace {

// One reverse-diffusion chain: anneal from the schedule's terminal noise
// level down to t = 0 following the three-step update, with every noise draw
// masked to allowed pairs.
Grid<double> reverse_chain(const DenoiserModel& model, const HeteroGraph& graph,
                           const NoiseSchedule& schedule, Rng& rng) {
  const int t_max = schedule.timesteps;
  Grid<double> y = masked_normal(rng, graph.mask);
  for (double& v : y.flat()) v *= schedule.sigma[t_max];

  Grid<double> y0_hat;
  for (int t = t_max - 1; t >= 0; --t) {
    const Tensor eps = denoise_predict(model, graph, y, schedule.sigma[t]);
    const Grid<double> eps_grid =
        Grid<double>::from_flat(y.rows(), y.cols(), eps.values());
    y0_hat = reconstruct_y0(y, eps_grid, t, schedule);
    if (t > 0) {
      const Grid<double> zeta = masked_normal(rng, graph.mask);
      const double mu_scale = std::sqrt(schedule.alpha_bar[t - 1]);
      const double noise_scale = schedule.sigma[t - 1];
      for (std::size_t i = 0; i < y.size(); ++i) {
        y.flat()[i] = mu_scale * y0_hat.flat()[i] + noise_scale * zeta.flat()[i];
      }
    }
  }
  return y0_hat;
}

}  // namespace

SampleResult sample_placements(const DenoiserModel& model, const Instance& instance, int k,
                               const NoiseSchedule& schedule, std::uint64_t seed) {
  if (k < 1) throw ValidationError("sample_placements: need k >= 1");
  if (!model.trained) {
    std::cerr << "cnfdiff: warning: sampling from an untrained model\n";
  }
  const HeteroGraph graph = build_hetero_graph(instance);

  SampleResult result;
  result.candidates.reserve(static_cast<std::size_t>(k));
  for (int chain = 0; chain < k; ++chain) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(chain)));
    const Grid<double> y0_hat = reverse_chain(model, graph, schedule, rng);
    const Grid<double> probs = masked_softmax(y0_hat, graph.mask);

    std::vector<int> assignment(probs.rows());
    for (std::size_t f = 0; f < probs.rows(); ++f) {
      std::size_t best = 0;
      for (std::size_t c = 1; c < probs.cols(); ++c) {
        if (probs(f, c) > probs(f, best)) best = c;
      }
      assignment[f] = static_cast<int>(best);
    }

    SampleCandidate cand;
    cand.placement = Placement::from_assignment(assignment, probs.cols());
    cand.report = check_feasibility(instance, cand.placement);
    cand.cost = total_cost(instance, cand.placement);
    cand.chain_index = chain;
    if (cand.report.feasible) ++result.feasible_count;
    result.candidates.push_back(std::move(cand));
  }

  std::stable_sort(result.candidates.begin(), result.candidates.end(),
                   [](const SampleCandidate& a, const SampleCandidate& b) {
                     if (a.report.feasible != b.report.feasible) return a.report.feasible;
                     if (a.report.feasible) return a.cost < b.cost;
                     return a.report.total_magnitude() < b.report.total_magnitude();
                   });
  result.best_feasible = !result.candidates.empty() && result.candidates[0].report.feasible;
  return result;
}

}  // namespace cnfdiff
