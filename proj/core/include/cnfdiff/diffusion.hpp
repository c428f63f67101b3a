#pragma once

#include "cnfdiff/hetero.hpp"
#include "cnfdiff/nn.hpp"
#include "cnfdiff/placement.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cnfdiff {

// ---------------------------------------------------------------------------
// Noise schedule

// Precomputed variance-preserving schedule: alpha_bar[t] and
// sigma[t] = sqrt(1 - alpha_bar[t]) for t = 0..T. alpha_bar follows the
// cosine profile f(t)/f(0) with f(t) = cos^2(((t/T + s)/(1 + s)) * pi/2),
// s = 0.008, floored at 1e-8 so the t =T reconstruction stays numerically
// exact.
struct NoiseSchedule {
  int timesteps = 0;               // T
  std::vector<double> alpha_bar;   // size T+1
  std::vector<double> sigma;       // size T+1

  std::uint64_t hash() const;      // FNV-1a over the raw arrays
};

NoiseSchedule cosine_schedule(int timesteps);

// Y_t = sqrt(alpha_bar_t) * Y0 + sigma_t * (noise .* mask). Masked entries
// are exactly zero.
Grid<double> forward_noise(const Grid<double>& y0, int t, const Grid<double>& noise,
                           const Grid<std::uint8_t>& mask, const NoiseSchedule& schedule);

// Y0_hat = (Y_t - sigma_t * eps) / sqrt(alpha_bar_t), with the divisor
// clamped at sqrt(1e-12).
Grid<double> reconstruct_y0(const Grid<double>& y_t, const Grid<double>& eps, int t,
                            const NoiseSchedule& schedule);

// Row softmax over allowed entries; exactly zero on the rest. Throws
// AllMaskedRow on a row with no allowed cloud.
Grid<double> masked_softmax(const Grid<double>& scores, const Grid<std::uint8_t>& mask);

// Draws an i.i.d. standard normal matrix zeroed outside the mask.
Grid<double> masked_normal(Rng& rng, const Grid<std::uint8_t>& mask);

// ---------------------------------------------------------------------------
// Denoiser

struct DenoiserConfig {
  int hidden_dim = 64;          // shared width D of every sub-module
  int embed_dim = 8;            // cloud-type / restriction embedding width
  int max_clouds = 16;          // capacity of the restriction embedding table
};

// GNN noise predictor: learnable type/restriction embeddings concatenated
// onto raw node features, two edge-attributed SAGE encoders per node set, a
// log-sigma time embedding added to every node vector, residual bipartite
// cross-convolutions, and a pairwise MLP decoder over [h_t' || h_c' || y_fc].
struct DenoiserModel {
  DenoiserConfig config;
  std::uint64_t init_seed = 0;
  bool trained = false;  // sampling from a fresh model only warns

  Tensor cloud_type_embedding;       // [kCloudTypeBuckets, E]
  Tensor cnf_restriction_embedding;  // [max_clouds + 1, E]
  Mlp time_mlp;                      // 1 -> D -> D
  SageLayer cloud_enc0, cloud_enc1;  // cloud subgraph encoder
  SageLayer cnf_enc0, cnf_enc1;      // CNF chain subgraph encoder
  SageLayer cross_t2c, cross_c2t;    // bipartite mixing
  Mlp decoder;                       // 2D+1 -> D -> D -> 1

  std::vector<Tensor> parameters() const;
  std::vector<std::pair<std::string, Tensor>> named_parameters() const;
};

DenoiserModel make_denoiser(const DenoiserConfig& config, std::uint64_t seed);

// Predicted noise for every allowed (position, cloud) pair; forbidden pairs
// are exactly zero. Returns a graph-recorded tensor of shape F x C.
Tensor denoise_predict(const DenoiserModel& model, const HeteroGraph& graph,
                       const Grid<double>& y_t, double sigma_t);

// ---------------------------------------------------------------------------
// Constraint losses

struct LossWeights {
  double cap = 1.0;
  double rest = 1.0;
  double adj = 1.0;
  double bw = 1.0;
  double delay = 1.0;
  double place = 1.0;
};

struct ConstraintLossTerms {
  Tensor cap;    // hinge on expected cpu/ram overuse, divided by capacity_scale
  Tensor rest;   // probability mass on forbidden pairs (zero by masking)
  Tensor adj;    // expected mass of chain edges on non-adjacent cloud pairs
  Tensor bw;     // hinge on expected per-link rate overload
  Tensor delay;  // hinge on the longest expected path delay per SFC
  Tensor place;  // mean row entropy (confidence pressure)
};

// Normalizer for the capacity hinge: mean cloud capacity averaged over the
// two resources.
double capacity_scale(const Instance& instance);

// Differentiable expected-violation penalties, all computed from the
// row-stochastic matrix P.
ConstraintLossTerms constraint_losses(const Tensor& p, const Instance& instance,
                                      const HeteroGraph& graph);

// ---------------------------------------------------------------------------
// Training

struct TrainExample {
  Instance instance;
  Placement optimum;  // feasible minimum-cost placement (exact solver output)
};

struct Hyperparams {
  DenoiserConfig arch;
  int timesteps = 100;      // T
  int epochs = 300;
  int steps_per_epoch = 0;  // 0 = max(dataset size, 8)
  double learning_rate = 1e-3;
};

struct EpochStats {
  double denoise = 0.0;
  double cap = 0.0, rest = 0.0, adj = 0.0, bw = 0.0, delay = 0.0, place = 0.0;
  double total = 0.0;
};

struct TrainResult {
  DenoiserModel model;
  NoiseSchedule schedule;
  std::vector<EpochStats> trace;
};

// Per step: sample an instance and a timestep t ~ U[1, T], draw masked
// noise, form Y_t, predict, and minimize the masked epsilon-prediction
// error plus the weighted constraint losses on P(reconstructed Y0).
// Bit-for-bit deterministic under `seed`.
TrainResult train_denoiser(const std::vector<TrainExample>& data, const Hyperparams& params,
                           const LossWeights& weights, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Sampling

struct SampleCandidate {
  Placement placement;
  FeasibilityReport report;
  double cost = 0.0;
  int chain_index = 0;
};

struct SampleResult {
  // Feasible candidates by ascending cost, then infeasible ones by ascending
  // total violation magnitude.
  std::vector<SampleCandidate> candidates;
  int feasible_count = 0;
  bool best_feasible = false;  // candidates[0] (when present) passed all checks
};

// K independent reverse-diffusion chains with per-chain noise streams
// derived from (seed, chain index); each chain anneals Y_T = sigma_T * noise
// down to t = 0, then takes the masked row softmax and per-row argmax.
SampleResult sample_placements(const DenoiserModel& model, const Instance& instance, int k,
                               const NoiseSchedule& schedule, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Serialization (model.v1, train.v1, samples.v1)

std::string model_to_json_string(const DenoiserModel& model);
DenoiserModel model_from_json_string(const std::string& text);
void save_model(const DenoiserModel& model, const std::string& path);
DenoiserModel load_model(const std::string& path);

std::string train_log_to_json_string(const TrainResult& result, const Hyperparams& params,
                                     const LossWeights& weights, std::uint64_t seed);

std::string samples_to_json_string(const SampleResult& result, const std::string& instance_name,
                                   int k, std::uint64_t seed, int timesteps);

}  // namespace cnfdiff
