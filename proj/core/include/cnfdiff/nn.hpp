#pragma once

#include "cnfdiff/autodiff.hpp"
#include "cnfdiff/rng.hpp"

#include <string>
#include <utility>
#include <vector>

namespace cnfdiff {

// Uniform +-sqrt(6/(fan_in+fan_out)) initialization.
std::vector<double> glorot_uniform(Rng& rng, std::size_t fan_out, std::size_t fan_in);

struct DenseLayer {
  Tensor weight;  // [out, in]
  Tensor bias;    // [out]

  DenseLayer() = default;
  DenseLayer(Rng& rng, std::size_t out_dim, std::size_t in_dim);

  std::size_t in_dim() const { return weight.cols(); }
  std::size_t out_dim() const { return weight.rows(); }
};

// y = x W^T + b for a batch of row vectors.
Tensor dense_forward(const DenseLayer& layer, const Tensor& x);

// Dense stack with rectifier between layers; `activate_last` controls the
// output activation (noise predictions are unconstrained, so the decoder
// leaves it off).
struct Mlp {
  std::vector<DenseLayer> layers;

  Mlp() = default;
  Mlp(Rng& rng, const std::vector<std::size_t>& dims);
};

Tensor mlp_forward(const Mlp& mlp, const Tensor& x, bool activate_last = false);

// Edge-attributed mean-aggregation convolution:
//   out_v = act(W_self h_v + W_neigh mean_{(u->v)}[h_u || a_uv] + b)
// Nodes without in-edges keep only the self term (plus bias).
struct SageLayer {
  Tensor self_weight;   // [out, in_dst]
  Tensor neigh_weight;  // [out, in_src + edge_attr_dim]
  Tensor bias;          // [out]

  SageLayer() = default;
  SageLayer(Rng& rng, std::size_t out_dim, std::size_t in_dst, std::size_t in_src,
            std::size_t edge_attr_dim);
};

// `src` and `dst` may be the same tensor (homogeneous graph) or differ
// (bipartite cross-convolution). `edges` are (src, dst) index pairs.
Tensor sage_forward(const SageLayer& layer, const Tensor& src, const Tensor& dst,
                    const std::vector<std::pair<int, int>>& edges, const Grid<double>& edge_attrs,
                    bool apply_activation = true);

// Adaptive-moment optimizer with bias correction. Parameters are registered
// once; step() consumes the accumulated gradients and zeroes them.
class Adam {
public:
  explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void register_param(const Tensor& param);
  void register_params(const std::vector<Tensor>& params);

  void step();
  void zero_grad();

  double learning_rate() const { return lr_; }
  long long step_count() const { return step_count_; }

private:
  struct Slot {
    Tensor param;
    std::vector<double> m;
    std::vector<double> v;
  };

  double lr_, beta1_, beta2_, eps_;
  long long step_count_ = 0;
  std::vector<Slot> slots_;
};

}  // namespace cnfdiff
