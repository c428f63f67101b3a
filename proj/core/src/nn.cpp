#include "cnfdiff/nn.hpp"

#include <cmath>

namespace cnfdiff {

std::vector<double> glorot_uniform(Rng& rng, std::size_t fan_out, std::size_t fan_in) {
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> out(fan_out * fan_in);
  for (double& v : out) v = rng.uniform(-bound, bound);
  return out;
}

DenseLayer::DenseLayer(Rng& rng, std::size_t out_dim, std::size_t in_dim) {
  weight = Tensor::param({out_dim, in_dim}, glorot_uniform(rng, out_dim, in_dim));
  bias = Tensor::param({1, out_dim}, std::vector<double>(out_dim, 0.0));
}

Tensor dense_forward(const DenseLayer& layer, const Tensor& x) {
  return add_rowvec(matmul_nt(x, layer.weight), layer.bias);
}

Mlp::Mlp(Rng& rng, const std::vector<std::size_t>& dims) {
  if (dims.size() < 2) throw ShapeMismatch("mlp: need at least input and output dims");
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    layers.emplace_back(rng, dims[i + 1], dims[i]);
  }
}

Tensor mlp_forward(const Mlp& mlp, const Tensor& x, bool activate_last) {
  Tensor h = x;
  for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
    h = dense_forward(mlp.layers[i], h);
    if (i + 1 < mlp.layers.size() || activate_last) h = relu(h);
  }
  return h;
}

SageLayer::SageLayer(Rng& rng, std::size_t out_dim, std::size_t in_dst, std::size_t in_src,
                     std::size_t edge_attr_dim) {
  self_weight = Tensor::param({out_dim, in_dst}, glorot_uniform(rng, out_dim, in_dst));
  neigh_weight =
      Tensor::param({out_dim, in_src + edge_attr_dim}, glorot_uniform(rng, out_dim, in_src + edge_attr_dim));
  bias = Tensor::param({1, out_dim}, std::vector<double>(out_dim, 0.0));
}

Tensor sage_forward(const SageLayer& layer, const Tensor& src, const Tensor& dst,
                    const std::vector<std::pair<int, int>>& edges, const Grid<double>& edge_attrs,
                    bool apply_activation) {
  if (src.cols() + edge_attrs.cols() != layer.neigh_weight.cols()) {
    throw ShapeMismatch("sage_forward: neighbour weight does not match src/attr dims");
  }
  if (dst.cols() != layer.self_weight.cols()) {
    throw ShapeMismatch("sage_forward: self weight does not match dst dim");
  }
  const Tensor agg = edge_mean_aggregate(src, edges, edge_attrs, dst.rows());
  Tensor out = add(matmul_nt(dst, layer.self_weight), matmul_nt(agg, layer.neigh_weight));
  out = add_rowvec(out, layer.bias);
  return apply_activation ? relu(out) : out;
}

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::register_param(const Tensor& param) {
  if (!param.requires_grad()) {
    throw ShapeMismatch("adam: registered tensor does not require gradients");
  }
  Slot slot;
  slot.param = param;
  slot.m.assign(param.size(), 0.0);
  slot.v.assign(param.size(), 0.0);
  slots_.push_back(std::move(slot));
}

void Adam::register_params(const std::vector<Tensor>& params) {
  for (const Tensor& p : params) register_param(p);
}

void Adam::step() {
  ++step_count_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
  for (Slot& slot : slots_) {
    auto& value = slot.param.values();
    auto& grad = slot.param.grad();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      slot.m[i] = beta1_ * slot.m[i] + (1.0 - beta1_) * g;
      slot.v[i] = beta2_ * slot.v[i] + (1.0 - beta2_) * g * g;
      const double m_hat = slot.m[i] / bc1;
      const double v_hat = slot.v[i] / bc2;
      value[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }
  zero_grad();
}

void Adam::zero_grad() {
  for (Slot& slot : slots_) slot.param.zero_grad();
}

}  // namespace cnfdiff
