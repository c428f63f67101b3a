#include "cnfdiff/nn.hpp"

#include "gradcheck.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace cnfdiff;
using namespace cnfdiff::test;

namespace {

Tensor random_const(Rng& rng, std::vector<std::size_t> shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  std::vector<double> vals(n);
  for (double& v : vals) v = rng.uniform(-1.0, 1.0);
  return Tensor::constant(std::move(shape), std::move(vals));
}

}  // namespace

TEST_CASE("dense layer with identity weight and zero bias is the identity") {
  Rng rng(1);
  DenseLayer layer(rng, 3, 3);
  std::fill(layer.weight.values().begin(), layer.weight.values().end(), 0.0);
  for (int i = 0; i < 3; ++i) layer.weight.values()[i * 3 + i] = 1.0;
  Tensor x = Tensor::constant({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor y = dense_forward(layer, x);
  CHECK(y.values() == x.values());
}

TEST_CASE("dense layer with zero weight returns the bias") {
  Rng rng(2);
  DenseLayer layer(rng, 2, 3);
  std::fill(layer.weight.values().begin(), layer.weight.values().end(), 0.0);
  layer.bias.values() = {7.0, -1.0};
  Tensor x = Tensor::constant({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor y = dense_forward(layer, x);
  CHECK(y.values() == std::vector<double>{7.0, -1.0, 7.0, -1.0});
}

TEST_CASE("dense layer rejects mismatched input width") {
  Rng rng(3);
  DenseLayer layer(rng, 2, 3);
  CHECK_THROWS_AS(dense_forward(layer, Tensor::constant({1, 4}, {1, 2, 3, 4})), ShapeMismatch);
}

TEST_CASE("dense gradients match finite differences on random shapes") {
  Rng rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const auto out_d = static_cast<std::size_t>(rng.uniform_int(1, 5));
    const auto in_d = static_cast<std::size_t>(rng.uniform_int(1, 5));
    const auto batch = static_cast<std::size_t>(rng.uniform_int(1, 4));
    DenseLayer layer(rng, out_d, in_d);
    Tensor x = random_const(rng, {batch, in_d});
    auto forward = [&]() {
      Tensor y = dense_forward(layer, x);
      return sum(mul(y, y));
    };
    const auto res = finite_difference_check({layer.weight, layer.bias}, forward);
    CHECK(res.max_rel_error < 1e-4);
  }
}

TEST_CASE("mlp gradients match finite differences") {
  Rng rng(43);
  for (int trial = 0; trial < 10; ++trial) {
    Mlp mlp(rng, {3, 4, 2});
    Tensor x = random_const(rng, {2, 3});
    auto forward = [&]() {
      Tensor y = mlp_forward(mlp, x);
      return sum(mul(y, y));
    };
    std::vector<Tensor> params;
    for (const auto& l : mlp.layers) {
      params.push_back(l.weight);
      params.push_back(l.bias);
    }
    const auto res = finite_difference_check(params, forward);
    CHECK(res.max_rel_error < 1e-4);
  }
}

TEST_CASE("sage layer with no edges reduces to the self path") {
  Rng rng(44);
  SageLayer layer(rng, 4, 3, 3, 2);
  Tensor h = random_const(rng, {3, 3});
  Grid<double> attrs(0, 2, 0.0);
  Tensor out = sage_forward(layer, h, h, {}, attrs);

  // reference: relu(W_self h + b)
  Tensor ref = relu(add_rowvec(matmul_nt(h, layer.self_weight), layer.bias));
  for (std::size_t i = 0; i < out.size(); ++i) {
    CHECK(out.values()[i] == doctest::Approx(ref.values()[i]));
  }
}

TEST_CASE("sage neighbour term of a single edge is [h_u || attr]") {
  Rng rng(45);
  SageLayer layer(rng, 2, 2, 2, 1);
  std::fill(layer.self_weight.values().begin(), layer.self_weight.values().end(), 0.0);
  layer.bias.values() = {0.0, 0.0};
  // neigh weight = identity over the 3-dim [h_u || a]: pick rows to read it out
  std::fill(layer.neigh_weight.values().begin(), layer.neigh_weight.values().end(), 0.0);
  layer.neigh_weight.values()[0 * 3 + 0] = 1.0;  // out0 = h_u[0]
  layer.neigh_weight.values()[1 * 3 + 2] = 1.0;  // out1 = attr
  Tensor h = Tensor::constant({2, 2}, {0.5, -0.25, 2.0, 3.0});
  Grid<double> attrs(1, 1, 0.0);
  attrs(0, 0) = 9.0;
  Tensor out = sage_forward(layer, h, h, {{0, 1}}, attrs);
  CHECK(out.values()[1 * 2 + 0] == doctest::Approx(0.5));
  CHECK(out.values()[1 * 2 + 1] == doctest::Approx(9.0));
}

TEST_CASE("sage gradients with edge attrs match finite differences") {
  Rng rng(46);
  for (int trial = 0; trial < 10; ++trial) {
    const auto d_in = static_cast<std::size_t>(rng.uniform_int(1, 4));
    const auto d_out = static_cast<std::size_t>(rng.uniform_int(1, 4));
    const auto attr_d = static_cast<std::size_t>(rng.uniform_int(0, 2));
    const int nodes = 6;
    SageLayer layer(rng, d_out, d_in, d_in, attr_d);
    Tensor h = random_const(rng, {static_cast<std::size_t>(nodes), d_in});
    std::vector<std::pair<int, int>> edges;
    for (int e = 0; e < 8; ++e) {
      edges.emplace_back(static_cast<int>(rng.uniform_int(0, nodes - 1)),
                         static_cast<int>(rng.uniform_int(0, nodes - 1)));
    }
    Grid<double> attrs(edges.size(), attr_d, 0.0);
    for (double& v : attrs.flat()) v = rng.uniform(-1.0, 1.0);
    auto forward = [&]() {
      Tensor y = sage_forward(layer, h, h, edges, attrs);
      return sum(mul(y, y));
    };
    const auto res =
        finite_difference_check({layer.self_weight, layer.neigh_weight, layer.bias}, forward);
    CHECK(res.max_rel_error < 1e-4);
  }
}

TEST_CASE("sage_forward is permutation-equivariant") {
  Rng rng(47);
  SageLayer layer(rng, 3, 3, 3, 1);
  const int nodes = 5;
  Tensor h = random_const(rng, {static_cast<std::size_t>(nodes), 3});
  std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}, {3, 4}, {4, 0}, {2, 3}};
  Grid<double> attrs(edges.size(), 1, 0.0);
  for (double& v : attrs.flat()) v = rng.uniform(0.0, 1.0);
  const Tensor base = sage_forward(layer, h, h, edges, attrs);

  std::vector<int> perm(nodes);
  std::iota(perm.begin(), perm.end(), 0);
  std::swap(perm[0], perm[3]);
  std::swap(perm[1], perm[4]);
  // permuted inputs
  std::vector<double> hv(nodes * 3);
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < 3; ++j) hv[perm[i] * 3 + j] = h.values()[i * 3 + j];
  }
  Tensor hp = Tensor::constant({static_cast<std::size_t>(nodes), 3}, hv);
  std::vector<std::pair<int, int>> pedges;
  for (const auto& [u, v] : edges) pedges.emplace_back(perm[u], perm[v]);
  const Tensor permuted = sage_forward(layer, hp, hp, pedges, attrs);
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(permuted.values()[perm[i] * 3 + j] ==
            doctest::Approx(base.values()[i * 3 + j]).epsilon(1e-12));
    }
  }
}

TEST_CASE("adam leaves parameters untouched under zero gradients") {
  Tensor w = Tensor::param({3}, {1.0, -2.0, 0.5});
  Adam opt(0.05);
  opt.register_param(w);
  const auto before = w.values();
  opt.step();
  CHECK(w.values() == before);
}

TEST_CASE("adam under a constant gradient decreases the parameter monotonically") {
  Tensor w = Tensor::param({1}, {1.0});
  Adam opt(0.01);
  opt.register_param(w);
  double prev = w.values()[0];
  for (int i = 0; i < 50; ++i) {
    w.grad()[0] = 2.5;  // constant positive gradient
    opt.step();
    CHECK(w.values()[0] < prev);
    prev = w.values()[0];
  }
}

TEST_CASE("adam solves the quadratic bowl") {
  Rng rng(48);
  const std::size_t dim = 8;
  std::vector<double> target(dim), start(dim);
  for (double& v : target) v = rng.uniform(-1.0, 1.0);
  double norm = 0.0;
  for (double& v : start) {
    v = rng.uniform(-1.0, 1.0);
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (std::size_t i = 0; i < dim; ++i) start[i] = target[i] + start[i] / norm;  // unit distance

  Tensor w = Tensor::param({dim}, start);
  Tensor t = Tensor::constant({dim}, target);
  Adam opt(1e-2);
  opt.register_param(w);
  for (int it = 0; it < 500; ++it) {
    Tensor d = sub(w, t);
    Tensor loss = sum(mul(d, d));
    backward(loss);
    opt.step();
  }
  double dist = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = w.values()[i] - target[i];
    dist += d * d;
  }
  CHECK(std::sqrt(dist) < 1e-2);
}

TEST_CASE("glorot init is seeded and in range") {
  Rng a(7), b(7), c(8);
  const auto va = glorot_uniform(a, 4, 6);
  const auto vb = glorot_uniform(b, 4, 6);
  const auto vc = glorot_uniform(c, 4, 6);
  CHECK(va == vb);
  CHECK(va != vc);
  const double bound = std::sqrt(6.0 / 10.0);
  for (double v : va) CHECK(std::abs(v) <= bound);
}
