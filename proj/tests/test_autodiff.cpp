#include "cnfdiff/autodiff.hpp"

#include "cnfdiff/rng.hpp"
#include "gradcheck.hpp"

#include <doctest.h>

#include <cmath>

using namespace cnfdiff;
using namespace cnfdiff::test;

namespace {

Tensor random_param(Rng& rng, std::vector<std::size_t> shape, double lo = -1.0, double hi = 1.0) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  std::vector<double> vals(n);
  for (double& v : vals) v = rng.uniform(lo, hi);
  return Tensor::param(std::move(shape), std::move(vals));
}

}  // namespace

TEST_CASE("sum of squares gives grad 2x") {
  Tensor x = Tensor::param({4}, {1.0, -2.0, 3.0, 0.5});
  Tensor loss = sum(mul(x, x));
  backward(loss);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(x.grad()[i] == doctest::Approx(2.0 * x.values()[i]));
  }
}

TEST_CASE("loss detached from a parameter leaves its grad zero") {
  Tensor x = Tensor::param({2}, {1.0, 2.0});
  Tensor c = Tensor::constant({2}, {3.0, 4.0});
  Tensor loss = sum(mul(c, c));
  backward(loss);
  CHECK(x.grad()[0] == 0.0);
  CHECK(x.grad()[1] == 0.0);
}

TEST_CASE("backward twice on the same graph raises StaleTape") {
  Tensor x = Tensor::param({2}, {1.0, 2.0});
  Tensor loss = sum(mul(x, x));
  backward(loss);
  CHECK_THROWS_AS(backward(loss), StaleTape);
}

TEST_CASE("backward requires a scalar") {
  Tensor x = Tensor::param({3}, {1.0, 2.0, 3.0});
  Tensor y = mul(x, x);
  CHECK_THROWS_AS(backward(y), NotScalar);
}

TEST_CASE("shape mismatches are rejected") {
  Tensor a = Tensor::constant({2, 2}, {1, 2, 3, 4});
  Tensor b = Tensor::constant({2}, {1, 2});
  CHECK_THROWS_AS(add(a, b), ShapeMismatch);
  CHECK_THROWS_AS(matmul(a, Tensor::constant({3, 2}, {1, 2, 3, 4, 5, 6})), ShapeMismatch);
  CHECK_THROWS_AS(gather_rows(a, {5}), ShapeMismatch);
}

TEST_CASE("elementwise and matmul gradients match finite differences") {
  Rng rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = static_cast<std::size_t>(rng.uniform_int(1, 4));
    const auto k = static_cast<std::size_t>(rng.uniform_int(1, 4));
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 4));
    Tensor a = random_param(rng, {m, k});
    Tensor b = random_param(rng, {k, n});
    Tensor c = random_param(rng, {m, n});
    auto forward = [&]() {
      Tensor y = matmul(a, b);
      y = add(y, c);
      y = relu(y);
      return sum(mul(y, y));
    };
    const auto res = finite_difference_check({a, b, c}, forward);
    CHECK(res.max_rel_error < 1e-4);
  }
}

TEST_CASE("transposed matmul variants match finite differences") {
  Rng rng(202);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = static_cast<std::size_t>(rng.uniform_int(1, 4));
    const auto k = static_cast<std::size_t>(rng.uniform_int(1, 4));
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 4));
    Tensor a = random_param(rng, {m, k});
    Tensor b = random_param(rng, {n, k});   // for nt
    Tensor c = random_param(rng, {m, n});   // for tn: a^T? shapes below
    auto forward = [&]() {
      Tensor y = matmul_nt(a, b);           // [m, n]
      Tensor z = matmul_tn(a, c);           // [k, n]
      return add(sum(mul(y, y)), sum(mul(z, z)));
    };
    const auto res = finite_difference_check({a, b, c}, forward);
    CHECK(res.max_rel_error < 1e-4);
  }
}

TEST_CASE("gather/scatter/concat/rowvec gradients match finite differences") {
  Rng rng(303);
  for (int trial = 0; trial < 10; ++trial) {
    Tensor table = random_param(rng, {5, 3});
    Tensor v = random_param(rng, {1, 6});
    std::vector<int> idx{0, 2, 4, 2};
    auto forward = [&]() {
      Tensor g = gather_rows(table, idx);            // [4, 3]
      Tensor cat = concat_cols({g, g});              // [4, 6]
      cat = add_rowvec(cat, v);
      Tensor flatvals = sum(mul(cat, cat));
      return flatvals;
    };
    const auto res = finite_difference_check({table, v}, forward);
    CHECK(res.max_rel_error < 1e-4);
  }
}

TEST_CASE("scatter_rows places values and routes gradients") {
  Tensor vals = Tensor::param({3, 1}, {1.0, 2.0, 3.0});
  Tensor out = scatter_rows(vals, {0, 1, 2}, {2, 0, 1}, 3, 3);
  CHECK(out.values()[0 * 3 + 2] == 1.0);
  CHECK(out.values()[1 * 3 + 0] == 2.0);
  CHECK(out.values()[2 * 3 + 1] == 3.0);
  CHECK(out.values()[0] == 0.0);
  backward(sum(mul(out, out)));
  CHECK(vals.grad()[1] == doctest::Approx(4.0));
}

TEST_CASE("edge mean aggregation averages neighbour/attr pairs") {
  Tensor h = Tensor::constant({3, 2}, {1, 2, 3, 4, 5, 6});
  Grid<double> attrs(2, 1, 0.0);
  attrs(0, 0) = 10.0;
  attrs(1, 0) = 20.0;
  // edges 0->2 and 1->2; node 2 averages both
  Tensor out = edge_mean_aggregate(h, {{0, 2}, {1, 2}}, attrs, 3);
  REQUIRE(out.shape() == std::vector<std::size_t>{3, 3});
  CHECK(out.values()[2 * 3 + 0] == doctest::Approx(2.0));
  CHECK(out.values()[2 * 3 + 1] == doctest::Approx(3.0));
  CHECK(out.values()[2 * 3 + 2] == doctest::Approx(15.0));
  CHECK(out.values()[0] == 0.0);  // no in-edges
}

TEST_CASE("masked softmax rows are stochastic and masked entries stay zero") {
  Rng rng(404);
  Grid<std::uint8_t> mask(3, 4, 0);
  mask(0, 1) = 1;                                  // single allowed
  mask(1, 0) = mask(1, 2) = 1;                     // two allowed
  mask(2, 0) = mask(2, 1) = mask(2, 2) = mask(2, 3) = 1;
  std::vector<double> vals(12);
  for (double& v : vals) v = rng.uniform(-3.0, 3.0);
  Tensor x = Tensor::param({3, 4}, vals);
  Tensor p = masked_row_softmax(x, mask);
  CHECK(p.values()[0 * 4 + 1] == doctest::Approx(1.0));
  for (std::size_t r = 0; r < 3; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
      if (!mask(r, c)) CHECK(p.values()[r * 4 + c] == 0.0);
      s += p.values()[r * 4 + c];
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
  }

  Grid<std::uint8_t> dead(1, 2, 0);
  CHECK_THROWS_AS(masked_row_softmax(Tensor::constant({1, 2}, {1.0, 2.0}), dead), AllMaskedRow);
}

TEST_CASE("masked softmax and entropy gradients match finite differences") {
  Rng rng(505);
  for (int trial = 0; trial < 10; ++trial) {
    Grid<std::uint8_t> mask(2, 3, 0);
    for (std::size_t i = 0; i < mask.size(); ++i) mask.flat()[i] = rng.bernoulli(0.7);
    mask(0, 0) = 1;
    mask(1, 2) = 1;  // keep rows alive
    Tensor x = random_param(rng, {2, 3});
    Tensor w = random_param(rng, {2, 3});
    auto forward = [&]() {
      Tensor p = masked_row_softmax(x, mask);
      Tensor weighted = sum(mul(p, w));
      return add(weighted, masked_entropy_mean(p, mask));
    };
    const auto res = finite_difference_check({x, w}, forward);
    CHECK(res.max_rel_error < 1e-4);
  }
}

TEST_CASE("forward passes are bitwise deterministic") {
  Rng rng(606);
  Tensor a = random_param(rng, {3, 3});
  Tensor b = random_param(rng, {3, 3});
  const Tensor y1 = matmul(a, b);
  const Tensor y2 = matmul(a, b);
  CHECK(y1.values() == y2.values());
}
