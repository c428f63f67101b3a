#pragma once

// Central finite-difference gradient checker. `forward` must rebuild the
// graph from the parameters' current values and return the scalar loss.

#include "cnfdiff/autodiff.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace cnfdiff::test {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

// Relative error |a - n| / max(|a| + |n|, floor); the floor absorbs the
// finite-difference roundoff noise on near-zero gradients.
inline GradCheckResult finite_difference_check(const std::vector<Tensor>& params,
                                               const std::function<Tensor()>& forward,
                                               double eps = 1e-5, double floor = 1e-3) {
  for (const Tensor& p : params) const_cast<Tensor&>(p).zero_grad();
  Tensor loss = forward();
  backward(loss);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const Tensor& p : params) analytic.push_back(p.grad());

  GradCheckResult result;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor p = params[pi];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p.values()[i];
      p.values()[i] = saved + eps;
      const double hi = forward().item();
      p.values()[i] = saved - eps;
      const double lo = forward().item();
      p.values()[i] = saved;
      const double numeric = (hi - lo) / (2.0 * eps);
      const double a = analytic[pi][i];
      const double rel = std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), floor);
      result.max_rel_error = std::max(result.max_rel_error, rel);
      ++result.checked;
    }
  }
  for (const Tensor& p : params) const_cast<Tensor&>(p).zero_grad();
  return result;
}

}  // namespace cnfdiff::test
