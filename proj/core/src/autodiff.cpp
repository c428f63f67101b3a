#include "cnfdiff/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace cnfdiff {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

TensorImplPtr make_impl(std::vector<std::size_t> shape, std::vector<double> values,
                        bool requires_grad) {
  if (shape_product(shape) != values.size()) {
    throw ShapeMismatch("tensor: value count does not match shape");
  }
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->value = std::move(values);
  impl->requires_grad = requires_grad;
  return impl;
}

Tensor make_op(std::vector<std::size_t> shape, std::vector<double> values,
               std::vector<Tensor> parents, std::function<void(TensorImpl&)> backward_fn) {
  auto impl = make_impl(std::move(shape), std::move(values), false);
  for (const Tensor& p : parents) {
    if (p.impl()->requires_grad) impl->requires_grad = true;
    impl->parents.push_back(p.ptr());
  }
  if (impl->requires_grad) impl->backward_fn = std::move(backward_fn);
  return Tensor::wrap(std::move(impl));
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) throw ShapeMismatch(std::string(what) + ": shape mismatch");
}

void require_2d(const Tensor& a, const char* what) {
  if (a.shape().size() != 2) throw ShapeMismatch(std::string(what) + ": expected rank-2 tensor");
}

}  // namespace

Tensor Tensor::constant(std::vector<std::size_t> shape, std::vector<double> values) {
  return wrap(make_impl(std::move(shape), std::move(values), false));
}

Tensor Tensor::constant(const Grid<double>& grid) {
  return wrap(make_impl({grid.rows(), grid.cols()}, grid.flat(), false));
}

Tensor Tensor::scalar(double v) { return wrap(make_impl({1}, {v}, false)); }

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
  const std::size_t n = shape_product(shape);
  return wrap(make_impl(std::move(shape), std::vector<double>(n, 0.0), requires_grad));
}

Tensor Tensor::param(std::vector<std::size_t> shape, std::vector<double> values) {
  return wrap(make_impl(std::move(shape), std::move(values), true));
}

std::size_t Tensor::rows() const {
  require_2d(*this, "rows");
  return impl_->shape[0];
}

std::size_t Tensor::cols() const {
  require_2d(*this, "cols");
  return impl_->shape[1];
}

double Tensor::item() const {
  if (size() != 1) throw NotScalar("item: tensor is not a scalar");
  return impl_->value[0];
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] + b.values()[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](TensorImpl& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      auto& ga = pa.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
    }
    if (pb.requires_grad) {
      auto& gb = pb.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) gb[i] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] - b.values()[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](TensorImpl& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      auto& ga = pa.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
    }
    if (pb.requires_grad) {
      auto& gb = pb.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) gb[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](TensorImpl& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    if (pa.requires_grad) {
      auto& ga = pa.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      auto& gb = pb.ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) gb[i] += self.grad[i] * pa.value[i];
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * s;
  return make_op(a.shape(), std::move(out), {a}, [s](TensorImpl& self) {
    auto& ga = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i] * s;
  });
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] > 0.0 ? a.values()[i] : 0.0;
  return make_op(a.shape(), std::move(out), {a}, [](TensorImpl& self) {
    auto& pa = *self.parents[0];
    auto& ga = pa.ensure_grad();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      if (pa.value[i] > 0.0) ga[i] += self.grad[i];
    }
  });
}

namespace {

// All three kernels accumulate into `out`; callers zero-init or reuse grads.

// out += A(ra x k) * B(k x cb)
void gemm_nn(const std::vector<double>& a, const std::vector<double>& b, std::vector<double>& out,
             std::size_t ra, std::size_t k, std::size_t cb) {
  const double* __restrict ap = a.data();
  const double* __restrict bp = b.data();
  double* __restrict op = out.data();
  for (std::size_t i = 0; i < ra; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ap[i * k + p];
      if (av == 0.0) continue;
      const double* __restrict brow = bp + p * cb;
      double* __restrict orow = op + i * cb;
      for (std::size_t j = 0; j < cb; ++j) orow[j] += av * brow[j];
    }
  }
}

// out += A(ra x k) * B(cb x k)^T. Goes through a transposed copy of B so the
// accumulation runs over independent output lanes (vectorizable) while
// keeping the same per-entry summation order as a direct dot product.
void gemm_nt(const std::vector<double>& a, const std::vector<double>& b, std::vector<double>& out,
             std::size_t ra, std::size_t k, std::size_t cb) {
  std::vector<double> bt(k * cb);
  for (std::size_t j = 0; j < cb; ++j) {
    for (std::size_t p = 0; p < k; ++p) bt[p * cb + j] = b[j * k + p];
  }
  gemm_nn(a, bt, out, ra, k, cb);
}

// out += A(k x ra)^T * B(k x cb)
void gemm_tn(const std::vector<double>& a, const std::vector<double>& b, std::vector<double>& out,
             std::size_t ra, std::size_t k, std::size_t cb) {
  const double* __restrict ap = a.data();
  const double* __restrict bp = b.data();
  double* __restrict op = out.data();
  for (std::size_t p = 0; p < k; ++p) {
    const double* __restrict arow = ap + p * ra;
    const double* __restrict brow = bp + p * cb;
    for (std::size_t i = 0; i < ra; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* __restrict orow = op + i * cb;
      for (std::size_t j = 0; j < cb; ++j) orow[j] += av * brow[j];
    }
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul");
  require_2d(b, "matmul");
  const std::size_t ra = a.rows(), k = a.cols(), cb = b.cols();
  if (b.rows() != k) throw ShapeMismatch("matmul: inner dimensions differ");
  std::vector<double> out(ra * cb, 0.0);
  gemm_nn(a.values(), b.values(), out, ra, k, cb);
  return make_op({ra, cb}, std::move(out), {a, b}, [ra, k, cb](TensorImpl& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    // dA += dC * B^T ; dB += A^T * dC
    if (pa.requires_grad) gemm_nt(self.grad, pb.value, pa.ensure_grad(), ra, cb, k);
    if (pb.requires_grad) gemm_tn(pa.value, self.grad, pb.ensure_grad(), k, ra, cb);
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul_nt");
  require_2d(b, "matmul_nt");
  const std::size_t ra = a.rows(), k = a.cols(), rb = b.rows();
  if (b.cols() != k) throw ShapeMismatch("matmul_nt: inner dimensions differ");
  std::vector<double> out(ra * rb, 0.0);
  gemm_nt(a.values(), b.values(), out, ra, k, rb);
  return make_op({ra, rb}, std::move(out), {a, b}, [ra, k, rb](TensorImpl& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    // C = A B^T: dA += dC * B ; dB += dC^T * A
    if (pa.requires_grad) gemm_nn(self.grad, pb.value, pa.ensure_grad(), ra, rb, k);
    if (pb.requires_grad) gemm_tn(self.grad, pa.value, pb.ensure_grad(), rb, ra, k);
  });
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require_2d(a, "matmul_tn");
  require_2d(b, "matmul_tn");
  const std::size_t k = a.rows(), ca = a.cols(), cb = b.cols();
  if (b.rows() != k) throw ShapeMismatch("matmul_tn: inner dimensions differ");
  std::vector<double> out(ca * cb, 0.0);
  gemm_tn(a.values(), b.values(), out, ca, k, cb);
  return make_op({ca, cb}, std::move(out), {a, b}, [k, ca, cb](TensorImpl& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    // C = A^T B: dA += B * dC^T ... dA(k x ca) += dB? compute directly:
    // dA[p][i] += sum_j dC[i][j] * B[p][j]  -> gemm_nt(B, dC) per row
    if (pa.requires_grad) gemm_nt(pb.value, self.grad, pa.ensure_grad(), k, cb, ca);
    // dB[p][j] += sum_i A[p][i] * dC[i][j]
    if (pb.requires_grad) gemm_nn(pa.value, self.grad, pb.ensure_grad(), k, ca, cb);
  });
}

Tensor add_rowvec(const Tensor& a, const Tensor& v) {
  require_2d(a, "add_rowvec");
  const std::size_t r = a.rows(), c = a.cols();
  if (v.size() != c) throw ShapeMismatch("add_rowvec: vector length must match columns");
  std::vector<double> out(a.values());
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += v.values()[j];
  }
  return make_op({r, c}, std::move(out), {a, v}, [r, c](TensorImpl& self) {
    auto& pa = *self.parents[0];
    auto& pv = *self.parents[1];
    if (pa.requires_grad) {
      auto& ga = pa.ensure_grad();
      for (std::size_t i = 0; i < r * c; ++i) ga[i] += self.grad[i];
    }
    if (pv.requires_grad) {
      auto& gv = pv.ensure_grad();
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < c; ++j) gv[j] += self.grad[i * c + j];
      }
    }
  });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return make_op({1}, {s}, {a}, [](TensorImpl& self) {
    auto& ga = self.parents[0]->ensure_grad();
    for (double& g : ga) g += self.grad[0];
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat_cols: no parts");
  const std::size_t r = parts[0].rows();
  std::size_t total_c = 0;
  for (const Tensor& p : parts) {
    require_2d(p, "concat_cols");
    if (p.rows() != r) throw ShapeMismatch("concat_cols: row counts differ");
    total_c += p.cols();
  }
  std::vector<double> out(r * total_c);
  std::size_t off = 0;
  for (const Tensor& p : parts) {
    const std::size_t c = p.cols();
    for (std::size_t i = 0; i < r; ++i) {
      std::copy_n(&p.values()[i * c], c, &out[i * total_c + off]);
    }
    off += c;
  }
  std::vector<std::size_t> col_offsets;
  col_offsets.reserve(parts.size());
  off = 0;
  for (const Tensor& p : parts) {
    col_offsets.push_back(off);
    off += p.cols();
  }
  return make_op({r, total_c}, std::move(out), parts,
                 [r, total_c, col_offsets](TensorImpl& self) {
                   for (std::size_t pi = 0; pi < self.parents.size(); ++pi) {
                     auto& p = *self.parents[pi];
                     if (!p.requires_grad) continue;
                     auto& gp = p.ensure_grad();
                     const std::size_t c = p.shape[1];
                     const std::size_t o = col_offsets[pi];
                     for (std::size_t i = 0; i < r; ++i) {
                       for (std::size_t j = 0; j < c; ++j) {
                         gp[i * c + j] += self.grad[i * total_c + o + j];
                       }
                     }
                   }
                 });
}

Tensor gather_rows(const Tensor& a, const std::vector<int>& rows) {
  require_2d(a, "gather_rows");
  const std::size_t c = a.cols();
  std::vector<double> out(rows.size() * c);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int r = rows[i];
    if (r < 0 || static_cast<std::size_t>(r) >= a.rows()) {
      throw ShapeMismatch("gather_rows: row index out of range");
    }
    std::copy_n(&a.values()[static_cast<std::size_t>(r) * c], c, &out[i * c]);
  }
  return make_op({rows.size(), c}, std::move(out), {a}, [rows, c](TensorImpl& self) {
    auto& ga = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        ga[static_cast<std::size_t>(rows[i]) * c + j] += self.grad[i * c + j];
      }
    }
  });
}

Tensor scatter_rows(const Tensor& values, const std::vector<int>& rows,
                    const std::vector<int>& cols, std::size_t out_rows, std::size_t out_cols) {
  if (values.size() != rows.size() || rows.size() != cols.size()) {
    throw ShapeMismatch("scatter_rows: index/value count mismatch");
  }
  std::vector<double> out(out_rows * out_cols, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || static_cast<std::size_t>(rows[i]) >= out_rows || cols[i] < 0 ||
        static_cast<std::size_t>(cols[i]) >= out_cols) {
      throw ShapeMismatch("scatter_rows: index out of range");
    }
    out[static_cast<std::size_t>(rows[i]) * out_cols + static_cast<std::size_t>(cols[i])] =
        values.values()[i];
  }
  return make_op({out_rows, out_cols}, std::move(out), {values},
                 [rows, cols, out_cols](TensorImpl& self) {
                   auto& gv = self.parents[0]->ensure_grad();
                   for (std::size_t i = 0; i < rows.size(); ++i) {
                     gv[i] += self.grad[static_cast<std::size_t>(rows[i]) * out_cols +
                                        static_cast<std::size_t>(cols[i])];
                   }
                 });
}

Tensor edge_mean_aggregate(const Tensor& src, const std::vector<std::pair<int, int>>& edges,
                           const Grid<double>& edge_attrs, std::size_t num_dst) {
  require_2d(src, "edge_mean_aggregate");
  const std::size_t d = src.cols();
  const std::size_t k = edge_attrs.cols();
  if (edge_attrs.rows() != edges.size()) {
    throw ShapeMismatch("edge_mean_aggregate: attrs must align with edges");
  }
  std::vector<double> indeg(num_dst, 0.0);
  for (const auto& [u, v] : edges) {
    if (u < 0 || static_cast<std::size_t>(u) >= src.rows() || v < 0 ||
        static_cast<std::size_t>(v) >= num_dst) {
      throw ShapeMismatch("edge_mean_aggregate: edge endpoint out of range");
    }
    indeg[static_cast<std::size_t>(v)] += 1.0;
  }
  const std::size_t out_c = d + k;
  std::vector<double> out(num_dst * out_c, 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [u, v] = edges[e];
    double* orow = &out[static_cast<std::size_t>(v) * out_c];
    const double w = 1.0 / indeg[static_cast<std::size_t>(v)];
    const double* srow = &src.values()[static_cast<std::size_t>(u) * d];
    for (std::size_t j = 0; j < d; ++j) orow[j] += w * srow[j];
    for (std::size_t j = 0; j < k; ++j) orow[d + j] += w * edge_attrs(e, j);
  }
  return make_op({num_dst, out_c}, std::move(out), {src},
                 [edges, indeg, d, out_c](TensorImpl& self) {
                   auto& gs = self.parents[0]->ensure_grad();
                   for (const auto& [u, v] : edges) {
                     const double w = 1.0 / indeg[static_cast<std::size_t>(v)];
                     const double* grow = &self.grad[static_cast<std::size_t>(v) * out_c];
                     double* srow = &gs[static_cast<std::size_t>(u) * d];
                     for (std::size_t j = 0; j < d; ++j) srow[j] += w * grow[j];
                   }
                 });
}

Tensor masked_row_softmax(const Tensor& a, const Grid<std::uint8_t>& mask) {
  require_2d(a, "masked_row_softmax");
  const std::size_t r = a.rows(), c = a.cols();
  if (mask.rows() != r || mask.cols() != c) {
    throw ShapeMismatch("masked_row_softmax: mask shape mismatch");
  }
  std::vector<double> out(r * c, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -1e308;
    bool any = false;
    for (std::size_t j = 0; j < c; ++j) {
      if (mask(i, j)) {
        any = true;
        mx = std::max(mx, a.values()[i * c + j]);
      }
    }
    if (!any) throw AllMaskedRow("masked_row_softmax: row " + std::to_string(i) + " fully masked");
    double denom = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (mask(i, j)) denom += std::exp(a.values()[i * c + j] - mx);
    }
    for (std::size_t j = 0; j < c; ++j) {
      if (mask(i, j)) out[i * c + j] = std::exp(a.values()[i * c + j] - mx) / denom;
    }
  }
  return make_op({r, c}, std::move(out), {a}, [r, c, mask](TensorImpl& self) {
    auto& ga = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < r; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) {
        if (mask(i, j)) dot += self.grad[i * c + j] * self.value[i * c + j];
      }
      for (std::size_t j = 0; j < c; ++j) {
        if (mask(i, j)) {
          ga[i * c + j] += self.value[i * c + j] * (self.grad[i * c + j] - dot);
        }
      }
    }
  });
}

Tensor masked_entropy_mean(const Tensor& p, const Grid<std::uint8_t>& mask) {
  require_2d(p, "masked_entropy_mean");
  const std::size_t r = p.rows(), c = p.cols();
  if (mask.rows() != r || mask.cols() != c) {
    throw ShapeMismatch("masked_entropy_mean: mask shape mismatch");
  }
  constexpr double kTiny = 1e-300;
  double h = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const double v = p.values()[i * c + j];
      if (mask(i, j) && v > kTiny) h -= v * std::log(v);
    }
  }
  h /= static_cast<double>(r);
  return make_op({1}, {h}, {p}, [r, c, mask](TensorImpl& self) {
    auto& pp = *self.parents[0];
    auto& gp = pp.ensure_grad();
    const double g = self.grad[0] / static_cast<double>(r);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        const double v = pp.value[i * c + j];
        if (mask(i, j) && v > kTiny) gp[i * c + j] += g * (-std::log(v) - 1.0);
      }
    }
  });
}

void backward(const Tensor& loss) {
  if (!loss.defined()) throw NotScalar("backward: undefined tensor");
  if (loss.size() != 1) throw NotScalar("backward: loss must be a scalar");
  TensorImpl* root = loss.impl();
  if (root->grad_finalized) {
    throw StaleTape("backward: this graph was already consumed; rebuild the forward pass");
  }
  root->grad_finalized = true;
  if (!root->requires_grad) return;  // loss detached from every parameter

  // Iterative post-order DFS for the reverse topological order.
  std::vector<TensorImpl*> order;
  std::unordered_set<TensorImpl*> visited;
  std::vector<std::pair<TensorImpl*, std::size_t>> stack{{root, 0}};
  visited.insert(root);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      TensorImpl* parent = node->parents[next++].get();
      if (parent->requires_grad && !visited.count(parent)) {
        visited.insert(parent);
        stack.emplace_back(parent, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  root->ensure_grad()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) {
      (*it)->ensure_grad();
      (*it)->backward_fn(**it);
    }
  }
}

}  // namespace cnfdiff
