#pragma once

#include "cnfdiff/errors.hpp"
#include "cnfdiff/grid.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

namespace cnfdiff {

// Define-by-run reverse-mode automatic differentiation over dense 64-bit
// tensors (rank 1 and 2). Each operation evaluates eagerly and records a
// closure that pushes adjoints to its inputs; backward() replays the
// recorded graph in reverse topological order.

class TensorImpl;
using TensorImplPtr = std::shared_ptr<TensorImpl>;

class TensorImpl {
public:
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;  // lazily sized; empty means all-zero
  bool requires_grad = false;
  bool grad_finalized = false;  // a backward pass already consumed this node
  std::vector<TensorImplPtr> parents;
  std::function<void(TensorImpl&)> backward_fn;  // pushes this->grad to parents

  std::vector<double>& ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

class Tensor {
public:
  Tensor() = default;

  static Tensor constant(std::vector<std::size_t> shape, std::vector<double> values);
  static Tensor constant(const Grid<double>& grid);
  static Tensor scalar(double v);
  static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
  // Leaf with requires_grad set; the unit the optimizer updates.
  static Tensor param(std::vector<std::size_t> shape, std::vector<double> values);

  bool defined() const { return impl_ != nullptr; }
  const std::vector<std::size_t>& shape() const { return impl_->shape; }
  std::size_t size() const { return impl_->value.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::vector<double>& values() { return impl_->value; }
  const std::vector<double>& values() const { return impl_->value; }
  std::vector<double>& grad() { return impl_->ensure_grad(); }
  const std::vector<double>& grad() const { return impl_->ensure_grad(); }
  double item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  void zero_grad() { std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0); }

  TensorImpl* impl() const { return impl_.get(); }
  const TensorImplPtr& ptr() const { return impl_; }

  static Tensor wrap(TensorImplPtr impl) {
    Tensor t;
    t.impl_ = std::move(impl);
    return t;
  }

private:
  TensorImplPtr impl_;
};

// Elementwise; shapes must match.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
Tensor relu(const Tensor& a);

// 2-D matrix products: plain, a*b^T and a^T*b.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor matmul_tn(const Tensor& a, const Tensor& b);

// a[r,c] + v broadcast over rows; v is [1,c] or [c].
Tensor add_rowvec(const Tensor& a, const Tensor& v);

Tensor sum(const Tensor& a);  // -> [1]

Tensor concat_cols(const std::vector<Tensor>& parts);

// Row lookup (embedding gather / pair building); backward scatter-adds.
Tensor gather_rows(const Tensor& a, const std::vector<int>& rows);

// out[rows[i], cols[i]] = values[i]; indices must be distinct. values is
// [n] or [n,1]. Entries not referenced stay exactly 0.
Tensor scatter_rows(const Tensor& values, const std::vector<int>& rows,
                    const std::vector<int>& cols, std::size_t out_rows, std::size_t out_cols);

// Per destination node, the arithmetic mean over incoming edges of
// [src_row(u) || attr(e)]; nodes with no in-edges get a zero row. Edge
// attributes are data, not differentiated.
Tensor edge_mean_aggregate(const Tensor& src, const std::vector<std::pair<int, int>>& edges,
                           const Grid<double>& edge_attrs, std::size_t num_dst);

// Row softmax restricted to mask==1 entries; masked entries are exactly 0.
// Throws AllMaskedRow when a row has no allowed entry.
Tensor masked_row_softmax(const Tensor& a, const Grid<std::uint8_t>& mask);

// Mean over rows of the Shannon entropy of allowed entries.
Tensor masked_entropy_mean(const Tensor& p, const Grid<std::uint8_t>& mask);

// Reverse-mode pass from a scalar loss. Accumulates into .grad of every
// reachable tensor with requires_grad. Throws NotScalar for non-scalar
// losses and StaleTape when the same recorded graph is replayed twice.
void backward(const Tensor& loss);

}  // namespace cnfdiff
