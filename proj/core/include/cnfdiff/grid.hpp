#pragma once

#include "cnfdiff/errors.hpp"

#include <cstddef>
#include <vector>

namespace cnfdiff {

// Dense row-major 2-D array. Used for bandwidth/cost matrices, assignment
// matrices and masks; deliberately minimal (no views, no arithmetic).
template <typename T>
class Grid {
public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Grid from_flat(std::size_t rows, std::size_t cols, std::vector<T> flat) {
    if (flat.size() != rows * cols) {
      throw ShapeMismatch("Grid::from_flat: element count does not match shape");
    }
    Grid g;
    g.rows_ = rows;
    g.cols_ = cols;
    g.data_ = std::move(flat);
    return g;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const std::vector<T>& flat() const { return data_; }
  std::vector<T>& flat() { return data_; }

  bool same_shape(const Grid& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

}  // namespace cnfdiff
