#ifndef FIBERSTRAIN_SPARSE_HPP
#define FIBERSTRAIN_SPARSE_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "fiberstrain/error.hpp"

namespace fiberstrain {

struct Triplet {
  int row;
  int col;
  double value;
};

// Square matrix in compressed sparse row form.
class CsrMatrix {
 public:
  CsrMatrix() = default;

  // Duplicate (row, col) entries are summed.
  static CsrMatrix from_triplets(int n, std::vector<Triplet> entries) {
    for (const auto& t : entries) {
      if (t.row < 0 || t.col < 0 || t.row >= n || t.col >= n) {
        throw ArgumentError("triplet index out of range");
      }
    }
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    CsrMatrix m;
    m.n_ = n;
    m.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (std::size_t i = 0; i < entries.size();) {
      const Triplet& t = entries[i];
      double sum = 0.0;
      std::size_t j = i;
      for (; j < entries.size() && entries[j].row == t.row && entries[j].col == t.col; ++j) {
        sum += entries[j].value;
      }
      m.cols_.push_back(t.col);
      m.values_.push_back(sum);
      ++m.row_ptr_[static_cast<std::size_t>(t.row) + 1];
      i = j;
    }
    for (std::size_t r = 0; r < static_cast<std::size_t>(n); ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
  }

  int size() const { return n_; }
  std::size_t nonzeros() const { return values_.size(); }
  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& cols() const { return cols_; }
  const std::vector<double>& values() const { return values_; }

  void multiply(std::span<const double> x, std::span<double> y) const {
    for (int r = 0; r < n_; ++r) {
      double s = 0.0;
      for (int k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k) {
        s += values_[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(cols_[static_cast<std::size_t>(k)])];
      }
      y[static_cast<std::size_t>(r)] = s;
    }
  }

  std::vector<double> operator*(const std::vector<double>& x) const {
    std::vector<double> y(static_cast<std::size_t>(n_));
    multiply(x, y);
    return y;
  }

  double at(int r, int c) const {
    const auto b = cols_.begin() + row_ptr_[static_cast<std::size_t>(r)];
    const auto e = cols_.begin() + row_ptr_[static_cast<std::size_t>(r) + 1];
    const auto it = std::lower_bound(b, e, c);
    return (it != e && *it == c) ? values_[static_cast<std::size_t>(it - cols_.begin())] : 0.0;
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(static_cast<std::size_t>(n_));
    for (int r = 0; r < n_; ++r) d[static_cast<std::size_t>(r)] = at(r, r);
    return d;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  // max |A_ij - A_ji| over stored entries.
  double max_asymmetry() const {
    double m = 0.0;
    for (int r = 0; r < n_; ++r)
      for (int k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k) {
        const int c = cols_[static_cast<std::size_t>(k)];
        m = std::max(m, std::abs(values_[static_cast<std::size_t>(k)] - at(c, r)));
      }
    return m;
  }

  std::vector<Triplet> to_triplets() const {
    std::vector<Triplet> out;
    out.reserve(values_.size());
    for (int r = 0; r < n_; ++r)
      for (int k = row_ptr_[static_cast<std::size_t>(r)]; k < row_ptr_[static_cast<std::size_t>(r) + 1]; ++k)
        out.push_back({r, cols_[static_cast<std::size_t>(k)], values_[static_cast<std::size_t>(k)]});
    return out;
  }

  friend CsrMatrix operator+(const CsrMatrix& a, const CsrMatrix& b) {
    if (a.n_ != b.n_) throw ArgumentError("matrix size mismatch in sum");
    auto t = a.to_triplets();
    auto u = b.to_triplets();
    t.insert(t.end(), u.begin(), u.end());
    return from_triplets(a.n_, std::move(t));
  }

 private:
  int n_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> cols_;
  std::vector<double> values_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace fiberstrain

#endif  // FIBERSTRAIN_SPARSE_HPP
