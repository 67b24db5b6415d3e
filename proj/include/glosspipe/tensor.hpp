#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace glosspipe {

// Dense row-major matrix of doubles. Row vectors are 1 x n. Everything in the
// scorer is small enough (d <= 64, m <= 16, n <= 128) that plain loops beat
// the cost of pulling in a linear algebra dependency.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  static Tensor row_vector(std::span<const double> v) {
    Tensor t(1, static_cast<int>(v.size()));
    std::copy(v.begin(), v.end(), t.data.begin());
    return t;
  }

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

  std::span<double> row(int r) {
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }
  std::span<const double> row(int r) const {
    return {data.data() + static_cast<std::size_t>(r) * cols, static_cast<std::size_t>(cols)};
  }

  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void add_inplace(Tensor& a, const Tensor& b) {
  assert(a.same_shape(b));
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

inline void scale_inplace(Tensor& a, double s) {
  for (double& v : a.data) v *= s;
}

// C = A * B
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  assert(a.cols == b.rows);
  Tensor c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int k = 0; k < a.cols; ++k) {
      const double aik = a.at(i, k);
      if (aik == 0.0) continue;
      const auto brow = b.row(k);
      auto crow = c.row(i);
      for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

// C = A * B^T
inline Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  assert(a.cols == b.cols);
  Tensor c(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.rows; ++j) c.at(i, j) = dot(a.row(i), b.row(j));
  return c;
}

// C = A^T * B
inline Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  assert(a.rows == b.rows);
  Tensor c(a.cols, b.cols);
  for (int k = 0; k < a.rows; ++k) {
    const auto arow = a.row(k);
    const auto brow = b.row(k);
    for (int i = 0; i < a.cols; ++i) {
      if (arow[i] == 0.0) continue;
      auto crow = c.row(i);
      for (int j = 0; j < b.cols; ++j) crow[j] += arow[i] * brow[j];
    }
  }
  return c;
}

// Numerically stable in-place softmax (max subtraction).
inline void softmax_inplace(std::span<double> v) {
  if (v.empty()) return;
  double mx = v[0];
  for (double x : v) mx = std::max(mx, x);
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

inline void softmax_rows_inplace(Tensor& t) {
  for (int i = 0; i < t.rows; ++i) softmax_inplace(t.row(i));
}

// Given y = softmax(x) and dL/dy, writes dL/dx. dx and dy may not alias y.
inline void softmax_backward(std::span<const double> y, std::span<const double> dy,
                             std::span<double> dx) {
  assert(y.size() == dy.size() && y.size() == dx.size());
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * dy[i];
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = y[i] * (dy[i] - s);
}

// log(sum_i exp(v_i)) with max subtraction.
inline double log_sum_exp(std::span<const double> v) {
  assert(!v.empty());
  double mx = v[0];
  for (double x : v) mx = std::max(mx, x);
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - mx);
  return mx + std::log(sum);
}

inline void randn_fill(Tensor& t, std::mt19937_64& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (double& v : t.data) v = dist(rng);
}

// FNV-1a, used for the hashed word-level vocabulary and for input manifests.
// Stable across platforms by construction.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace glosspipe
