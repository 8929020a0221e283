#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace finsler {

// Dense rank-3 and rank-4 arrays over a common index range [0, n).
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), data_(static_cast<size_t>(n) * n * n, 0.0) {}

  int dim() const { return n_; }
  double& operator()(int i, int j, int k) { return data_[(static_cast<size_t>(i) * n_ + j) * n_ + k]; }
  double operator()(int i, int j, int k) const { return data_[(static_cast<size_t>(i) * n_ + j) * n_ + k]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }
  const std::vector<double>& data() const { return data_; }

 private:
  int n_ = 0;
  std::vector<double> data_;
};

class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n) : n_(n), data_(static_cast<size_t>(n) * n * n * n, 0.0) {}

  int dim() const { return n_; }
  double& operator()(int i, int j, int k, int l) { return data_[idx(i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return data_[idx(i, j, k, l)]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }
  const std::vector<double>& data() const { return data_; }

 private:
  size_t idx(int i, int j, int k, int l) const {
    return ((static_cast<size_t>(i) * n_ + j) * n_ + k) * n_ + l;
  }
  int n_ = 0;
  std::vector<double> data_;
};

// Largest deviation from total symmetry in the last three indices.
inline double lower_symmetry_defect(const Tensor4& t) {
  const int n = t.dim();
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double v = t(i, j, k, l);
          worst = std::max({worst, std::abs(v - t(i, k, j, l)), std::abs(v - t(i, l, k, j)),
                            std::abs(v - t(i, j, l, k)), std::abs(v - t(i, k, l, j)),
                            std::abs(v - t(i, l, j, k))});
        }
  return worst;
}

inline double symmetry_defect(const Tensor3& t) {
  const int n = t.dim();
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double v = t(i, j, k);
        worst = std::max({worst, std::abs(v - t(i, k, j)), std::abs(v - t(j, i, k)),
                          std::abs(v - t(j, k, i)), std::abs(v - t(k, i, j)), std::abs(v - t(k, j, i))});
      }
  return worst;
}

}  // namespace finsler
