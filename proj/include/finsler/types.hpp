#pragma once

#include <Eigen/Dense>

#include <initializer_list>

namespace finsler {

/// Chart coordinates x^i of a base point.
struct ChartPoint {
  Eigen::VectorXd coords;

  ChartPoint() = default;
  explicit ChartPoint(Eigen::VectorXd c) : coords(std::move(c)) {}
  ChartPoint(std::initializer_list<double> c) : coords(static_cast<Eigen::Index>(c.size())) {
    Eigen::Index i = 0;
    for (double v : c) coords[i++] = v;
  }
  int dim() const { return static_cast<int>(coords.size()); }
  bool finite() const { return coords.allFinite(); }
};

/// Tangent components y^i at a base point.
struct FiberVector {
  Eigen::VectorXd coords;

  FiberVector() = default;
  explicit FiberVector(Eigen::VectorXd c) : coords(std::move(c)) {}
  FiberVector(std::initializer_list<double> c) : coords(static_cast<Eigen::Index>(c.size())) {
    Eigen::Index i = 0;
    for (double v : c) coords[i++] = v;
  }
  int dim() const { return static_cast<int>(coords.size()); }
  bool finite() const { return coords.allFinite(); }
};

}  // namespace finsler
