#pragma once

// Truncated multivariate Taylor arithmetic.
//
// A TaylorJet holds the Taylor coefficients of a scalar function of `vars`
// variables around a base point, up to total degree `order`.  Arithmetic and
// composition with univariate functions propagate the coefficients exactly
// (up to rounding), so derivatives read back from a jet are exact partial
// derivatives of the composed expression, not difference quotients.

#include "finsler/tensor.hpp"
#include "finsler/types.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

namespace finsler {

class JetSpace {
 public:
  struct Product {
    int a, b, c;  // coefficient c receives x[a] * y[b]
  };

  /// Shared, immutable space for (vars, order).  Thread safe.
  static std::shared_ptr<const JetSpace> get(int vars, int order);

  JetSpace(int vars, int order);

  int vars() const { return vars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(exps_.size()); }
  const std::vector<int>& exponents(int idx) const { return exps_[idx]; }
  int degree(int idx) const { return degree_[idx]; }
  /// Index of the monomial with the given exponents, or -1 if its degree exceeds the order.
  int index_of(const std::vector<int>& e) const;
  int unit(int v) const { return unit_[v]; }
  /// Π e_i! for monomial idx; converts a coefficient into a partial derivative.
  double multiplicity(int idx) const { return mult_[idx]; }
  const std::vector<Product>& products() const { return products_; }

 private:
  long long encode(const std::vector<int>& e) const;

  int vars_;
  int order_;
  std::vector<std::vector<int>> exps_;
  std::vector<int> degree_;
  std::vector<double> mult_;
  std::vector<int> unit_;
  std::vector<Product> products_;
  std::unordered_map<long long, int> lookup_;
};

class TaylorJet {
 public:
  TaylorJet() = default;
  TaylorJet(std::shared_ptr<const JetSpace> space, double value);

  /// The jet of the coordinate function v, shifted to `value` at the base point.
  static TaylorJet variable(std::shared_ptr<const JetSpace> space, int v, double value);

  const std::shared_ptr<const JetSpace>& space() const { return space_; }
  double value() const { return c_[0]; }
  double coefficient(int idx) const { return c_[idx]; }
  double& coefficient(int idx) { return c_[idx]; }

  /// Mixed partial derivative with respect to the listed variables (repeats allowed).
  double derivative(std::initializer_list<int> wrt) const;

  /// Jet of ∂f/∂x_v; its order is one less.
  TaylorJet partial(int v) const;

  /// f(this) for a univariate f, given f^{(r)}(value()) for r = 0..order.
  TaylorJet compose(std::span<const double> derivs) const;

  TaylorJet& operator+=(const TaylorJet& o);
  TaylorJet& operator-=(const TaylorJet& o);
  TaylorJet& operator*=(const TaylorJet& o);
  TaylorJet& operator/=(const TaylorJet& o);
  TaylorJet& operator+=(double v) { c_[0] += v; return *this; }
  TaylorJet& operator-=(double v) { c_[0] -= v; return *this; }
  TaylorJet& operator*=(double v);
  TaylorJet& operator/=(double v) { return *this *= 1.0 / v; }

  TaylorJet operator-() const;

 private:
  std::shared_ptr<const JetSpace> space_;
  std::vector<double> c_;
};

TaylorJet operator+(TaylorJet a, const TaylorJet& b);
TaylorJet operator-(TaylorJet a, const TaylorJet& b);
TaylorJet operator*(const TaylorJet& a, const TaylorJet& b);
TaylorJet operator/(const TaylorJet& a, const TaylorJet& b);
TaylorJet operator+(TaylorJet a, double b);
TaylorJet operator+(double a, TaylorJet b);
TaylorJet operator-(TaylorJet a, double b);
TaylorJet operator-(double a, const TaylorJet& b);
TaylorJet operator*(TaylorJet a, double b);
TaylorJet operator*(double a, TaylorJet b);
TaylorJet operator/(TaylorJet a, double b);
TaylorJet operator/(double a, const TaylorJet& b);

TaylorJet reciprocal(const TaylorJet& a);
TaylorJet sqrt(const TaylorJet& a);
TaylorJet exp(const TaylorJet& a);

inline double value_of(double v) { return v; }
inline double value_of(const TaylorJet& j) { return j.value(); }

/// Value and exact fiber derivatives up to order three.
struct Jet3 {
  double value = 0.0;
  Eigen::VectorXd d1;
  Eigen::MatrixXd d2;
  Tensor3 d3;
};

/// Reads value/gradient/Hessian/third derivatives out of a jet of order ≥ 3.
Jet3 to_jet3(const TaylorJet& j);

/// y-seeds y^i + Y^i in the (n, order) space.
std::vector<TaylorJet> fiber_seeds(const FiberVector& y, int order);

using FiberFunction = std::function<TaylorJet(const ChartPoint&, std::span<const TaylorJet>)>;

/// Evaluates f(x, ·) on fiber seeds at y and returns its third-order jet.
Jet3 jet3_compose(const FiberFunction& f, const ChartPoint& x, const FiberVector& y);

}  // namespace finsler
