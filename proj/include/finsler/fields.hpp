#pragma once

#include "finsler/polynomial.hpp"
#include "finsler/types.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace finsler {

enum class RiemannFamily { euclidean, diagonal_polynomial, conformally_flat };
enum class OneFormFamily { constant, affine, gradient_of_polynomial };

std::string to_string(RiemannFamily f);
std::string to_string(OneFormFamily f);

/// Riemannian metric field a_ij(x) from a closed registry of analytic families.
struct RiemannFieldSpec {
  RiemannFamily family = RiemannFamily::euclidean;
  int dim = 0;
  std::vector<Polynomial> diagonal;  // a_ii(x), diagonal-polynomial only
  Polynomial exponent;               // u(x) with a_ij = e^{2u} δ_ij, conformally-flat only

  static RiemannFieldSpec euclidean(int n);
  static RiemannFieldSpec diagonal_polynomial(std::vector<Polynomial> diag);
  static RiemannFieldSpec conformally_flat(Polynomial u);
};

/// 1-form field b_i(x).
struct OneFormFieldSpec {
  OneFormFamily family = OneFormFamily::constant;
  int dim = 0;
  Eigen::VectorXd offset;  // c_i (constant, affine)
  Eigen::MatrixXd linear;  // M_ij with b_i = c_i + M_ij x^j (affine)
  Polynomial potential;    // f with b_i = ∂f/∂x^i (gradient-of-polynomial)

  static OneFormFieldSpec constant(Eigen::VectorXd c);
  static OneFormFieldSpec affine(Eigen::VectorXd c, Eigen::MatrixXd m);
  static OneFormFieldSpec gradient(Polynomial f);
};

/// a_ij and ∂a_ij/∂x^k; slope[k](i, j) = ∂_k a_ij.
struct MetricXJet {
  Eigen::MatrixXd value;
  std::vector<Eigen::MatrixXd> slope;
};

/// b_i and ∂b_i/∂x^j; slope(i, j) = ∂_j b_i.
struct OneFormXJet {
  Eigen::VectorXd value;
  Eigen::MatrixXd slope;
};

/// Axis-aligned chart box.
struct ChartDomain {
  Eigen::VectorXd min;
  Eigen::VectorXd max;

  bool contains(const ChartPoint& x) const;
  /// Throws DomainError when x is outside the box or has the wrong length.
  void require(const ChartPoint& x) const;
};

/// True when every leading principal minor of m is positive.
bool leading_minors_positive(const Eigen::MatrixXd& m);

Eigen::MatrixXd eval_metric(const RiemannFieldSpec& spec, const ChartPoint& x);
MetricXJet metric_x_jet(const RiemannFieldSpec& spec, const ChartPoint& x);

Eigen::VectorXd eval_oneform(const OneFormFieldSpec& spec, const ChartPoint& x);
OneFormXJet eval_oneform_x_jet(const OneFormFieldSpec& spec, const ChartPoint& x);

// Finite-difference fallbacks: central differences with step 1e-5·max(1, |x^k|)
// and one level of Richardson extrapolation.
MetricXJet metric_x_jet_numeric(const RiemannFieldSpec& spec, const ChartPoint& x);
OneFormXJet oneform_x_jet_numeric(const OneFormFieldSpec& spec, const ChartPoint& x);

}  // namespace finsler
