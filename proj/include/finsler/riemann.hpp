#pragma once

#include "finsler/fields.hpp"
#include "finsler/tensor.hpp"
#include "finsler/types.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace finsler {

/// Levi-Civita data of α at one point.
struct RiemannPointData {
  Eigen::MatrixXd a;
  Eigen::MatrixXd a_inv;
  Tensor3 christoffel;  // christoffel(i, j, k) = γ^i_jk
};

/// Covariant calculus of β with respect to α at one point.
struct BetaCovariantData {
  Eigen::VectorXd b;      // b_i
  Eigen::VectorXd b_up;   // b^i = a^{ij} b_j
  double b2 = 0.0;        // ‖β‖²_α
  Eigen::MatrixXd cov;    // cov(i, j) = b_{i|j}
  Eigen::MatrixXd r;      // symmetric part
  Eigen::MatrixXd s;      // antisymmetric part
  Eigen::MatrixXd s_up;   // s^i_j = a^{il} s_lj
  Eigen::VectorXd s_vec;  // s_j = b^i s_ij
  Eigen::VectorXd r_vec;  // r_j = b^i r_ij
};

/// Fiber contractions of the covariant data with y.
struct FiberContractions {
  double r00 = 0.0;
  double r0 = 0.0;
  double s0 = 0.0;
  Eigen::VectorXd s_up0;  // s^i_0
};

/// Inverse of a symmetric positive-definite matrix.  Rejects matrices whose
/// smallest LDLᵀ pivot is below 1e-12 times the largest.
Eigen::MatrixXd invert_spd(const Eigen::MatrixXd& a);

Tensor3 christoffel(const MetricXJet& jet, const Eigen::MatrixXd& a_inv);
Tensor3 christoffel(const MetricXJet& jet);

RiemannPointData riemann_point_data(const RiemannFieldSpec& spec, const ChartPoint& x);

/// G^i_α = ½ γ^i_jk y^j y^k for scalar or jet fibers.
template <class S>
std::vector<S> riemann_spray(const Tensor3& gamma, std::span<const S> y) {
  const int n = gamma.dim();
  std::vector<S> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    S acc = y[0] * 0.0;
    for (int j = 0; j < n; ++j) {
      S row = y[0] * 0.0;
      for (int k = 0; k < n; ++k) row += y[k] * gamma(i, j, k);
      acc += row * y[j];
    }
    out.push_back(acc * 0.5);
  }
  return out;
}

Eigen::VectorXd riemann_spray(const Tensor3& gamma, const FiberVector& y);

BetaCovariantData beta_covariant(const OneFormXJet& b, const Tensor3& gamma, const Eigen::MatrixXd& a_inv);

FiberContractions contract_scalars(const BetaCovariantData& data, const FiberVector& y);

/// a_{ij|k} = ∂_k a_ij − γ^m_ik a_mj − γ^m_jk a_im, returned as max |entry|.
double metric_compatibility_defect(const MetricXJet& jet, const Tensor3& gamma);

}  // namespace finsler
