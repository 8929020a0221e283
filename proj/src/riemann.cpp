#include "finsler/riemann.hpp"

#include "finsler/errors.hpp"

#include <cmath>

namespace finsler {

Eigen::MatrixXd invert_spd(const Eigen::MatrixXd& a) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw NonPositiveDefinite("LDLT factorization failed");
  const Eigen::VectorXd d = ldlt.vectorD();
  const double largest = d.maxCoeff();
  const double smallest = d.minCoeff();
  if (!(largest > 0.0) || !(smallest > 1e-12 * largest)) {
    throw NonPositiveDefinite("metric matrix is not numerically positive definite");
  }
  Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(a.rows(), a.cols()));
  return 0.5 * (inv + inv.transpose());
}

Tensor3 christoffel(const MetricXJet& jet, const Eigen::MatrixXd& a_inv) {
  const int n = static_cast<int>(jet.value.rows());
  // first kind: Γ_rjk = ½(∂_j a_rk + ∂_k a_rj − ∂_r a_jk)
  Tensor3 first(n);
  for (int r = 0; r < n; ++r)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        const double v = 0.5 * (jet.slope[j](r, k) + jet.slope[k](r, j) - jet.slope[r](j, k));
        first(r, j, k) = v;
        first(r, k, j) = v;
      }
  Tensor3 gamma(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        double v = 0.0;
        for (int r = 0; r < n; ++r) v += a_inv(i, r) * first(r, j, k);
        gamma(i, j, k) = v;
        gamma(i, k, j) = v;
      }
  return gamma;
}

Tensor3 christoffel(const MetricXJet& jet) { return christoffel(jet, invert_spd(jet.value)); }

RiemannPointData riemann_point_data(const RiemannFieldSpec& spec, const ChartPoint& x) {
  const MetricXJet jet = metric_x_jet(spec, x);
  RiemannPointData out;
  out.a = jet.value;
  out.a_inv = invert_spd(jet.value);
  out.christoffel = christoffel(jet, out.a_inv);
  return out;
}

Eigen::VectorXd riemann_spray(const Tensor3& gamma, const FiberVector& y) {
  std::vector<double> yy(y.coords.data(), y.coords.data() + y.dim());
  const auto g = riemann_spray<double>(gamma, yy);
  return Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
}

BetaCovariantData beta_covariant(const OneFormXJet& b, const Tensor3& gamma, const Eigen::MatrixXd& a_inv) {
  const int n = static_cast<int>(b.value.size());
  if (gamma.dim() != n || a_inv.rows() != n) throw DomainError("beta_covariant: dimension mismatch");
  BetaCovariantData out;
  out.b = b.value;
  out.b_up = a_inv * b.value;
  out.b2 = b.value.dot(out.b_up);
  out.cov = b.slope;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int m = 0; m < n; ++m) out.cov(i, j) -= b.value[m] * gamma(m, i, j);
  out.r = 0.5 * (out.cov + out.cov.transpose());
  out.s = 0.5 * (out.cov - out.cov.transpose());
  out.s_up = a_inv * out.s;
  out.s_vec = out.s.transpose() * out.b_up;
  out.r_vec = out.r.transpose() * out.b_up;
  return out;
}

FiberContractions contract_scalars(const BetaCovariantData& data, const FiberVector& y) {
  FiberContractions out;
  out.r00 = y.coords.dot(data.r * y.coords);
  out.r0 = data.r_vec.dot(y.coords);
  out.s0 = data.s_vec.dot(y.coords);
  out.s_up0 = data.s_up * y.coords;
  return out;
}

double metric_compatibility_defect(const MetricXJet& jet, const Tensor3& gamma) {
  const int n = static_cast<int>(jet.value.rows());
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double v = jet.slope[k](i, j);
        for (int m = 0; m < n; ++m)
          v -= gamma(m, i, k) * jet.value(m, j) + gamma(m, j, k) * jet.value(i, m);
        worst = std::max(worst, std::abs(v));
      }
  return worst;
}

}  // namespace finsler
