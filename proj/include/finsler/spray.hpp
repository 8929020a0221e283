#pragma once

// Spray coefficients and fiber curvature of (α, β)-metrics.
//
// Two independent routes produce G^i:
//   * spray_via_alphabeta assembles G^i = G^i_α + αQ s^i_0 + (−2Qαs_0 + r_00)(Ψ b^i + Θ α⁻¹ y^i)
//     from the Levi-Civita data of α and the covariant derivative of β;
//   * spray_via_definition evaluates G^i = ¼ g^{il}([F²]_{x^m y^l} y^m − [F²]_{x^l})
//     with (x, y) Taylor jets of F² built directly from the field jets.
// Every curvature tensor is taken from the first route; the second is the oracle.

#include "finsler/alphabeta.hpp"
#include "finsler/jet.hpp"
#include "finsler/metric_spec.hpp"
#include "finsler/riemann.hpp"
#include "finsler/tensor.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace finsler {

/// All x-local data of one metric at one chart point, computed once and
/// shared by every fiber evaluated there.
struct PointGeometry {
  ChartPoint x;
  PhiFamily phi;
  MetricXJet alpha_jet;
  OneFormXJet beta_jet;
  RiemannPointData riemann;
  BetaCovariantData beta;

  int dim() const { return x.dim(); }
};

/// Throws DomainError outside the chart box or when ‖β‖_α ≥ b0.
PointGeometry point_geometry(const MetricSpec& spec, const ChartPoint& x);

/// Fiber scalars entering the spray formula.
template <class S>
struct FiberTerms {
  S alpha, beta, s, r00, r0, s0;
  std::vector<S> s_up0;  // s^i_0
};

template <class S>
S linear_form(const Eigen::VectorXd& c, std::span<const S> y) {
  S acc = y[0] * c[0];
  for (int i = 1; i < static_cast<int>(c.size()); ++i) acc += y[i] * c[i];
  return acc;
}

template <class S>
S quadratic_form(const Eigen::MatrixXd& m, std::span<const S> y) {
  const int n = static_cast<int>(m.rows());
  S acc = y[0] * 0.0;
  for (int i = 0; i < n; ++i) {
    S row = y[0] * 0.0;
    for (int j = 0; j < n; ++j) row += y[j] * m(i, j);
    acc += row * y[i];
  }
  return acc;
}

template <class S>
FiberTerms<S> fiber_terms(const PointGeometry& pg, std::span<const S> y) {
  using std::sqrt;
  const S alpha2 = quadratic_form(pg.riemann.a, y);
  if (!(value_of(alpha2) > 0.0)) throw SingularEvaluation("α vanishes: zero fiber vector");
  FiberTerms<S> t{sqrt(alpha2), linear_form(pg.beta.b, y), y[0], quadratic_form(pg.beta.r, y),
                  linear_form(pg.beta.r_vec, y), linear_form(pg.beta.s_vec, y), {}};
  t.s = t.beta / t.alpha;
  const int n = pg.dim();
  t.s_up0.reserve(n);
  for (int i = 0; i < n; ++i) t.s_up0.push_back(linear_form<S>(pg.beta.s_up.row(i).transpose(), y));
  return t;
}

enum class SprayPart {
  full,            // G^i
  alpha_plus_t,    // G^i_α + T^i (drops the Θ y^i term)
  t_only           // T^i = αQ s^i_0 + Ψ(−2Qαs_0 + r_00) b^i
};

/// Spray assembled from α, β data, for scalar or jet fibers.
template <class S>
std::vector<S> alphabeta_spray(const PointGeometry& pg, std::span<const S> y, SprayPart part = SprayPart::full) {
  const int n = pg.dim();
  const FiberTerms<S> t = fiber_terms(pg, y);
  const QTP<S> q = qtp_generic(pg.phi, t.s, pg.beta.b2);
  const S bracket = t.r00 - 2.0 * q.Q * t.alpha * t.s0;
  const S aq = t.alpha * q.Q;
  const S psi_term = q.Psi * bracket;
  std::vector<S> out;
  if (part == SprayPart::t_only) {
    out.assign(n, y[0] * 0.0);
  } else {
    out = riemann_spray<S>(pg.riemann.christoffel, y);
  }
  S theta_term = y[0] * 0.0;
  if (part == SprayPart::full) theta_term = q.Theta * bracket / t.alpha;
  for (int i = 0; i < n; ++i) {
    out[i] += aq * t.s_up0[i] + psi_term * pg.beta.b_up[i];
    if (part == SprayPart::full) out[i] += theta_term * y[i];
  }
  return out;
}

Eigen::VectorXd spray_via_alphabeta(const PointGeometry& pg, const FiberVector& y);
Eigen::VectorXd spray_via_alphabeta(const MetricSpec& spec, const ChartPoint& x, const FiberVector& y);

Eigen::VectorXd spray_via_definition(const PointGeometry& pg, const FiberVector& y);
Eigen::VectorXd spray_via_definition(const MetricSpec& spec, const ChartPoint& x, const FiberVector& y);

struct FundamentalTensor {
  Eigen::MatrixXd g;  // g_ij = ½ [F²]_{y^i y^j}
  Tensor3 C;          // C_ijk = ½ ∂g_ij/∂y^k
};

/// Throws NonPositiveDefinite when g is not positive definite.
FundamentalTensor fundamental_tensor(const PointGeometry& pg, const FiberVector& y);
FundamentalTensor fundamental_tensor(const MetricSpec& spec, const ChartPoint& x, const FiberVector& y);

/// Berwald, Douglas and mean Berwald tensors at one fiber.
struct SprayCurvature {
  Eigen::VectorXd G;
  Tensor4 B;  // B(i, j, k, l) = B^i_jkl
  Tensor4 D;  // D(i, j, k, l) = D^i_jkl
  Eigen::MatrixXd E;
};

/// Spray jets of order 4 at y (enough for the Douglas tensor).
std::vector<TaylorJet> spray_jets(const PointGeometry& pg, const FiberVector& y, int order = 4,
                                  SprayPart part = SprayPart::full);

/// Curvature of an arbitrary spray given as fiber jets of order ≥ 4 seeded at y.
SprayCurvature curvature_from_spray(std::span<const TaylorJet> spray, const FiberVector& y);

SprayCurvature spray_curvature(const PointGeometry& pg, const FiberVector& y);

Tensor4 berwald_tensor(const MetricSpec& spec, const ChartPoint& x, const FiberVector& y);
Tensor4 douglas_tensor(const MetricSpec& spec, const ChartPoint& x, const FiberVector& y);
Eigen::MatrixXd mean_berwald(const MetricSpec& spec, const ChartPoint& x, const FiberVector& y);

/// T^i, its fiber divergence T^m_{y^m} (closed form), evaluated at one fiber.
struct TiData {
  Eigen::VectorXd T;
  double divT = 0.0;
};

TiData compute_Ti(const PointGeometry& pg, const FiberVector& y);
TiData compute_Ti(const MetricSpec& spec, const ChartPoint& x, const FiberVector& y);

/// H^i_00 = T^i − T̄^i − (T^m_{y^m} − T̄^m_{y^m}) y^i / (n + 1).
Eigen::VectorXd h00_residual(const PointGeometry& pg, const PointGeometry& pg_bar, const FiberVector& y);
Eigen::VectorXd h00_residual(const MetricSpec& spec, const MetricSpec& spec_bar, const ChartPoint& x,
                             const FiberVector& y);

/// Fiber Hessian F_{y^i y^j} and third derivative F_{y^i y^j y^k}.
struct NormDerivatives {
  double F = 0.0;
  Eigen::MatrixXd hessian;
  Tensor3 third;
};
NormDerivatives norm_derivatives(const PointGeometry& pg, const FiberVector& y);

}  // namespace finsler
