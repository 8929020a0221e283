#include "finsler/spray.hpp"

#include "finsler/errors.hpp"

#include <cmath>

namespace finsler {

namespace {

std::vector<double> as_std(const FiberVector& y) { return {y.coords.data(), y.coords.data() + y.dim()}; }

Eigen::VectorXd as_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void check_fiber(const PointGeometry& pg, const FiberVector& y) {
  if (y.dim() != pg.dim()) throw DomainError("fiber vector has wrong dimension");
  if (!y.finite()) throw DomainError("fiber vector is not finite");
  if (y.coords.isZero(0.0)) throw SingularEvaluation("zero fiber vector");
}

}  // namespace

PointGeometry point_geometry(const MetricSpec& spec, const ChartPoint& x) {
  spec.domain.require(x);
  PointGeometry pg;
  pg.x = x;
  pg.phi = spec.phi;
  pg.alpha_jet = metric_x_jet(spec.alpha, x);
  pg.beta_jet = eval_oneform_x_jet(spec.beta, x);
  pg.riemann.a = pg.alpha_jet.value;
  pg.riemann.a_inv = invert_spd(pg.alpha_jet.value);
  pg.riemann.christoffel = christoffel(pg.alpha_jet, pg.riemann.a_inv);
  pg.beta = beta_covariant(pg.beta_jet, pg.riemann.christoffel, pg.riemann.a_inv);
  const double b0 = spec.phi.b0();
  if (!(pg.beta.b2 < b0 * b0)) throw DomainError("‖β‖_α exceeds b0 of the φ-family at this point");
  return pg;
}

Eigen::VectorXd spray_via_alphabeta(const PointGeometry& pg, const FiberVector& y) {
  check_fiber(pg, y);
  const auto yy = as_std(y);
  return as_eigen(alphabeta_spray<double>(pg, yy));
}

Eigen::VectorXd spray_via_alphabeta(const MetricSpec& spec, const ChartPoint& x, const FiberVector& y) {
  return spray_via_alphabeta(point_geometry(spec, x), y);
}

Eigen::VectorXd spray_via_definition(const PointGeometry& pg, const FiberVector& y) {
  check_fiber(pg, y);
  const int n = pg.dim();
  // variables 0..n-1 are x-offsets, n..2n-1 are y-offsets
  auto sp = JetSpace::get(2 * n, 2);
  std::vector<TaylorJet> yj;
  for (int i = 0; i < n; ++i) yj.push_back(TaylorJet::variable(sp, n + i, y.coords[i]));
  auto field = [&](double v, auto slope_k) {
    TaylorJet j(sp, v);
    for (int k = 0; k < n; ++k) j.coefficient(sp->unit(k)) = slope_k(k);
    return j;
  };
  TaylorJet alpha2(sp, 0.0), beta(sp, 0.0);
  for (int i = 0; i < n; ++i) {
    TaylorJet row(sp, 0.0);
    for (int j = 0; j < n; ++j) {
      row += field(pg.alpha_jet.value(i, j), [&](int k) { return pg.alpha_jet.slope[k](i, j); }) * yj[j];
    }
    alpha2 += row * yj[i];
    beta += field(pg.beta_jet.value[i], [&](int k) { return pg.beta_jet.slope(i, k); }) * yj[i];
  }
  const TaylorJet alpha = sqrt(alpha2);
  const TaylorJet F = alpha * phi_derivative(pg.phi, 0, beta / alpha);
  const TaylorJet L = F * F;

  Eigen::MatrixXd g(n, n);
  Eigen::VectorXd rhs(n);
  for (int l = 0; l < n; ++l) {
    for (int j = 0; j < n; ++j) g(l, j) = 0.5 * L.derivative({n + l, n + j});
    double v = -L.derivative({l});
    for (int m = 0; m < n; ++m) v += L.derivative({m, n + l}) * y.coords[m];
    rhs[l] = v;
  }
  return 0.25 * invert_spd(g) * rhs;
}

Eigen::VectorXd spray_via_definition(const MetricSpec& spec, const ChartPoint& x, const FiberVector& y) {
  return spray_via_definition(point_geometry(spec, x), y);
}

FundamentalTensor fundamental_tensor(const PointGeometry& pg, const FiberVector& y) {
  check_fiber(pg, y);
  const auto seeds = fiber_seeds(y, 3);
  const TaylorJet F = alphabeta_norm<TaylorJet>(pg.riemann.a, pg.beta.b, pg.phi, seeds);
  const Jet3 half_l = to_jet3(0.5 * (F * F));
  FundamentalTensor out;
  out.g = half_l.d2;
  const int n = pg.dim();
  out.C = Tensor3(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out.C(i, j, k) = 0.5 * half_l.d3(i, j, k);
  if (!leading_minors_positive(out.g)) throw NonPositiveDefinite("fundamental tensor is not positive definite");
  return out;
}

FundamentalTensor fundamental_tensor(const MetricSpec& spec, const ChartPoint& x, const FiberVector& y) {
  return fundamental_tensor(point_geometry(spec, x), y);
}

std::vector<TaylorJet> spray_jets(const PointGeometry& pg, const FiberVector& y, int order, SprayPart part) {
  check_fiber(pg, y);
  const auto seeds = fiber_seeds(y, order);
  return alphabeta_spray<TaylorJet>(pg, seeds, part);
}

SprayCurvature curvature_from_spray(std::span<const TaylorJet> spray, const FiberVector& y) {
  const int n = static_cast<int>(spray.size());
  if (n == 0 || spray[0].space()->order() < 4) throw DomainError("curvature needs spray jets of order ≥ 4");
  SprayCurvature out;
  out.G.resize(n);
  out.B = Tensor4(n);
  out.D = Tensor4(n);
  out.E = Eigen::MatrixXd::Zero(n, n);

  TaylorJet div = spray[0].partial(0);
  for (int m = 1; m < n; ++m) div += spray[m].partial(m);

  for (int i = 0; i < n; ++i) {
    out.G[i] = spray[i].value();
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k)
        for (int l = k; l < n; ++l) {
          const double b = spray[i].derivative({j, k, l});
          out.B(i, j, k, l) = b;
        }
  }
  const double mu = 1.0 / (n + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k)
        for (int l = k; l < n; ++l) {
          // ∂³(h y^i) = h_jkl y^i + h_jk δ^i_l + h_jl δ^i_k + h_kl δ^i_j
          double corr = div.derivative({j, k, l}) * y.coords[i];
          if (i == l) corr += div.derivative({j, k});
          if (i == k) corr += div.derivative({j, l});
          if (i == j) corr += div.derivative({k, l});
          out.D(i, j, k, l) = out.B(i, j, k, l) - mu * corr;
        }
  // fill the remaining index orderings from the sorted representative
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          int a = j, b = k, c = l;
          if (a > b) std::swap(a, b);
          if (b > c) std::swap(b, c);
          if (a > b) std::swap(a, b);
          out.B(i, j, k, l) = out.B(i, a, b, c);
          out.D(i, j, k, l) = out.D(i, a, b, c);
        }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      out.E(i, j) = 0.5 * div.derivative({i, j});
      out.E(j, i) = out.E(i, j);
    }
  return out;
}

SprayCurvature spray_curvature(const PointGeometry& pg, const FiberVector& y) {
  const auto jets = spray_jets(pg, y, 4);
  return curvature_from_spray(jets, y);
}

Tensor4 berwald_tensor(const MetricSpec& spec, const ChartPoint& x, const FiberVector& y) {
  const auto pg = point_geometry(spec, x);
  const auto jets = spray_jets(pg, y, 3);
  const int n = pg.dim();
  Tensor4 B(n);
  for (int i = 0; i < n; ++i) {
    const Jet3 j3 = to_jet3(jets[i]);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) B(i, j, k, l) = j3.d3(j, k, l);
  }
  return B;
}

Tensor4 douglas_tensor(const MetricSpec& spec, const ChartPoint& x, const FiberVector& y) {
  return spray_curvature(point_geometry(spec, x), y).D;
}

Eigen::MatrixXd mean_berwald(const MetricSpec& spec, const ChartPoint& x, const FiberVector& y) {
  return spray_curvature(point_geometry(spec, x), y).E;
}

TiData compute_Ti(const PointGeometry& pg, const FiberVector& y) {
  check_fiber(pg, y);
  const int n = pg.dim();
  const auto yy = as_std(y);
  const FiberTerms<double> t = fiber_terms<double>(pg, yy);
  const double b2 = pg.beta.b2;
  const QTPTriple q = qtp_generic(pg.phi, t.s, b2);
  const QTPSlopes dq = qtp_slopes(pg.phi, t.s, b2);
  const double bracket = t.r00 - 2.0 * q.Q * t.alpha * t.s0;
  const double gap = b2 - t.s * t.s;
  TiData out;
  out.T.resize(n);
  for (int i = 0; i < n; ++i) out.T[i] = t.alpha * q.Q * t.s_up0[i] + q.Psi * bracket * pg.beta.b_up[i];
  out.divT = dq.dQ * t.s0 + dq.dPsi / t.alpha * gap * bracket +
             2.0 * q.Psi * (t.r0 - dq.dQ * gap * t.s0 - q.Q * t.s * t.s0);
  return out;
}

TiData compute_Ti(const MetricSpec& spec, const ChartPoint& x, const FiberVector& y) {
  return compute_Ti(point_geometry(spec, x), y);
}

Eigen::VectorXd h00_residual(const PointGeometry& pg, const PointGeometry& pg_bar, const FiberVector& y) {
  if (pg.dim() != pg_bar.dim()) throw DomainError("metrics live on charts of different dimension");
  const TiData t = compute_Ti(pg, y);
  const TiData tb = compute_Ti(pg_bar, y);
  const double mu = 1.0 / (pg.dim() + 1);
  return t.T - tb.T - mu * (t.divT - tb.divT) * y.coords;
}

Eigen::VectorXd h00_residual(const MetricSpec& spec, const MetricSpec& spec_bar, const ChartPoint& x,
                             const FiberVector& y) {
  return h00_residual(point_geometry(spec, x), point_geometry(spec_bar, x), y);
}

NormDerivatives norm_derivatives(const PointGeometry& pg, const FiberVector& y) {
  check_fiber(pg, y);
  const auto seeds = fiber_seeds(y, 3);
  const Jet3 j = to_jet3(alphabeta_norm<TaylorJet>(pg.riemann.a, pg.beta.b, pg.phi, seeds));
  return NormDerivatives{j.value, j.d2, j.d3};
}

}  // namespace finsler
