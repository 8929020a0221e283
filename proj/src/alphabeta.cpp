#include "finsler/alphabeta.hpp"

#include "finsler/metric_spec.hpp"
#include "finsler/riemann.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace finsler {

std::string to_string(PhiKind k) { return k == PhiKind::quadratic ? "quadratic" : "matsumoto"; }

PhiFamily PhiFamily::quadratic(double epsilon, double k) {
  if (k == 0.0 || !std::isfinite(k) || !std::isfinite(epsilon)) {
    throw SpecError("quadratic φ-family needs finite ε and k ≠ 0");
  }
  return PhiFamily{PhiKind::quadratic, epsilon, k};
}

PhiFamily PhiFamily::matsumoto() { return PhiFamily{PhiKind::matsumoto, 0.0, 0.0}; }

double PhiFamily::b0() const {
  if (kind == PhiKind::matsumoto) return 0.5;
  // φ − sφ' + (b² − s²)φ'' = 1 + 2kb² − 3ks² must stay positive for |s| ≤ b.
  double bound = k > 0.0 ? 1.0 / std::sqrt(k) : 1.0 / std::sqrt(-2.0 * k);
  // φ itself must stay positive: nearest real root of 1 + εs + ks².
  const double disc = epsilon * epsilon - 4.0 * k;
  if (disc >= 0.0) {
    const double sq = std::sqrt(disc);
    const double r1 = (-epsilon + sq) / (2.0 * k);
    const double r2 = (-epsilon - sq) / (2.0 * k);
    bound = std::min({bound, std::abs(r1), std::abs(r2)});
  }
  return std::min(bound, 1e6);
}

double phi_derivative(const PhiFamily& fam, int r, double s) {
  if (fam.kind == PhiKind::quadratic) {
    switch (r) {
      case 0: return 1.0 + fam.epsilon * s + fam.k * s * s;
      case 1: return fam.epsilon + 2.0 * fam.k * s;
      case 2: return 2.0 * fam.k;
      default: return 0.0;
    }
  }
  // d^r/ds^r (1 − s)^{-1} = r! (1 − s)^{-(r+1)}
  const double u = 1.0 - s;
  double v = 1.0 / u;
  for (int m = 1; m <= r; ++m) v *= m / u;
  return v;
}

TaylorJet phi_derivative(const PhiFamily& fam, int r, const TaylorJet& s) {
  const int order = s.space()->order();
  if (fam.kind == PhiKind::matsumoto && !(s.value() < 1.0)) throw DomainError("matsumoto φ needs s < 1");
  std::vector<double> d(order + 1);
  for (int m = 0; m <= order; ++m) d[m] = phi_derivative(fam, r + m, s.value());
  return s.compose(d);
}

PhiJet phi_jet(const PhiFamily& fam, double s) {
  if (!std::isfinite(s) || std::abs(s) >= fam.b0()) throw DomainError("s outside the regular range of the φ-family");
  return PhiJet{phi_derivative(fam, 0, s), phi_derivative(fam, 1, s), phi_derivative(fam, 2, s)};
}

bool regularity(const PhiFamily& fam, double s, double b) {
  if (fam.kind == PhiKind::matsumoto && s >= 1.0) return false;
  const double p0 = phi_derivative(fam, 0, s);
  const double p1 = phi_derivative(fam, 1, s);
  const double p2 = phi_derivative(fam, 2, s);
  return p0 - s * p1 + (b * b - s * s) * p2 > 0.0;
}

QTPTriple qtp_closed(const PhiFamily& fam, double s, double b2, ClosedFormReading reading) {
  if (std::abs(s) >= fam.b0()) throw DomainError("s outside the regular range of the φ-family");
  QTPTriple out;
  if (fam.kind == PhiKind::quadratic) {
    const double eps = fam.epsilon, k = fam.k;
    const double d1 = 1.0 - k * s * s;
    const double d2 = 1.0 + 2.0 * k * b2 - 3.0 * k * s * s;
    const double phi = 1.0 + eps * s + k * s * s;
    require_nonsingular(d1, 1.0, "closed Q");
    require_nonsingular(d2, 1.0 + std::abs(2.0 * k * b2), "closed Ψ");
    require_nonsingular(phi, 1.0, "closed Θ");
    const double last = reading == ClosedFormReading::printed ? 4.0 * k * k * s * s : 4.0 * k * k * s * s * s;
    out.Q = (eps + 2.0 * k * s) / d1;
    out.Theta = (eps - 3.0 * eps * k * s * s - last) / (2.0 * d2 * phi);
    out.Psi = k / d2;
  } else {
    const double d1 = 1.0 - 2.0 * s;
    const double d2 = 1.0 + 2.0 * b2 - 3.0 * s;
    require_nonsingular(d1, 1.0, "closed Q̄");
    require_nonsingular(d2, 1.0 + 2.0 * b2, "closed Ψ̄");
    out.Q = 1.0 / d1;
    out.Theta = (1.0 - 4.0 * s) / (2.0 * d2);
    out.Psi = 1.0 / d2;
  }
  return out;
}

QTPSlopes qtp_slopes(const PhiFamily& fam, double s, double b2) {
  if (std::abs(s) >= fam.b0()) throw DomainError("s outside the regular range of the φ-family");
  QTPSlopes out;
  if (fam.kind == PhiKind::quadratic) {
    const double eps = fam.epsilon, k = fam.k;
    const double d1 = 1.0 - k * s * s;
    const double d2 = 1.0 + 2.0 * k * b2 - 3.0 * k * s * s;
    require_nonsingular(d1, 1.0, "Q'");
    require_nonsingular(d2, 1.0 + std::abs(2.0 * k * b2), "Ψ'");
    out.dQ = 2.0 * k * (1.0 + eps * s + k * s * s) / (d1 * d1);
    out.dPsi = 6.0 * k * k * s / (d2 * d2);
  } else {
    const double d1 = 1.0 - 2.0 * s;
    const double d2 = 1.0 + 2.0 * b2 - 3.0 * s;
    require_nonsingular(d1, 1.0, "Q̄'");
    require_nonsingular(d2, 1.0 + 2.0 * b2, "Ψ̄'");
    out.dQ = 2.0 / (d1 * d1);
    out.dPsi = 3.0 / (d2 * d2);
  }
  return out;
}

double finsler_value(const MetricSpec& spec, const ChartPoint& x, const FiberVector& y) {
  spec.domain.require(x);
  if (y.dim() != spec.dim) throw DomainError("fiber vector has wrong dimension");
  const Eigen::MatrixXd a = eval_metric(spec.alpha, x);
  const Eigen::VectorXd b = eval_oneform(spec.beta, x);
  const double b2 = b.dot(invert_spd(a) * b);
  if (!(b2 < spec.phi.b0() * spec.phi.b0())) throw DomainError("‖β‖_α exceeds b0 of the φ-family");
  std::vector<double> yy(y.coords.data(), y.coords.data() + y.dim());
  return alphabeta_norm<double>(a, b, spec.phi, yy);
}

}  // namespace finsler
