#pragma once

#include "finsler/errors.hpp"
#include "finsler/jet.hpp"
#include "finsler/types.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

namespace finsler {

struct MetricSpec;

enum class PhiKind { quadratic, matsumoto };

std::string to_string(PhiKind k);

/// φ(s) = 1 + εs + ks² (quadratic, k ≠ 0) or φ(s) = 1/(1 − s) (matsumoto).
struct PhiFamily {
  PhiKind kind = PhiKind::matsumoto;
  double epsilon = 0.0;
  double k = 0.0;

  static PhiFamily quadratic(double epsilon, double k);
  static PhiFamily matsumoto();

  /// Supremum of admissible ‖β‖_α.
  double b0() const;
};

/// φ^{(r)}(s), any r ≥ 0.  No domain check.
double phi_derivative(const PhiFamily& fam, int r, double s);

/// φ^{(r)} composed with a jet s.
TaylorJet phi_derivative(const PhiFamily& fam, int r, const TaylorJet& s);

struct PhiJet {
  double phi = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// (φ, φ', φ'') at s.  DomainError unless |s| < b0.
PhiJet phi_jet(const PhiFamily& fam, double s);

/// φ − sφ' + (b² − s²)φ'' > 0.
bool regularity(const PhiFamily& fam, double s, double b);

template <class S>
struct QTP {
  S Q;
  S Theta;
  S Psi;
};
using QTPTriple = QTP<double>;

/// Q, Θ, Ψ from the general φ-based formulas; works for scalars and jets in s.
template <class S>
QTP<S> qtp_generic(const PhiFamily& fam, const S& s, double b2) {
  const double sv = value_of(s);
  if (std::abs(sv) >= fam.b0()) throw DomainError("s outside the regular range of the φ-family");
  const S p0 = phi_derivative(fam, 0, s);
  const S p1 = phi_derivative(fam, 1, s);
  const S p2 = phi_derivative(fam, 2, s);
  const S den = p0 - s * p1;
  require_nonsingular(value_of(den), std::max(std::abs(value_of(p0)), std::abs(sv * value_of(p1))), "Q");
  const S delta = den + (b2 - s * s) * p2;
  require_nonsingular(value_of(delta), std::max(std::abs(value_of(den)), std::abs(value_of(p2))), "Θ/Ψ");
  require_nonsingular(value_of(p0), 1.0, "Θ");
  return QTP<S>{p1 / den, (p0 * p1 - s * (p0 * p2 + p1 * p1)) / (2.0 * p0 * delta), 0.5 * p2 / delta};
}

/// Which reading of the hand-simplified closed forms to use.  `printed` reproduces
/// the published table verbatim; `corrected` re-derives the quadratic Θ numerator
/// as ε − 3εks² − 4k²s³.
enum class ClosedFormReading { printed, corrected };

QTPTriple qtp_closed(const PhiFamily& fam, double s, double b2,
                     ClosedFormReading reading = ClosedFormReading::printed);

/// dQ/ds and dΨ/ds, closed form per family.
struct QTPSlopes {
  double dQ = 0.0;
  double dPsi = 0.0;
};
QTPSlopes qtp_slopes(const PhiFamily& fam, double s, double b2);

/// F = α φ(β/α) from point data a_ij, b_i.
template <class S>
S alphabeta_norm(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const PhiFamily& fam, std::span<const S> y) {
  const int n = static_cast<int>(b.size());
  S alpha2 = y[0] * 0.0;
  S beta = y[0] * 0.0;
  for (int i = 0; i < n; ++i) {
    S row = y[0] * 0.0;
    for (int j = 0; j < n; ++j) row += y[j] * a(i, j);
    alpha2 += row * y[i];
    beta += y[i] * b[i];
  }
  if (!(value_of(alpha2) > 0.0)) throw SingularEvaluation("α vanishes: zero fiber vector");
  using std::sqrt;
  const S alpha = sqrt(alpha2);
  const S s = beta / alpha;
  if (std::abs(value_of(s)) >= fam.b0()) throw DomainError("β/α outside the regular range");
  return alpha * phi_derivative(fam, 0, s);
}

/// F(x, y) of a full metric specification.
double finsler_value(const MetricSpec& spec, const ChartPoint& x, const FiberVector& y);

}  // namespace finsler
