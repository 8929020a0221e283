#include "finsler/fields.hpp"

#include "finsler/errors.hpp"

#include <cmath>

namespace finsler {

std::string to_string(RiemannFamily f) {
  switch (f) {
    case RiemannFamily::euclidean: return "euclidean";
    case RiemannFamily::diagonal_polynomial: return "diagonal-polynomial";
    case RiemannFamily::conformally_flat: return "conformally-flat";
  }
  return "?";
}

std::string to_string(OneFormFamily f) {
  switch (f) {
    case OneFormFamily::constant: return "constant";
    case OneFormFamily::affine: return "affine";
    case OneFormFamily::gradient_of_polynomial: return "gradient-of-polynomial";
  }
  return "?";
}

RiemannFieldSpec RiemannFieldSpec::euclidean(int n) {
  RiemannFieldSpec s;
  s.family = RiemannFamily::euclidean;
  s.dim = n;
  return s;
}

RiemannFieldSpec RiemannFieldSpec::diagonal_polynomial(std::vector<Polynomial> diag) {
  RiemannFieldSpec s;
  s.family = RiemannFamily::diagonal_polynomial;
  s.dim = static_cast<int>(diag.size());
  for (const auto& p : diag)
    if (p.dim() != s.dim) throw SpecError("diagonal polynomial dimension mismatch");
  s.diagonal = std::move(diag);
  return s;
}

RiemannFieldSpec RiemannFieldSpec::conformally_flat(Polynomial u) {
  RiemannFieldSpec s;
  s.family = RiemannFamily::conformally_flat;
  s.dim = u.dim();
  s.exponent = std::move(u);
  return s;
}

OneFormFieldSpec OneFormFieldSpec::constant(Eigen::VectorXd c) {
  OneFormFieldSpec s;
  s.family = OneFormFamily::constant;
  s.dim = static_cast<int>(c.size());
  s.offset = std::move(c);
  s.linear = Eigen::MatrixXd::Zero(s.dim, s.dim);
  return s;
}

OneFormFieldSpec OneFormFieldSpec::affine(Eigen::VectorXd c, Eigen::MatrixXd m) {
  if (m.rows() != c.size() || m.cols() != c.size()) throw SpecError("affine 1-form: M must be n×n");
  OneFormFieldSpec s;
  s.family = OneFormFamily::affine;
  s.dim = static_cast<int>(c.size());
  s.offset = std::move(c);
  s.linear = std::move(m);
  return s;
}

OneFormFieldSpec OneFormFieldSpec::gradient(Polynomial f) {
  OneFormFieldSpec s;
  s.family = OneFormFamily::gradient_of_polynomial;
  s.dim = f.dim();
  s.potential = std::move(f);
  return s;
}

bool ChartDomain::contains(const ChartPoint& x) const {
  if (x.dim() != min.size() || x.dim() != max.size() || !x.finite()) return false;
  for (int i = 0; i < x.dim(); ++i)
    if (x.coords[i] < min[i] || x.coords[i] > max[i]) return false;
  return true;
}

void ChartDomain::require(const ChartPoint& x) const {
  if (!contains(x)) throw DomainError("point outside the declared chart domain");
}

bool leading_minors_positive(const Eigen::MatrixXd& m) {
  for (Eigen::Index k = 1; k <= m.rows(); ++k)
    if (!(m.topLeftCorner(k, k).determinant() > 0.0)) return false;
  return true;
}

namespace {

void check_point(int dim, const ChartPoint& x) {
  if (x.dim() != dim) throw DomainError("chart point has wrong dimension");
  if (!x.finite()) throw DomainError("chart point has non-finite coordinates");
}

void check_positive_definite(const Eigen::MatrixXd& a) {
  if (!a.allFinite()) throw DomainError("metric field is not finite at this point");
  if (!leading_minors_positive(a)) throw NonPositiveDefinite("metric field is not positive definite");
}

}  // namespace

Eigen::MatrixXd eval_metric(const RiemannFieldSpec& spec, const ChartPoint& x) {
  return metric_x_jet(spec, x).value;
}

MetricXJet metric_x_jet(const RiemannFieldSpec& spec, const ChartPoint& x) {
  const int n = spec.dim;
  check_point(n, x);
  MetricXJet out;
  out.value = Eigen::MatrixXd::Identity(n, n);
  out.slope.assign(n, Eigen::MatrixXd::Zero(n, n));
  switch (spec.family) {
    case RiemannFamily::euclidean:
      break;
    case RiemannFamily::diagonal_polynomial:
      for (int i = 0; i < n; ++i) {
        out.value(i, i) = spec.diagonal[i].value(x.coords);
        const Eigen::VectorXd g = spec.diagonal[i].gradient(x.coords);
        for (int k = 0; k < n; ++k) out.slope[k](i, i) = g[k];
      }
      break;
    case RiemannFamily::conformally_flat: {
      const double e = std::exp(2.0 * spec.exponent.value(x.coords));
      const Eigen::VectorXd du = spec.exponent.gradient(x.coords);
      out.value *= e;
      for (int k = 0; k < n; ++k) out.slope[k] = Eigen::MatrixXd::Identity(n, n) * (2.0 * du[k] * e);
      break;
    }
  }
  check_positive_definite(out.value);
  return out;
}

Eigen::VectorXd eval_oneform(const OneFormFieldSpec& spec, const ChartPoint& x) {
  return eval_oneform_x_jet(spec, x).value;
}

OneFormXJet eval_oneform_x_jet(const OneFormFieldSpec& spec, const ChartPoint& x) {
  const int n = spec.dim;
  check_point(n, x);
  OneFormXJet out;
  switch (spec.family) {
    case OneFormFamily::constant:
      out.value = spec.offset;
      out.slope = Eigen::MatrixXd::Zero(n, n);
      break;
    case OneFormFamily::affine:
      out.value = spec.offset + spec.linear * x.coords;
      out.slope = spec.linear;
      break;
    case OneFormFamily::gradient_of_polynomial:
      out.value = spec.potential.gradient(x.coords);
      out.slope = spec.potential.hessian(x.coords);
      break;
  }
  if (!out.value.allFinite()) throw DomainError("1-form field is not finite at this point");
  return out;
}

namespace {

// Richardson-extrapolated central difference of a vector-valued map along e_k.
template <class Eval>
Eigen::VectorXd central_difference(const Eval& eval, const ChartPoint& x, int k) {
  const double h = 1e-5 * std::max(1.0, std::abs(x.coords[k]));
  auto diff = [&](double step) {
    ChartPoint xp = x, xm = x;
    xp.coords[k] += step;
    xm.coords[k] -= step;
    return Eigen::VectorXd((eval(xp) - eval(xm)) / (2.0 * step));
  };
  const Eigen::VectorXd coarse = diff(h);
  const Eigen::VectorXd fine = diff(0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace

MetricXJet metric_x_jet_numeric(const RiemannFieldSpec& spec, const ChartPoint& x) {
  const int n = spec.dim;
  MetricXJet out;
  out.value = eval_metric(spec, x);
  out.slope.assign(n, Eigen::MatrixXd::Zero(n, n));
  auto flat = [&](const ChartPoint& p) {
    const Eigen::MatrixXd a = eval_metric(spec, p);
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(a.data(), a.size()));
  };
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd d = central_difference(flat, x, k);
    out.slope[k] = Eigen::Map<const Eigen::MatrixXd>(d.data(), n, n);
  }
  return out;
}

OneFormXJet oneform_x_jet_numeric(const OneFormFieldSpec& spec, const ChartPoint& x) {
  const int n = spec.dim;
  OneFormXJet out;
  out.value = eval_oneform(spec, x);
  out.slope.resize(n, n);
  auto eval = [&](const ChartPoint& p) { return eval_oneform(spec, p); };
  for (int k = 0; k < n; ++k) out.slope.col(k) = central_difference(eval, x, k);
  return out;
}

}  // namespace finsler
