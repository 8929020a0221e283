#include "finsler/polynomial.hpp"

#include "finsler/errors.hpp"

#include <cmath>

namespace finsler {

Polynomial::Polynomial(int n, std::vector<Term> terms) : n_(n), terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (static_cast<int>(t.powers.size()) != n_) {
      throw SpecError("polynomial term has wrong number of exponents");
    }
    for (int p : t.powers) {
      if (p < 0) throw SpecError("polynomial exponents must be nonnegative");
    }
  }
}

Polynomial Polynomial::constant(int n, double c) {
  return Polynomial(n, {Term{c, std::vector<int>(n, 0)}});
}

double Polynomial::monomial(const Term& t, const Eigen::VectorXd& x, int skip_a, int skip_b) const {
  double v = t.coef;
  for (int i = 0; i < n_; ++i) {
    int p = t.powers[i];
    if (i == skip_a) {
      if (p == 0) return 0.0;
      v *= p;
      --p;
    }
    if (i == skip_b) {
      if (p == 0) return 0.0;
      v *= p;
      --p;
    }
    if (p > 0) v *= std::pow(x[i], p);
  }
  return v;
}

double Polynomial::value(const Eigen::VectorXd& x) const {
  double v = 0.0;
  for (const auto& t : terms_) v += monomial(t, x, -1, -1);
  return v;
}

Eigen::VectorXd Polynomial::gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n_);
  for (const auto& t : terms_)
    for (int i = 0; i < n_; ++i) g[i] += monomial(t, x, i, -1);
  return g;
}

Eigen::MatrixXd Polynomial::hessian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_, n_);
  for (const auto& t : terms_)
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j) {
        const double v = monomial(t, x, i, j);
        h(i, j) += v;
        if (j != i) h(j, i) += v;
      }
  return h;
}

}  // namespace finsler
