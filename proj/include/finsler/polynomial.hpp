#pragma once

#include <Eigen/Dense>

#include <vector>

namespace finsler {

// Sparse multivariate polynomial Σ c · Π x_i^{e_i} on R^n.
class Polynomial {
 public:
  struct Term {
    double coef = 0.0;
    std::vector<int> powers;
  };

  Polynomial() = default;
  Polynomial(int n, std::vector<Term> terms);

  static Polynomial constant(int n, double c);

  int dim() const { return n_; }
  const std::vector<Term>& terms() const { return terms_; }

  double value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;

 private:
  // Π x_i^{e_i} with the exponent of `skip_a` / `skip_b` lowered by one (and
  // the lowered exponent multiplied in as a factor); -1 disables.
  double monomial(const Term& t, const Eigen::VectorXd& x, int skip_a, int skip_b) const;

  int n_ = 0;
  std::vector<Term> terms_;
};

}  // namespace finsler
