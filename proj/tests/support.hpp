#pragma once

// Test-only helpers: a seeded generator of random regular metric specs and a
// few numeric comparison utilities shared by the suites.

#include "finsler/metric_spec.hpp"
#include "finsler/projective.hpp"
#include "finsler/spray.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace testing_support {

using namespace finsler;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : g_(seed) {}
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit_uniform(g_()); }
  int pick(int n) { return static_cast<int>(g_() % static_cast<std::uint64_t>(n)); }
  std::uint64_t bits() { return g_(); }

 private:
  std::mt19937_64 g_;
};

inline Polynomial random_polynomial(Rng& rng, int n, double scale, int max_degree) {
  std::vector<Polynomial::Term> terms;
  const int count = 1 + rng.pick(3);
  for (int t = 0; t < count; ++t) {
    Polynomial::Term term;
    term.coef = rng.uniform(-scale, scale);
    term.powers.assign(n, 0);
    const int deg = 1 + rng.pick(max_degree);
    for (int d = 0; d < deg; ++d) ++term.powers[rng.pick(n)];
    terms.push_back(term);
  }
  return Polynomial(n, terms);
}

inline RiemannFieldSpec random_alpha(Rng& rng, int n, RiemannFamily fam) {
  switch (fam) {
    case RiemannFamily::euclidean:
      return RiemannFieldSpec::euclidean(n);
    case RiemannFamily::diagonal_polynomial: {
      std::vector<Polynomial> diag;
      for (int i = 0; i < n; ++i) {
        Polynomial p = random_polynomial(rng, n, 0.15, 2);
        auto terms = p.terms();
        terms.push_back({rng.uniform(0.8, 1.5), std::vector<int>(n, 0)});
        diag.emplace_back(n, terms);
      }
      return RiemannFieldSpec::diagonal_polynomial(diag);
    }
    case RiemannFamily::conformally_flat:
      return RiemannFieldSpec::conformally_flat(random_polynomial(rng, n, 0.25, 2));
  }
  return RiemannFieldSpec::euclidean(n);
}

inline OneFormFieldSpec random_beta(Rng& rng, int n, OneFormFamily fam) {
  Eigen::VectorXd c(n);
  for (int i = 0; i < n; ++i) c[i] = rng.uniform(-0.15, 0.15);
  switch (fam) {
    case OneFormFamily::constant:
      return OneFormFieldSpec::constant(c);
    case OneFormFamily::affine: {
      Eigen::MatrixXd m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-0.08, 0.08);
      return OneFormFieldSpec::affine(c, m);
    }
    case OneFormFamily::gradient_of_polynomial: {
      Polynomial p = random_polynomial(rng, n, 0.08, 2);
      auto terms = p.terms();
      for (int i = 0; i < n; ++i) {
        std::vector<int> e(n, 0);
        e[i] = 1;
        terms.push_back({c[i], e});
      }
      return OneFormFieldSpec::gradient(Polynomial(n, terms));
    }
  }
  return OneFormFieldSpec::constant(c);
}

inline PhiFamily random_phi(Rng& rng, PhiKind kind) {
  if (kind == PhiKind::matsumoto) return PhiFamily::matsumoto();
  const double k = (rng.pick(2) ? 1.0 : -1.0) * rng.uniform(0.2, 1.0);
  return PhiFamily::quadratic(rng.uniform(-1.0, 1.0), k);
}

inline MetricSpec random_spec(Rng& rng, int n, RiemannFamily af, OneFormFamily bf, PhiKind pk) {
  MetricSpec s;
  s.id = "random";
  s.dim = n;
  s.alpha = random_alpha(rng, n, af);
  s.beta = random_beta(rng, n, bf);
  s.phi = random_phi(rng, pk);
  s.domain = box_domain(n, 0.5);
  return s;
}

inline MetricSpec random_spec(Rng& rng, int n) {
  return random_spec(rng, n, static_cast<RiemannFamily>(rng.pick(3)), static_cast<OneFormFamily>(rng.pick(3)),
                     rng.pick(2) ? PhiKind::quadratic : PhiKind::matsumoto);
}

inline MetricSpec make_spec(RiemannFieldSpec alpha, OneFormFieldSpec beta, PhiFamily phi, double half_width = 1.0) {
  MetricSpec s;
  s.dim = alpha.dim;
  s.alpha = std::move(alpha);
  s.beta = std::move(beta);
  s.phi = phi;
  s.domain = box_domain(s.dim, half_width);
  return s;
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// max |a − b| / max(1, max |b|)
inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return max_abs(a - b) / std::max(1.0, max_abs(b));
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

/// A plan with one explicit chart point and the given fibers.
inline SamplePlan single_point_plan(const ChartPoint& x, std::vector<FiberVector> fibers, std::uint64_t seed = 0) {
  SamplePlan plan;
  plan.points.push_back(x);
  plan.fibers_per_point = static_cast<int>(fibers.size());
  plan.fibers.push_back(std::move(fibers));
  plan.seed = seed;
  return plan;
}

inline std::vector<FiberVector> random_fibers(Rng& rng, int n, int count) {
  std::vector<FiberVector> out;
  while (static_cast<int>(out.size()) < count) {
    FiberVector y;
    y.coords.resize(n);
    for (int i = 0; i < n; ++i) y.coords[i] = rng.uniform(-1.0, 1.0);
    if (y.coords.norm() >= 0.1) out.push_back(y);
  }
  return out;
}

}  // namespace testing_support
