#include "finsler/projective.hpp"

#include "finsler/errors.hpp"
#include "finsler/json_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <random>
#include <thread>

namespace finsler {

using nlohmann::json;

json to_json(const CheckVerdict& v) {
  return json{{"check", v.name},           {"pass", v.pass},   {"residual", v.residual},
              {"tolerance", v.tolerance},  {"fitted", v.fitted}, {"seed", v.seed},
              {"samples_used", v.samples_used}, {"excluded", v.excluded}, {"flags", v.flags}};
}

std::size_t SamplePlan::size() const {
  std::size_t n = 0;
  for (const auto& f : fibers) n += f.size();
  return n;
}

double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

namespace {

bool fiber_ok(const MetricSpec& spec, const PointGeometry& pg, const FiberVector& y) {
  try {
    const Eigen::VectorXd g = spray_via_alphabeta(pg, y);
    if (!g.allFinite()) return false;
    const double alpha = std::sqrt(y.coords.dot(pg.riemann.a * y.coords));
    const double s = pg.beta.b.dot(y.coords) / alpha;
    return regularity(spec.phi, s, std::sqrt(pg.beta.b2));
  } catch (const FinslerError&) {
    return false;
  }
}

}  // namespace

SamplePlan make_plan(const std::vector<MetricSpec>& specs, int points, int fibers, std::uint64_t seed) {
  if (specs.empty()) throw DomainError("sample plan needs at least one metric");
  if (points < 1 || fibers < 1) throw DomainError("sample plan needs positive point and fiber counts");
  const int n = specs.front().dim;
  Eigen::VectorXd lo = specs.front().domain.min, hi = specs.front().domain.max;
  for (const auto& s : specs) {
    if (s.dim != n) throw DomainError("sample plan: metrics have different dimensions");
    lo = lo.cwiseMax(s.domain.min);
    hi = hi.cwiseMin(s.domain.max);
  }
  if ((hi - lo).minCoeff() <= 0.0) throw DomainError("sample plan: chart boxes do not overlap");

  SamplePlan plan;
  plan.fibers_per_point = fibers;
  plan.seed = seed;
  std::mt19937_64 rng(seed);
  const int max_attempts = 1000;
  for (int p = 0; p < points; ++p) {
    bool placed = false;
    for (int attempt = 0; attempt < max_attempts && !placed; ++attempt) {
      ChartPoint x;
      x.coords.resize(n);
      for (int i = 0; i < n; ++i) x.coords[i] = lo[i] + (hi[i] - lo[i]) * unit_uniform(rng());
      std::vector<PointGeometry> geo;
      try {
        for (const auto& s : specs) geo.push_back(point_geometry(s, x));
      } catch (const FinslerError&) {
        continue;
      }
      std::vector<FiberVector> ys;
      for (int tries = 0; static_cast<int>(ys.size()) < fibers && tries < max_attempts * fibers; ++tries) {
        FiberVector y;
        y.coords.resize(n);
        for (int i = 0; i < n; ++i) y.coords[i] = 2.0 * unit_uniform(rng()) - 1.0;
        if (y.coords.norm() < 0.1) continue;
        bool ok = true;
        for (std::size_t m = 0; m < specs.size() && ok; ++m) ok = fiber_ok(specs[m], geo[m], y);
        if (ok) ys.push_back(y);
      }
      if (static_cast<int>(ys.size()) < fibers) continue;
      plan.points.push_back(x);
      plan.fibers.push_back(std::move(ys));
      placed = true;
    }
    if (!placed) throw DomainError("sample plan: no regular chart point found");
  }
  return plan;
}

int resolve_threads(int requested) {
  int t = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FINSLER_LAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) t = std::min(t, cap);
  }
  return std::max(1, t);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  const int t = std::min<std::size_t>(resolve_threads(threads), std::max<std::size_t>(count, 1));
  if (t <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < t; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

double tol_or(const CheckOptions& opt, double fallback) { return opt.tolerance.value_or(fallback); }

void finish(CheckVerdict& v) { v.pass = v.residual < v.tolerance; }

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// Per-point geometry for every plan point; nullopt where evaluation failed.
std::vector<std::optional<PointGeometry>> geometries(const MetricSpec& spec, const SamplePlan& plan) {
  std::vector<std::optional<PointGeometry>> out(plan.points.size());
  for (std::size_t p = 0; p < plan.points.size(); ++p) {
    try {
      out[p] = point_geometry(spec, plan.points[p]);
    } catch (const FinslerError&) {
    }
  }
  return out;
}

}  // namespace

CheckVerdict check_spray_proportional(const MetricSpec& f, const MetricSpec& fbar, const SamplePlan& plan,
                                      const CheckOptions& opt) {
  if (f.dim != fbar.dim) throw DomainError("spray comparison: dimension mismatch");
  CheckVerdict v;
  v.name = "spray_proportional";
  v.tolerance = tol_or(opt, kSprayProportionalTol);
  v.seed = plan.seed;

  struct PointResult {
    std::vector<double> P;
    double residual = 0.0, homogeneity = 0.0;
    std::size_t used = 0, excluded = 0;
  };
  std::vector<PointResult> res(plan.points.size());
  parallel_for(plan.points.size(), opt.threads, [&](std::size_t p) {
    PointResult& r = res[p];
    std::optional<PointGeometry> pg, pgb;
    try {
      pg = point_geometry(f, plan.points[p]);
      pgb = point_geometry(fbar, plan.points[p]);
    } catch (const FinslerError&) {
      r.excluded = plan.fibers[p].size();
      return;
    }
    for (const auto& y : plan.fibers[p]) {
      try {
        const Eigen::VectorXd d = spray_via_alphabeta(*pg, y) - spray_via_alphabeta(*pgb, y);
        const double yy = y.coords.squaredNorm();
        const double P = d.dot(y.coords) / yy;
        const double res_y = (d - P * y.coords).norm() / std::max(1.0, d.norm());
        FiberVector y2{};
        y2.coords = 2.0 * y.coords;
        const Eigen::VectorXd d2 = spray_via_alphabeta(*pg, y2) - spray_via_alphabeta(*pgb, y2);
        const double P2 = d2.dot(y2.coords) / y2.coords.squaredNorm();
        r.homogeneity = std::max(r.homogeneity, std::abs(P2 - 2.0 * P) / std::max(1.0, std::abs(P)));
        r.residual = std::max(r.residual, res_y);
        r.P.push_back(P);
        ++r.used;
      } catch (const FinslerError&) {
        ++r.excluded;
      }
    }
  });
  json P = json::array();
  double p_max = 0.0, homogeneity = 0.0;
  for (const auto& r : res) {
    v.residual = std::max(v.residual, r.residual);
    homogeneity = std::max(homogeneity, r.homogeneity);
    v.samples_used += r.used;
    v.excluded += r.excluded;
    for (double x : r.P) {
      P.push_back(x);
      p_max = std::max(p_max, std::abs(x));
    }
  }
  v.fitted["P"] = P;
  v.fitted["P_max_abs"] = p_max;
  v.fitted["P_homogeneity_defect"] = homogeneity;
  if (homogeneity >= v.tolerance) v.flags.push_back("P_not_degree_one");
  v.residual = std::max(v.residual, homogeneity);
  finish(v);
  return v;
}

CheckVerdict check_riemann_projective(const RiemannFieldSpec& alpha, const RiemannFieldSpec& alpha_bar,
                                      const SamplePlan& plan, const CheckOptions& opt) {
  if (alpha.dim != alpha_bar.dim) throw DomainError("riemann comparison: dimension mismatch");
  CheckVerdict v;
  v.name = "riemann_projective";
  v.tolerance = tol_or(opt, kRiemannProjectiveTol);
  v.seed = plan.seed;
  const int n = alpha.dim;

  struct PointResult {
    Eigen::VectorXd lambda;
    double residual = 0.0;
    std::size_t used = 0, excluded = 0;
  };
  std::vector<PointResult> res(plan.points.size());
  parallel_for(plan.points.size(), opt.threads, [&](std::size_t p) {
    PointResult& r = res[p];
    const auto& ys = plan.fibers[p];
    try {
      const RiemannPointData a = riemann_point_data(alpha, plan.points[p]);
      const RiemannPointData ab = riemann_point_data(alpha_bar, plan.points[p]);
      // Δ^i(y) = (λ·y) y^i: stack n equations per fiber, unknown λ ∈ R^n.
      const int rows = n * static_cast<int>(ys.size());
      Eigen::MatrixXd A(rows, n);
      Eigen::VectorXd rhs(rows);
      std::vector<Eigen::VectorXd> deltas;
      for (std::size_t f = 0; f < ys.size(); ++f) {
        const Eigen::VectorXd d = riemann_spray(a.christoffel, ys[f]) - riemann_spray(ab.christoffel, ys[f]);
        deltas.push_back(d);
        for (int i = 0; i < n; ++i) {
          A.row(n * f + i) = ys[f].coords[i] * ys[f].coords.transpose();
          rhs[n * f + i] = d[i];
        }
      }
      r.lambda = A.colPivHouseholderQr().solve(rhs);
      for (std::size_t f = 0; f < ys.size(); ++f) {
        const Eigen::VectorXd model = r.lambda.dot(ys[f].coords) * ys[f].coords;
        r.residual = std::max(r.residual, (deltas[f] - model).norm() / std::max(1.0, deltas[f].norm()));
      }
      r.used = ys.size();
    } catch (const FinslerError&) {
      r.excluded = ys.size();
    }
  });
  json lambdas = json::array();
  for (const auto& r : res) {
    v.residual = std::max(v.residual, r.residual);
    v.samples_used += r.used;
    v.excluded += r.excluded;
    lambdas.push_back(r.lambda.size() ? to_json_array(r.lambda) : json(nullptr));
  }
  v.fitted["lambda_gradient"] = lambdas;
  finish(v);
  return v;
}

Eigen::MatrixXd douglas_tau_basis(const PointGeometry& pg) {
  if (pg.phi.kind != PhiKind::quadratic) throw DomainError("τ-basis is defined for the quadratic family");
  const double k = pg.phi.k;
  const Eigen::VectorXd& b = pg.beta.b;
  Eigen::MatrixXd basis = (1.0 + 2.0 * k * pg.beta.b2) * pg.riemann.a - 3.0 * k * b * b.transpose();
  if (max_abs(basis) <= 1e-14) throw DegenerateFit("τ-basis vanishes");
  return basis;
}

TauFit fit_tau(const PointGeometry& pg) {
  const Eigen::MatrixXd basis = douglas_tau_basis(pg);
  TauFit fit;
  fit.b_vanishes = pg.beta.b2 <= 1e-28;
  const Eigen::MatrixXd& cov = pg.beta.cov;
  // least squares for cov ≈ 2τ basis over all entries
  fit.tau = (cov.array() * basis.array()).sum() / (2.0 * basis.squaredNorm());
  const Eigen::MatrixXd model = 2.0 * fit.tau * basis;
  fit.residual = (cov - model).norm() / std::max(1.0, model.norm());
  return fit;
}

CheckVerdict check_douglas_quadratic(const MetricSpec& spec, const SamplePlan& plan, const CheckOptions& opt) {
  if (spec.phi.kind != PhiKind::quadratic) throw DomainError("douglas_quadratic needs the quadratic φ-family");
  CheckVerdict v;
  v.name = "douglas_quadratic";
  v.tolerance = tol_or(opt, kDouglasQuadraticTol);
  v.seed = plan.seed;

  struct PointResult {
    std::optional<TauFit> fit;
    double douglas = 0.0;
    std::size_t used = 0, excluded = 0;
    bool degenerate = false;
  };
  std::vector<PointResult> res(plan.points.size());
  parallel_for(plan.points.size(), opt.threads, [&](std::size_t p) {
    PointResult& r = res[p];
    std::optional<PointGeometry> pg;
    try {
      pg = point_geometry(spec, plan.points[p]);
      r.fit = fit_tau(*pg);
    } catch (const DegenerateFit&) {
      r.degenerate = true;
      r.excluded = plan.fibers[p].size();
      return;
    } catch (const FinslerError&) {
      r.excluded = plan.fibers[p].size();
      return;
    }
    for (const auto& y : plan.fibers[p]) {
      try {
        r.douglas = std::max(r.douglas, spray_curvature(*pg, y).D.max_abs());
        ++r.used;
      } catch (const FinslerError&) {
        ++r.excluded;
      }
    }
  });
  json taus = json::array();
  double douglas = 0.0;
  bool degenerate = false, b_vanishes = false;
  for (const auto& r : res) {
    v.samples_used += r.used;
    v.excluded += r.excluded;
    degenerate = degenerate || r.degenerate;
    if (r.fit) {
      v.residual = std::max(v.residual, r.fit->residual);
      b_vanishes = b_vanishes || r.fit->b_vanishes;
      taus.push_back(r.fit->tau);
    } else {
      taus.push_back(nullptr);
    }
    douglas = std::max(douglas, r.douglas);
  }
  if (degenerate) throw DegenerateFit("douglas_quadratic: τ-basis vanishes at a sample point");
  v.fitted["tau"] = taus;
  v.fitted["douglas_max_abs"] = douglas;
  if (b_vanishes) v.flags.push_back("b_vanishes_fit_on_a_only");
  finish(v);
  if (v.pass != (douglas < kDouglasVanishTol)) v.flags.push_back("douglas_tensor_disagrees");
  return v;
}

std::vector<double> ode_grid(const PhiFamily& fam) {
  const double half = 0.99 * std::min(fam.b0(), 4.0);
  const int count = 2001;
  std::vector<double> s(count);
  for (int i = 0; i < count; ++i) s[i] = -half + 2.0 * half * i / (count - 1);
  return s;
}

namespace {

// residual(s) = φ'' + k1 u1 + k2 u2 + k3 u3
struct OdeRow {
  double base, u1, u2, u3;
};

OdeRow ode_row(const PhiFamily& fam, double s) {
  const double p = phi_derivative(fam, 0, s), p1 = phi_derivative(fam, 1, s), p2 = phi_derivative(fam, 2, s);
  const double w = p - s * p1;
  return {p2, s * s * p2 - w, s * s * s * s * p2 - s * s * w, s * s * p2};
}

}  // namespace

CheckVerdict check_douglas_ode(const PhiFamily& fam, double k1, double k2, double k3, const CheckOptions& opt) {
  if (std::abs(phi_derivative(fam, 0, 0.0) - 1.0) > 1e-15) throw DomainError("Douglas ODE needs φ(0) = 1");
  CheckVerdict v;
  v.name = "douglas_ode";
  v.tolerance = tol_or(opt, kDouglasOdeTol);
  for (double s : ode_grid(fam)) {
    const OdeRow r = ode_row(fam, s);
    v.residual = std::max(v.residual, std::abs(r.base + k1 * r.u1 + k2 * r.u2 + k3 * r.u3));
    ++v.samples_used;
  }
  v.fitted = json{{"k1", k1}, {"k2", k2}, {"k3", k3}};
  finish(v);
  return v;
}

OdeTripleFit fit_douglas_ode_triple(const PhiFamily& fam) {
  const auto grid = ode_grid(fam);
  Eigen::MatrixXd A(grid.size(), 3);
  Eigen::VectorXd rhs(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const OdeRow r = ode_row(fam, grid[i]);
    A.row(i) << r.u1, r.u2, r.u3;
    rhs[i] = -r.base;
  }
  const Eigen::Vector3d k = A.colPivHouseholderQr().solve(rhs);
  OdeTripleFit fit{k[0], k[1], k[2], 0.0};
  fit.residual = (A * k - rhs).cwiseAbs().maxCoeff();
  return fit;
}

CheckVerdict check_matsumoto_douglas(const MetricSpec& spec, const SamplePlan& plan, const CheckOptions& opt) {
  if (spec.phi.kind != PhiKind::matsumoto) throw DomainError("matsumoto_douglas needs the Matsumoto φ-family");
  CheckVerdict v;
  v.name = "matsumoto_douglas";
  v.tolerance = tol_or(opt, kParallelTol);
  v.seed = plan.seed;
  struct PointResult {
    double cov = 0.0, douglas = 0.0;
    std::size_t used = 0, excluded = 0;
  };
  std::vector<PointResult> res(plan.points.size());
  parallel_for(plan.points.size(), opt.threads, [&](std::size_t p) {
    PointResult& r = res[p];
    std::optional<PointGeometry> pg;
    try {
      pg = point_geometry(spec, plan.points[p]);
    } catch (const FinslerError&) {
      r.excluded = plan.fibers[p].size();
      return;
    }
    r.cov = max_abs(pg->beta.cov);
    for (const auto& y : plan.fibers[p]) {
      try {
        r.douglas = std::max(r.douglas, spray_curvature(*pg, y).D.max_abs());
        ++r.used;
      } catch (const FinslerError&) {
        ++r.excluded;
      }
    }
  });
  double douglas = 0.0;
  for (const auto& r : res) {
    v.residual = std::max(v.residual, r.cov);
    douglas = std::max(douglas, r.douglas);
    v.samples_used += r.used;
    v.excluded += r.excluded;
  }
  v.fitted["cov_max_abs"] = v.residual;
  v.fitted["douglas_max_abs"] = douglas;
  finish(v);
  if (v.pass != (douglas < kDouglasVanishTol)) v.flags.push_back("douglas_tensor_disagrees");
  return v;
}

CheckVerdict check_theorem31(const MetricSpec& f, const MetricSpec& fbar, const SamplePlan& plan,
                             const CheckOptions& opt) {
  if (f.phi.kind != PhiKind::quadratic || fbar.phi.kind != PhiKind::matsumoto)
    throw DomainError("theorem31 needs a quadratic-φ metric and a Matsumoto metric");
  if (f.dim != fbar.dim) throw DomainError("theorem31: dimension mismatch");
  if (f.dim < 3) throw DomainError("theorem31 requires dimension n ≥ 3");
  const int n = f.dim;
  const double k = f.phi.k;
  CheckVerdict v;
  v.name = "theorem31";
  v.tolerance = 1.0;
  v.seed = plan.seed;
  const double tol_tau = tol_or(opt, kDouglasQuadraticTol);
  const double tol_theta = tol_or(opt, kThetaFitTol);
  const double tol_closed = tol_or(opt, kClosedTol);

  struct PointResult {
    bool ok = false;
    double tau = 0.0, tau_res = 0.0, theta_res = 0.0, closed = 0.0, parallel = 0.0;
    Eigen::VectorXd theta;
    std::size_t used = 0, excluded = 0;
  };
  std::vector<PointResult> res(plan.points.size());
  parallel_for(plan.points.size(), opt.threads, [&](std::size_t p) {
    PointResult& r = res[p];
    const auto& ys = plan.fibers[p];
    try {
      const PointGeometry pg = point_geometry(f, plan.points[p]);
      const PointGeometry pgb = point_geometry(fbar, plan.points[p]);
      const TauFit fit = fit_tau(pg);
      r.tau = fit.tau;
      r.tau_res = fit.residual;
      r.closed = max_abs(pgb.beta.s);
      r.parallel = max_abs(pgb.beta.cov);
      // (ii): Δ^i = G^i_α − G^i_ᾱ + 2kτα² b^i must be (θ·y) y^i
      const int rows = n * static_cast<int>(ys.size());
      Eigen::MatrixXd A(rows, n);
      Eigen::VectorXd rhs(rows);
      std::vector<Eigen::VectorXd> deltas;
      for (std::size_t q = 0; q < ys.size(); ++q) {
        const Eigen::VectorXd& y = ys[q].coords;
        const double alpha2 = y.dot(pg.riemann.a * y);
        const Eigen::VectorXd d = riemann_spray(pg.riemann.christoffel, ys[q]) -
                                  riemann_spray(pgb.riemann.christoffel, ys[q]) +
                                  2.0 * k * fit.tau * alpha2 * pg.beta.b_up;
        deltas.push_back(d);
        for (int i = 0; i < n; ++i) {
          A.row(n * q + i) = y[i] * y.transpose();
          rhs[n * q + i] = d[i];
        }
      }
      r.theta = A.colPivHouseholderQr().solve(rhs);
      for (std::size_t q = 0; q < ys.size(); ++q) {
        const Eigen::VectorXd model = r.theta.dot(ys[q].coords) * ys[q].coords;
        r.theta_res = std::max(r.theta_res, (deltas[q] - model).norm() / std::max(1.0, deltas[q].norm()));
      }
      r.used = ys.size();
      r.ok = true;
    } catch (const DegenerateFit&) {
      throw;
    } catch (const FinslerError&) {
      r.excluded = ys.size();
    }
  });

  double tau_res = 0.0, theta_res = 0.0, closed = 0.0, parallel = 0.0;
  json taus = json::array(), thetas = json::array();
  for (const auto& r : res) {
    v.samples_used += r.used;
    v.excluded += r.excluded;
    if (!r.ok) {
      taus.push_back(nullptr);
      thetas.push_back(nullptr);
      continue;
    }
    tau_res = std::max(tau_res, r.tau_res);
    theta_res = std::max(theta_res, r.theta_res);
    closed = std::max(closed, r.closed);
    parallel = std::max(parallel, r.parallel);
    taus.push_back(r.tau);
    thetas.push_back(to_json_array(r.theta));
  }
  // (iii) as displayed: closed or parallel
  const double cond3 = std::min(closed, parallel);
  const bool c1 = tau_res < tol_tau, c2 = theta_res < tol_theta, c3 = cond3 < tol_closed;
  v.residual = std::max({tau_res / tol_tau, theta_res / tol_theta, cond3 / tol_closed});
  v.fitted["tau"] = taus;
  v.fitted["theta"] = thetas;
  v.fitted["condition_i_residual"] = tau_res;
  v.fitted["condition_ii_residual"] = theta_res;
  v.fitted["condition_iii_closed"] = closed;
  v.fitted["condition_iii_parallel"] = parallel;
  v.fitted["condition_i"] = c1;
  v.fitted["condition_ii"] = c2;
  v.fitted["condition_iii"] = c3;
  v.fitted["beta_bar_parallel"] = parallel < tol_closed;
  finish(v);

  const CheckVerdict prop = check_spray_proportional(f, fbar, plan, CheckOptions{std::nullopt, opt.threads});
  v.fitted["spray_proportional"] = prop.pass;
  v.fitted["spray_proportional_residual"] = prop.residual;
  if (v.pass && !prop.pass) {
    v.flags.push_back("conditions_hold_but_sprays_not_proportional");
    if (!(parallel < tol_closed)) v.flags.push_back("beta_bar_closed_but_not_parallel");
  }
  return v;
}

CheckVerdict check_killing_constant_length(const MetricSpec& spec, const SamplePlan& plan, const CheckOptions& opt) {
  CheckVerdict v;
  v.name = "killing_constant_length";
  v.tolerance = tol_or(opt, kKillingTol);
  v.seed = plan.seed;
  double r00 = 0.0, s0 = 0.0;
  const auto geo = geometries(spec, plan);
  for (std::size_t p = 0; p < plan.points.size(); ++p) {
    if (!geo[p]) {
      v.excluded += plan.fibers[p].size();
      continue;
    }
    for (const auto& y : plan.fibers[p]) {
      const FiberContractions c = contract_scalars(geo[p]->beta, y);
      r00 = std::max(r00, std::abs(c.r00));
      s0 = std::max(s0, std::abs(c.s0));
      ++v.samples_used;
    }
  }
  v.residual = std::max(r00, s0);
  v.fitted["r00_max_abs"] = r00;
  v.fitted["s0_max_abs"] = s0;
  finish(v);
  return v;
}

namespace {

// One-parameter fit target ≈ c·basis pooled over the fibers of one point.
struct ScalarFit {
  double c = 0.0;
  double residual = 0.0;
};

ScalarFit pooled_fit(const std::vector<Eigen::VectorXd>& targets, const std::vector<Eigen::VectorXd>& bases) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    num += targets[i].dot(bases[i]);
    den += bases[i].squaredNorm();
  }
  if (den <= 1e-28) throw DegenerateFit("isotropy fit basis vanishes");
  ScalarFit fit;
  fit.c = num / den;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Eigen::VectorXd model = fit.c * bases[i];
    const double scale = std::max(1.0, model.cwiseAbs().maxCoeff());
    fit.residual = std::max(fit.residual, (targets[i] - model).cwiseAbs().maxCoeff() / scale);
  }
  return fit;
}

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) { return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()); }

Eigen::VectorXd flatten(const Tensor4& t) {
  return Eigen::Map<const Eigen::VectorXd>(t.data().data(), static_cast<Eigen::Index>(t.data().size()));
}

template <class Builder>
CheckVerdict isotropy_check(const std::string& name, const MetricSpec& spec, const SamplePlan& plan,
                            const CheckOptions& opt, Builder build) {
  CheckVerdict v;
  v.name = name;
  v.tolerance = tol_or(opt, kIsotropyTol);
  v.seed = plan.seed;
  struct PointResult {
    std::optional<ScalarFit> fit;
    std::size_t used = 0, excluded = 0;
  };
  std::vector<PointResult> res(plan.points.size());
  parallel_for(plan.points.size(), opt.threads, [&](std::size_t p) {
    PointResult& r = res[p];
    std::optional<PointGeometry> pg;
    try {
      pg = point_geometry(spec, plan.points[p]);
    } catch (const FinslerError&) {
      r.excluded = plan.fibers[p].size();
      return;
    }
    std::vector<Eigen::VectorXd> targets, bases;
    for (const auto& y : plan.fibers[p]) {
      try {
        auto [t, b] = build(*pg, y);
        targets.push_back(std::move(t));
        bases.push_back(std::move(b));
        ++r.used;
      } catch (const DegenerateFit&) {
        throw;
      } catch (const FinslerError&) {
        ++r.excluded;
      }
    }
    if (!targets.empty()) r.fit = pooled_fit(targets, bases);
  });
  json cs = json::array();
  for (const auto& r : res) {
    v.samples_used += r.used;
    v.excluded += r.excluded;
    if (r.fit) {
      v.residual = std::max(v.residual, r.fit->residual);
      cs.push_back(r.fit->c);
    } else {
      cs.push_back(nullptr);
    }
  }
  v.fitted["c"] = cs;
  finish(v);
  return v;
}

}  // namespace

CheckVerdict check_isotropic_mean_berwald(const MetricSpec& spec, const SamplePlan& plan, const CheckOptions& opt) {
  const double half_n1 = 0.5 * (spec.dim + 1);
  return isotropy_check("isotropic_mean_berwald", spec, plan, opt, [&](const PointGeometry& pg, const FiberVector& y) {
    const SprayCurvature c = spray_curvature(pg, y);
    const NormDerivatives nd = norm_derivatives(pg, y);
    return std::pair<Eigen::VectorXd, Eigen::VectorXd>(flatten(c.E), flatten(Eigen::MatrixXd(half_n1 * nd.hessian)));
  });
}

CheckVerdict check_isotropic_berwald(const MetricSpec& spec, const SamplePlan& plan, const CheckOptions& opt) {
  const int n = spec.dim;
  return isotropy_check("isotropic_berwald", spec, plan, opt, [&](const PointGeometry& pg, const FiberVector& y) {
    const SprayCurvature c = spray_curvature(pg, y);
    const NormDerivatives nd = norm_derivatives(pg, y);
    Tensor4 basis(n);
    const auto& h = nd.hessian;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            double v = nd.third(j, k, l) * y.coords[i];
            if (i == l) v += h(j, k);
            if (i == k) v += h(j, l);
            if (i == j) v += h(k, l);
            basis(i, j, k, l) = v;
          }
    return std::pair<Eigen::VectorXd, Eigen::VectorXd>(flatten(c.B), flatten(basis));
  });
}

Tensor4 douglas_after_projective_change(const PointGeometry& pg, const FiberVector& y, ProjectiveTerm term) {
  std::vector<TaylorJet> g = spray_jets(pg, y, 4);
  const auto seeds = fiber_seeds(y, 4);
  const std::span<const TaylorJet> ys(seeds);
  const TaylorJet beta = linear_form<TaylorJet>(pg.beta.b, ys);
  const TaylorJet alpha = sqrt(quadratic_form<TaylorJet>(pg.riemann.a, ys));
  TaylorJet P = beta;
  if (term == ProjectiveTerm::alpha) P = alpha;
  if (term == ProjectiveTerm::alpha_plus_beta) P = alpha + beta;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += P * seeds[i];
  return curvature_from_spray(g, y).D;
}

}  // namespace finsler
