#include "support.hpp"

#include "finsler/errors.hpp"
#include "finsler/projective.hpp"

#include <doctest.h>

using namespace finsler;
using namespace testing_support;

namespace {

const Eigen::VectorXd kC = vec({0.2, 0.1, -0.15});

MetricSpec flat(PhiFamily phi, const Eigen::VectorXd& c = kC) {
  return make_spec(RiemannFieldSpec::euclidean(static_cast<int>(c.size())), OneFormFieldSpec::constant(c), phi);
}

Eigen::MatrixXd antisymmetric(const Eigen::Vector3d& w) {
  Eigen::MatrixXd m(3, 3);
  m << 0, -w[2], w[1], w[2], 0, -w[0], -w[1], w[0], 0;
  return m;
}

// b = t ω + [ω]× x: a Killing form whose s_j vanishes on the line x ∈ span ω.
struct KillingWitness {
  MetricSpec spec;
  SamplePlan plan;
};

KillingWitness killing_witness(PhiFamily phi, std::uint64_t seed) {
  const Eigen::Vector3d w(0.3, -0.2, 0.25);
  KillingWitness kw;
  kw.spec = make_spec(RiemannFieldSpec::euclidean(3), OneFormFieldSpec::affine(0.4 * w, antisymmetric(w)), phi);
  Rng rng(seed);
  kw.plan.seed = seed;
  kw.plan.fibers_per_point = 6;
  for (double u : {-0.5, 0.0, 0.7}) {
    kw.plan.points.emplace_back(Eigen::VectorXd(u * w));
    kw.plan.fibers.push_back(random_fibers(rng, 3, 6));
  }
  return kw;
}

// M = 2τ((1 + 2k|c|²)I − 3k c cᵀ) makes b_{i|j} match the Douglas pattern at x = 0.
MetricSpec tau_witness(double epsilon, double k, double tau) {
  const Eigen::MatrixXd m =
      2 * tau * ((1 + 2 * k * kC.squaredNorm()) * Eigen::MatrixXd::Identity(3, 3) - 3 * k * kC * kC.transpose());
  return make_spec(RiemannFieldSpec::euclidean(3), OneFormFieldSpec::affine(kC, m), PhiFamily::quadratic(epsilon, k));
}

double max_douglas(const MetricSpec& spec, const SamplePlan& plan) {
  double d = 0.0;
  for (std::size_t p = 0; p < plan.points.size(); ++p)
    for (const auto& y : plan.fibers[p]) d = std::max(d, douglas_tensor(spec, plan.points[p], y).max_abs());
  return d;
}

}  // namespace

TEST_CASE("sample plans are deterministic and regular") {
  Rng rng(1);
  const MetricSpec a = random_spec(rng, 3);
  const MetricSpec b = random_spec(rng, 3);
  const SamplePlan p1 = make_plan({a, b}, 4, 5, 42);
  const SamplePlan p2 = make_plan({a, b}, 4, 5, 42);
  REQUIRE(p1.size() == 20);
  for (std::size_t p = 0; p < 4; ++p) {
    CHECK(p1.points[p].coords == p2.points[p].coords);
    CHECK(a.domain.contains(p1.points[p]));
    for (std::size_t q = 0; q < 5; ++q) {
      CHECK(p1.fibers[p][q].coords == p2.fibers[p][q].coords);
      CHECK(p1.fibers[p][q].coords.norm() >= 0.1);
    }
  }
  CHECK(make_plan({a, b}, 4, 5, 43).points[0].coords != p1.points[0].coords);
  CHECK(unit_uniform(0) == 0.0);
  CHECK(unit_uniform(~std::uint64_t{0}) < 1.0);
}

TEST_CASE("check_spray_proportional examples") {
  const MetricSpec q = flat(PhiFamily::quadratic(0.5, 0.8));
  const MetricSpec m = flat(PhiFamily::matsumoto());
  const SamplePlan plan = make_plan({q, m}, 4, 6, 3);
  const CheckVerdict same = check_spray_proportional(q, q, plan);
  CHECK(same.pass);
  CHECK(same.fitted["P_max_abs"].get<double>() == 0.0);
  const CheckVerdict pair = check_spray_proportional(q, m, plan);
  CHECK(pair.pass);
  CHECK(pair.fitted["P_max_abs"].get<double>() == 0.0);
  CHECK(pair.samples_used == 24);

  MetricSpec conf = m;
  conf.alpha = RiemannFieldSpec::conformally_flat(Polynomial(3, {{0.5, {1, 0, 0}}, {0.3, {0, 1, 1}}}));
  const CheckVerdict bad = check_spray_proportional(q, conf, make_plan({q, conf}, 4, 6, 3));
  CHECK_FALSE(bad.pass);
  CHECK(bad.residual > 1e-2);
}

TEST_CASE("check_riemann_projective examples") {
  const auto e = RiemannFieldSpec::euclidean(2);
  const MetricSpec carrier = flat(PhiFamily::matsumoto(), vec({0.0, 0.0}));
  const SamplePlan plan = make_plan({carrier}, 3, 4, 5);
  const CheckVerdict same = check_riemann_projective(e, e, plan);
  CHECK(same.pass);
  const auto conf = RiemannFieldSpec::conformally_flat(Polynomial(2, {{1.0, {1, 0}}}));
  const CheckVerdict c = check_riemann_projective(e, conf, plan);
  CHECK_FALSE(c.pass);
  CHECK(c.residual > 1e-3);
  const auto scaled = RiemannFieldSpec::diagonal_polynomial({Polynomial::constant(2, 4.0), Polynomial::constant(2, 4.0)});
  CHECK(check_riemann_projective(e, scaled, plan).pass);
}

TEST_CASE("check_douglas_quadratic examples") {
  const MetricSpec q = flat(PhiFamily::quadratic(0.5, 0.8));
  const CheckVerdict v = check_douglas_quadratic(q, make_plan({q}, 4, 4, 9));
  CHECK(v.pass);
  for (const auto& t : v.fitted["tau"]) CHECK(t.get<double>() == 0.0);

  Eigen::MatrixXd traceless(3, 3);
  traceless << 0.2, 0.05, 0.0, 0.05, -0.1, 0.03, 0.0, 0.03, -0.1;
  const MetricSpec a = make_spec(RiemannFieldSpec::euclidean(3), OneFormFieldSpec::affine(kC, traceless),
                                 PhiFamily::quadratic(0.5, 0.8), 0.5);
  const SamplePlan pa = make_plan({a}, 3, 4, 9);
  const CheckVerdict va = check_douglas_quadratic(a, pa);
  CHECK_FALSE(va.pass);
  CHECK(va.residual > 1e-3);
  CHECK(max_douglas(a, pa) > 1e-7);

  const MetricSpec w = tau_witness(0.5, 0.8, 0.3);
  const SamplePlan origin = single_point_plan(ChartPoint{0.0, 0.0, 0.0}, {{0.3, 0.5, -0.2}, {1.0, 0.0, 0.4}, {-0.2, 0.7, 0.1}});
  const CheckVerdict vw = check_douglas_quadratic(w, origin);
  CHECK(vw.pass);
  CHECK(vw.fitted["tau"][0].get<double>() == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(max_douglas(w, origin) < 1e-7);
  CHECK(vw.flags.empty());

  const MetricSpec zero = flat(PhiFamily::quadratic(0.5, 0.8), Eigen::VectorXd::Zero(3));
  const CheckVerdict vz = check_douglas_quadratic(zero, make_plan({zero}, 2, 2, 1));
  CHECK(vz.pass);
  CHECK(std::find(vz.flags.begin(), vz.flags.end(), "b_vanishes_fit_on_a_only") != vz.flags.end());
  CHECK_THROWS_AS(check_douglas_quadratic(flat(PhiFamily::matsumoto()), origin), DomainError);
}

TEST_CASE("property: quadratic Douglas fit agrees with the Douglas tensor") {
  Rng rng(606);
  int passes = 0, fails = 0;
  for (int trial = 0; trial < 24; ++trial) {
    MetricSpec spec;
    SamplePlan plan;
    if (trial % 3 == 0) {
      spec = tau_witness(rng.uniform(-1, 1), rng.uniform(0.2, 1.0) * (rng.pick(2) ? 1 : -1), rng.uniform(-0.3, 0.3));
      plan = single_point_plan(ChartPoint{0.0, 0.0, 0.0}, random_fibers(rng, 3, 4));
    } else {
      spec = random_spec(rng, 3, static_cast<RiemannFamily>(rng.pick(3)), static_cast<OneFormFamily>(rng.pick(3)),
                         PhiKind::quadratic);
      plan = make_plan({spec}, 2, 4, rng.bits());
    }
    const CheckVerdict v = check_douglas_quadratic(spec, plan);
    CHECK(v.pass == (max_douglas(spec, plan) < kDouglasVanishTol));
    (v.pass ? passes : fails)++;
  }
  CHECK(passes > 0);
  CHECK(fails > 0);
}

TEST_CASE("check_douglas_ode examples") {
  for (double e : {-0.7, 0.0, 0.4})
    for (double k : {-0.9, 0.3, 1.2}) {
      const PhiFamily f = PhiFamily::quadratic(e, k);
      CHECK(check_douglas_ode(f, 2 * k, 0.0, -3 * k).pass);
      const OdeTripleFit fit = fit_douglas_ode_triple(f);
      CHECK(fit.k1 == doctest::Approx(2 * k).epsilon(1e-8));
      CHECK(std::abs(fit.k2) < 1e-8);
      CHECK(fit.k3 == doctest::Approx(-3 * k).epsilon(1e-8));
      CHECK_FALSE(check_douglas_ode(f, k, 0.0, -3 * k).pass);
    }
  const CheckVerdict m = check_douglas_ode(PhiFamily::matsumoto(), 0, 0, 0);
  CHECK_FALSE(m.pass);
  CHECK(m.residual >= 2.0);
  CHECK(ode_grid(PhiFamily::matsumoto()).size() == 2001);
}

TEST_CASE("check_matsumoto_douglas examples") {
  const MetricSpec m = flat(PhiFamily::matsumoto());
  CHECK(check_matsumoto_douglas(m, make_plan({m}, 3, 3, 2)).pass);

  Eigen::MatrixXd mm = 0.1 * Eigen::MatrixXd::Identity(3, 3);
  const MetricSpec a = make_spec(RiemannFieldSpec::euclidean(3), OneFormFieldSpec::affine(kC, mm), PhiFamily::matsumoto(), 0.5);
  const CheckVerdict va = check_matsumoto_douglas(a, make_plan({a}, 3, 3, 2));
  CHECK_FALSE(va.pass);
  CHECK(va.flags.empty());

  const MetricSpec g = make_spec(RiemannFieldSpec::conformally_flat(Polynomial(3, {{0.2, {1, 0, 0}}})),
                                 OneFormFieldSpec::gradient(Polynomial(3, {{0.1, {2, 0, 0}}, {0.2, {0, 1, 0}}})),
                                 PhiFamily::matsumoto(), 0.5);
  const SamplePlan pg = make_plan({g}, 3, 3, 2);
  const CheckVerdict vg = check_matsumoto_douglas(g, pg);
  double cov = 0.0;
  for (const auto& x : pg.points) cov = std::max(cov, max_abs(point_geometry(g, x).beta.cov));
  CHECK(vg.residual == cov);
  CHECK(vg.pass == (cov < kParallelTol));
  CHECK(vg.flags.empty());
}

TEST_CASE("property: Matsumoto Douglas verdict agrees with the Douglas tensor") {
  Rng rng(71);
  for (int trial = 0; trial < 15; ++trial) {
    const MetricSpec spec = random_spec(rng, 2 + rng.pick(2), static_cast<RiemannFamily>(rng.pick(3)),
                                        static_cast<OneFormFamily>(rng.pick(3)), PhiKind::matsumoto);
    const SamplePlan plan = make_plan({spec}, 2, 3, rng.bits());
    CHECK(check_matsumoto_douglas(spec, plan).pass == (max_douglas(spec, plan) < kDouglasVanishTol));
  }
}

TEST_CASE("check_theorem31 examples") {
  const MetricSpec q = flat(PhiFamily::quadratic(0.5, 0.8));
  const MetricSpec m = flat(PhiFamily::matsumoto(), vec({-0.1, 0.2, 0.05}));
  const SamplePlan plan = make_plan({q, m}, 4, 5, 8);
  const CheckVerdict v = check_theorem31(q, m, plan);
  CHECK(v.pass);
  CHECK(v.fitted["spray_proportional"].get<bool>());
  for (const auto& t : v.fitted["tau"]) CHECK(t.get<double>() == 0.0);
  for (const auto& th : v.fitted["theta"])
    for (const auto& c : th) CHECK(c.get<double>() == 0.0);

  const MetricSpec ma = make_spec(RiemannFieldSpec::euclidean(3),
                                  OneFormFieldSpec::affine(vec({-0.1, 0.2, 0.05}), antisymmetric({0.1, 0.2, -0.1})),
                                  PhiFamily::matsumoto());
  const SamplePlan pa = make_plan({q, ma}, 4, 5, 8);
  const CheckVerdict va = check_theorem31(q, ma, pa);
  CHECK_FALSE(va.fitted["condition_iii"].get<bool>());
  CHECK_FALSE(va.pass);
  CHECK_FALSE(check_spray_proportional(q, ma, pa).pass);

  MetricSpec mc = m;
  mc.alpha = RiemannFieldSpec::conformally_flat(Polynomial(3, {{0.4, {1, 0, 0}}, {-0.2, {0, 0, 1}}}));
  const CheckVerdict vc = check_theorem31(q, mc, make_plan({q, mc}, 4, 5, 8));
  CHECK(vc.fitted["condition_i"].get<bool>());
  CHECK_FALSE(vc.fitted["condition_ii"].get<bool>());
  CHECK(vc.fitted["condition_iii"].get<bool>());
  CHECK_FALSE(vc.pass);

  CHECK_THROWS_AS(check_theorem31(flat(PhiFamily::quadratic(0.5, 0.8), vec({0.1, 0.1})),
                                  flat(PhiFamily::matsumoto(), vec({0.1, 0.1})), make_plan({m}, 1, 1, 1)),
                  DomainError);
}

TEST_CASE("closed but non-parallel β̄ satisfies the displayed conditions without projective equivalence") {
  const MetricSpec q = flat(PhiFamily::quadratic(0.5, 0.8));
  const MetricSpec g = make_spec(RiemannFieldSpec::euclidean(3),
                                 OneFormFieldSpec::gradient(Polynomial(3, {{0.1, {1, 0, 0}}, {0.15, {1, 1, 0}}, {0.1, {0, 0, 2}}})),
                                 PhiFamily::matsumoto(), 0.5);
  const CheckVerdict v = check_theorem31(q, g, make_plan({q, g}, 4, 5, 8));
  CHECK(v.pass);
  CHECK_FALSE(v.fitted["spray_proportional"].get<bool>());
  CHECK_FALSE(v.fitted["beta_bar_parallel"].get<bool>());
  CHECK(v.flags == std::vector<std::string>{"conditions_hold_but_sprays_not_proportional", "beta_bar_closed_but_not_parallel"});
}

TEST_CASE("property: pair conditions with parallel β̄ imply proportional sprays") {
  Rng rng(3131);
  for (int trial = 0; trial < 12; ++trial) {
    const auto w = [&] { return vec({rng.uniform(-0.15, 0.15), rng.uniform(-0.15, 0.15), rng.uniform(-0.15, 0.15)}); };
    const MetricSpec q = flat(random_phi(rng, PhiKind::quadratic), w());
    const MetricSpec m = flat(PhiFamily::matsumoto(), w());
    const SamplePlan plan = make_plan({q, m}, 2, 4, rng.bits());
    const CheckVerdict v = check_theorem31(q, m, plan);
    REQUIRE(v.pass);
    CHECK(check_spray_proportional(q, m, plan).pass);
    // τ = 0 and b_{i|j} = 0 for the flat witness family
    for (const auto& t : v.fitted["tau"]) CHECK(t.get<double>() == 0.0);
    CHECK(v.fitted["condition_iii_parallel"].get<double>() == 0.0);
  }
}

TEST_CASE("check_killing_constant_length examples") {
  const MetricSpec c = flat(PhiFamily::quadratic(0.5, 0.8));
  CHECK(check_killing_constant_length(c, make_plan({c}, 3, 3, 1)).pass);

  const KillingWitness kw = killing_witness(PhiFamily::quadratic(0.5, 0.8), 17);
  const CheckVerdict v = check_killing_constant_length(kw.spec, kw.plan);
  CHECK(v.pass);
  CHECK(max_abs(point_geometry(kw.spec, kw.plan.points[0]).beta.s) > 0.1);

  const MetricSpec g = make_spec(RiemannFieldSpec::euclidean(3),
                                 OneFormFieldSpec::gradient(Polynomial(3, {{0.2, {2, 0, 0}}, {0.1, {0, 1, 1}}})),
                                 PhiFamily::quadratic(0.5, 0.8));
  const CheckVerdict vg = check_killing_constant_length(g, make_plan({g}, 3, 3, 1));
  CHECK_FALSE(vg.pass);
  CHECK(vg.fitted["r00_max_abs"].get<double>() > 1e-3);
}

TEST_CASE("isotropic mean Berwald examples") {
  const MetricSpec c = flat(PhiFamily::quadratic(0.5, 0.8));
  const CheckVerdict vc = check_isotropic_mean_berwald(c, make_plan({c}, 2, 4, 1));
  CHECK(vc.pass);
  for (const auto& x : vc.fitted["c"]) CHECK(x.get<double>() == 0.0);

  for (PhiFamily phi : {PhiFamily::quadratic(0.5, 0.8), PhiFamily::quadratic(-0.3, -0.6)}) {
    const KillingWitness kw = killing_witness(phi, 5);
    for (std::size_t p = 0; p < kw.plan.points.size(); ++p)
      for (const auto& y : kw.plan.fibers[p]) CHECK(max_abs(mean_berwald(kw.spec, kw.plan.points[p], y)) < 1e-8);
    const CheckVerdict v = check_isotropic_mean_berwald(kw.spec, kw.plan);
    CHECK(v.pass);
    for (const auto& x : v.fitted["c"]) CHECK(std::abs(x.get<double>()) < 1e-8);
  }

  const MetricSpec g = make_spec(RiemannFieldSpec::euclidean(3),
                                 OneFormFieldSpec::gradient(Polynomial(3, {{0.2, {2, 0, 0}}, {0.1, {0, 1, 1}}})),
                                 PhiFamily::quadratic(0.5, 0.8));
  const CheckVerdict vg = check_isotropic_mean_berwald(g, make_plan({g}, 3, 6, 1));
  bool c_nonzero = false;
  for (const auto& x : vg.fitted["c"]) c_nonzero = c_nonzero || std::abs(x.get<double>()) > 1e-6;
  CHECK((!vg.pass || c_nonzero));
}

TEST_CASE("isotropic Berwald examples") {
  Rng rng(4);
  MetricSpec r = random_spec(rng, 3, RiemannFamily::conformally_flat, OneFormFamily::constant, PhiKind::quadratic);
  r.beta = OneFormFieldSpec::constant(Eigen::VectorXd::Zero(3));
  CHECK(check_isotropic_berwald(r, make_plan({r}, 2, 3, 1)).pass);
  for (PhiFamily phi : {PhiFamily::matsumoto(), PhiFamily::quadratic(1.0, 1.0)}) {
    const MetricSpec c = flat(phi);
    CHECK(check_isotropic_berwald(c, make_plan({c}, 2, 3, 1)).pass);
  }
}

TEST_CASE("property: isotropic Berwald implies isotropic mean Berwald with the same c") {
  Rng rng(88);
  int seen = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const MetricSpec spec = random_spec(rng, 3);
    const SamplePlan plan = make_plan({spec}, 2, 4, rng.bits());
    const CheckVerdict b = check_isotropic_berwald(spec, plan);
    if (!b.pass) continue;
    ++seen;
    const CheckVerdict e = check_isotropic_mean_berwald(spec, plan);
    CHECK(e.pass);
    for (std::size_t p = 0; p < plan.points.size(); ++p)
      CHECK(std::abs(b.fitted["c"][p].get<double>() - e.fitted["c"][p].get<double>()) < 1e-7);
  }
  CHECK(seen > 0);
}

TEST_CASE("property: verdicts do not depend on the thread count") {
  Rng rng(10);
  const MetricSpec a = random_spec(rng, 3, RiemannFamily::diagonal_polynomial, OneFormFamily::affine, PhiKind::quadratic);
  const MetricSpec b = random_spec(rng, 3, RiemannFamily::conformally_flat, OneFormFamily::gradient_of_polynomial,
                                   PhiKind::matsumoto);
  const SamplePlan plan = make_plan({a, b}, 6, 4, 77);
  for (int threads : {1, 3, 8}) {
    const CheckOptions opt{std::nullopt, threads};
    CHECK(to_json(check_spray_proportional(a, b, plan, opt)) == to_json(check_spray_proportional(a, b, plan, {std::nullopt, 1})));
    CHECK(to_json(check_theorem31(a, b, plan, opt)) == to_json(check_theorem31(a, b, plan, {std::nullopt, 1})));
    CHECK(to_json(check_isotropic_mean_berwald(a, plan, opt)) == to_json(check_isotropic_mean_berwald(a, plan, {std::nullopt, 1})));
  }
}

TEST_CASE("verdict serialization") {
  const MetricSpec c = flat(PhiFamily::quadratic(0.5, 0.8));
  const auto j = to_json(check_douglas_quadratic(c, make_plan({c}, 1, 1, 5)));
  CHECK(j["check"] == "douglas_quadratic");
  CHECK(j["pass"] == true);
  CHECK(j["seed"] == 5);
  CHECK(j.contains("residual"));
  CHECK(j.contains("tolerance"));
  CHECK(j.contains("fitted"));
}

TEST_CASE("tolerance override") {
  const MetricSpec q = flat(PhiFamily::quadratic(0.5, 0.8));
  const CheckVerdict v = check_spray_proportional(q, q, make_plan({q}, 1, 1, 1), {0.5, 1});
  CHECK(v.tolerance == 0.5);
}
