#include "support.hpp"

#include "finsler/identity_audit.hpp"

#include <doctest.h>

#include <set>

using namespace finsler;
using namespace testing_support;

namespace {

std::pair<MetricSpec, MetricSpec> random_pair(Rng& rng, int n) {
  MetricSpec f = random_spec(rng, n, static_cast<RiemannFamily>(rng.pick(3)), static_cast<OneFormFamily>(rng.pick(3)),
                             PhiKind::quadratic);
  MetricSpec fb = random_spec(rng, n, static_cast<RiemannFamily>(rng.pick(3)), static_cast<OneFormFamily>(rng.pick(3)),
                              PhiKind::matsumoto);
  return {f, fb};
}

std::vector<std::pair<ChartPoint, FiberVector>> samples_of(const SamplePlan& plan) {
  std::vector<std::pair<ChartPoint, FiberVector>> out;
  for (std::size_t p = 0; p < plan.points.size(); ++p)
    for (const auto& y : plan.fibers[p]) out.emplace_back(plan.points[p], y);
  return out;
}

}  // namespace

TEST_CASE("identity sides vanish without covariant data") {
  const MetricSpec f = make_spec(RiemannFieldSpec::euclidean(3), OneFormFieldSpec::constant(vec({0.1, 0.2, 0.0})),
                                 PhiFamily::quadratic(0.5, 0.8));
  const MetricSpec fb = make_spec(RiemannFieldSpec::euclidean(3), OneFormFieldSpec::constant(vec({0.0, -0.1, 0.2})),
                                  PhiFamily::matsumoto());
  CHECK(verify_334_identity(f, fb, ChartPoint{0.1, 0.2, 0.3}, FiberVector{0.4, -0.3, 0.5}) == 0.0);

  IdentitySymbols sym;
  sym.n = 3;
  sym.alpha = 1.3;
  sym.beta = 0.2;
  sym.b2 = 0.05;
  sym.s_up0 = Eigen::VectorXd::Zero(3);
  sym.b_up = vec({0.1, 0.1, 0.15});
  sym.y = vec({0.5, 1.0, 0.6});
  CHECK(max_abs(evaluate_side(printed_quadratic_table(sym, 0.5, 0.8), quadratic_layout(), sym.alpha)) == 0.0);
  CHECK(max_abs(evaluate_side(printed_matsumoto_table(sym), matsumoto_layout(), sym.alpha)) == 0.0);
}

TEST_CASE("derived tables reproduce each side from first principles") {
  Rng rng(404);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + rng.pick(2);
    const auto [f, fb] = random_pair(rng, n);
    const SamplePlan plan = make_plan({f, fb}, 1, 1, rng.bits());
    const FiberVector& y = plan.fibers[0][0];
    const PointGeometry pg = point_geometry(f, plan.points[0]);
    const PointGeometry pgb = point_geometry(fb, plan.points[0]);
    const double mu = 1.0 / (n + 1);
    for (const auto& [geo, layout] : {std::pair{&pg, &quadratic_layout()}, std::pair{&pgb, &matsumoto_layout()}}) {
      const IdentitySymbols sym = identity_symbols(*geo, y);
      double leftover = -1.0;
      const CoefficientTable t = derived_table(sym, geo->phi, &leftover);
      CHECK(leftover == doctest::Approx(0.0));
      const TiData td = compute_Ti(*geo, y);
      const Eigen::VectorXd part = td.T - mu * td.divT * y.coords;
      CHECK(rel_err(evaluate_side(t, *layout, sym.alpha), part) < 1e-10);
    }
  }
}

TEST_CASE("printed groups: consistent ones match the derivation exactly") {
  Rng rng(5);
  const std::set<std::string> consistent{"A", "P", "Q", "Abar", "Bbar", "Ebar", "Fbar", "Hbar", "I", "J", "L", "M",
                                         "Ibar", "Jbar", "Kbar", "Lbar", "Mbar"};
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3;
    const auto [f, fb] = random_pair(rng, n);
    const SamplePlan plan = make_plan({f, fb}, 1, 1, rng.bits());
    const FiberVector& y = plan.fibers[0][0];
    const IdentitySymbols sq = identity_symbols(point_geometry(f, plan.points[0]), y);
    const IdentitySymbols sm = identity_symbols(point_geometry(fb, plan.points[0]), y);
    const CoefficientTable pq = printed_quadratic_table(sq, f.phi.epsilon, f.phi.k);
    const CoefficientTable dq = derived_table(sq, f.phi);
    const CoefficientTable pm = printed_matsumoto_table(sm);
    const CoefficientTable dm = derived_table(sm, fb.phi);
    for (const auto& [name, v] : pq.groups)
      if (consistent.count(name)) CHECK_MESSAGE(rel_err(v, dq.at(name)) < 1e-12, name);
    for (const auto& [name, v] : pm.groups)
      if (consistent.count(name)) CHECK_MESSAGE(rel_err(v, dm.at(name)) < 1e-12, name);

    // independent symbolic expansion: derived − printed for two of the inconsistent groups
    const double k = f.phi.k, e = f.phi.epsilon, b2 = sq.b2, be = sq.beta;
    const Eigen::VectorXd gap_b =
        2 * k * (1 + 2 * k * b2) *
        ((-2 * b2 * be * k * k + 2 * b2 * be * k - be * k + be) * sq.s_up0 + sq.r00 * sq.b_up);
    CHECK(rel_err(dq.at("B") - pq.at("B"), gap_b) < 1e-12);
    const Eigen::VectorXd gap_h = -18 * std::pow(be, 6) * e * k * k * k * sq.s_up0;
    CHECK(rel_err(dq.at("H") - pq.at("H"), gap_h) < 1e-12);
  }
}

TEST_CASE("audit isolates the first inconsistent group and the l reading") {
  Rng rng(77);
  const MetricSpec f = random_spec(rng, 3, RiemannFamily::conformally_flat, OneFormFamily::affine, PhiKind::quadratic);
  const MetricSpec fb = random_spec(rng, 3, RiemannFamily::diagonal_polynomial, OneFormFamily::affine, PhiKind::matsumoto);
  const SamplePlan plan = make_plan({f, fb}, 5, 4, 11);
  const IdentityAuditReport rep = audit_identity(f, fb, samples_of(plan));
  CHECK(rep.samples == 20);
  CHECK_FALSE(rep.tables_confirmed);
  CHECK(rep.residual_printed > 1e-3);
  CHECK(rep.residual_derived < 1e-10);
  CHECK(rep.residual_all_replaced < 1e-10);
  CHECK(rep.derivation_leftover < 1e-12);
  CHECK(rep.cross_multiplied_full < 1e-10);
  CHECK(rep.cross_multiplied_printed_l > 1e-3);
  REQUIRE(rep.first_inconsistent.has_value());
  CHECK(*rep.first_inconsistent == "B");

  std::set<std::string> flagged;
  for (const auto& g : rep.groups)
    if (!g.consistent) flagged.insert(g.name);
  CHECK(flagged == std::set<std::string>{"B", "C", "D", "E", "F", "H", "Cbar", "Dbar", "K"});
}

TEST_CASE("audit is reproducible") {
  Rng rng(8);
  const auto [f, fb] = random_pair(rng, 4);
  const SamplePlan plan = make_plan({f, fb}, 3, 3, 99);
  const auto a = audit_identity(f, fb, samples_of(plan));
  const auto b = audit_identity(f, fb, samples_of(make_plan({f, fb}, 3, 3, 99)));
  CHECK(a.residual_printed == b.residual_printed);
  CHECK(a.residual_derived == b.residual_derived);
  REQUIRE(a.groups.size() == b.groups.size());
  for (std::size_t i = 0; i < a.groups.size(); ++i) CHECK(a.groups[i].max_mismatch == b.groups[i].max_mismatch);
}

TEST_CASE("audit rejects the wrong families") {
  Rng rng(1);
  const auto [f, fb] = random_pair(rng, 3);
  CHECK_THROWS_AS(verify_334_identity(fb, f, ChartPoint{0.0, 0.0, 0.0}, FiberVector{1.0, 0.0, 0.0}), DomainError);
}
