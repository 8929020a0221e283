#include "finsler/identity_audit.hpp"

#include "finsler/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace finsler {

namespace {

// Laurent polynomial in α with real coefficients.
class Laurent {
 public:
  Laurent() = default;
  static Laurent mono(double coef, int power) {
    Laurent l;
    if (coef != 0.0) l.c_[power] = coef;
    return l;
  }
  Laurent& operator+=(const Laurent& o) {
    for (const auto& [p, v] : o.c_) c_[p] += v;
    return *this;
  }
  Laurent& operator-=(const Laurent& o) {
    for (const auto& [p, v] : o.c_) c_[p] -= v;
    return *this;
  }
  friend Laurent operator+(Laurent a, const Laurent& b) { return a += b; }
  friend Laurent operator-(Laurent a, const Laurent& b) { return a -= b; }
  friend Laurent operator*(const Laurent& a, const Laurent& b) {
    Laurent out;
    for (const auto& [p, v] : a.c_)
      for (const auto& [q, w] : b.c_) out.c_[p + q] += v * w;
    return out;
  }
  friend Laurent operator*(double s, Laurent a) {
    for (auto& [p, v] : a.c_) v *= s;
    return a;
  }
  const std::map<int, double>& coefficients() const { return c_; }
  double at(int p) const {
    auto it = c_.find(p);
    return it == c_.end() ? 0.0 : it->second;
  }

 private:
  std::map<int, double> c_;
};

// Q = Qn/P1, Q' = dQn/P1², Ψ = Psin/P2, Ψ' = dPsin/P2², both sides as
// Laurent polynomials in α; the common denominator is α^extra P1² P2².
struct LaurentFamily {
  Laurent Qn, P1, dQn, Psin, P2, dPsin;
  int extra = 0;
};

LaurentFamily laurent_family(const PhiFamily& fam, double beta, double b2) {
  LaurentFamily f;
  if (fam.kind == PhiKind::quadratic) {
    const double e = fam.epsilon, k = fam.k;
    f.Qn = Laurent::mono(e, 2) + Laurent::mono(2.0 * k * beta, 1);
    f.P1 = Laurent::mono(1.0, 2) + Laurent::mono(-k * beta * beta, 0);
    f.dQn = Laurent::mono(2.0 * k, 4) + Laurent::mono(2.0 * k * e * beta, 3) + Laurent::mono(2.0 * k * k * beta * beta, 2);
    f.Psin = Laurent::mono(k, 2);
    f.P2 = Laurent::mono(1.0 + 2.0 * k * b2, 2) + Laurent::mono(-3.0 * k * beta * beta, 0);
    f.dPsin = Laurent::mono(6.0 * k * k * beta, 3);
    f.extra = 0;
  } else {
    f.Qn = Laurent::mono(1.0, 1);
    f.P1 = Laurent::mono(1.0, 1) + Laurent::mono(-2.0 * beta, 0);
    f.dQn = Laurent::mono(2.0, 2);
    f.Psin = Laurent::mono(1.0, 1);
    f.P2 = Laurent::mono(1.0 + 2.0 * b2, 1) + Laurent::mono(-3.0 * beta, 0);
    f.dPsin = Laurent::mono(3.0, 2);
    f.extra = 1;
  }
  return f;
}

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

double vec_max(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

const Eigen::VectorXd& CoefficientTable::at(const std::string& name) const {
  for (const auto& [k, v] : groups)
    if (k == name) return v;
  throw DomainError("unknown coefficient group " + name);
}

Eigen::VectorXd& CoefficientTable::at(const std::string& name) {
  for (auto& [k, v] : groups)
    if (k == name) return v;
  throw DomainError("unknown coefficient group " + name);
}

const SideLayout& quadratic_layout() {
  static const SideLayout layout{
      {{"A", 9}, {"B", 8}, {"C", 7}, {"D", 6}, {"E", 5}, {"F", 4}, {"H", 3}, {"P", 2}, {"Q", 0}},
      {{"I", 8}, {"J", 6}, {"K", 4}, {"L", 2}, {"M", 0}}};
  return layout;
}

const SideLayout& matsumoto_layout() {
  static const SideLayout layout{
      {{"Abar", 6}, {"Bbar", 5}, {"Cbar", 4}, {"Dbar", 3}, {"Ebar", 2}, {"Fbar", 1}, {"Hbar", 0}},
      {{"Ibar", 5}, {"Jbar", 4}, {"Kbar", 3}, {"Lbar", 2}, {"Mbar", 1}}};
  return layout;
}

IdentitySymbols identity_symbols(const PointGeometry& pg, const FiberVector& y) {
  const auto yy = std::vector<double>(y.coords.data(), y.coords.data() + y.dim());
  const FiberTerms<double> t = fiber_terms<double>(pg, yy);
  IdentitySymbols s;
  s.n = pg.dim();
  s.alpha = t.alpha;
  s.beta = t.beta;
  s.b2 = pg.beta.b2;
  s.r00 = t.r00;
  s.r0 = t.r0;
  s.s0 = t.s0;
  s.s_up0 = Eigen::Map<const Eigen::VectorXd>(t.s_up0.data(), s.n);
  s.b_up = pg.beta.b_up;
  s.y = y.coords;
  return s;
}

CoefficientTable printed_quadratic_table(const IdentitySymbols& sym, double epsilon, double k) {
  const double e = epsilon, b2 = sym.b2, be = sym.beta, mu = 1.0 / (sym.n + 1);
  const double r00 = sym.r00, r0 = sym.r0, s0 = sym.s0;
  const Eigen::VectorXd& si = sym.s_up0;
  const Eigen::VectorXd& bi = sym.b_up;
  const Eigen::VectorXd& yi = sym.y;
  const double u = 1.0 + 2.0 * k * b2;
  const double be2 = be * be, be3 = be2 * be, be4 = be3 * be, be5 = be4 * be;

  CoefficientTable t;
  t.groups.emplace_back("A", u * (e * u * si - 2.0 * e * k * s0 * bi));
  t.groups.emplace_back("B", u * (2.0 * k * k * u * be * si - 2.0 * k * (2.0 * k * be * bi + mu * yi) * s0 -
                                  2.0 * mu * k * r0 * yi - k * r00 * bi));
  t.groups.emplace_back("C", -(7.0 + 2.0 * k * b2) * u * e * k * be2 * si +
                                 4.0 * e * (2.0 + k * b2) * k * k * be2 * s0 * bi -
                                 12.0 * mu * e * k * k * be * s0 * b2 * yi);
  t.groups.emplace_back("D", (-14.0 - 4.0 * k * b2) * u * k * k * be3 * si +
                                 8.0 * k * k * k * (2.0 + k * b2) * be3 * s0 * bi +
                                 (3.0 * k * k * be2 * bi - 6.0 * mu * k * k * b2 * be * yi) * r00 +
                                 mu * k * k * (10.0 + 8.0 * k * b2) * r0 * be2 * yi +
                                 mu * k * k * (10.0 + 32.0 * k * b2) * be2 * s0 * yi);
  // The last printed term carries no free index; it is read as a multiple of y^i.
  t.groups.emplace_back("E", -8.0 * e * k * k * be4 * si - 6.0 * e * k * k * k * be4 * s0 * bi -
                                 12.0 * mu * e * k * k * (1.0 + k * b2) * be3 * s0 * yi);
  t.groups.emplace_back("F", k * k * be3 *
                                 (18.0 * k * (1.0 + k * b2) * be2 * si -
                                  mu * k * (14.0 + 4.0 * k * b2) * be * r0 * yi -
                                  12.0 * k * be * (4.0 * yi + 5.0 * k * be * bi) * s0 -
                                  u * (k * be * bi + 6.0 * mu * yi) * r00));
  t.groups.emplace_back("H", 3.0 * e * k * k * k * be5 * (3.0 * be * si + 4.0 * mu * s0 * yi));
  t.groups.emplace_back("P", 3.0 * k * k * k * be5 *
                                 (-(k * be * bi + 2.0 * mu * (2.0 + k * b2) * yi) * r00 +
                                  2.0 * k * be * (-3.0 * be * si + mu * (5.0 * s0 + r0) * yi)));
  t.groups.emplace_back("Q", 6.0 * mu * k * k * k * k * be5 * be2 * r00 * yi);
  t.groups.emplace_back("I", scalar(u * u));
  t.groups.emplace_back("J", scalar(-4.0 * k * u * (2.0 + k * b2) * be2));
  t.groups.emplace_back("K", scalar(k * k * be4 * (22.0 + 38.0 * k * b2 + 4.0 * k * k * b2 * b2)));
  t.groups.emplace_back("L", scalar(-12.0 * k * k * k * be5 * be * (b2 * k + 2.0)));
  t.groups.emplace_back("M", scalar(9.0 * k * k * k * k * be4 * be4));
  return t;
}

CoefficientTable printed_matsumoto_table(const IdentitySymbols& sym) {
  // every b, b², β in these groups is read as the barred quantity
  const double b2 = sym.b2, be = sym.beta, mu = 1.0 / (sym.n + 1);
  const double r00 = sym.r00, r0 = sym.r0, s0 = sym.s0;
  const Eigen::VectorXd& si = sym.s_up0;
  const Eigen::VectorXd& bi = sym.b_up;
  const Eigen::VectorXd& yi = sym.y;
  const double u = 1.0 + 2.0 * b2;
  const double be2 = be * be, be3 = be2 * be, be4 = be3 * be;

  CoefficientTable t;
  t.groups.emplace_back("Abar", -u * (2.0 * bi * s0 - u * si));
  t.groups.emplace_back("Bbar", u * (-4.0 * be * (2.0 + b2) * si + bi * r00 - 2.0 * mu * yi * (u * s0 + r0)) +
                                    2.0 * (5.0 + 4.0 * b2) * (b2 * mu * yi + bi * be) * s0);
  t.groups.emplace_back("Cbar", 2.0 * be * u * (2.0 * (3.0 * be * si - bi * r00) + mu * yi * (7.0 * s0 + 4.0 * r0)) +
                                    3.0 * (3.0 * be2 * si - mu * yi * (b2 * r00 + 2.0 * be * (4.0 * b2 * s0 - r0))));
  t.groups.emplace_back("Dbar", -2.0 * be *
                                    (19.0 * be2 * si - 8.0 * bi * be * (b2 + 2.0) * r00 +
                                     2.0 * mu * yi * (19.0 * be * s0 + 24.0 * be * r0 + 8.0 * b2 * be * s0 - 6.0 * b2 * r00)));
  t.groups.emplace_back("Ebar", -3.0 * be2 *
                                    (4.0 * bi * be * r00 + mu * yi * ((4.0 * b2 - 1.0) * r00 - 4.0 * be * (3.0 * s0 + 2.0 * r0))));
  t.groups.emplace_back("Fbar", -12.0 * mu * yi * be3 * r00);
  t.groups.emplace_back("Hbar", 12.0 * mu * yi * be4 * r00);
  t.groups.emplace_back("Ibar", scalar(u * u));
  t.groups.emplace_back("Jbar", scalar(-2.0 * be * (5.0 + 2.0 * b2 * (7.0 + 4.0 * b2))));
  t.groups.emplace_back("Kbar", scalar(be2 * (37.0 + 16.0 * b2 * (b2 + 4.0))));
  t.groups.emplace_back("Lbar", scalar(-12.0 * be3 * (4.0 * b2 + 5.0)));
  t.groups.emplace_back("Mbar", scalar(36.0 * be4));
  return t;
}

CoefficientTable derived_table(const IdentitySymbols& sym, const PhiFamily& fam, double* leftover) {
  const int n = sym.n;
  const double mu = 1.0 / (n + 1);
  const LaurentFamily f = laurent_family(fam, sym.beta, sym.b2);
  const Laurent a = Laurent::mono(1.0, 1);
  const Laurent a_inv = Laurent::mono(1.0, -1);
  const Laurent front = Laurent::mono(1.0, f.extra);
  // b² − s² = (b²α² − β²) α⁻²
  const Laurent gap = Laurent::mono(sym.b2, 0) + Laurent::mono(-sym.beta * sym.beta, -2);
  const Laurent p1sq = f.P1 * f.P1;
  const Laurent p2sq = f.P2 * f.P2;
  // (r00 − 2Qαs0)·P1²
  const Laurent bracket = sym.r00 * p1sq - (2.0 * sym.s0) * (f.Qn * a * f.P1);
  const Laurent t_s = a * f.Qn * f.P1 * p2sq;         // coefficient of s^i_0 in T·P1²P2²
  const Laurent t_b = f.Psin * f.P2 * bracket;        // coefficient of b^i
  const Laurent div = sym.s0 * (f.dQn * p2sq) + f.dPsin * a_inv * gap * bracket +
                      2.0 * (f.Psin * f.P2 *
                             (sym.r0 * p1sq - sym.s0 * (f.dQn * gap) - sym.s0 * (f.Qn * f.P1 * Laurent::mono(sym.beta, -1))));
  const Laurent den = front * p1sq * p2sq;

  const SideLayout& layout = fam.kind == PhiKind::quadratic ? quadratic_layout() : matsumoto_layout();
  std::map<int, Eigen::VectorXd> num_by_power;
  for (int i = 0; i < n; ++i) {
    const Laurent ni = front * (sym.s_up0[i] * t_s + sym.b_up[i] * t_b - (mu * sym.y[i]) * div);
    for (const auto& [p, v] : ni.coefficients()) {
      auto& slot = num_by_power[p];
      if (slot.size() == 0) slot = Eigen::VectorXd::Zero(n);
      slot[i] = v;
    }
  }

  CoefficientTable t;
  double assigned = 0.0, unassigned = 0.0;
  for (const auto& [name, p] : layout.numerator) {
    auto it = num_by_power.find(p);
    Eigen::VectorXd v = it == num_by_power.end() ? Eigen::VectorXd::Zero(n) : it->second;
    assigned = std::max(assigned, vec_max(v));
    t.groups.emplace_back(name, v);
  }
  for (const auto& [p, v] : num_by_power) {
    const bool named = std::any_of(layout.numerator.begin(), layout.numerator.end(),
                                   [p = p](const auto& e) { return e.second == p; });
    if (!named) unassigned = std::max(unassigned, vec_max(v));
  }
  double den_assigned = 0.0, den_unassigned = 0.0;
  for (const auto& [name, p] : layout.denominator) {
    den_assigned = std::max(den_assigned, std::abs(den.at(p)));
    t.groups.emplace_back(name, scalar(den.at(p)));
  }
  for (const auto& [p, v] : den.coefficients()) {
    const bool named = std::any_of(layout.denominator.begin(), layout.denominator.end(),
                                   [p = p](const auto& e) { return e.second == p; });
    if (!named) den_unassigned = std::max(den_unassigned, std::abs(v));
  }
  if (leftover) {
    const double rel_num = assigned > 0.0 ? unassigned / assigned : unassigned;
    const double rel_den = den_assigned > 0.0 ? den_unassigned / den_assigned : den_unassigned;
    *leftover = std::max(rel_num, rel_den);
  }
  return t;
}

Eigen::VectorXd evaluate_side(const CoefficientTable& table, const SideLayout& layout, double alpha) {
  Eigen::VectorXd num;
  for (const auto& [name, p] : layout.numerator) {
    const Eigen::VectorXd term = table.at(name) * std::pow(alpha, p);
    num = num.size() ? Eigen::VectorXd(num + term) : term;
  }
  double den = 0.0;
  for (const auto& [name, p] : layout.denominator) den += table.at(name)[0] * std::pow(alpha, p);
  require_nonsingular(den, 1.0, "identity denominator");
  return num / den;
}

namespace {

struct SampleContext {
  IdentitySymbols sym, sym_bar;
  Eigen::VectorXd part, part_bar, h00;
};

SampleContext make_context(const MetricSpec& spec, const MetricSpec& spec_bar, const ChartPoint& x,
                           const FiberVector& y) {
  if (spec.phi.kind != PhiKind::quadratic || spec_bar.phi.kind != PhiKind::matsumoto) {
    throw DomainError("identity audit needs a quadratic-φ metric and a Matsumoto metric");
  }
  if (spec.dim != spec_bar.dim) throw DomainError("identity audit: dimension mismatch");
  const PointGeometry pg = point_geometry(spec, x);
  const PointGeometry pgb = point_geometry(spec_bar, x);
  SampleContext c;
  c.sym = identity_symbols(pg, y);
  c.sym_bar = identity_symbols(pgb, y);
  const double mu = 1.0 / (spec.dim + 1);
  const TiData t = compute_Ti(pg, y);
  const TiData tb = compute_Ti(pgb, y);
  c.part = t.T - mu * t.divT * y.coords;
  c.part_bar = tb.T - mu * tb.divT * y.coords;
  c.h00 = c.part - c.part_bar;
  return c;
}

double relative_gap(const Eigen::VectorXd& got, const Eigen::VectorXd& want, double scale) {
  const double diff = vec_max(got - want);
  if (diff == 0.0) return 0.0;
  if (!(scale > 0.0)) return std::numeric_limits<double>::infinity();
  return diff / scale;
}

double side_residual(const SampleContext& c, const CoefficientTable& tq, const CoefficientTable& tm) {
  const Eigen::VectorXd lhs =
      evaluate_side(tq, quadratic_layout(), c.sym.alpha) - evaluate_side(tm, matsumoto_layout(), c.sym_bar.alpha);
  const double scale = std::max({vec_max(c.part), vec_max(c.part_bar), vec_max(c.h00)});
  return relative_gap(lhs, c.h00, scale);
}

// H·l·Den − (l·N − m·Den) with the given reading of l.
double cross_multiplied(const SampleContext& c, const CoefficientTable& tq, const CoefficientTable& tm, LReading r) {
  const double a = c.sym.alpha, ab = c.sym_bar.alpha;
  Eigen::VectorXd N = Eigen::VectorXd::Zero(c.sym.n), m = Eigen::VectorXd::Zero(c.sym.n);
  double den = 0.0, l = 0.0;
  for (const auto& [name, p] : quadratic_layout().numerator) N += tq.at(name) * std::pow(a, p);
  for (const auto& [name, p] : quadratic_layout().denominator) den += tq.at(name)[0] * std::pow(a, p);
  for (const auto& [name, p] : matsumoto_layout().numerator) m += tm.at(name) * std::pow(ab, p);
  for (const auto& [name, p] : matsumoto_layout().denominator) {
    if (r == LReading::printed && name == "Lbar") continue;
    l += tm.at(name)[0] * std::pow(ab, p);
  }
  const Eigen::VectorXd lhs = c.h00 * l * den;
  const Eigen::VectorXd rhs = l * N - den * m;
  const double scale = std::max(vec_max(l * N), vec_max(den * m));
  return relative_gap(lhs, rhs, scale);
}

double group_mismatch(const Eigen::VectorXd& printed, const Eigen::VectorXd& derived, double side_scale) {
  const double diff = vec_max(printed - derived);
  if (diff == 0.0) return 0.0;
  const double scale = std::max({vec_max(printed), vec_max(derived), 1e-9 * side_scale});
  return scale > 0.0 ? diff / scale : std::numeric_limits<double>::infinity();
}

double table_scale(const CoefficientTable& t, const SideLayout& layout, bool numerator) {
  double s = 0.0;
  for (const auto& [name, p] : numerator ? layout.numerator : layout.denominator) s = std::max(s, vec_max(t.at(name)));
  return s;
}

constexpr double kGroupTolerance = 1e-8;

}  // namespace

double verify_334_identity(const MetricSpec& spec, const MetricSpec& spec_bar, const ChartPoint& x,
                           const FiberVector& y) {
  const SampleContext c = make_context(spec, spec_bar, x, y);
  return side_residual(c, printed_quadratic_table(c.sym, spec.phi.epsilon, spec.phi.k),
                       printed_matsumoto_table(c.sym_bar));
}

IdentityAuditReport audit_identity(const MetricSpec& spec, const MetricSpec& spec_bar,
                                   const std::vector<std::pair<ChartPoint, FiberVector>>& samples) {
  IdentityAuditReport rep;
  rep.samples = samples.size();
  std::vector<SampleContext> ctx;
  std::vector<CoefficientTable> pq, pm, dq, dm;
  for (const auto& [x, y] : samples) {
    ctx.push_back(make_context(spec, spec_bar, x, y));
    const auto& c = ctx.back();
    pq.push_back(printed_quadratic_table(c.sym, spec.phi.epsilon, spec.phi.k));
    pm.push_back(printed_matsumoto_table(c.sym_bar));
    double left_q = 0.0, left_m = 0.0;
    dq.push_back(derived_table(c.sym, spec.phi, &left_q));
    dm.push_back(derived_table(c.sym_bar, spec_bar.phi, &left_m));
    rep.derivation_leftover = std::max({rep.derivation_leftover, left_q, left_m});
  }

  // group order: A..Q, Ā..H̄, I..M, Ī..M̄
  std::vector<std::pair<std::string, bool>> order;  // name, quadratic side?
  for (const auto& [name, p] : quadratic_layout().numerator) order.emplace_back(name, true);
  for (const auto& [name, p] : matsumoto_layout().numerator) order.emplace_back(name, false);
  for (const auto& [name, p] : quadratic_layout().denominator) order.emplace_back(name, true);
  for (const auto& [name, p] : matsumoto_layout().denominator) order.emplace_back(name, false);

  for (std::size_t s = 0; s < ctx.size(); ++s) {
    rep.residual_printed = std::max(rep.residual_printed, side_residual(ctx[s], pq[s], pm[s]));
    rep.residual_derived = std::max(rep.residual_derived, side_residual(ctx[s], dq[s], dm[s]));
    rep.cross_multiplied_full = std::max(rep.cross_multiplied_full, cross_multiplied(ctx[s], dq[s], dm[s], LReading::full));
    rep.cross_multiplied_printed_l =
        std::max(rep.cross_multiplied_printed_l, cross_multiplied(ctx[s], dq[s], dm[s], LReading::printed));
  }

  for (const auto& [name, quad] : order) {
    GroupAudit g;
    g.name = name;
    const SideLayout& layout = quad ? quadratic_layout() : matsumoto_layout();
    const bool numerator = std::any_of(layout.numerator.begin(), layout.numerator.end(),
                                       [&](const auto& e) { return e.first == name; });
    for (std::size_t s = 0; s < ctx.size(); ++s) {
      const CoefficientTable& printed = quad ? pq[s] : pm[s];
      const CoefficientTable& derived = quad ? dq[s] : dm[s];
      const double scale = table_scale(derived, layout, numerator);
      g.max_mismatch = std::max(g.max_mismatch, group_mismatch(printed.at(name), derived.at(name), scale));
      CoefficientTable q1 = pq[s], m1 = pm[s];
      (quad ? q1 : m1).at(name) = derived.at(name);
      g.leave_one_out = std::max(g.leave_one_out, side_residual(ctx[s], q1, m1));
    }
    g.consistent = g.max_mismatch < kGroupTolerance;
    if (!g.consistent && !rep.first_inconsistent) rep.first_inconsistent = name;
    rep.groups.push_back(g);
  }

  for (std::size_t s = 0; s < ctx.size(); ++s) {
    CoefficientTable q1 = pq[s], m1 = pm[s];
    for (const auto& g : rep.groups) {
      if (g.consistent) continue;
      const bool quad = std::any_of(order.begin(), order.end(), [&](const auto& o) { return o.first == g.name && o.second; });
      (quad ? q1 : m1).at(g.name) = (quad ? dq[s] : dm[s]).at(g.name);
    }
    rep.residual_all_replaced = std::max(rep.residual_all_replaced, side_residual(ctx[s], q1, m1));
  }
  rep.tables_confirmed = rep.residual_printed < rep.tolerance;
  return rep;
}

}  // namespace finsler
