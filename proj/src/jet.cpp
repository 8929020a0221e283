#include "finsler/jet.hpp"

#include "finsler/errors.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace finsler {

namespace {

// All exponent vectors of `vars` variables with total degree ≤ order, graded.
void enumerate(int vars, int order, std::vector<std::vector<int>>& out) {
  for (int deg = 0; deg <= order; ++deg) {
    std::vector<int> e(vars, 0);
    // recursive fill of `remaining` units into positions ≥ pos
    std::function<void(int, int)> fill = [&](int pos, int remaining) {
      if (pos == vars - 1) {
        e[pos] = remaining;
        out.push_back(e);
        return;
      }
      for (int p = remaining; p >= 0; --p) {
        e[pos] = p;
        fill(pos + 1, remaining - p);
      }
      e[pos] = 0;
    };
    if (vars == 0) {
      if (deg == 0) out.push_back(e);
      continue;
    }
    fill(0, deg);
  }
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

JetSpace::JetSpace(int vars, int order) : vars_(vars), order_(order) {
  if (vars < 1 || order < 0) throw DomainError("jet space needs vars ≥ 1 and order ≥ 0");
  enumerate(vars, order, exps_);
  degree_.reserve(exps_.size());
  mult_.reserve(exps_.size());
  for (size_t idx = 0; idx < exps_.size(); ++idx) {
    int d = 0;
    double m = 1.0;
    for (int p : exps_[idx]) {
      d += p;
      m *= factorial(p);
    }
    degree_.push_back(d);
    mult_.push_back(m);
    lookup_.emplace(encode(exps_[idx]), static_cast<int>(idx));
  }
  unit_.assign(vars, -1);
  for (int v = 0; v < vars; ++v) {
    std::vector<int> e(vars, 0);
    e[v] = 1;
    unit_[v] = index_of(e);
  }
  std::vector<int> sum(vars);
  for (int a = 0; a < size(); ++a)
    for (int b = 0; b < size(); ++b) {
      if (degree_[a] + degree_[b] > order_) continue;
      for (int v = 0; v < vars; ++v) sum[v] = exps_[a][v] + exps_[b][v];
      products_.push_back({a, b, index_of(sum)});
    }
}

long long JetSpace::encode(const std::vector<int>& e) const {
  long long code = 0;
  for (int p : e) code = code * (order_ + 1) + p;
  return code;
}

int JetSpace::index_of(const std::vector<int>& e) const {
  int d = 0;
  for (int p : e) d += p;
  if (d > order_) return -1;
  auto it = lookup_.find(encode(e));
  return it == lookup_.end() ? -1 : it->second;
}

std::shared_ptr<const JetSpace> JetSpace::get(int vars, int order) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::shared_ptr<const JetSpace>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{vars, order}];
  if (!slot) slot = std::make_shared<const JetSpace>(vars, order);
  return slot;
}

TaylorJet::TaylorJet(std::shared_ptr<const JetSpace> space, double value)
    : space_(std::move(space)), c_(space_->size(), 0.0) {
  c_[0] = value;
}

TaylorJet TaylorJet::variable(std::shared_ptr<const JetSpace> space, int v, double value) {
  TaylorJet j(space, value);
  if (space->order() >= 1) j.c_[space->unit(v)] = 1.0;
  return j;
}

double TaylorJet::derivative(std::initializer_list<int> wrt) const {
  std::vector<int> e(space_->vars(), 0);
  for (int v : wrt) ++e[v];
  const int idx = space_->index_of(e);
  if (idx < 0) throw DomainError("derivative order exceeds jet order");
  return c_[idx] * space_->multiplicity(idx);
}

TaylorJet TaylorJet::partial(int v) const {
  if (space_->order() == 0) throw DomainError("cannot differentiate an order-0 jet");
  auto lower = JetSpace::get(space_->vars(), space_->order() - 1);
  TaylorJet out(lower, 0.0);
  std::vector<int> e;
  for (int idx = 0; idx < lower->size(); ++idx) {
    e = lower->exponents(idx);
    const int p = e[v];
    ++e[v];
    out.c_[idx] = c_[space_->index_of(e)] * (p + 1);
  }
  return out;
}

TaylorJet TaylorJet::compose(std::span<const double> derivs) const {
  const int order = space_->order();
  if (static_cast<int>(derivs.size()) < order + 1) throw DomainError("compose needs order+1 derivatives");
  TaylorJet h = *this;
  h.c_[0] = 0.0;
  TaylorJet res(space_, derivs[order] / factorial(order));
  for (int r = order - 1; r >= 0; --r) {
    res *= h;
    res.c_[0] += derivs[r] / factorial(r);
  }
  return res;
}

TaylorJet& TaylorJet::operator+=(const TaylorJet& o) {
  for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

TaylorJet& TaylorJet::operator-=(const TaylorJet& o) {
  for (size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

TaylorJet& TaylorJet::operator*=(const TaylorJet& o) {
  std::vector<double> out(c_.size(), 0.0);
  for (const auto& p : space_->products()) out[p.c] += c_[p.a] * o.c_[p.b];
  c_ = std::move(out);
  return *this;
}

TaylorJet& TaylorJet::operator/=(const TaylorJet& o) { return *this *= reciprocal(o); }

TaylorJet& TaylorJet::operator*=(double v) {
  for (double& c : c_) c *= v;
  return *this;
}

TaylorJet TaylorJet::operator-() const {
  TaylorJet r = *this;
  for (double& c : r.c_) c = -c;
  return r;
}

TaylorJet operator+(TaylorJet a, const TaylorJet& b) { return a += b; }
TaylorJet operator-(TaylorJet a, const TaylorJet& b) { return a -= b; }
TaylorJet operator*(const TaylorJet& a, const TaylorJet& b) {
  TaylorJet r = a;
  return r *= b;
}
TaylorJet operator/(const TaylorJet& a, const TaylorJet& b) { return a * reciprocal(b); }
TaylorJet operator+(TaylorJet a, double b) { return a += b; }
TaylorJet operator+(double a, TaylorJet b) { return b += a; }
TaylorJet operator-(TaylorJet a, double b) { return a -= b; }
TaylorJet operator-(double a, const TaylorJet& b) { return (-b) += a; }
TaylorJet operator*(TaylorJet a, double b) { return a *= b; }
TaylorJet operator*(double a, TaylorJet b) { return b *= a; }
TaylorJet operator/(TaylorJet a, double b) { return a /= b; }
TaylorJet operator/(double a, const TaylorJet& b) { return reciprocal(b) *= a; }

TaylorJet reciprocal(const TaylorJet& a) {
  const double v = a.value();
  if (v == 0.0 || !std::isfinite(v)) throw SingularEvaluation("jet reciprocal of zero");
  const int order = a.space()->order();
  std::vector<double> d(order + 1);
  // d^r/dx^r x^{-1} = (-1)^r r! x^{-r-1}
  double f = 1.0 / v;
  for (int r = 0; r <= order; ++r) {
    d[r] = f;
    f *= -(r + 1) / v;
  }
  return a.compose(d);
}

TaylorJet sqrt(const TaylorJet& a) {
  const double v = a.value();
  if (!(v > 0.0)) throw SingularEvaluation("jet square root of a nonpositive value");
  const int order = a.space()->order();
  std::vector<double> d(order + 1);
  double f = std::sqrt(v);
  for (int r = 0; r <= order; ++r) {
    d[r] = f;
    f *= (0.5 - r) / v;
  }
  return a.compose(d);
}

TaylorJet exp(const TaylorJet& a) {
  const int order = a.space()->order();
  std::vector<double> d(order + 1, std::exp(a.value()));
  return a.compose(d);
}

Jet3 to_jet3(const TaylorJet& j) {
  const auto& sp = *j.space();
  if (sp.order() < 3) throw DomainError("to_jet3 needs a jet of order ≥ 3");
  const int n = sp.vars();
  Jet3 out;
  out.value = j.value();
  out.d1.resize(n);
  out.d2.resize(n, n);
  out.d3 = Tensor3(n);
  for (int i = 0; i < n; ++i) {
    out.d1[i] = j.derivative({i});
    for (int k = 0; k < n; ++k) {
      out.d2(i, k) = j.derivative({i, k});
      for (int l = 0; l < n; ++l) out.d3(i, k, l) = j.derivative({i, k, l});
    }
  }
  return out;
}

std::vector<TaylorJet> fiber_seeds(const FiberVector& y, int order) {
  const int n = y.dim();
  auto sp = JetSpace::get(n, order);
  std::vector<TaylorJet> seeds;
  seeds.reserve(n);
  for (int i = 0; i < n; ++i) seeds.push_back(TaylorJet::variable(sp, i, y.coords[i]));
  return seeds;
}

Jet3 jet3_compose(const FiberFunction& f, const ChartPoint& x, const FiberVector& y) {
  const auto seeds = fiber_seeds(y, 3);
  return to_jet3(f(x, seeds));
}

}  // namespace finsler
