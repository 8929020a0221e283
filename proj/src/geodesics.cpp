#include "finsler/geodesics.hpp"

#include "finsler/errors.hpp"
#include "finsler/json_io.hpp"
#include "finsler/spray.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace finsler {

namespace {

struct State {
  Eigen::VectorXd x, v;
};

// (x', v') = (v, −2G(x, v))
State rate(const MetricSpec& spec, const State& s) {
  const ChartPoint x(s.x);
  const FiberVector y(s.v);
  return {s.v, -2.0 * spray_via_alphabeta(spec, x, y)};
}

State axpy(const State& s, double h, const State& k) { return {s.x + h * k.x, s.v + h * k.v}; }

}  // namespace

GeodesicTrace integrate_geodesic(const MetricSpec& spec, const ChartPoint& x0, const FiberVector& y0, double t_end,
                                 double dt) {
  if (!(dt > 0.0) || !(t_end > 0.0)) throw DomainError("geodesic: dt and t_end must be positive");
  if (x0.dim() != spec.dim || y0.dim() != spec.dim) throw DomainError("geodesic: dimension mismatch");
  if (y0.coords.norm() == 0.0) throw DomainError("geodesic: zero initial velocity");
  const int steps = std::max(1, static_cast<int>(std::lround(t_end / dt)));
  const double h = t_end / steps;

  GeodesicTrace tr;
  tr.spec_id = spec.id;
  State s{x0.coords, y0.coords};
  double F_prev = finsler_value(spec, x0, y0);
  tr.params.push_back(0.0);
  tr.points.push_back(x0);
  tr.velocities.push_back(y0);
  tr.arclengths.push_back(0.0);
  for (int i = 1; i <= steps; ++i) {
    try {
      const State k1 = rate(spec, s);
      const State k2 = rate(spec, axpy(s, 0.5 * h, k1));
      const State k3 = rate(spec, axpy(s, 0.5 * h, k2));
      const State k4 = rate(spec, axpy(s, h, k3));
      State next{s.x + (h / 6.0) * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
                 s.v + (h / 6.0) * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
      const ChartPoint x(next.x);
      const FiberVector v(next.v);
      spec.domain.require(x);
      const double F = finsler_value(spec, x, v);
      s = std::move(next);
      tr.params.push_back(i * h);
      tr.points.push_back(x);
      tr.velocities.push_back(v);
      tr.arclengths.push_back(tr.arclengths.back() + 0.5 * h * (F_prev + F));
      F_prev = F;
    } catch (const DomainError&) {
      tr.domain_exit = true;
      break;
    } catch (const FinslerError&) {
      tr.singular = true;
      break;
    }
  }
  return tr;
}

namespace {

using Polyline = std::vector<Eigen::VectorXd>;

Polyline cut(const GeodesicTrace& t, double length) {
  Polyline out{t.points.front().coords};
  double acc = 0.0;
  for (std::size_t i = 1; i < t.points.size(); ++i) {
    const Eigen::VectorXd& a = t.points[i - 1].coords;
    const Eigen::VectorXd& b = t.points[i].coords;
    const double seg = (b - a).norm();
    if (acc + seg >= length) {
      const double f = seg > 0.0 ? (length - acc) / seg : 0.0;
      out.push_back(a + f * (b - a));
      return out;
    }
    acc += seg;
    out.push_back(b);
  }
  return out;
}

double euclidean_length(const GeodesicTrace& t) {
  double acc = 0.0;
  for (std::size_t i = 1; i < t.points.size(); ++i) acc += (t.points[i].coords - t.points[i - 1].coords).norm();
  return acc;
}

double point_segment(const Eigen::VectorXd& p, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

double one_sided(const Polyline& from, const Polyline& to) {
  double worst = 0.0;
  for (const auto& p : from) {
    double best = (p - to.front()).norm();
    for (std::size_t i = 1; i < to.size(); ++i) best = std::min(best, point_segment(p, to[i - 1], to[i]));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

double compare_traces(const GeodesicTrace& a, const GeodesicTrace& b) {
  if (a.size() < 2 || b.size() < 2) throw EmptyTrace("trace comparison needs at least two points per trace");
  const double length = std::min(euclidean_length(a), euclidean_length(b));
  const Polyline pa = cut(a, length), pb = cut(b, length);
  return std::max(one_sided(pa, pb), one_sided(pb, pa));
}

void write_trace_csv(std::ostream& out, const GeodesicTrace& trace) {
  const int n = trace.points.empty() ? 0 : trace.points.front().dim();
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  for (int i = 1; i <= n; ++i) out << ",v" << i;
  out << ",arclength\n";
  for (std::size_t r = 0; r < trace.size(); ++r) {
    out << format_number(trace.params[r]);
    for (int i = 0; i < n; ++i) out << ',' << format_number(trace.points[r].coords[i]);
    for (int i = 0; i < n; ++i) out << ',' << format_number(trace.velocities[r].coords[i]);
    out << ',' << format_number(trace.arclengths[r]) << '\n';
  }
}

void write_trace_jsonl(std::ostream& out, const GeodesicTrace& trace) {
  for (std::size_t r = 0; r < trace.size(); ++r) {
    const nlohmann::json rec{{"t", trace.params[r]},
                             {"x", to_json_array(trace.points[r].coords)},
                             {"v", to_json_array(trace.velocities[r].coords)},
                             {"arclength", trace.arclengths[r]}};
    out << dump_precise(rec) << '\n';
  }
}

}  // namespace finsler
