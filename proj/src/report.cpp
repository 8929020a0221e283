#include "finsler/report.hpp"

#include "finsler/errors.hpp"
#include "finsler/json_io.hpp"

#include <algorithm>
#include <ostream>

namespace finsler {

namespace {

double rel(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

TensorRecord make_record(const PointGeometry& pg, const FiberVector& y) {
  const int n = pg.dim();
  TensorRecord rec;
  rec.x = pg.x.coords;
  rec.y = y.coords;
  const FundamentalTensor ft = fundamental_tensor(pg, y);
  const SprayCurvature c = spray_curvature(pg, y);
  const Eigen::VectorXd G_def = spray_via_definition(pg, y);
  rec.F = alphabeta_norm<double>(pg.riemann.a, pg.beta.b, pg.phi,
                                 std::span<const double>(y.coords.data(), static_cast<std::size_t>(n)));
  rec.g = ft.g;
  rec.G = c.G;
  rec.r = pg.beta.r;
  rec.s = pg.beta.s;
  rec.B_norm = c.B.max_abs();
  rec.D_norm = c.D.max_abs();
  rec.E_norm = c.E.cwiseAbs().maxCoeff();
  rec.spray_residual = (c.G - G_def).cwiseAbs().maxCoeff() / std::max(1.0, G_def.cwiseAbs().maxCoeff());
  rec.euler_residual = rel(y.coords.dot(ft.g * y.coords), rec.F * rec.F);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double tr_b = 0.0, tr_d = 0.0;
      for (int m = 0; m < n; ++m) {
        tr_b += c.B(m, m, i, j);
        tr_d += c.D(m, m, i, j);
      }
      rec.half_trace_residual = std::max(rec.half_trace_residual, std::abs(c.E(i, j) - 0.5 * tr_b));
      rec.douglas_trace = std::max(rec.douglas_trace, std::abs(tr_d));
    }
  return rec;
}

}  // namespace

std::vector<TensorRecord> tensor_report(const MetricSpec& spec, const SamplePlan& plan, int threads) {
  std::vector<std::vector<TensorRecord>> per_point(plan.points.size());
  parallel_for(plan.points.size(), threads, [&](std::size_t p) {
    const PointGeometry pg = point_geometry(spec, plan.points[p]);
    for (std::size_t f = 0; f < plan.fibers[p].size(); ++f) {
      TensorRecord rec = make_record(pg, plan.fibers[p][f]);
      rec.point = p;
      rec.fiber = f;
      per_point[p].push_back(std::move(rec));
    }
  });
  std::vector<TensorRecord> out;
  for (auto& v : per_point)
    for (auto& r : v) out.push_back(std::move(r));
  return out;
}

nlohmann::json to_json(const TensorRecord& rec) {
  return nlohmann::json{{"point", rec.point},
                        {"fiber", rec.fiber},
                        {"x", to_json_array(rec.x)},
                        {"y", to_json_array(rec.y)},
                        {"F", rec.F},
                        {"g", to_json_array(rec.g)},
                        {"G", to_json_array(rec.G)},
                        {"r", to_json_array(rec.r)},
                        {"s", to_json_array(rec.s)},
                        {"B_norm", rec.B_norm},
                        {"D_norm", rec.D_norm},
                        {"E_norm", rec.E_norm},
                        {"residuals",
                         {{"spray_definition", rec.spray_residual},
                          {"euler", rec.euler_residual},
                          {"mean_berwald_half_trace", rec.half_trace_residual},
                          {"douglas_trace", rec.douglas_trace}}}};
}

void write_report_jsonl(std::ostream& out, const std::vector<TensorRecord>& recs) {
  for (const auto& r : recs) out << dump_precise(to_json(r)) << '\n';
}

void write_report_csv(std::ostream& out, const std::vector<TensorRecord>& recs) {
  const int n = recs.empty() ? 0 : static_cast<int>(recs.front().x.size());
  out << "point,fiber";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  for (int i = 1; i <= n; ++i) out << ",y" << i;
  out << ",F";
  for (int i = 1; i <= n; ++i) out << ",G" << i;
  out << ",B_norm,D_norm,E_norm,spray_residual,euler_residual,half_trace_residual,douglas_trace\n";
  for (const auto& r : recs) {
    out << r.point << ',' << r.fiber;
    for (int i = 0; i < n; ++i) out << ',' << format_number(r.x[i]);
    for (int i = 0; i < n; ++i) out << ',' << format_number(r.y[i]);
    out << ',' << format_number(r.F);
    for (int i = 0; i < n; ++i) out << ',' << format_number(r.G[i]);
    for (double v : {r.B_norm, r.D_norm, r.E_norm, r.spray_residual, r.euler_residual, r.half_trace_residual,
                     r.douglas_trace})
      out << ',' << format_number(v);
    out << '\n';
  }
}

}  // namespace finsler
