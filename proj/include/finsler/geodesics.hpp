#pragma once

// Geodesics x'' + 2G(x, x') = 0 by fixed-step RK4, and point-set comparison of traces.

#include "finsler/metric_spec.hpp"
#include "finsler/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace finsler {

struct GeodesicTrace {
  std::string spec_id;
  std::vector<double> params;
  std::vector<ChartPoint> points;
  std::vector<FiberVector> velocities;
  std::vector<double> arclengths;  // cumulative F-length, trapezoid rule
  bool domain_exit = false;        // stopped before t_end: left the chart box or the regular region
  bool singular = false;           // stopped before t_end: singular spray evaluation

  std::size_t size() const { return points.size(); }
};

/// Integrates on [0, t_end] with round(t_end/dt) equal steps.  A failed step
/// truncates the trace and sets a flag; it does not throw.
GeodesicTrace integrate_geodesic(const MetricSpec& spec, const ChartPoint& x0, const FiberVector& y0, double t_end,
                                 double dt = 1e-3);

/// Symmetrized one-sided polyline distance after cutting both traces to their
/// common Euclidean chart length.  Throws EmptyTrace for traces with fewer than
/// two points.
double compare_traces(const GeodesicTrace& a, const GeodesicTrace& b);

/// Columns t, x1..xn, v1..vn, arclength.
void write_trace_csv(std::ostream& out, const GeodesicTrace& trace);
/// One record {"t", "x", "v", "arclength"} per line.
void write_trace_jsonl(std::ostream& out, const GeodesicTrace& trace);

}  // namespace finsler
