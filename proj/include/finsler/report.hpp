#pragma once

#include "finsler/projective.hpp"

#include <json.hpp>

#include <iosfwd>
#include <vector>

namespace finsler {

/// Tensor values at one (x, y) sample.  Norms are max-absolute-entry.
struct TensorRecord {
  std::size_t point = 0, fiber = 0;
  Eigen::VectorXd x, y;
  double F = 0.0;
  Eigen::MatrixXd g;
  Eigen::VectorXd G;
  Eigen::MatrixXd r, s;
  double B_norm = 0.0, D_norm = 0.0, E_norm = 0.0;
  double spray_residual = 0.0;      // alphabeta route vs definition, relative
  double euler_residual = 0.0;      // g_ij y^i y^j vs F², relative
  double half_trace_residual = 0.0; // E_ij vs ½ B^m_mij
  double douglas_trace = 0.0;       // max |D^m_mkl|
};

/// Records ordered by (point, fiber) whatever the thread count.
std::vector<TensorRecord> tensor_report(const MetricSpec& spec, const SamplePlan& plan, int threads = 0);

nlohmann::json to_json(const TensorRecord& rec);
void write_report_jsonl(std::ostream& out, const std::vector<TensorRecord>& recs);
void write_report_csv(std::ostream& out, const std::vector<TensorRecord>& recs);

}  // namespace finsler
