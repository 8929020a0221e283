#pragma once

#include "finsler/alphabeta.hpp"
#include "finsler/fields.hpp"

#include <json.hpp>

#include <string>

namespace finsler {

/// Complete definition of one (α, β)-metric on a chart box.
struct MetricSpec {
  std::string id = "F";
  int dim = 0;
  RiemannFieldSpec alpha;
  OneFormFieldSpec beta;
  PhiFamily phi;
  ChartDomain domain;
};

/// Parses and validates a metric specification document.  Throws SpecError.
MetricSpec metric_spec_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const MetricSpec& spec);

MetricSpec load_metric_spec(const std::string& path);

/// Symmetric box [-half_width, half_width]^n.
ChartDomain box_domain(int n, double half_width);

}  // namespace finsler
