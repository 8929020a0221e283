#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <string>

namespace finsler {

/// Compact JSON with every floating-point number written as %.16e
/// (17 significant digits), so output bytes depend only on the values.
std::string dump_precise(const nlohmann::json& j);

/// Same formatting for a single number (CSV cells).
std::string format_number(double v);

nlohmann::json to_json_array(const Eigen::VectorXd& v);
nlohmann::json to_json_array(const Eigen::MatrixXd& m);

}  // namespace finsler
