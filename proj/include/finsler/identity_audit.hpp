#pragma once

// Audit of the expanded rational form of H^i_00 for the pair
// F = α + εβ + kβ²/α (quadratic φ) and F̄ = ᾱ²/(ᾱ − β̄) (Matsumoto).
//
// The published coefficient tables (numerators A^i..Q^i, Ā^i..H̄^i and
// denominators I..M, Ī..M̄) are kept as data, evaluated verbatim, and checked
// against H^i_00 computed from T^i and T^m_{y^m}.  Independently, every group is
// re-derived by exact Laurent-polynomial expansion in α, so a mismatch can be
// pinned to a single group.

#include "finsler/spray.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace finsler {

/// Symbols of one side of the identity, evaluated at a sample.
struct IdentitySymbols {
  int n = 0;
  double alpha = 0.0, beta = 0.0, b2 = 0.0, r00 = 0.0, r0 = 0.0, s0 = 0.0;
  Eigen::VectorXd s_up0, b_up, y;
};

IdentitySymbols identity_symbols(const PointGeometry& pg, const FiberVector& y);

/// Named coefficient groups; scalar groups are stored as length-1 vectors.
struct CoefficientTable {
  std::vector<std::pair<std::string, Eigen::VectorXd>> groups;

  const Eigen::VectorXd& at(const std::string& name) const;
  Eigen::VectorXd& at(const std::string& name);
};

/// Numerator/denominator layout of one side: group name → power of α.
struct SideLayout {
  std::vector<std::pair<std::string, int>> numerator;
  std::vector<std::pair<std::string, int>> denominator;
};

const SideLayout& quadratic_layout();
const SideLayout& matsumoto_layout();

CoefficientTable printed_quadratic_table(const IdentitySymbols& sym, double epsilon, double k);
CoefficientTable printed_matsumoto_table(const IdentitySymbols& sym);

/// Groups re-derived from T^i and T^m_{y^m}.  `leftover` receives the largest
/// coefficient at α-powers that the layout does not name (zero when the layout
/// is complete).
CoefficientTable derived_table(const IdentitySymbols& sym, const PhiFamily& fam, double* leftover = nullptr);

/// N^i(α)/Den(α) of one side.
Eigen::VectorXd evaluate_side(const CoefficientTable& table, const SideLayout& layout, double alpha);

enum class LReading {
  full,     // l = Īᾱ⁵ + J̄ᾱ⁴ + K̄ᾱ³ + L̄ᾱ² + M̄ᾱ
  printed   // l as printed in the cross-multiplied step, without L̄ᾱ²
};

struct GroupAudit {
  std::string name;
  double max_mismatch = 0.0;     // relative, printed vs derived, max over samples
  bool consistent = true;
  double leave_one_out = 0.0;    // identity residual with only this group replaced by its derived value
};

struct IdentityAuditReport {
  std::size_t samples = 0;
  double residual_printed = 0.0;         // printed tables vs first-principles H^i_00
  double residual_derived = 0.0;         // derived tables vs first-principles H^i_00
  double residual_all_replaced = 0.0;    // printed tables with every inconsistent group replaced
  double derivation_leftover = 0.0;      // unassigned α-powers in the derivation
  double cross_multiplied_full = 0.0;    // cross-multiplied identity, derived groups, full l
  double cross_multiplied_printed_l = 0.0;
  bool tables_confirmed = false;         // residual_printed < tolerance
  std::optional<std::string> first_inconsistent;
  std::vector<GroupAudit> groups;
  double tolerance = 1e-6;
};

/// Relative residual of the printed identity at a single sample.
double verify_334_identity(const MetricSpec& spec, const MetricSpec& spec_bar, const ChartPoint& x,
                           const FiberVector& y);

/// Full audit over a list of samples.
IdentityAuditReport audit_identity(const MetricSpec& spec, const MetricSpec& spec_bar,
                                   const std::vector<std::pair<ChartPoint, FiberVector>>& samples);

}  // namespace finsler
