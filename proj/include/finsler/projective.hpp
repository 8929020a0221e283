#pragma once

// Executable forms of the Douglas-type, projective and isotropy criteria.
//
// Every check walks a deterministic SamplePlan, reduces per-sample residuals by
// max, and reports fitted auxiliary scalars (τ, θ_i, c, λ_k, P) in a verdict.

#include "finsler/metric_spec.hpp"
#include "finsler/spray.hpp"
#include "finsler/tensor.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace finsler {

struct CheckVerdict {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  double tolerance = 0.0;
  nlohmann::json fitted = nlohmann::json::object();
  std::size_t samples_used = 0;
  std::size_t excluded = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> flags;
};

nlohmann::json to_json(const CheckVerdict& v);

/// Chart points with a fixed set of fibers at each.  fibers[p] belongs to points[p].
struct SamplePlan {
  std::vector<ChartPoint> points;
  std::vector<std::vector<FiberVector>> fibers;
  int fibers_per_point = 0;
  std::uint64_t seed = 0;

  std::size_t size() const;
};

/// Draws points uniformly from the intersection of the chart boxes and fibers
/// uniformly from [-1, 1]^n with |y| ≥ 0.1, keeping only samples at which every
/// listed metric is regular and its spray is finite.
SamplePlan make_plan(const std::vector<MetricSpec>& specs, int points, int fibers, std::uint64_t seed);

/// Uniform draw in [0, 1) from the top 53 bits; independent of the standard
/// library's distribution implementations.
double unit_uniform(std::uint64_t bits);

struct CheckOptions {
  std::optional<double> tolerance;  // replaces the check's default
  int threads = 0;                  // 0: hardware concurrency, capped by FINSLER_LAB_THREADS
};

int resolve_threads(int requested);

/// Runs body(i) for i in [0, count); results must be written to index-addressed storage.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

// Default tolerances.
inline constexpr double kSprayProportionalTol = 1e-7;
inline constexpr double kRiemannProjectiveTol = 1e-7;
inline constexpr double kDouglasQuadraticTol = 1e-8;
inline constexpr double kDouglasOdeTol = 1e-10;
inline constexpr double kParallelTol = 1e-9;
inline constexpr double kDouglasVanishTol = 1e-7;
inline constexpr double kThetaFitTol = 1e-7;
inline constexpr double kClosedTol = 1e-9;
inline constexpr double kKillingTol = 1e-9;
inline constexpr double kIsotropyTol = 1e-7;

/// Δ = G − Ḡ must be P(x, y) y.  P is also checked for degree-1 homogeneity.
CheckVerdict check_spray_proportional(const MetricSpec& f, const MetricSpec& fbar, const SamplePlan& plan,
                                      const CheckOptions& opt = {});

/// G_α − G_ᾱ must equal (λ_k y^k) y^i.
CheckVerdict check_riemann_projective(const RiemannFieldSpec& alpha, const RiemannFieldSpec& alpha_bar,
                                      const SamplePlan& plan, const CheckOptions& opt = {});

/// τ(x)-basis (1 + 2kb²) a_ij − 3k b_i b_j.  Throws DegenerateFit when it vanishes.
Eigen::MatrixXd douglas_tau_basis(const PointGeometry& pg);

struct TauFit {
  double tau = 0.0;
  double residual = 0.0;  // ‖b_{i|j} − 2τ basis‖ / max(1, ‖2τ basis‖)
  bool b_vanishes = false;
};
TauFit fit_tau(const PointGeometry& pg);

/// b_{i|j} = 2τ{(1 + 2kb²) a_ij − 3k b_i b_j} for the quadratic family.
CheckVerdict check_douglas_quadratic(const MetricSpec& spec, const SamplePlan& plan, const CheckOptions& opt = {});

/// [1 + (k1 + k2 s²)s² + k3 s²]φ'' − (k1 + k2 s²)(φ − sφ') on a grid of the regular s-range.
CheckVerdict check_douglas_ode(const PhiFamily& fam, double k1, double k2, double k3, const CheckOptions& opt = {});

struct OdeTripleFit {
  double k1 = 0.0, k2 = 0.0, k3 = 0.0;
  double residual = 0.0;
};
/// Least-squares (k1, k2, k3) for the ODE above on the same grid.
OdeTripleFit fit_douglas_ode_triple(const PhiFamily& fam);

/// s-grid used by the ODE checks: 2001 points on |s| ≤ 0.99 min(b0, 4).
std::vector<double> ode_grid(const PhiFamily& fam);

/// Matsumoto Douglas type ⇔ b_{i|j} = 0.
CheckVerdict check_matsumoto_douglas(const MetricSpec& spec, const SamplePlan& plan, const CheckOptions& opt = {});

/// The three displayed conditions for F (quadratic) and F̄ (Matsumoto):
/// (i) τ fit, (ii) G_α − G_ᾱ + 2kτα²b^i = θ y^i, (iii) dβ̄ = 0 or b̄_{i|j} = 0.
/// Residual is the largest condition residual measured in units of that
/// condition's tolerance; tolerance is 1.
CheckVerdict check_theorem31(const MetricSpec& f, const MetricSpec& fbar, const SamplePlan& plan,
                             const CheckOptions& opt = {});

/// r_00 = s_0 = 0 at every sample.
CheckVerdict check_killing_constant_length(const MetricSpec& spec, const SamplePlan& plan,
                                           const CheckOptions& opt = {});

/// E_ij = ((n + 1)/2) c(x) F_{y^i y^j}.
CheckVerdict check_isotropic_mean_berwald(const MetricSpec& spec, const SamplePlan& plan,
                                          const CheckOptions& opt = {});

/// B^i_jkl = c(x)(F_jk δ^i_l + F_jl δ^i_k + F_kl δ^i_j + F_jkl y^i).
CheckVerdict check_isotropic_berwald(const MetricSpec& spec, const SamplePlan& plan, const CheckOptions& opt = {});

enum class ProjectiveTerm { beta, alpha, alpha_plus_beta };

/// Douglas tensor of the spray G^i + P y^i.
Tensor4 douglas_after_projective_change(const PointGeometry& pg, const FiberVector& y, ProjectiveTerm term);

}  // namespace finsler
