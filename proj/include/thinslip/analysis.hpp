#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "thinslip/fullorder.hpp"
#include "thinslip/reynolds.hpp"

namespace thinslip {

struct SlopeFit {
  double slope = 0.0;
  /// Max relative deviation |value / fitted - 1| over the points.
  double residual = 0.0;
};

/// Least-squares line through (log eps, log value).
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points);

/// Norms of one full-order solve.
struct NormBundle {
  double eps = 0.0;
  double u_l2 = 0.0;        // ||u||_{L2(Omega)}
  double deps_l2 = 0.0;     // ||D_eps u||_{L2(Omega)}
  double wall_ls = 0.0;     // ||K u'||_{L^s(Gamma0)}
  double p_l2 = 0.0;        // ||p||_{L2(Omega)}
  double u3_l2 = 0.0;       // ||u3||_{L2(Omega)}
};

NormBundle measure_norms(const FullOrderSolution& sol);

struct Check {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
};

struct SweepReport {
  std::vector<NormBundle> norms;  // sorted by decreasing eps
  SlopeFit u_slope, deps_slope, wall_slope, p_slope, u3_slope;
  double pressure_ratio = 0.0;
  /// ||K u'||_{L^s} / eps^{(3 - gamma)/s} per eps and its largest growth
  /// factor toward smaller eps.
  std::vector<double> wall_ratio;
  double wall_ratio_growth = 0.0;
  std::vector<double> limit_l2, limit_dz;  // filled by the caller when available
  std::vector<Check> checks;
  bool all_pass = false;
  std::string verdict;
};

inline constexpr double kSlopeSlack = 0.15;
inline constexpr double kPressureRatioMax = 3.0;
inline constexpr double kWallGrowthMax = 1.5;

/// A priori scaling checks over an eps sweep (at least 3 points).
SweepReport verify_apriori(std::vector<NormBundle> norms, const FluidParams& params);
SweepReport verify_apriori(const std::vector<FullOrderSolution>& sweep, const FluidParams& params);

/// Wall samples of the rescaled slip b = eps^-2 u' and shear
/// t = nu d3(eps^-2 u') plus the bulk norms the indicators divide by. Each
/// sample weights its two components separately; a zero weight marks a
/// component that was not sampled.
struct TraceSample {
  double eps = 0.0;
  int dim = 2;
  std::vector<Vec2> b, t, w;
  /// Wall law T(b) when the sampling averages it; empty means T is
  /// evaluated pointwise at b.
  std::vector<Vec2> law;
  double u_l2 = 0.0;     // ||eps^-2 u||_{L2(Omega)}
  double dz_u_l2 = 0.0;  // ||d3 eps^-2 u'||_{L2(Omega)}
  double nu = 1.0;
};

/// Samples a full-order solution on the free trace faces: the face's own
/// component carries the wall-row shear, the other slip component is
/// averaged from the adjacent bottom cells.
TraceSample trace_sample(const FullOrderSolution& sol);

struct RegimeIndicators {
  double eps = 0.0;
  double sub = 0.0;   // ||b|| / ||U||
  double super = 0.0; // ||t|| / (nu ||d3 U||)
  double crit = 0.0;  // ||t - T(b)|| / ||t||
};

struct RegimeVerdict {
  std::optional<RegimeKind> kind;
  std::string verdict;
  std::vector<RegimeIndicators> indicators;  // sorted by decreasing eps
};

inline constexpr double kRegimeThreshold = 0.1;
/// Indicators at or below this value count as saturated at discretization
/// level and need not keep decreasing.
inline constexpr double kRegimeFloor = 0.01;

RegimeIndicators regime_indicators(const TraceSample& s, const Mat2& K, double s_index,
                                   double delta);
RegimeVerdict regime_identify(const std::vector<TraceSample>& samples, const FluidParams& params,
                              double delta);

struct LimitError {
  double l2 = 0.0;      // ||a - b||_{L2(Omega)}
  double dz = 0.0;      // ||d3 (a - b)||_{L2(Omega)}
  double ref_l2 = 0.0;  // ||b||_{L2(Omega)}
  double ref_dz = 0.0;  // ||d3 b||_{L2(Omega)}
};

/// Distance between scale * a and b after interpolating both velocity
/// fields to cell centers of their common grid.
LimitError field_distance(const Field& a, double scale, const Field& b);

/// ||eps^-2 u_eps - u||: full-order versus limit velocity.
LimitError compare_limit(const FullOrderSolution& sol, const LimitSolution& limit);

}  // namespace thinslip
