#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "skewlab/dynamics.hpp"
#include "skewlab/thermo.hpp"

namespace skewlab {

struct ScalingPoint {
  double eps = 0.0;
  double value = 0.0;
};

/// Least-squares line through (log eps, log value). The regression runs on
/// log(value / value_0), so rescaling every value by a power of two leaves the
/// slope bit-identical.
struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double rms_residual = 0.0;
  double eps_min = 0.0;
  double eps_max = 0.0;
  std::size_t points = 0;
  std::vector<std::string> flags;
};

/// Throws EstimationError with fewer than 4 points or a nonpositive value.
ScalingFit loglog_fit(const std::vector<ScalingPoint>& pts);

/// n geometric points from eps_max down to eps_min.
std::vector<double> geometric_grid(double eps_max, double eps_min, std::size_t n);

enum class TailMethod { Plain, Tilted };

struct TailOptions {
  std::vector<double> eps = geometric_grid(1e-1, 1e-3, 8);
  /// Plain: critical-graph samples shared by all eps. Tilted: samples per eps.
  std::size_t n_samples = 100000;
  std::uint64_t seed = 1;
  TailMethod method = TailMethod::Plain;

  /// Tilted only: the exponent t of the tilting weight exp(t log f'(e_side))
  /// and the cell depth of the tilted digit chain.
  double tilt = 1.0;
  std::size_t tilt_resolution = 10;
  std::size_t max_tilt_steps = 5000;
  /// Tilting stops once the endpoint log-derivative sum reaches log(1/eps) - overshoot.
  double overshoot = 1.0;

  CriticalParams critical{1e-7, {}};
};

struct TailRow {
  double eps = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t hits = 0;
  std::size_t samples = 0;
  std::size_t dropped = 0;
};

struct TailResult {
  Side side = Side::Minus;
  ScalingFit fit;
  std::vector<TailRow> rows;
  std::size_t dropped = 0;
  std::size_t total = 0;

  double drop_rate() const noexcept {
    return total ? static_cast<double>(dropped) / static_cast<double>(total) : 0.0;
  }
};

/// Exponent of the critical-graph mass within eps of e_side.
///
/// Plain sampling estimates the mass from Lebesgue-random critical-graph
/// values. Tilted sampling draws the leading digits from the cell chain
/// exponentially tilted by exp(t log f'(e_side)) until the endpoint
/// expansion reaches about 1/eps, continues with Lebesgue digits, and weights
/// each sample by the exact likelihood ratio of its tilted prefix; the
/// estimator is unbiased for any tilt and only its variance depends on t.
/// Bins with no hits are cut from the small-eps end of the grid and flagged.
TailResult tail_exponent(const SkewProduct& F, Side side, const TailOptions& opt = {});

struct StabilityOptions {
  std::vector<double> eps = geometric_grid(1e-1, 1e-3, 8);
  std::size_t n_samples = 100000;  ///< per eps
  std::uint64_t seed = 1;
  ClassifyParams classify;
};

struct StabilityRow {
  double eps = 0.0;
  std::size_t samples = 0;
  std::size_t minus = 0;
  std::size_t plus = 0;
  std::size_t undecided = 0;
  double share_minus = 0.0;  ///< minus / samples
  double share_plus = 0.0;   ///< plus / samples
  double share_undecided = 0.0;
  double fit_minus = 0.0;  ///< share clipped into [1/(n+1), n/(n+1)] for the fit
  double fit_plus = 0.0;
  bool clipped_minus = false;
  bool clipped_plus = false;
};

struct StabilityResult {
  ScalingFit minus;  ///< slope of the minus-basin share: sigma-
  ScalingFit plus;   ///< slope of the plus-basin share: sigma+
  std::vector<StabilityRow> rows;
};

/// Basin shares in the squares of half-width eps around (w, x), clipped to
/// the phase space.
StabilityResult stability_empirical(const SkewProduct& F, const SymbolicPoint& w, double x,
                                    const StabilityOptions& opt = {});

enum class StabilityRowKind {
  AtMinus = 1,        ///< x = e-
  BelowCritical = 2,  ///< e- < x < phi_c(w)
  AtCritical = 3,     ///< x = phi_c(w)
  AboveCritical = 4,  ///< phi_c(w) < x < e+
  AtPlus = 5,         ///< x = e+
};

struct StabilityCase {
  StabilityRowKind row = StabilityRowKind::BelowCritical;
  double lambda_minus = 0.0;  ///< exponent of e- for the measure
  double lambda_plus = 0.0;
  double base_exponent = 0.0;  ///< integral of log|S'|
  double t_minus = 0.0;
  double t_plus = 0.0;

  double gap_minus() const noexcept { return base_exponent - lambda_minus; }
  double gap_plus() const noexcept { return base_exponent - lambda_plus; }
};

/// Signed stability index (sigma+ on the minus side of phi_c, -sigma- on the
/// plus side, 0 on phi_c). Throws UnsupportedCase for an endpoint row whose
/// gap is not positive and DomainError when an interior row's exponent is
/// not negative.
double stability_theoretical(const StabilityCase& c);

struct UncertaintyOptions {
  std::vector<double> eps = geometric_grid(1e-1, 1e-3, 8);
  std::size_t n_pairs = 100000;  ///< per eps
  std::uint64_t seed = 1;
  ClassifyParams classify;
};

struct UncertaintyRow {
  double eps = 0.0;
  std::size_t pairs = 0;
  std::size_t disagree = 0;
  std::size_t undecided = 0;
  double probability = 0.0;
};

struct UncertaintyResult {
  ScalingFit fit;
  std::vector<UncertaintyRow> rows;
};

/// Probability that two points at horizontal distance at most eps on the
/// line I x {x} lie in different basins. Pairs with an undecided label are
/// dropped; bins without disagreements are cut and flagged.
UncertaintyResult uncertainty_empirical(const SkewProduct& F, double x,
                                        const UncertaintyOptions& opt = {});

struct BoxCount {
  double size = 0.0;
  std::size_t boxes = 0;
};

struct BoxDimension {
  ScalingFit fit;  ///< slope = dimension
  std::vector<BoxCount> counts;
  bool degenerate = false;  ///< constant sample
};

/// Box counting on the graph {(w_i, y_i)} of samples on a uniform grid
/// (w sorted). Each column covers the range of its samples joined to their
/// neighbours across the column edges.
BoxDimension box_dimension(const std::vector<double>& w, const std::vector<double>& y,
                           const std::vector<double>& sizes);

/// Dyadic box sizes 2^-1 ... down to 4 samples per column.
std::vector<double> dyadic_box_sizes(std::size_t n_points, double width = 1.0);

}  // namespace skewlab
