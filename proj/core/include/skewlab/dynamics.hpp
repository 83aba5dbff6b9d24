#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skewlab/base_maps.hpp"
#include "skewlab/fibre_families.hpp"

namespace skewlab {

/// F(w, x) = (S w, f_w(x)) on I x J.
class SkewProduct {
 public:
  /// Runs validate_family unless `check` is Skip; throws ParameterError with
  /// the report's failures otherwise.
  SkewProduct(MarkovBaseMap base, FibreFamily fibres, Check check = Check::Enforce);

  const MarkovBaseMap& base() const noexcept { return base_; }
  const FibreFamily& fibres() const noexcept { return fibres_; }

  /// Fibre coefficients at the base point w (after the base coordinate transform).
  FibreCoeffs coeffs(double w) const { return fibres_.prepare(base_.coordinate(w)); }
  double fibre_map(double w, double x) const { return fibres_.apply(coeffs(w), x); }
  double fibre_deriv(double w, double x) const { return fibres_.apply_deriv(coeffs(w), x); }
  double log_fibre_deriv(double w, Side side) const;

 private:
  MarkovBaseMap base_;
  FibreFamily fibres_;
};

/// Fibre coefficients along the symbolic orbit of one base point, extended on
/// demand. Repeated fibre orbits over the same base orbit (bisection, grids)
/// share the base work.
class DrivenOrbit {
 public:
  DrivenOrbit(const SkewProduct& F, SymbolicPoint w);

  const FibreCoeffs& coeffs(std::size_t n);
  /// Embedded base point S^n w.
  double base_point(std::size_t n);
  double step(std::size_t n, double x) { return F_->fibres().apply(coeffs(n), x); }
  const SymbolicPoint& point() const noexcept { return w_; }
  const SkewProduct& system() const noexcept { return *F_; }

 private:
  void extend(std::size_t n);

  const SkewProduct* F_;
  SymbolicPoint w_;
  std::vector<FibreCoeffs> coeffs_;
  std::vector<double> points_;
};

/// F^n(w, x); the base advances symbolically.
std::pair<SymbolicPoint, double> iterate(const SkewProduct& F, const SymbolicPoint& w, double x,
                                         std::size_t n);

struct MeasureSpec {
  enum class Kind { Acip, PeriodicOrbit };
  Kind kind = Kind::Acip;
  std::vector<Digit> word;  ///< itinerary of the periodic orbit

  static MeasureSpec acip() { return {}; }
  static MeasureSpec periodic(std::vector<Digit> word) {
    return {Kind::PeriodicOrbit, std::move(word)};
  }
  std::string label() const;
};

struct LyapunovEstimate {
  double value = 0.0;
  double std_error = 0.0;  ///< 0 for periodic orbits
  std::size_t samples = 0;
};

struct LyapunovOptions {
  std::size_t n_samples = 100000;
  std::size_t n_iter = 1;  ///< Birkhoff length per acip sample
  std::uint64_t seed = 1;
};

/// Normal Lyapunov exponent of the endpoint graph e_side: exact orbit average
/// for a periodic measure, Monte-Carlo mean over acip samples otherwise.
LyapunovEstimate lyapunov_graph(const SkewProduct& F, const MeasureSpec& nu, Side side,
                                const LyapunovOptions& opt = {});

/// Integral of log|S'| against nu.
double base_lyapunov(const SkewProduct& F, const MeasureSpec& nu, const LyapunovOptions& opt = {});

struct MeasureExponents {
  MeasureSpec measure;
  LyapunovEstimate minus;
  LyapunovEstimate plus;
};

struct SignConditionReport {
  MeasureExponents acip;
  std::vector<MeasureExponents> candidates;
  bool acip_minus_negative = false;
  bool acip_plus_negative = false;
  bool has_expanding_minus = false;  ///< some candidate with lambda(e-) > 0
  bool has_expanding_plus = false;   ///< some candidate with lambda(e+) > 0
  bool sums_negative = false;        ///< lambda(e-) + lambda(e+) < 0 for every tested measure
  std::vector<std::string> failures;

  /// The four sign conditions; the sum property is reported separately.
  bool pass() const noexcept {
    return acip_minus_negative && acip_plus_negative && has_expanding_minus && has_expanding_plus;
  }
};

/// Acip exponents count as negative when below -3 standard errors.
SignConditionReport check_sign_conditions(const SkewProduct& F, const std::vector<MeasureSpec>& candidates,
                                    const LyapunovOptions& opt = {});

enum class BasinLabel : std::uint8_t { Minus, Plus, Undecided };

std::string_view to_string(BasinLabel b) noexcept;

struct ClassifyParams {
  double delta = 1e-8;
  std::size_t confirm = 25;
  std::size_t max_steps = 100000;
};

/// Minus/Plus once the fibre orbit has stayed strictly within `delta` of
/// e-/e+ for `confirm` consecutive steps; Undecided if that does not happen
/// within `max_steps`.
BasinLabel classify_basin(const SkewProduct& F, const SymbolicPoint& w, double x,
                          const ClassifyParams& p = {});
BasinLabel classify_basin(DrivenOrbit& orbit, double x, const ClassifyParams& p = {});

struct CriticalParams {
  double tol = 1e-10;
  ClassifyParams classify;
};

/// Bisection for the basin boundary in the fibre over w. The lower end of the
/// bracket is always labelled Minus and the upper end Plus. An Undecided
/// midpoint is retried once with ten times the step budget; a second
/// Undecided throws UndecidedBracket.
double critical_graph(const SkewProduct& F, const SymbolicPoint& w, const CriticalParams& p = {});
double critical_graph(DrivenOrbit& orbit, const CriticalParams& p = {});

/// Independent critical-graph samples over Lebesgue-random base points.
/// Entries are empty where the bracket stayed undecided.
std::vector<std::optional<double>> sample_critical_graph(const SkewProduct& F, std::size_t n,
                                                         std::uint64_t seed,
                                                         const CriticalParams& p = {});

struct ProfileRow {
  double u = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t hits = 0;
};

struct PhiProfile {
  Side side = Side::Minus;
  std::vector<ProfileRow> rows;
  std::size_t used = 0;
  std::size_t dropped = 0;

  double drop_rate() const noexcept {
    const std::size_t n = used + dropped;
    return n ? static_cast<double>(dropped) / static_cast<double>(n) : 0.0;
  }
  static constexpr double kMaxDropRate = 0.01;
  bool ok() const noexcept { return drop_rate() <= kMaxDropRate; }
};

/// Mass of {w : phi_c(w) within u of e_side} for each u, from n_samples
/// critical-graph evaluations. `u_grid` must be positive and increasing.
PhiProfile phi_profile(const SkewProduct& F, Side side, const std::vector<double>& u_grid,
                       std::size_t n_samples, std::uint64_t seed, const CriticalParams& p = {});

/// Same statistic from precomputed critical-graph samples.
PhiProfile phi_profile_from(const SkewProduct& F, Side side, const std::vector<double>& u_grid,
                            const std::vector<std::optional<double>>& samples);

struct BasinGrid {
  std::size_t n_w = 0;
  std::size_t n_x = 0;
  Interval base_domain;
  Interval fibre;
  std::vector<BasinLabel> labels;  ///< row-major; row 0 is x = e-, the last row x = e+

  BasinLabel at(std::size_t row, std::size_t col) const { return labels[row * n_w + col]; }
  double base_coord(std::size_t col) const;
  double fibre_coord(std::size_t row) const;
};

/// Labels on an n_w x n_x grid: columns at cell midpoints of I, rows spanning
/// J including both endpoints. Each column shares one base orbit (the column
/// point continued by a seeded random tail).
BasinGrid basin_grid(const SkewProduct& F, std::size_t n_w, std::size_t n_x, std::uint64_t seed,
                     const ClassifyParams& p = {});

}  // namespace skewlab
