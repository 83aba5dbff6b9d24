#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "skewlab/base_maps.hpp"
#include "skewlab/dynamics.hpp"

namespace skewlab {

/// lambda_minus * log f'_w(e-) + lambda_plus * log f'_w(e+) + lambda_base * log|S'(w)|
/// + extra(w) + shift. The transfer operator carries the 1/|S'| factor itself,
/// so lambda_base = 0 is the normalised baseline.
struct Potential {
  double minus = 0.0;
  double plus = 0.0;
  double base = 0.0;
  double shift = 0.0;
  std::function<double(double)> extra;

  double evaluate(const SkewProduct& F, double w) const;
};

struct SpectralResult {
  double radius = 0.0;      ///< spectral radius of the stored (scaled) matrix
  double log_radius = 0.0;  ///< log of the true spectral radius, scale included
  std::vector<double> right;  ///< M r = radius r, sum 1
  std::vector<double> left;   ///< l^T M = radius l^T, sum 1 (only with `vectors`)
  std::size_t iterations = 0;
  double residual = 0.0;  ///< last relative change of the growth ratio
};

struct PowerOptions {
  double tol = 1e-12;
  std::size_t max_iter = 200000;
  /// Also converge both eigenvectors (L1 change <= 1e-10) and return the left one.
  bool vectors = false;
};

/// Weighted cell-transfer matrix M on the generation-k cells.
///
/// M[i][j] = (share of cell j that S maps into cell i) * exp(pot(mid_j)).
/// Entries are stored divided by exp(log_scale), the largest column weight,
/// so extreme potentials neither overflow nor underflow.
class UlamOperator {
 public:
  std::size_t size() const noexcept { return col_start_.size() - 1; }
  double log_scale() const noexcept { return log_scale_; }

  /// Unscaled entry M[i][j] (0 outside the sparsity pattern).
  double entry(std::size_t i, std::size_t j) const;
  std::vector<std::vector<double>> dense() const;

  void multiply(const std::vector<double>& v, std::vector<double>& out) const;
  void multiply_transpose(const std::vector<double>& v, std::vector<double>& out) const;

  /// Power iteration on L1-normalised vectors; converged when the growth
  /// ratio changes by less than tol (relative). Throws ConvergenceError.
  SpectralResult spectral(const PowerOptions& opt = {}) const;
  double log_spectral_radius() const { return spectral().log_radius; }

 private:
  friend class UlamSkeleton;
  std::vector<std::size_t> col_start_;
  std::vector<std::uint32_t> row_;
  std::vector<double> value_;
  double log_scale_ = 0.0;
};

/// Cell structure and per-cell potential ingredients for one (S, f, k); each
/// potential only reweights the columns.
class UlamSkeleton {
 public:
  static constexpr std::size_t kMaxCells = std::size_t{1} << 20;

  /// Throws ResolutionOverflow beyond kMaxCells cells.
  UlamSkeleton(const SkewProduct& F, std::size_t k);

  std::size_t resolution() const noexcept { return k_; }
  std::size_t size() const noexcept { return codes_.size(); }
  const SkewProduct& system() const noexcept { return *F_; }

  std::span<const Digit> word(std::size_t cell) const;
  Interval cell(std::size_t i) const { return cells_[i]; }
  double midpoint(std::size_t i) const { return cells_[i].midpoint(); }
  /// Index of the cell whose word is the first k digits of `w`.
  std::size_t find(std::span<const Digit> w) const;

  double log_deriv(Side s, std::size_t cell) const {
    return s == Side::Minus ? log_minus_[cell] : log_plus_[cell];
  }
  double log_base_deriv(std::size_t cell) const { return log_base_[cell]; }

  /// Column weights from `pot`; `cell_extra`, when given, is added per cell.
  UlamOperator build(const Potential& pot, const std::vector<double>* cell_extra = nullptr) const;

  /// psi(minus, plus, base) = log spectral radius.
  double pressure(double minus, double plus, double base,
                  const PowerOptions& opt = {}) const;

  /// Successor cells j of i, with the Lebesgue share of i sent into j.
  struct Edge {
    std::uint32_t target;
    double share;
  };
  std::span<const Edge> successors(std::size_t cell) const;

 private:
  const SkewProduct* F_;
  std::size_t k_;
  std::vector<Digit> words_flat_;
  std::vector<std::uint64_t> codes_;  // base-(branch count) word codes, sorted
  std::vector<Interval> cells_;
  std::vector<double> log_minus_, log_plus_, log_base_;
  std::vector<std::size_t> edge_start_;
  std::vector<Edge> edges_;
};

UlamOperator build_ulam(const SkewProduct& F, const Potential& pot, std::size_t k);

/// psi at resolution k (builds a skeleton per call).
double pressure(const SkewProduct& F, double minus, double plus, double base, std::size_t k);

/// p_side(t) = psi with t on the selected endpoint and 0 elsewhere.
double side_pressure(const UlamSkeleton& sk, Side side, double t);

/// Central-difference first and second derivatives of p_side at 0 (step 1e-4).
double side_pressure_slope(const UlamSkeleton& sk, Side side, double step = 1e-4);
double side_pressure_curvature(const UlamSkeleton& sk, Side side, double step = 1e-4);

struct RootResult {
  double t = 0.0;
  double lo = 0.0;  ///< bracket end with p < 0
  double hi = 0.0;  ///< bracket end with p > 0
  double p_lo = 0.0;
  double p_hi = 0.0;
  double residual = 0.0;  ///< |p(t)|
  std::size_t evaluations = 0;
};

struct TStarOptions {
  double t_max = 64.0;
  double tol = 1e-8;
  double slope_step = 1e-4;
};

/// Positive zero of p_side: bracket expansion from t = 1, then bisection to
/// |p| <= tol. Throws NegativeSlopeViolation when p'(0) >= 0 and
/// NoPositiveZero when p stays negative up to t_max.
RootResult find_t_star(const UlamSkeleton& sk, Side side, const TStarOptions& opt = {});

struct TStars {
  double minus = 0.0;
  double plus = 0.0;
};

/// lambda^S solving psi((1-u) t-/2, (1+u) t+/2, lambda^S) = 0 (to |psi| <= tol).
/// Throws BracketFailure when psi is not increasing in lambda^S.
double h_of_u(const UlamSkeleton& sk, const TStars& ts, double u, double tol = 1e-8);

struct PhiStar {
  double u_star = 0.0;
  double phi = 0.0;
  std::size_t evaluations = 0;
};

/// Golden-section maximisation of the concave h on (-1, 1) to u-tolerance u_tol.
PhiStar phi_star(const UlamSkeleton& sk, const TStars& ts, double u_tol = 1e-6);

/// |lambda| / D. Throws DomainError unless lambda < 0 < D.
double diffusion_eta(double lambda, double D);

/// lambda^2/(2D) - c lambda^2/(4D^2). Same domain as diffusion_eta.
double diffusion_phi(double lambda, double D, double c = 0.0);

/// D = p''(0)/2 of the selected side.
double diffusion_coefficient(const UlamSkeleton& sk, Side side, double step = 1e-4);

struct BedfordResult {
  double t = 0.0;
  double residual = 0.0;
  bool valid = false;  ///< the zero counts as a box dimension only when it exceeds 1
};

/// Zero in t of the pressure of -(t - 1) log|S'| - log f'_w(phi_c(w)), with
/// phi_c given at the midpoint of every generation-k cell (cell order of `sk`).
/// Bisection on [t_lo, t_hi]; NoZeroInRange without a sign change.
BedfordResult bedford_dimension(const UlamSkeleton& sk, const std::vector<double>& phi_c,
                                double t_lo = 1.0, double t_hi = 2.0, double tol = 1e-6);

}  // namespace skewlab
