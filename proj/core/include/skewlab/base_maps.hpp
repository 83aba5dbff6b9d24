#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skewlab/interval.hpp"
#include "skewlab/random.hpp"

namespace skewlab {

using Digit = std::uint8_t;

/// S(w) = slope * w + offset on one branch.
struct AffineBranch {
  double slope = 1.0;
  double offset = 0.0;
};

/// One monotone branch S|I_i of a piecewise expanding Markov map.
struct Branch {
  Interval domain;
  Interval image;
  bool increasing = true;
  std::function<double(double)> forward;
  std::function<double(double)> inverse;  ///< defined on `image`
  std::function<double(double)> abs_deriv;
  std::optional<AffineBranch> affine;  ///< set when the branch is affine (fast paths)

  static Branch from_affine(Interval domain, AffineBranch a);
};

/// Piecewise expanding, mixing Markov map S on an interval.
///
/// Construction checks the structural invariants and throws ParameterError
/// when one fails:
///  - expanding: inf |S'| > 1 on every branch (exact for affine branches,
///    grid-sampled otherwise);
///  - Markov: every branch image is a union of partition intervals;
///  - mixing: some power of the transition matrix is strictly positive.
///
/// The partition intervals must be listed left to right and tile the domain.
/// Points on a partition boundary belong to the branch on their right; the
/// right end of the domain belongs to the last branch.
///
/// The fibre maps of a skew product are driven by `coordinate(w)`, which is
/// the identity unless the base is a conjugate model (e.g. the tent map
/// standing in for the logistic map).
class MarkovBaseMap {
 public:
  using Sampler = std::function<double(Rng&)>;
  using Coordinate = std::function<double(double)>;

  MarkovBaseMap(std::string name, Interval domain, std::vector<Branch> branches,
                Sampler acip_sampler, Coordinate coordinate = {});

  const std::string& name() const noexcept { return name_; }
  Interval domain() const noexcept { return domain_; }
  std::size_t branch_count() const noexcept { return branches_.size(); }
  const Branch& branch(std::size_t i) const { return branches_.at(i); }

  bool allowed(Digit from, Digit to) const { return transitions_[from * branches_.size() + to]; }
  bool full_branch() const noexcept { return full_branch_; }
  bool piecewise_affine() const noexcept { return piecewise_affine_; }

  /// Index of the branch containing w (right-continuous). Throws DomainError outside the domain.
  std::size_t branch_index(double w) const;
  double eval(double w) const;
  double abs_deriv(double w) const;
  double log_abs_deriv(double w) const;

  /// Infimum of |S'| (exact for affine branches, sampled otherwise).
  double min_expansion() const noexcept { return min_expansion_; }

  double coordinate(double w) const { return coordinate_ ? coordinate_(w) : w; }
  bool has_coordinate() const noexcept { return static_cast<bool>(coordinate_); }

  /// One draw from the absolutely continuous invariant measure, in base coordinates.
  double sample_acip(Rng& rng) const { return acip_sampler_(rng); }

  /// Lebesgue measure of the domain pushed to digit sequences, as a first-order
  /// chain: P(first digit = d) = |I_d| / |I| and
  /// P(next = d | current = c) = |I_c ∩ S^{-1} I_d| / |I_c|.
  /// Exact for piecewise-affine maps.
  double initial_digit_prob(Digit d) const { return initial_probs_[d]; }
  double digit_transition(Digit from, Digit to) const {
    return lebesgue_chain_[from * branches_.size() + to];
  }

  /// Digits needed so that the depth-k cylinder is below double resolution.
  std::size_t embedding_depth() const noexcept { return embedding_depth_; }

  /// Cylinder {w : S^i w in I_{word[i]}} of an admissible word.
  Interval cylinder(std::span<const Digit> word) const;

  /// Left endpoint of the cylinder of `word`; the hot path of symbolic iteration.
  double embed(std::span<const Digit> word) const;

  bool admissible(std::span<const Digit> word, bool cyclic = false) const;

  /// First n digits of the float point w by forward iteration. Exact for the
  /// built-in maps, whose forward branches are computed without rounding.
  std::vector<Digit> itinerary(double w, std::size_t n) const;

 private:
  std::string name_;
  Interval domain_;
  std::vector<Branch> branches_;
  std::vector<bool> transitions_;
  std::vector<double> initial_probs_;
  std::vector<double> lebesgue_chain_;
  Sampler acip_sampler_;
  Coordinate coordinate_;
  double min_expansion_ = 0.0;
  std::size_t embedding_depth_ = 0;
  bool full_branch_ = false;
  bool piecewise_affine_ = false;
};

/// S(w) = 2w mod 1 on [0,1]; mu_ac = Lebesgue.
MarkovBaseMap make_doubling();

/// Full tent map T(w) = 1 - |1 - 2w| driving the fibres through the logistic
/// coordinate w -> sin^2(pi w / 2), which conjugates T to x -> 4x(1-x).
MarkovBaseMap make_tent_logistic_conjugate();

double logistic_conjugacy(double w);

/// Source of digits for a lazily extended symbolic point.
class DigitSource {
 public:
  virtual ~DigitSource() = default;
  /// Appends digits until `digits.size() >= count`.
  virtual void extend(std::vector<Digit>& digits, std::size_t count) = 0;
};

/// A point of the base given by its itinerary. Digits are realized on demand;
/// a point built from a finite word throws DigitBudgetExhausted rather than
/// truncating. Copies share the digit buffer, so a SymbolicPoint and its
/// shifts must stay on one thread.
class SymbolicPoint {
 public:
  SymbolicPoint() = default;

  static SymbolicPoint finite(std::vector<Digit> digits);
  static SymbolicPoint periodic(std::vector<Digit> word);
  static SymbolicPoint streaming(std::vector<Digit> prefix, std::unique_ptr<DigitSource> source);

  /// Digit i counted from the current position.
  Digit digit(std::size_t i) const { return *data(i + 1, i); }

  /// Ensures `count` digits past the current position and returns them. The
  /// view is invalidated by any later request for more digits.
  std::span<const Digit> digits(std::size_t count) const {
    return {data(count, 0), count};
  }

  /// Digits realized past the current position.
  std::size_t budget() const;
  bool extendable() const;
  std::size_t offset() const noexcept { return offset_; }

  /// Shift by n digits (S^n on the itinerary).
  SymbolicPoint step(std::size_t n = 1) const;

 private:
  struct Buffer;
  const Digit* data(std::size_t count, std::size_t at) const;

  std::shared_ptr<Buffer> buffer_;
  std::size_t offset_ = 0;
};

SymbolicPoint symbolic_step(const SymbolicPoint& p);

/// Left endpoint of the depth-k cylinder of p.
double symbolic_embed(const MarkovBaseMap& map, const SymbolicPoint& p, std::size_t k);

/// Embedding at the map's full double-precision depth.
inline double symbolic_embed(const MarkovBaseMap& map, const SymbolicPoint& p) {
  return symbolic_embed(map, p, map.embedding_depth());
}

/// Digits of Lebesgue measure: the first from initial_digit_prob, then the
/// digit_transition chain conditioned on the last digit already present.
std::unique_ptr<DigitSource> lebesgue_source(const MarkovBaseMap& map, Rng rng);

/// Random Lebesgue-distributed point as an unbounded digit stream.
SymbolicPoint random_point(const MarkovBaseMap& map, Rng rng);

/// The float point w (its exact itinerary over the first embedding_depth
/// digits) continued by a random Lebesgue tail.
SymbolicPoint point_near(const MarkovBaseMap& map, double w, Rng rng);

/// Periodic point with the given itinerary: fixed point of the composed
/// inverse branches, iterated to 1e-12 (at most 200 iterations).
/// Throws InadmissibleWord when the cyclic word is not allowed.
double periodic_point(const MarkovBaseMap& map, std::span<const Digit> word);

/// All points of the periodic orbit of `word`, in orbit order.
std::vector<double> periodic_orbit(const MarkovBaseMap& map, std::span<const Digit> word);

}  // namespace skewlab
