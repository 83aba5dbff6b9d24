#include "skewlab/base_maps.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "skewlab/error.hpp"

namespace skewlab {

namespace {

constexpr double kBoundaryTol = 1e-12;

bool near(double a, double b) { return std::abs(a - b) <= kBoundaryTol * (1.0 + std::abs(a)); }

bool primitive(const std::vector<bool>& adj, std::size_t n) {
  // Wielandt: a primitive n x n matrix has A^k > 0 for k = (n-1)^2 + 1.
  std::vector<bool> power = adj;
  const std::size_t max_power = (n - 1) * (n - 1) + 1;
  for (std::size_t k = 1; k <= max_power; ++k) {
    if (std::all_of(power.begin(), power.end(), [](bool b) { return b; })) return true;
    std::vector<bool> next(n * n, false);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t m = 0; m < n; ++m)
        if (power[i * n + m])
          for (std::size_t j = 0; j < n; ++j)
            if (adj[m * n + j]) next[i * n + j] = true;
    power = std::move(next);
  }
  return std::all_of(power.begin(), power.end(), [](bool b) { return b; });
}

}  // namespace

Branch Branch::from_affine(Interval domain, AffineBranch a) {
  Branch b;
  b.domain = domain;
  const double y0 = a.slope * domain.lo + a.offset;
  const double y1 = a.slope * domain.hi + a.offset;
  b.image = {std::min(y0, y1), std::max(y0, y1)};
  b.increasing = a.slope > 0.0;
  b.forward = [a](double w) { return a.slope * w + a.offset; };
  b.inverse = [a](double y) { return (y - a.offset) / a.slope; };
  b.abs_deriv = [s = std::abs(a.slope)](double) { return s; };
  b.affine = a;
  return b;
}

MarkovBaseMap::MarkovBaseMap(std::string name, Interval domain, std::vector<Branch> branches,
                             Sampler acip_sampler, Coordinate coordinate)
    : name_(std::move(name)),
      domain_(domain),
      branches_(std::move(branches)),
      acip_sampler_(std::move(acip_sampler)),
      coordinate_(std::move(coordinate)) {
  const std::size_t n = branches_.size();
  if (n == 0 || n > 255) throw ParameterError(name_ + ": need between 1 and 255 branches");
  if (!acip_sampler_) throw ParameterError(name_ + ": missing invariant-measure sampler");

  if (!near(branches_.front().domain.lo, domain_.lo) ||
      !near(branches_.back().domain.hi, domain_.hi))
    throw ParameterError(name_ + ": partition does not cover the domain");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!near(branches_[i].domain.hi, branches_[i + 1].domain.lo))
      throw ParameterError(name_ + ": partition intervals are not contiguous");

  // Markov property and transitions.
  transitions_.assign(n * n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const Interval img = branches_[i].image;
    bool lo_ok = false;
    bool hi_ok = false;
    for (std::size_t j = 0; j < n; ++j) {
      const Interval part = branches_[j].domain;
      lo_ok = lo_ok || near(img.lo, part.lo);
      hi_ok = hi_ok || near(img.hi, part.hi);
      if (part.lo >= img.lo - kBoundaryTol && part.hi <= img.hi + kBoundaryTol)
        transitions_[i * n + j] = true;
    }
    if (!lo_ok || !hi_ok)
      throw ParameterError(name_ + ": image of branch " + std::to_string(i) +
                           " is not a union of partition intervals (Markov property)");
  }

  // Expansion.
  min_expansion_ = std::numeric_limits<double>::infinity();
  piecewise_affine_ = true;
  for (const Branch& b : branches_) {
    if (b.affine) {
      min_expansion_ = std::min(min_expansion_, std::abs(b.affine->slope));
      continue;
    }
    piecewise_affine_ = false;
    constexpr int kSamples = 1024;
    for (int s = 0; s < kSamples; ++s) {
      const double w = b.domain.lo + (s + 0.5) / kSamples * b.domain.length();
      min_expansion_ = std::min(min_expansion_, b.abs_deriv(w));
    }
  }
  if (!(min_expansion_ > 1.0))
    throw ParameterError(name_ + ": map is not expanding (inf |S'| = " +
                         std::to_string(min_expansion_) + ")");

  if (!primitive(transitions_, n))
    throw ParameterError(name_ + ": transition matrix is not primitive (mixing fails)");

  full_branch_ = std::all_of(transitions_.begin(), transitions_.end(), [](bool b) { return b; });

  initial_probs_.resize(n);
  lebesgue_chain_.assign(n * n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    initial_probs_[c] = branches_[c].domain.length() / domain_.length();
    double total = 0.0;
    for (std::size_t d = 0; d < n; ++d) {
      if (!allowed(static_cast<Digit>(c), static_cast<Digit>(d))) continue;
      const Interval target = branches_[d].domain;
      const double len =
          std::abs(branches_[c].inverse(target.hi) - branches_[c].inverse(target.lo));
      lebesgue_chain_[c * n + d] = len;
      total += len;
    }
    for (std::size_t d = 0; d < n; ++d) lebesgue_chain_[c * n + d] /= total;
  }

  embedding_depth_ = std::min<std::size_t>(
      512, static_cast<std::size_t>(std::ceil(53.0 / std::log2(min_expansion_))) + 2);
}

std::size_t MarkovBaseMap::branch_index(double w) const {
  if (!(w >= domain_.lo && w <= domain_.hi))
    throw DomainError(name_ + ": point " + std::to_string(w) + " outside the domain");
  // Right-continuous: the first branch whose right end exceeds w.
  for (std::size_t i = 0; i + 1 < branches_.size(); ++i)
    if (w < branches_[i].domain.hi) return i;
  return branches_.size() - 1;
}

double MarkovBaseMap::eval(double w) const { return branches_[branch_index(w)].forward(w); }

double MarkovBaseMap::abs_deriv(double w) const {
  return branches_[branch_index(w)].abs_deriv(w);
}

double MarkovBaseMap::log_abs_deriv(double w) const { return std::log(abs_deriv(w)); }

Interval MarkovBaseMap::cylinder(std::span<const Digit> word) const {
  if (word.empty()) return domain_;
  if (!admissible(word)) throw InadmissibleWord(name_ + ": word not allowed");
  Interval iv = branches_[word.back()].domain;
  for (std::size_t i = word.size() - 1; i-- > 0;) {
    const Branch& b = branches_[word[i]];
    const double a = b.inverse(iv.lo);
    const double c = b.inverse(iv.hi);
    iv = {std::min(a, c), std::max(a, c)};
  }
  return iv;
}

double MarkovBaseMap::embed(std::span<const Digit> word) const {
  if (word.empty()) return domain_.lo;
  double lo = branches_[word.back()].domain.lo;
  double hi = branches_[word.back()].domain.hi;
  for (std::size_t i = word.size() - 1; i-- > 0;) {
    const Branch& b = branches_[word[i]];
    double a;
    double c;
    if (b.affine) {
      const double inv = 1.0 / b.affine->slope;
      a = (lo - b.affine->offset) * inv;
      c = (hi - b.affine->offset) * inv;
    } else {
      a = b.inverse(lo);
      c = b.inverse(hi);
    }
    if (a <= c) {
      lo = a;
      hi = c;
    } else {
      lo = c;
      hi = a;
    }
  }
  return lo;
}

bool MarkovBaseMap::admissible(std::span<const Digit> word, bool cyclic) const {
  for (Digit d : word)
    if (d >= branches_.size()) return false;
  for (std::size_t i = 0; i + 1 < word.size(); ++i)
    if (!allowed(word[i], word[i + 1])) return false;
  if (cyclic && !word.empty() && !allowed(word.back(), word.front())) return false;
  return true;
}

std::vector<Digit> MarkovBaseMap::itinerary(double w, std::size_t n) const {
  std::vector<Digit> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t b = branch_index(w);
    out.push_back(static_cast<Digit>(b));
    w = std::clamp(branches_[b].forward(w), domain_.lo, domain_.hi);
  }
  return out;
}

MarkovBaseMap make_doubling() {
  std::vector<Branch> branches{
      Branch::from_affine({0.0, 0.5}, {2.0, 0.0}),
      Branch::from_affine({0.5, 1.0}, {2.0, -1.0}),
  };
  return MarkovBaseMap("doubling", {0.0, 1.0}, std::move(branches),
                       [](Rng& rng) { return rng.uniform(); });
}

double logistic_conjugacy(double w) {
  const double s = std::sin(0.5 * std::numbers::pi * w);
  return s * s;
}

MarkovBaseMap make_tent_logistic_conjugate() {
  std::vector<Branch> branches{
      Branch::from_affine({0.0, 0.5}, {2.0, 0.0}),
      Branch::from_affine({0.5, 1.0}, {-2.0, 2.0}),
  };
  return MarkovBaseMap("tent-logistic", {0.0, 1.0}, std::move(branches),
                       [](Rng& rng) { return rng.uniform(); }, logistic_conjugacy);
}

// ---------------------------------------------------------------------------
// Symbolic points

struct SymbolicPoint::Buffer {
  std::vector<Digit> digits;
  std::vector<Digit> cycle;  // non-empty for periodic points
  std::unique_ptr<DigitSource> source;

  void ensure(std::size_t count) {
    if (digits.size() >= count) return;
    if (!cycle.empty()) {
      digits.reserve(count);
      while (digits.size() < count) digits.push_back(cycle[digits.size() % cycle.size()]);
    } else if (source) {
      source->extend(digits, count);
    } else {
      throw DigitBudgetExhausted(count, digits.size());
    }
  }
};

SymbolicPoint SymbolicPoint::finite(std::vector<Digit> digits) {
  SymbolicPoint p;
  p.buffer_ = std::make_shared<Buffer>();
  p.buffer_->digits = std::move(digits);
  return p;
}

SymbolicPoint SymbolicPoint::periodic(std::vector<Digit> word) {
  if (word.empty()) throw ParameterError("periodic point needs a non-empty word");
  SymbolicPoint p;
  p.buffer_ = std::make_shared<Buffer>();
  p.buffer_->cycle = std::move(word);
  return p;
}

SymbolicPoint SymbolicPoint::streaming(std::vector<Digit> prefix,
                                       std::unique_ptr<DigitSource> source) {
  SymbolicPoint p;
  p.buffer_ = std::make_shared<Buffer>();
  p.buffer_->digits = std::move(prefix);
  p.buffer_->source = std::move(source);
  return p;
}

const Digit* SymbolicPoint::data(std::size_t count, std::size_t at) const {
  if (!buffer_) throw DigitBudgetExhausted(count, 0);
  buffer_->ensure(offset_ + count);
  return buffer_->digits.data() + offset_ + at;
}

std::size_t SymbolicPoint::budget() const {
  if (!buffer_) return 0;
  const std::size_t n = buffer_->digits.size();
  return n > offset_ ? n - offset_ : 0;
}

bool SymbolicPoint::extendable() const {
  return buffer_ && (buffer_->source || !buffer_->cycle.empty());
}

SymbolicPoint SymbolicPoint::step(std::size_t n) const {
  SymbolicPoint p = *this;
  p.offset_ += n;
  return p;
}

SymbolicPoint symbolic_step(const SymbolicPoint& p) { return p.step(1); }

double symbolic_embed(const MarkovBaseMap& map, const SymbolicPoint& p, std::size_t k) {
  return map.embed(p.digits(k));
}

namespace {

/// Lebesgue digit chain. Fair binary digits take one bit each from a 64-bit draw.
class LebesgueSource final : public DigitSource {
 public:
  LebesgueSource(const MarkovBaseMap& map, Rng rng) : rng_(std::move(rng)), n_(map.branch_count()) {
    initial_.resize(n_);
    chain_.resize(n_ * n_);
    for (std::size_t c = 0; c < n_; ++c) {
      initial_[c] = map.initial_digit_prob(static_cast<Digit>(c));
      for (std::size_t d = 0; d < n_; ++d)
        chain_[c * n_ + d] = map.digit_transition(static_cast<Digit>(c), static_cast<Digit>(d));
    }
    fair_binary_ = n_ == 2 && initial_[0] == 0.5;
    for (std::size_t c = 0; fair_binary_ && c < n_; ++c)
      fair_binary_ = chain_[c * n_] == 0.5 && chain_[c * n_ + 1] == 0.5;
  }

  void extend(std::vector<Digit>& digits, std::size_t count) override {
    digits.reserve(std::max(count, digits.capacity()));
    while (digits.size() < count) {
      if (fair_binary_) {
        if (bits_left_ == 0) {
          word_ = rng_.bits();
          bits_left_ = 64;
        }
        digits.push_back(static_cast<Digit>(word_ & 1u));
        word_ >>= 1;
        --bits_left_;
      } else {
        const double* probs = digits.empty() ? initial_.data() : &chain_[digits.back() * n_];
        digits.push_back(draw(probs));
      }
    }
  }

 private:
  Digit draw(const double* probs) {
    const double u = rng_.uniform();
    double acc = 0.0;
    for (std::size_t d = 0; d + 1 < n_; ++d) {
      acc += probs[d];
      if (u < acc && probs[d] > 0.0) return static_cast<Digit>(d);
    }
    std::size_t last = n_ - 1;
    while (last > 0 && probs[last] == 0.0) --last;
    return static_cast<Digit>(last);
  }

  Rng rng_;
  std::size_t n_;
  std::vector<double> initial_;
  std::vector<double> chain_;
  bool fair_binary_ = false;
  std::uint64_t word_ = 0;
  int bits_left_ = 0;
};

}  // namespace

std::unique_ptr<DigitSource> lebesgue_source(const MarkovBaseMap& map, Rng rng) {
  return std::make_unique<LebesgueSource>(map, std::move(rng));
}

SymbolicPoint random_point(const MarkovBaseMap& map, Rng rng) {
  return SymbolicPoint::streaming({}, lebesgue_source(map, std::move(rng)));
}

SymbolicPoint point_near(const MarkovBaseMap& map, double w, Rng rng) {
  return SymbolicPoint::streaming(map.itinerary(w, map.embedding_depth()),
                                  lebesgue_source(map, std::move(rng)));
}

double periodic_point(const MarkovBaseMap& map, std::span<const Digit> word) {
  if (word.empty() || !map.admissible(word, /*cyclic=*/true))
    throw InadmissibleWord(map.name() + ": periodic itinerary not allowed");
  double y = map.branch(word.front()).domain.midpoint();
  // The inverse composition contracts, so iterating to a floating fixed point
  // terminates; the cap covers a two-value rounding cycle.
  for (int iter = 0; iter < 1100; ++iter) {
    double z = y;
    for (std::size_t i = word.size(); i-- > 0;) z = map.branch(word[i]).inverse(z);
    const bool done = z == y;
    y = z;
    if (done) break;
  }
  return y;
}

std::vector<double> periodic_orbit(const MarkovBaseMap& map, std::span<const Digit> word) {
  std::vector<double> orbit;
  std::vector<Digit> rotated(word.begin(), word.end());
  for (std::size_t r = 0; r < word.size(); ++r) {
    orbit.push_back(periodic_point(map, rotated));
    std::rotate(rotated.begin(), rotated.begin() + 1, rotated.end());
  }
  return orbit;
}

}  // namespace skewlab
