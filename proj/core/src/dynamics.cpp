#include "skewlab/dynamics.hpp"

#include <cmath>

#include "skewlab/error.hpp"
#include "skewlab/parallel.hpp"

namespace skewlab {

namespace {

constexpr std::size_t kChunk = 4096;

struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t n = 0;
};

/// Mean and standard error of f(i), i < n, reduced over fixed-size chunks so
/// the result does not depend on the worker count.
template <class F>
LyapunovEstimate chunked_mean(std::size_t n, F&& f) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<Moments> parts(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    Moments m;
    const std::size_t end = std::min(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      const double v = f(i);
      m.sum += v;
      m.sum_sq += v * v;
      ++m.n;
    }
    parts[c] = m;
  });
  Moments total;
  for (const Moments& m : parts) {
    total.sum += m.sum;
    total.sum_sq += m.sum_sq;
    total.n += m.n;
  }
  LyapunovEstimate est;
  est.samples = total.n;
  if (total.n == 0) return est;
  const double N = static_cast<double>(total.n);
  est.value = total.sum / N;
  if (total.n > 1) {
    const double var = std::max(0.0, (total.sum_sq - N * est.value * est.value) / (N - 1.0));
    est.std_error = std::sqrt(var / N);
  }
  return est;
}

}  // namespace

SkewProduct::SkewProduct(MarkovBaseMap base, FibreFamily fibres, Check check)
    : base_(std::move(base)), fibres_(std::move(fibres)) {
  if (check == Check::Skip) return;
  const FamilyReport rep = validate_family(fibres_);
  if (!rep.pass()) {
    std::string msg = "fibre family '" + fibres_.name() + "' rejected:";
    for (const auto& f : rep.failures) msg += " " + f + ";";
    throw ParameterError(msg);
  }
}

double SkewProduct::log_fibre_deriv(double w, Side side) const {
  return std::log(fibre_deriv(w, fibres_.endpoint(side)));
}

DrivenOrbit::DrivenOrbit(const SkewProduct& F, SymbolicPoint w) : F_(&F), w_(std::move(w)) {}

void DrivenOrbit::extend(std::size_t n) {
  const std::size_t have = coeffs_.size();
  if (n < have) return;
  const std::size_t target = w_.extendable() ? std::max(n + 1, have + 256) : n + 1;
  const MarkovBaseMap& S = F_->base();
  const std::size_t depth = S.embedding_depth();
  coeffs_.reserve(target);
  points_.reserve(target);
  const std::span<const Digit> all = w_.digits(target - 1 + depth);
  for (std::size_t i = have; i < target; ++i) {
    const double w = S.embed(all.subspan(i, depth));
    points_.push_back(w);
    coeffs_.push_back(F_->coeffs(w));
  }
}

const FibreCoeffs& DrivenOrbit::coeffs(std::size_t n) {
  extend(n);
  return coeffs_[n];
}

double DrivenOrbit::base_point(std::size_t n) {
  extend(n);
  return points_[n];
}

std::pair<SymbolicPoint, double> iterate(const SkewProduct& F, const SymbolicPoint& w, double x,
                                         std::size_t n) {
  const MarkovBaseMap& S = F.base();
  SymbolicPoint p = w;
  for (std::size_t i = 0; i < n; ++i) {
    x = F.fibre_map(symbolic_embed(S, p), x);
    p = p.step(1);
  }
  return {p, x};
}

std::string MeasureSpec::label() const {
  if (kind == Kind::Acip) return "acip";
  std::string s = "periodic:";
  for (Digit d : word) s += static_cast<char>('0' + d);
  return s;
}

LyapunovEstimate lyapunov_graph(const SkewProduct& F, const MeasureSpec& nu, Side side,
                                const LyapunovOptions& opt) {
  const MarkovBaseMap& S = F.base();
  if (nu.kind == MeasureSpec::Kind::PeriodicOrbit) {
    const std::vector<double> orbit = periodic_orbit(S, nu.word);
    double sum = 0.0;
    for (double w : orbit) sum += F.log_fibre_deriv(w, side);
    return {sum / static_cast<double>(orbit.size()), 0.0, orbit.size()};
  }
  if (opt.n_samples == 0) throw ParameterError("lyapunov_graph needs n_samples >= 1");
  const double e = F.fibres().endpoint(side);
  const std::size_t n_iter = std::max<std::size_t>(opt.n_iter, 1);
  return chunked_mean(opt.n_samples, [&](std::size_t i) {
    Rng rng(StreamKey{opt.seed, "lyapunov", i});
    const double w0 = S.sample_acip(rng);
    if (n_iter == 1) return F.log_fibre_deriv(w0, side);
    DrivenOrbit orbit(F, point_near(S, w0, std::move(rng)));
    double sum = 0.0;
    for (std::size_t k = 0; k < n_iter; ++k)
      sum += std::log(F.fibres().apply_deriv(orbit.coeffs(k), e));
    return sum / static_cast<double>(n_iter);
  });
}

double base_lyapunov(const SkewProduct& F, const MeasureSpec& nu, const LyapunovOptions& opt) {
  const MarkovBaseMap& S = F.base();
  if (nu.kind == MeasureSpec::Kind::PeriodicOrbit) {
    const std::vector<double> orbit = periodic_orbit(S, nu.word);
    double sum = 0.0;
    for (double w : orbit) sum += S.log_abs_deriv(w);
    return sum / static_cast<double>(orbit.size());
  }
  if (S.piecewise_affine()) {
    // Constant |S'| makes the integral exact.
    const double first = std::abs(S.branch(0).affine->slope);
    bool constant = true;
    for (std::size_t i = 1; i < S.branch_count(); ++i)
      constant = constant && std::abs(S.branch(i).affine->slope) == first;
    if (constant) return std::log(first);
  }
  return chunked_mean(std::max<std::size_t>(opt.n_samples, 1), [&](std::size_t i) {
           Rng rng(StreamKey{opt.seed, "base-lyapunov", i});
           return S.log_abs_deriv(S.sample_acip(rng));
         })
      .value;
}

SignConditionReport check_sign_conditions(const SkewProduct& F, const std::vector<MeasureSpec>& candidates,
                                    const LyapunovOptions& opt) {
  SignConditionReport rep;
  rep.acip = {MeasureSpec::acip(), lyapunov_graph(F, MeasureSpec::acip(), Side::Minus, opt),
              lyapunov_graph(F, MeasureSpec::acip(), Side::Plus, opt)};
  rep.acip_minus_negative = rep.acip.minus.value + 3.0 * rep.acip.minus.std_error < 0.0;
  rep.acip_plus_negative = rep.acip.plus.value + 3.0 * rep.acip.plus.std_error < 0.0;
  rep.sums_negative = rep.acip.minus.value + rep.acip.plus.value +
                          3.0 * std::hypot(rep.acip.minus.std_error, rep.acip.plus.std_error) <
                      0.0;
  for (const MeasureSpec& nu : candidates) {
    MeasureExponents m{nu, lyapunov_graph(F, nu, Side::Minus, opt),
                       lyapunov_graph(F, nu, Side::Plus, opt)};
    rep.has_expanding_minus = rep.has_expanding_minus || m.minus.value > 0.0;
    rep.has_expanding_plus = rep.has_expanding_plus || m.plus.value > 0.0;
    const double err = 3.0 * std::hypot(m.minus.std_error, m.plus.std_error);
    rep.sums_negative = rep.sums_negative && m.minus.value + m.plus.value + err < 0.0;
    rep.candidates.push_back(std::move(m));
  }
  if (!rep.acip_minus_negative)
    rep.failures.push_back("sign condition: acip exponent of e- is not negative (" +
                           std::to_string(rep.acip.minus.value) + ")");
  if (!rep.acip_plus_negative)
    rep.failures.push_back("sign condition: acip exponent of e+ is not negative (" +
                           std::to_string(rep.acip.plus.value) + ")");
  if (!rep.has_expanding_minus)
    rep.failures.push_back("sign condition: no tested measure with positive exponent at e-");
  if (!rep.has_expanding_plus)
    rep.failures.push_back("sign condition: no tested measure with positive exponent at e+");
  return rep;
}

std::string_view to_string(BasinLabel b) noexcept {
  switch (b) {
    case BasinLabel::Minus:
      return "minus";
    case BasinLabel::Plus:
      return "plus";
    default:
      return "undecided";
  }
}

BasinLabel classify_basin(DrivenOrbit& orbit, double x, const ClassifyParams& p) {
  const FibreFamily& fam = orbit.system().fibres();
  const double lo = fam.lower();
  const double hi = fam.upper();
  if (x == lo) return BasinLabel::Minus;
  if (x == hi) return BasinLabel::Plus;
  std::size_t near_lo = 0;
  std::size_t near_hi = 0;
  for (std::size_t n = 0; n < p.max_steps; ++n) {
    x = orbit.step(n, x);
    if (std::isnan(x)) return BasinLabel::Undecided;
    near_lo = std::abs(x - lo) < p.delta ? near_lo + 1 : 0;
    near_hi = std::abs(x - hi) < p.delta ? near_hi + 1 : 0;
    if (near_lo >= p.confirm) return BasinLabel::Minus;
    if (near_hi >= p.confirm) return BasinLabel::Plus;
  }
  return BasinLabel::Undecided;
}

BasinLabel classify_basin(const SkewProduct& F, const SymbolicPoint& w, double x,
                          const ClassifyParams& p) {
  DrivenOrbit orbit(F, w);
  return classify_basin(orbit, x, p);
}

double critical_graph(DrivenOrbit& orbit, const CriticalParams& p) {
  const FibreFamily& fam = orbit.system().fibres();
  double lo = fam.lower();
  double hi = fam.upper();
  ClassifyParams extended = p.classify;
  extended.max_steps *= 10;
  while (hi - lo > p.tol) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    BasinLabel label = classify_basin(orbit, mid, p.classify);
    if (label == BasinLabel::Undecided) label = classify_basin(orbit, mid, extended);
    if (label == BasinLabel::Undecided) throw UndecidedBracket(lo, hi);
    (label == BasinLabel::Minus ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double critical_graph(const SkewProduct& F, const SymbolicPoint& w, const CriticalParams& p) {
  DrivenOrbit orbit(F, w);
  return critical_graph(orbit, p);
}

std::vector<std::optional<double>> sample_critical_graph(const SkewProduct& F, std::size_t n,
                                                         std::uint64_t seed,
                                                         const CriticalParams& p) {
  std::vector<std::optional<double>> out(n);
  parallel_for(n, [&](std::size_t i) {
    DrivenOrbit orbit(F, random_point(F.base(), Rng(StreamKey{seed, "critical-graph", i})));
    try {
      out[i] = critical_graph(orbit, p);
    } catch (const UndecidedBracket&) {
      out[i].reset();
    }
  });
  return out;
}

PhiProfile phi_profile_from(const SkewProduct& F, Side side, const std::vector<double>& u_grid,
                            const std::vector<std::optional<double>>& samples) {
  for (std::size_t i = 0; i < u_grid.size(); ++i)
    if (!(u_grid[i] > 0.0) || (i > 0 && !(u_grid[i] > u_grid[i - 1])))
      throw ParameterError("phi_profile: u grid must be positive and increasing");
  PhiProfile prof;
  prof.side = side;
  std::vector<double> values;
  values.reserve(samples.size());
  for (const auto& s : samples) {
    if (s) values.push_back(*s);
    else ++prof.dropped;
  }
  prof.used = values.size();
  const double e = F.fibres().endpoint(side);
  const double N = static_cast<double>(prof.used);
  for (double u : u_grid) {
    ProfileRow row;
    row.u = u;
    for (double v : values)
      if (side == Side::Minus ? v < e + u : v > e - u) ++row.hits;
    if (prof.used > 0) {
      row.estimate = static_cast<double>(row.hits) / N;
      row.std_error = std::sqrt(row.estimate * (1.0 - row.estimate) / N);
    }
    prof.rows.push_back(row);
  }
  return prof;
}

PhiProfile phi_profile(const SkewProduct& F, Side side, const std::vector<double>& u_grid,
                       std::size_t n_samples, std::uint64_t seed, const CriticalParams& p) {
  return phi_profile_from(F, side, u_grid, sample_critical_graph(F, n_samples, seed, p));
}

double BasinGrid::base_coord(std::size_t col) const {
  return base_domain.lo +
         base_domain.length() * (static_cast<double>(col) + 0.5) / static_cast<double>(n_w);
}

double BasinGrid::fibre_coord(std::size_t row) const {
  if (row + 1 == n_x) return fibre.hi;
  return fibre.lo + fibre.length() * static_cast<double>(row) / static_cast<double>(n_x - 1);
}

BasinGrid basin_grid(const SkewProduct& F, std::size_t n_w, std::size_t n_x, std::uint64_t seed,
                     const ClassifyParams& p) {
  if (n_w < 2 || n_x < 2) throw ParameterError("basin_grid needs resolutions >= 2");
  BasinGrid grid;
  grid.n_w = n_w;
  grid.n_x = n_x;
  grid.base_domain = F.base().domain();
  grid.fibre = F.fibres().fibre();
  grid.labels.assign(n_w * n_x, BasinLabel::Undecided);
  parallel_for(n_w, [&](std::size_t col) {
    DrivenOrbit orbit(F, point_near(F.base(), grid.base_coord(col),
                                    Rng(StreamKey{seed, "basin-grid", col})));
    for (std::size_t row = 0; row < n_x; ++row)
      grid.labels[row * n_w + col] = classify_basin(orbit, grid.fibre_coord(row), p);
  });
  return grid;
}

}  // namespace skewlab
