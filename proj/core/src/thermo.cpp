#include "skewlab/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "skewlab/error.hpp"

namespace skewlab {

double Potential::evaluate(const SkewProduct& F, double w) const {
  double v = shift;
  if (minus != 0.0) v += minus * F.log_fibre_deriv(w, Side::Minus);
  if (plus != 0.0) v += plus * F.log_fibre_deriv(w, Side::Plus);
  if (base != 0.0) v += base * F.base().log_abs_deriv(w);
  if (extra) v += extra(w);
  return v;
}

// ---------------------------------------------------------------------------
// UlamOperator

double UlamOperator::entry(std::size_t i, std::size_t j) const {
  for (std::size_t e = col_start_[j]; e < col_start_[j + 1]; ++e)
    if (row_[e] == i) return value_[e] * std::exp(log_scale_);
  return 0.0;
}

std::vector<std::vector<double>> UlamOperator::dense() const {
  const std::size_t n = size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  const double scale = std::exp(log_scale_);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t e = col_start_[j]; e < col_start_[j + 1]; ++e)
      m[row_[e]][j] += value_[e] * scale;
  return m;
}

void UlamOperator::multiply(const std::vector<double>& v, std::vector<double>& out) const {
  const std::size_t n = size();
  out.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double vj = v[j];
    for (std::size_t e = col_start_[j]; e < col_start_[j + 1]; ++e) out[row_[e]] += value_[e] * vj;
  }
}

void UlamOperator::multiply_transpose(const std::vector<double>& v,
                                      std::vector<double>& out) const {
  const std::size_t n = size();
  out.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t e = col_start_[j]; e < col_start_[j + 1]; ++e) s += value_[e] * v[row_[e]];
    out[j] = s;
  }
}

namespace {

struct PowerState {
  std::vector<double> vec;
  double ratio = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
};

template <class Mult>
PowerState power_iterate(std::size_t n, const PowerOptions& opt, Mult&& mult) {
  PowerState st;
  st.vec.assign(n, 1.0 / static_cast<double>(n));
  std::vector<double> next;
  double prev = 0.0;
  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    mult(st.vec, next);
    double s = 0.0;
    for (double x : next) s += x;
    if (!(s > 0.0) || !std::isfinite(s))
      throw ConvergenceError("power iteration lost the positive vector", s);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = next[i] / s;
      change += std::abs(x - st.vec[i]);
      st.vec[i] = x;
    }
    st.ratio = s;
    st.iterations = it;
    st.residual = it > 1 ? std::abs(s - prev) / s : std::numeric_limits<double>::infinity();
    const bool ratio_done = it > 2 && st.residual < opt.tol;
    if (ratio_done && (!opt.vectors || change <= 1e-10)) return st;
    prev = s;
  }
  throw ConvergenceError("power iteration did not converge in " + std::to_string(opt.max_iter) +
                             " iterations",
                         st.residual);
}

}  // namespace

SpectralResult UlamOperator::spectral(const PowerOptions& opt) const {
  const std::size_t n = size();
  SpectralResult res;
  PowerState right = power_iterate(
      n, opt, [this](const std::vector<double>& v, std::vector<double>& out) { multiply(v, out); });
  res.radius = right.ratio;
  res.log_radius = std::log(right.ratio) + log_scale_;
  res.right = std::move(right.vec);
  res.iterations = right.iterations;
  res.residual = right.residual;
  if (opt.vectors) {
    PowerState left = power_iterate(n, opt, [this](const std::vector<double>& v,
                                                   std::vector<double>& out) {
      multiply_transpose(v, out);
    });
    res.left = std::move(left.vec);
    res.iterations += left.iterations;
  }
  return res;
}

// ---------------------------------------------------------------------------
// UlamSkeleton

UlamSkeleton::UlamSkeleton(const SkewProduct& F, std::size_t k) : F_(&F), k_(k) {
  const MarkovBaseMap& S = F.base();
  const std::size_t nb = S.branch_count();
  if (k == 0) throw ParameterError("Ulam resolution must be at least 1");
  if (static_cast<double>(k) * std::log2(static_cast<double>(nb)) >= 63.0)
    throw ResolutionOverflow("Ulam resolution " + std::to_string(k) + " too deep to encode");
  if (S.full_branch() && std::pow(static_cast<double>(nb), static_cast<double>(k)) >
                             static_cast<double>(kMaxCells))
    throw ResolutionOverflow("Ulam resolution " + std::to_string(k) + " exceeds " +
                             std::to_string(kMaxCells) + " cells");

  // Admissible words in lexicographic order (= increasing code).
  std::vector<Digit> word(k, 0);
  auto push_word = [&] {
    if (codes_.size() >= kMaxCells)
      throw ResolutionOverflow("Ulam resolution " + std::to_string(k) + " exceeds " +
                               std::to_string(kMaxCells) + " cells");
    std::uint64_t code = 0;
    for (Digit d : word) code = code * nb + d;
    codes_.push_back(code);
    words_flat_.insert(words_flat_.end(), word.begin(), word.end());
  };
  std::function<void(std::size_t)> rec = [&](std::size_t depth) {
    if (depth == k) {
      push_word();
      return;
    }
    for (std::size_t d = 0; d < nb; ++d) {
      if (depth > 0 && !S.allowed(word[depth - 1], static_cast<Digit>(d))) continue;
      word[depth] = static_cast<Digit>(d);
      rec(depth + 1);
    }
  };
  rec(0);

  const std::size_t n = codes_.size();
  cells_.resize(n);
  log_minus_.resize(n);
  log_plus_.resize(n);
  log_base_.resize(n);
  edge_start_.assign(n + 1, 0);
  std::vector<Digit> ext(k + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const Digit> w = this->word(i);
    cells_[i] = S.cylinder(w);
    const double mid = cells_[i].midpoint();
    log_minus_[i] = F.log_fibre_deriv(mid, Side::Minus);
    log_plus_[i] = F.log_fibre_deriv(mid, Side::Plus);
    log_base_[i] = S.log_abs_deriv(mid);

    std::copy(w.begin(), w.end(), ext.begin());
    for (std::size_t d = 0; d < nb; ++d) {
      if (!S.allowed(w.back(), static_cast<Digit>(d))) continue;
      ext[k] = static_cast<Digit>(d);
      const double share = S.cylinder(ext).length() / cells_[i].length();
      const std::size_t target = find(std::span<const Digit>(ext).subspan(1, k));
      edges_.push_back({static_cast<std::uint32_t>(target), share});
    }
    edge_start_[i + 1] = edges_.size();
  }
}

std::span<const Digit> UlamSkeleton::word(std::size_t cell) const {
  return std::span<const Digit>(words_flat_).subspan(cell * k_, k_);
}

std::size_t UlamSkeleton::find(std::span<const Digit> w) const {
  const std::size_t nb = F_->base().branch_count();
  std::uint64_t code = 0;
  for (std::size_t i = 0; i < k_; ++i) code = code * nb + w[i];
  const auto it = std::lower_bound(codes_.begin(), codes_.end(), code);
  if (it == codes_.end() || *it != code) throw InadmissibleWord("word is not an Ulam cell");
  return static_cast<std::size_t>(it - codes_.begin());
}

std::span<const UlamSkeleton::Edge> UlamSkeleton::successors(std::size_t cell) const {
  return std::span<const Edge>(edges_).subspan(edge_start_[cell],
                                               edge_start_[cell + 1] - edge_start_[cell]);
}

UlamOperator UlamSkeleton::build(const Potential& pot, const std::vector<double>* cell_extra) const {
  const std::size_t n = size();
  if (cell_extra && cell_extra->size() != n)
    throw ParameterError("per-cell potential term has the wrong length");
  std::vector<double> weight(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    double v = pot.shift;
    if (pot.minus != 0.0) v += pot.minus * log_minus_[j];
    if (pot.plus != 0.0) v += pot.plus * log_plus_[j];
    if (pot.base != 0.0) v += pot.base * log_base_[j];
    if (pot.extra) v += pot.extra(cells_[j].midpoint());
    if (cell_extra) v += (*cell_extra)[j];
    if (!std::isfinite(v)) throw DomainError("potential is not finite on cell " + std::to_string(j));
    weight[j] = v;
    top = std::max(top, v);
  }
  UlamOperator op;
  op.log_scale_ = top;
  op.col_start_ = edge_start_;
  op.row_.resize(edges_.size());
  op.value_.resize(edges_.size());
  for (std::size_t j = 0; j < n; ++j) {
    const double wj = std::exp(weight[j] - top);
    for (std::size_t e = edge_start_[j]; e < edge_start_[j + 1]; ++e) {
      op.row_[e] = edges_[e].target;
      op.value_[e] = edges_[e].share * wj;
    }
  }
  return op;
}

double UlamSkeleton::pressure(double minus, double plus, double base,
                              const PowerOptions& opt) const {
  Potential pot;
  pot.minus = minus;
  pot.plus = plus;
  pot.base = base;
  return build(pot).spectral(opt).log_radius;
}

UlamOperator build_ulam(const SkewProduct& F, const Potential& pot, std::size_t k) {
  return UlamSkeleton(F, k).build(pot);
}

double pressure(const SkewProduct& F, double minus, double plus, double base, std::size_t k) {
  return UlamSkeleton(F, k).pressure(minus, plus, base);
}

// ---------------------------------------------------------------------------
// One-parameter pressures and their zeros

double side_pressure(const UlamSkeleton& sk, Side side, double t) {
  return side == Side::Minus ? sk.pressure(t, 0.0, 0.0) : sk.pressure(0.0, t, 0.0);
}

double side_pressure_slope(const UlamSkeleton& sk, Side side, double step) {
  return (side_pressure(sk, side, step) - side_pressure(sk, side, -step)) / (2.0 * step);
}

double side_pressure_curvature(const UlamSkeleton& sk, Side side, double step) {
  return (side_pressure(sk, side, step) - 2.0 * side_pressure(sk, side, 0.0) +
          side_pressure(sk, side, -step)) /
         (step * step);
}

RootResult find_t_star(const UlamSkeleton& sk, Side side, const TStarOptions& opt) {
  RootResult r;
  auto p = [&](double t) {
    ++r.evaluations;
    return side_pressure(sk, side, t);
  };
  const double slope = side_pressure_slope(sk, side, opt.slope_step);
  r.evaluations += 2;
  if (!(slope < 0.0))
    throw NegativeSlopeViolation("pressure of the " + std::string(to_string(side)) +
                                 " endpoint does not decrease at t = 0 (slope " +
                                 std::to_string(slope) + ")");

  double t = 1.0;
  double pt = p(t);
  if (std::abs(pt) <= opt.tol) {
    // Already a root; certify it with the doubling bracket.
    r.t = t;
    r.residual = std::abs(pt);
    r.lo = 0.5;
    r.hi = 2.0;
    r.p_lo = p(r.lo);
    r.p_hi = p(r.hi);
    if (r.p_lo < 0.0 && r.p_hi > 0.0) return r;
  }
  if (pt < 0.0) {
    double lo = t;
    double plo = pt;
    while (pt < 0.0) {
      if (t >= opt.t_max)
        throw NoPositiveZero("pressure of the " + std::string(to_string(side)) +
                             " endpoint stays negative up to t = " + std::to_string(opt.t_max));
      lo = t;
      plo = pt;
      t = std::min(2.0 * t, opt.t_max);
      pt = p(t);
    }
    r.lo = lo;
    r.p_lo = plo;
    r.hi = t;
    r.p_hi = pt;
  } else {
    double hi = t;
    double phi = pt;
    while (pt >= 0.0) {
      if (t < 1e-9) throw BracketFailure("no negative pressure value near t = 0");
      hi = t;
      phi = pt;
      t *= 0.5;
      pt = p(t);
    }
    r.lo = t;
    r.p_lo = pt;
    r.hi = hi;
    r.p_hi = phi;
  }

  double lo = r.lo;
  double hi = r.hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double pm = p(mid);
    if (std::abs(pm) <= opt.tol || !(mid > lo && mid < hi)) {
      r.t = mid;
      r.residual = std::abs(pm);
      if (r.residual > opt.tol)
        throw ConvergenceError("t* bisection stalled at bracket resolution", r.residual);
      return r;
    }
    (pm < 0.0 ? lo : hi) = mid;
  }
  throw ConvergenceError("t* bisection did not reach tolerance", std::abs(p(0.5 * (lo + hi))));
}

double h_of_u(const UlamSkeleton& sk, const TStars& ts, double u, double tol) {
  const double lm = 0.5 * (1.0 - u) * ts.minus;
  const double lp = 0.5 * (1.0 + u) * ts.plus;
  auto g = [&](double ls) { return sk.pressure(lm, lp, ls); };

  double lo = -1.0;
  double hi = 1.0;
  double glo = g(lo);
  double ghi = g(hi);
  for (double step = 1.0; glo > 0.0; step *= 2.0) {
    if (step > 1e12) throw BracketFailure("psi does not become negative as lambda^S decreases");
    hi = lo;
    ghi = glo;
    lo -= step;
    glo = g(lo);
  }
  for (double step = 1.0; ghi < 0.0; step *= 2.0) {
    if (step > 1e12) throw BracketFailure("psi does not become positive as lambda^S increases");
    lo = hi;
    glo = ghi;
    hi += step;
    ghi = g(hi);
  }
  if (!(glo <= 0.0 && ghi >= 0.0 && glo < ghi))
    throw BracketFailure("psi is not increasing in lambda^S");
  if (std::abs(glo) <= tol) return lo;
  if (std::abs(ghi) <= tol) return hi;

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (std::abs(gm) <= tol || !(mid > lo && mid < hi)) {
      if (std::abs(gm) > tol) throw ConvergenceError("h(u) bisection stalled", std::abs(gm));
      return mid;
    }
    (gm < 0.0 ? lo : hi) = mid;
  }
  throw ConvergenceError("h(u) bisection did not reach tolerance", std::abs(g(0.5 * (lo + hi))));
}

PhiStar phi_star(const UlamSkeleton& sk, const TStars& ts, double u_tol) {
  PhiStar out;
  const double inv_golden = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = -1.0;
  double b = 1.0;
  double c = b - inv_golden * (b - a);
  double d = a + inv_golden * (b - a);
  auto h = [&](double u) {
    ++out.evaluations;
    return h_of_u(sk, ts, u);
  };
  double hc = h(c);
  double hd = h(d);
  while (b - a > u_tol) {
    if (hc >= hd) {
      b = d;
      d = c;
      hd = hc;
      c = b - inv_golden * (b - a);
      hc = h(c);
    } else {
      a = c;
      c = d;
      hc = hd;
      d = a + inv_golden * (b - a);
      hd = h(d);
    }
  }
  out.u_star = 0.5 * (a + b);
  out.phi = h(out.u_star);
  return out;
}

// ---------------------------------------------------------------------------
// Diffusion approximations

double diffusion_eta(double lambda, double D) {
  if (!(lambda < 0.0) || !(D > 0.0))
    throw DomainError("diffusion approximation needs lambda < 0 < D");
  return std::abs(lambda) / D;
}

double diffusion_phi(double lambda, double D, double c) {
  if (!(lambda < 0.0) || !(D > 0.0))
    throw DomainError("diffusion approximation needs lambda < 0 < D");
  const double l2 = lambda * lambda;
  return l2 / (2.0 * D) - c * l2 / (4.0 * D * D);
}

double diffusion_coefficient(const UlamSkeleton& sk, Side side, double step) {
  return 0.5 * side_pressure_curvature(sk, side, step);
}

// ---------------------------------------------------------------------------
// Pressure zero for the critical-graph dimension

BedfordResult bedford_dimension(const UlamSkeleton& sk, const std::vector<double>& phi_c,
                                double t_lo, double t_hi, double tol) {
  const std::size_t n = sk.size();
  if (phi_c.size() != n) throw ParameterError("need one critical-graph value per Ulam cell");
  const SkewProduct& F = sk.system();
  std::vector<double> extra(n);
  for (std::size_t i = 0; i < n; ++i)
    extra[i] = -std::log(F.fibre_deriv(sk.midpoint(i), phi_c[i]));

  // The operator carries 1/|S'| already, so -(t - 1) log|S'| enters as (2 - t).
  auto p = [&](double t) {
    Potential pot;
    pot.base = 2.0 - t;
    return sk.build(pot, &extra).spectral().log_radius;
  };
  double lo = t_lo;
  double hi = t_hi;
  double plo = p(lo);
  double phi = p(hi);
  if (!(plo > 0.0 && phi < 0.0) && !(plo < 0.0 && phi > 0.0)) {
    if (std::abs(plo) <= tol) return {lo, std::abs(plo), lo > 1.0};
    if (std::abs(phi) <= tol) return {hi, std::abs(phi), hi > 1.0};
    throw NoZeroInRange("dimension pressure has no sign change on [" + std::to_string(t_lo) + ", " +
                        std::to_string(t_hi) + "] (values " + std::to_string(plo) + ", " +
                        std::to_string(phi) + ")");
  }
  const bool decreasing = plo > 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double pm = p(mid);
    if (std::abs(pm) <= tol || !(mid > lo && mid < hi)) return {mid, std::abs(pm), mid > 1.0};
    if ((pm > 0.0) == decreasing) lo = mid;
    else hi = mid;
  }
  const double mid = 0.5 * (lo + hi);
  return {mid, std::abs(p(mid)), mid > 1.0};
}

}  // namespace skewlab
