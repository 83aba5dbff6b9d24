#include "skewlab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "skewlab/error.hpp"
#include "skewlab/parallel.hpp"

namespace skewlab {

ScalingFit loglog_fit(const std::vector<ScalingPoint>& pts) {
  if (pts.size() < 4)
    throw EstimationError("log-log fit needs at least 4 points, got " + std::to_string(pts.size()));
  for (const auto& p : pts)
    if (!(p.value > 0.0) || !(p.eps > 0.0))
      throw EstimationError("log-log fit needs positive scales and values");

  const double v0 = pts.front().value;
  const double n = static_cast<double>(pts.size());
  std::vector<double> xs, ys;
  xs.reserve(pts.size());
  ys.reserve(pts.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : pts) {
    xs.push_back(std::log(p.eps));
    ys.push_back(std::log(p.value / v0));
    mx += xs.back();
    my += ys.back();
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw EstimationError("log-log fit needs distinct scales");

  ScalingFit fit;
  fit.slope = sxy / sxx;
  const double rel_intercept = my - fit.slope * mx;
  fit.intercept = rel_intercept + std::log(v0);
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (rel_intercept + fit.slope * xs[i]);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / n);
  fit.slope_se = pts.size() > 2 ? std::sqrt(ss / (n - 2.0) / sxx) : 0.0;
  fit.points = pts.size();
  fit.eps_min = std::numeric_limits<double>::infinity();
  fit.eps_max = 0.0;
  for (const auto& p : pts) {
    fit.eps_min = std::min(fit.eps_min, p.eps);
    fit.eps_max = std::max(fit.eps_max, p.eps);
  }
  return fit;
}

std::vector<double> geometric_grid(double eps_max, double eps_min, std::size_t n) {
  if (n < 2 || !(eps_max > eps_min) || !(eps_min > 0.0))
    throw ParameterError("geometric grid needs eps_max > eps_min > 0 and n >= 2");
  std::vector<double> g(n);
  const double ratio = std::log(eps_min / eps_max) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = eps_max * std::exp(ratio * static_cast<double>(i));
  g.front() = eps_max;
  g.back() = eps_min;
  return g;
}

namespace {

void check_grid(const std::vector<double>& eps) {
  for (std::size_t i = 0; i < eps.size(); ++i)
    if (!(eps[i] > 0.0) || (i > 0 && !(eps[i] < eps[i - 1])))
      throw ParameterError("eps grid must be positive and strictly decreasing");
}

/// Fits rows up to the first empty bin (grid order is decreasing eps).
template <class Row, class Value, class Hits>
ScalingFit fit_truncated(const std::vector<Row>& rows, Value value, Hits hits) {
  std::vector<ScalingPoint> pts;
  std::string flag;
  for (const Row& r : rows) {
    if (hits(r) == 0) {
      flag = "truncated at eps=" + std::to_string(r.eps) + ": no hits";
      break;
    }
    pts.push_back({r.eps, value(r)});
  }
  ScalingFit fit = loglog_fit(pts);
  if (!flag.empty()) fit.flags.push_back(flag);
  return fit;
}

Digit draw_digit(const double* probs, std::size_t n, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t d = 0; d + 1 < n; ++d) {
    acc += probs[d];
    if (u < acc && probs[d] > 0.0) return static_cast<Digit>(d);
  }
  std::size_t last = n - 1;
  while (last > 0 && probs[last] == 0.0) --last;
  return static_cast<Digit>(last);
}

/// Tilted cell chain Q(c -> c') = M[c'][c] l(c') / (rho l(c)) for the matrix of
/// the potential t log f'(e_side), with the per-edge log likelihood ratio.
struct TiltTable {
  const UlamSkeleton* sk = nullptr;
  std::vector<double> cumulative;  // per edge, running sum within the source cell
  std::vector<double> log_ratio;   // per edge, log(share / q)
  std::vector<std::size_t> start;

  TiltTable(const UlamSkeleton& skel, Side side, double t) : sk(&skel) {
    Potential pot;
    (side == Side::Minus ? pot.minus : pot.plus) = t;
    const UlamOperator op = skel.build(pot);
    PowerOptions po;
    po.vectors = true;
    const SpectralResult spec = op.spectral(po);
    const std::size_t n = skel.size();
    start.assign(n + 1, 0);
    for (std::size_t c = 0; c < n; ++c) {
      const auto edges = skel.successors(c);
      std::vector<double> q(edges.size());
      double total = 0.0;
      for (std::size_t e = 0; e < edges.size(); ++e) {
        q[e] = op.entry(edges[e].target, c) * spec.left[edges[e].target];
        total += q[e];
      }
      if (!(total > 0.0)) throw EstimationError("tilted chain has a dead cell");
      double acc = 0.0;
      for (std::size_t e = 0; e < edges.size(); ++e) {
        const double qe = q[e] / total;
        acc += qe;
        cumulative.push_back(acc);
        log_ratio.push_back(qe > 0.0 ? std::log(edges[e].share / qe)
                                     : std::numeric_limits<double>::infinity());
      }
      start[c + 1] = cumulative.size();
    }
  }

  std::size_t pick(std::size_t cell, Rng& rng) const {
    const double u = rng.uniform();
    const std::size_t b = start[cell];
    const std::size_t e = start[cell + 1];
    for (std::size_t i = b; i + 1 < e; ++i)
      if (u < cumulative[i]) return i - b;
    return e - 1 - b;
  }
};

/// One tilted base point: digits with the tilted prefix and its log weight.
struct TiltedDraw {
  std::vector<Digit> prefix;
  double log_weight = 0.0;
};

TiltedDraw draw_tilted(const TiltTable& tab, const MarkovBaseMap& S, Side side, double threshold,
                       std::size_t max_steps, Rng& rng) {
  const UlamSkeleton& sk = *tab.sk;
  const std::size_t k = sk.resolution();
  const std::size_t nb = S.branch_count();
  TiltedDraw out;
  out.prefix.reserve(k + 64);
  std::vector<double> probs(nb);
  for (std::size_t d = 0; d < nb; ++d) probs[d] = S.initial_digit_prob(static_cast<Digit>(d));
  out.prefix.push_back(draw_digit(probs.data(), nb, rng));
  while (out.prefix.size() < k) {
    for (std::size_t d = 0; d < nb; ++d)
      probs[d] = S.digit_transition(out.prefix.back(), static_cast<Digit>(d));
    out.prefix.push_back(draw_digit(probs.data(), nb, rng));
  }
  std::size_t cell = sk.find(out.prefix);
  double sum = 0.0;
  for (std::size_t step = 0; step < max_steps && sum < threshold; ++step) {
    sum += sk.log_deriv(side, cell);
    const std::size_t e = tab.pick(cell, rng);
    out.log_weight += tab.log_ratio[tab.start[cell] + e];
    cell = sk.successors(cell)[e].target;
    out.prefix.push_back(sk.word(cell)[k - 1]);
  }
  return out;
}

}  // namespace

TailResult tail_exponent(const SkewProduct& F, Side side, const TailOptions& opt) {
  check_grid(opt.eps);
  TailResult res;
  res.side = side;
  const double e = F.fibres().endpoint(side);

  if (opt.method == TailMethod::Plain) {
    const auto samples = sample_critical_graph(F, opt.n_samples, opt.seed, opt.critical);
    std::vector<double> u(opt.eps.rbegin(), opt.eps.rend());
    const PhiProfile prof = phi_profile_from(F, side, u, samples);
    for (auto it = prof.rows.rbegin(); it != prof.rows.rend(); ++it)
      res.rows.push_back({it->u, it->estimate, it->std_error, it->hits, prof.used, prof.dropped});
    res.dropped = prof.dropped;
    res.total = prof.used + prof.dropped;
  } else {
    const UlamSkeleton sk(F, opt.tilt_resolution);
    const TiltTable tab(sk, side, opt.tilt);
    const std::string stream = "tail-" + std::string(to_string(side));
    const std::size_t n = opt.n_samples;
    std::vector<double> contrib(n);
    std::vector<std::uint8_t> state(n);  // 0 miss, 1 hit, 2 undecided
    for (std::size_t b = 0; b < opt.eps.size(); ++b) {
      const double eps = opt.eps[b];
      const double x = side == Side::Minus ? e + eps : e - eps;
      const double threshold = std::log(1.0 / eps) - opt.overshoot;
      const BasinLabel far = side == Side::Minus ? BasinLabel::Plus : BasinLabel::Minus;
      parallel_for(n, [&](std::size_t i) {
        Rng rng(StreamKey{opt.seed, stream, b * n + i});
        TiltedDraw draw = draw_tilted(tab, F.base(), side, threshold, opt.max_tilt_steps, rng);
        const SymbolicPoint w = SymbolicPoint::streaming(std::move(draw.prefix),
                                                         lebesgue_source(F.base(), std::move(rng)));
        const BasinLabel label = classify_basin(F, w, x, opt.critical.classify);
        if (label == BasinLabel::Undecided) {
          state[i] = 2;
          contrib[i] = 0.0;
        } else {
          state[i] = label == far ? 1 : 0;
          contrib[i] = state[i] == 1 ? std::exp(draw.log_weight) : 0.0;
        }
      });
      TailRow row;
      row.eps = eps;
      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (state[i] == 2) {
          ++row.dropped;
          continue;
        }
        ++row.samples;
        if (state[i] == 1) ++row.hits;
        sum += contrib[i];
        sum_sq += contrib[i] * contrib[i];
      }
      if (row.samples > 0) {
        const double N = static_cast<double>(row.samples);
        row.estimate = sum / N;
        row.std_error = std::sqrt(std::max(0.0, sum_sq / N - row.estimate * row.estimate) / N);
      }
      res.dropped += row.dropped;
      res.total += row.samples + row.dropped;
      res.rows.push_back(row);
    }
  }
  res.fit = fit_truncated(
      res.rows, [](const TailRow& r) { return r.estimate; },
      [](const TailRow& r) { return r.hits; });
  return res;
}

StabilityResult stability_empirical(const SkewProduct& F, const SymbolicPoint& w, double x,
                                    const StabilityOptions& opt) {
  check_grid(opt.eps);
  const MarkovBaseMap& S = F.base();
  const Interval I = S.domain();
  const Interval J = F.fibres().fibre();
  if (!J.contains(x)) throw DomainError("stability point outside the fibre interval");
  const double w0 = symbolic_embed(S, w);
  const std::size_t n = opt.n_samples;
  if (n == 0) throw ParameterError("stability needs samples");
  std::vector<BasinLabel> labels(n);

  StabilityResult res;
  for (std::size_t b = 0; b < opt.eps.size(); ++b) {
    const double eps = opt.eps[b];
    const double wl = std::max(I.lo, w0 - eps), wh = std::min(I.hi, w0 + eps);
    const double xl = std::max(J.lo, x - eps), xh = std::min(J.hi, x + eps);
    parallel_for(n, [&](std::size_t i) {
      Rng rng(StreamKey{opt.seed, "stability", b * n + i});
      const double wi = std::min(rng.uniform(wl, wh), std::nextafter(I.hi, I.lo));
      const double xi = rng.uniform(xl, xh);
      labels[i] = classify_basin(F, point_near(S, wi, std::move(rng)), xi, opt.classify);
    });
    StabilityRow row;
    row.eps = eps;
    row.samples = n;
    for (BasinLabel l : labels) {
      if (l == BasinLabel::Minus) ++row.minus;
      else if (l == BasinLabel::Plus) ++row.plus;
      else ++row.undecided;
    }
    const double N = static_cast<double>(n);
    row.share_minus = static_cast<double>(row.minus) / N;
    row.share_plus = static_cast<double>(row.plus) / N;
    row.share_undecided = static_cast<double>(row.undecided) / N;
    auto clip = [&](double v, bool& flag) {
      const double lo = 1.0 / (N + 1.0), hi = N / (N + 1.0);
      flag = v < lo || v > hi;
      return std::clamp(v, lo, hi);
    };
    row.fit_minus = clip(row.share_minus, row.clipped_minus);
    row.fit_plus = clip(row.share_plus, row.clipped_plus);
    res.rows.push_back(row);
  }

  std::vector<ScalingPoint> pm, pp;
  bool clipped_m = false, clipped_p = false;
  for (const auto& r : res.rows) {
    pm.push_back({r.eps, r.fit_minus});
    pp.push_back({r.eps, r.fit_plus});
    clipped_m = clipped_m || r.clipped_minus;
    clipped_p = clipped_p || r.clipped_plus;
  }
  res.minus = loglog_fit(pm);
  res.plus = loglog_fit(pp);
  if (clipped_m) res.minus.flags.push_back("clipped: some minus shares were 0 or 1");
  if (clipped_p) res.plus.flags.push_back("clipped: some plus shares were 0 or 1");
  return res;
}

double stability_theoretical(const StabilityCase& c) {
  if (!(c.base_exponent > 0.0)) throw DomainError("base exponent must be positive");
  switch (c.row) {
    case StabilityRowKind::AtMinus:
      if (!(c.gap_minus() > 0.0))
        throw UnsupportedCase("endpoint row with non-positive gap at e- is not covered");
      return c.t_minus * c.gap_minus() / c.base_exponent;
    case StabilityRowKind::BelowCritical:
      if (!(c.lambda_minus < 0.0)) throw DomainError("row below phi_c needs lambda(e-) < 0");
      return c.t_minus * (-c.lambda_minus) / c.base_exponent;
    case StabilityRowKind::AtCritical:
      return 0.0;
    case StabilityRowKind::AboveCritical:
      if (!(c.lambda_plus < 0.0)) throw DomainError("row above phi_c needs lambda(e+) < 0");
      return c.t_plus * c.lambda_plus / c.base_exponent;
    case StabilityRowKind::AtPlus:
      if (!(c.gap_plus() > 0.0))
        throw UnsupportedCase("endpoint row with non-positive gap at e+ is not covered");
      return -c.t_plus * c.gap_plus() / c.base_exponent;
  }
  throw DomainError("unknown stability row");
}

UncertaintyResult uncertainty_empirical(const SkewProduct& F, double x,
                                        const UncertaintyOptions& opt) {
  check_grid(opt.eps);
  const MarkovBaseMap& S = F.base();
  const Interval I = S.domain();
  const Interval J = F.fibres().fibre();
  if (!(x > J.lo && x < J.hi)) throw DomainError("uncertainty line must lie inside the fibre");
  const std::size_t n = opt.n_pairs;
  if (n == 0) throw ParameterError("uncertainty needs pairs");
  std::vector<std::uint8_t> state(n);  // 0 agree, 1 disagree, 2 undecided

  UncertaintyResult res;
  for (std::size_t b = 0; b < opt.eps.size(); ++b) {
    const double eps = opt.eps[b];
    parallel_for(n, [&](std::size_t i) {
      Rng rng(StreamKey{opt.seed, "uncertainty", b * n + i});
      const double top = std::nextafter(I.hi, I.lo);
      const double w1 = std::min(rng.uniform(I.lo, I.hi), top);
      const double w2 =
          std::min(rng.uniform(std::max(I.lo, w1 - eps), std::min(I.hi, w1 + eps)), top);
      Rng tail1(rng.bits());
      Rng tail2(rng.bits());
      const BasinLabel a = classify_basin(F, point_near(S, w1, std::move(tail1)), x, opt.classify);
      const BasinLabel c = classify_basin(F, point_near(S, w2, std::move(tail2)), x, opt.classify);
      if (a == BasinLabel::Undecided || c == BasinLabel::Undecided) state[i] = 2;
      else state[i] = a != c ? 1 : 0;
    });
    UncertaintyRow row;
    row.eps = eps;
    for (std::uint8_t s : state) {
      if (s == 2) ++row.undecided;
      else {
        ++row.pairs;
        if (s == 1) ++row.disagree;
      }
    }
    row.probability =
        row.pairs ? static_cast<double>(row.disagree) / static_cast<double>(row.pairs) : 0.0;
    res.rows.push_back(row);
  }
  res.fit = fit_truncated(
      res.rows, [](const UncertaintyRow& r) { return r.probability; },
      [](const UncertaintyRow& r) { return r.disagree; });
  return res;
}

BoxDimension box_dimension(const std::vector<double>& w, const std::vector<double>& y,
                           const std::vector<double>& sizes) {
  if (w.size() != y.size() || w.size() < 2)
    throw EstimationError("box counting needs matching samples (at least 2)");
  for (std::size_t i = 1; i < w.size(); ++i)
    if (!(w[i] > w[i - 1])) throw EstimationError("box counting needs increasing abscissae");
  BoxDimension out;
  const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());
  const double y0 = *ymin_it;
  out.degenerate = *ymin_it == *ymax_it;
  const double w0 = w.front();
  const double span = w.back() - w.front();

  for (double delta : sizes) {
    if (!(delta > 0.0)) throw EstimationError("box sizes must be positive");
    const auto columns = static_cast<std::size_t>(std::max(1.0, std::ceil(span / delta - 1e-9)));
    std::vector<double> lo(columns, std::numeric_limits<double>::infinity());
    std::vector<double> hi(columns, -std::numeric_limits<double>::infinity());
    auto column_of = [&](double wv) {
      const auto c = static_cast<std::size_t>(std::floor((wv - w0) / delta));
      return std::min(c, columns - 1);
    };
    auto add = [&](std::size_t c, double v) {
      lo[c] = std::min(lo[c], v);
      hi[c] = std::max(hi[c], v);
    };
    for (std::size_t i = 0; i < w.size(); ++i) {
      const std::size_t c = column_of(w[i]);
      add(c, y[i]);
      if (i + 1 < w.size()) {
        const std::size_t c2 = column_of(w[i + 1]);
        if (c2 != c) {
          // Join neighbours across the column edge by linear interpolation.
          const double edge = w0 + static_cast<double>(c2) * delta;
          const double s = (edge - w[i]) / (w[i + 1] - w[i]);
          const double ye = y[i] + s * (y[i + 1] - y[i]);
          add(c, ye);
          add(c2, ye);
        }
      }
    }
    std::size_t boxes = 0;
    for (std::size_t c = 0; c < columns; ++c) {
      if (lo[c] > hi[c]) continue;
      const auto a = static_cast<long long>(std::floor((lo[c] - y0) / delta));
      const auto b = static_cast<long long>(std::floor((hi[c] - y0) / delta));
      boxes += static_cast<std::size_t>(b - a + 1);
    }
    out.counts.push_back({delta, boxes});
  }
  std::vector<ScalingPoint> pts;
  for (const auto& c : out.counts) pts.push_back({c.size, static_cast<double>(c.boxes)});
  out.fit = loglog_fit(pts);
  out.fit.slope = -out.fit.slope;
  if (out.degenerate) out.fit.flags.push_back("degenerate: constant sample");
  return out;
}

std::vector<double> dyadic_box_sizes(std::size_t n_points, double width) {
  std::vector<double> sizes;
  const double smallest = 4.0 * width / static_cast<double>(std::max<std::size_t>(n_points, 1));
  for (double d = 0.5 * width; d >= smallest; d *= 0.5) sizes.push_back(d);
  return sizes;
}

}  // namespace skewlab
