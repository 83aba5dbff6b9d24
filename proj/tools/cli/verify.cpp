#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "pipelines.hpp"
#include "skewlab/estimators.hpp"
#include "skewlab/parallel.hpp"

namespace skewlab::cli {

namespace {

struct Scale {
  std::size_t lyapunov;
  std::size_t tail;
  std::size_t stability_points;
  std::size_t stability;
  std::size_t pairs;
  std::size_t equivariance;
};

constexpr Scale kFull{1000000, 100000, 10, 100000, 100000, 200};
constexpr Scale kQuick{100000, 4000, 2, 4000, 4000, 40};

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Ctx {
  const ExperimentConfig& cfg;
  Scale scale;
  const SkewProduct& F;  // arctan model under test
  std::vector<Claim>& out;

  void add(int c, std::string claim, std::string expected, double observed, std::string tol,
           bool pass, bool gating = true) const {
    out.push_back({c, std::move(claim), std::move(expected), observed, std::move(tol), pass, gating});
  }
  void note(int c, std::string claim, double observed) const {
    add(c, std::move(claim), "-", observed, "-", true, false);
  }
};

SkewProduct corrupted(const ExperimentConfig& cfg) {
  FibreFamily good = make_family(cfg);
  auto eval = [good](double w, double x) {
    return good.model().apply(good.prepare(w), x) + 5e-4 * (1.0 + x);
  };
  auto deriv = [good](double w, double x) {
    return good.model().deriv(good.prepare(w), x) + 5e-4;
  };
  return SkewProduct(make_base(cfg),
                     custom_family("corrupted-" + good.name(), good.fibre(), eval, deriv), Check::Skip);
}

void criterion0(const Ctx& c) {
  const ModelCheck mc = check_model(c.F, c.cfg);
  c.add(0, "fibre maps fix both endpoints", "<= 1e-12", mc.family.max_endpoint_error, "abs",
        mc.family.endpoints_ok);
  c.add(0, "fibre maps increasing", "> 0", mc.family.min_deriv, "-", mc.family.monotone);
  c.add(0, "negative Schwarzian", "< 0", mc.family.max_schwarzian, "-", mc.family.negative_schwarzian);
  if (!mc.family.endpoints_ok || !mc.family.monotone) return;
  c.add(0, "acip exponent at e- negative", "< 0", mc.signs.acip.minus.value, "3 se",
        mc.signs.acip_minus_negative);
  c.add(0, "acip exponent at e+ negative", "< 0", mc.signs.acip.plus.value, "3 se",
        mc.signs.acip_plus_negative);
  c.add(0, "some measure expands e-", "true", mc.signs.has_expanding_minus, "-",
        mc.signs.has_expanding_minus);
  c.add(0, "some measure expands e+", "true", mc.signs.has_expanding_plus, "-",
        mc.signs.has_expanding_plus);
}

void criterion1(const Ctx& c) {
  const UlamSkeleton sk(c.F, 12);
  const double psi = sk.pressure(0, 0, 0);
  c.add(1, "psi(0,0,0) at k=12", "0", psi, "1e-3", std::abs(psi) <= 1e-3);
}

void criterion2(const Ctx& c) {
  const UlamSkeleton sk(c.F, 12);
  LyapunovOptions lo;
  lo.n_samples = c.scale.lyapunov;
  lo.seed = c.cfg.seed;
  for (Side s : {Side::Minus, Side::Plus}) {
    const double slope = side_pressure_slope(sk, s);
    const LyapunovEstimate mc = lyapunov_graph(c.F, MeasureSpec::acip(), s, lo);
    const double tol = std::max(0.02 * std::abs(mc.value), 3.0 * mc.std_error);
    c.add(2, "dpsi/dlambda" + std::string(s == Side::Minus ? "-" : "+") + " vs acip exponent",
          real(mc.value), slope, "max(2%, 3 se) = " + real(tol), std::abs(slope - mc.value) <= tol);
  }
}

void criterion3(const Ctx& c) {
  const UlamSkeleton sk10(c.F, 10), sk12(c.F, 12);
  for (Side s : {Side::Minus, Side::Plus}) {
    const std::string tag = s == Side::Minus ? "-" : "+";
    const RootResult r = find_t_star(sk12, s);
    c.add(3, "|p" + tag + "(t*)| at k=12", "0", r.residual, "1e-8", r.residual <= 1e-8);
    const double plo = side_pressure(sk12, s, r.lo), phi = side_pressure(sk12, s, r.hi);
    c.add(3, "bracket [" + real(r.lo) + ", " + real(r.hi) + "] changes sign", "p(lo) < 0 < p(hi)",
          plo * phi, "-", plo < 0.0 && phi > 0.0 && r.lo < r.t && r.t < r.hi);
    const RootResult r10 = find_t_star(sk10, s);
    const double rel = std::abs(r.t - r10.t) / r.t;
    c.add(3, "t*" + tag + " k=10 vs k=12", "< 1%", rel, "0.01", rel < 0.01);
  }
}

void criterion4(const Ctx& c) {
  const UlamSkeleton sk(c.F, c.cfg.resolution);
  const Theory th = theory(sk);
  for (Side s : {Side::Minus, Side::Plus}) {
    const double t = s == Side::Minus ? th.minus.t : th.plus.t;
    TailOptions o;
    o.eps = geometric_grid(1e-1, 1e-3, 8);
    o.n_samples = c.scale.tail;
    o.seed = c.cfg.seed;
    o.method = TailMethod::Tilted;
    o.tilt = t;
    o.tilt_resolution = c.cfg.resolution;
    const TailResult r = tail_exponent(c.F, s, o);
    const double rel = std::abs(r.fit.slope - t) / t;
    c.add(4, std::string("tail slope ") + (s == Side::Minus ? "-" : "+") + " vs t*", real(t),
          r.fit.slope, "15% rel", rel <= 0.15 && r.fit.flags.empty());
    c.note(4, std::string("tail slope std error ") + (s == Side::Minus ? "-" : "+"), r.fit.slope_se);
  }
}

bool significant(const ScalingFit& f) { return f.slope - 3.0 * f.slope_se > 0.05; }

void criterion5(const Ctx& c) {
  const UlamSkeleton sk(c.F, c.cfg.resolution);
  const Theory th = theory(sk);
  LyapunovOptions lo;
  lo.n_samples = c.scale.lyapunov;
  lo.seed = c.cfg.seed;
  const double lm = lyapunov_graph(c.F, MeasureSpec::acip(), Side::Minus, lo).value;
  const double base = base_lyapunov(c.F, MeasureSpec::acip(), lo);
  const double theo = stability_theoretical(
      {StabilityRowKind::BelowCritical, lm, 0.0, base, th.minus.t, th.plus.t});
  const double e_minus = c.F.fibres().lower();
  double mean = 0.0;
  for (std::size_t p = 0; p < c.scale.stability_points; ++p) {
    const SymbolicPoint w = random_point(c.F.base(), Rng(StreamKey{c.cfg.seed, "verify-stability", p}));
    const double pc = critical_graph(c.F, w);
    StabilityOptions o;
    o.n_samples = c.scale.stability;
    o.seed = derive_seed(StreamKey{c.cfg.seed, "verify-stability-square", p});
    const std::string at = "point " + std::to_string(p) + " (w=" +
                           real(symbolic_embed(c.F.base(), w)) + ")";

    const StabilityResult mid = stability_empirical(c.F, w, 0.5 * (e_minus + pc), o);
    const double rel = std::abs(mid.plus.slope - theo) / theo;
    mean += mid.plus.slope;
    c.add(5, "sigma+ slope below phi_c, " + at, real(theo), mid.plus.slope, "25% rel", rel <= 0.25);
    c.add(5, "|sigma- slope| below phi_c, " + at, "< 0.05", mid.minus.slope, "0.05",
          std::abs(mid.minus.slope) < 0.05);
    c.add(5, "exclusivity below phi_c, " + at, "<= 1 positive", significant(mid.plus) + significant(mid.minus),
          "-", !(significant(mid.plus) && significant(mid.minus)));

    const StabilityResult on = stability_empirical(c.F, w, pc, o);
    const double worst = std::max(std::abs(on.plus.slope), std::abs(on.minus.slope));
    c.add(5, "max |slope| at phi_c, " + at, "< 0.1", worst, "0.1", worst < 0.1);
    c.add(5, "exclusivity at phi_c, " + at, "<= 1 positive", significant(on.plus) + significant(on.minus),
          "-", !(significant(on.plus) && significant(on.minus)));
  }
  if (c.scale.stability_points)
    c.note(5, "mean sigma+ slope below phi_c", mean / static_cast<double>(c.scale.stability_points));
}

void criterion6(const Ctx& c) {
  const UlamSkeleton sk(c.F, c.cfg.resolution);
  const PhiStar ps = phi_star(sk, theory(sk).stars());
  UncertaintyOptions o;
  o.n_pairs = c.scale.pairs;
  o.seed = c.cfg.seed;
  const UncertaintyResult r = uncertainty_empirical(c.F, 0.0, o);
  c.add(6, "uncertainty slope at x=0", "<= phi + 0.1 = " + real(ps.phi + 0.1), r.fit.slope, "0.1",
        r.fit.slope <= ps.phi + 0.1);
  c.add(6, "uncertainty slope nonnegative", ">= -0.05", r.fit.slope, "0.05", r.fit.slope >= -0.05);
}

void criterion7(const Ctx& c) {
  const SkewProduct G(make_tent_logistic_conjugate(), species_coupling_family(0.5, Check::Skip),
                      Check::Skip);
  const UlamSkeleton sk(G, c.cfg.resolution);
  const Theory th = theory(sk);
  const double gap = std::abs(th.minus.t - th.plus.t);
  c.add(7, "|t*- - t*+| (species)", "0", gap, "1e-6", gap <= 1e-6);
  const PhiStar ps = phi_star(sk, th.stars());
  c.add(7, "|u*| (species)", "0", ps.u_star, "1e-3", std::abs(ps.u_star) <= 1e-3);
  const double psi_half = sk.pressure(th.minus.t / 2.0, th.plus.t / 2.0, 0.0);
  c.add(7, "phi + psi(t*/2, t*/2, 0)", "0", ps.phi + psi_half, "1e-3",
        std::abs(ps.phi + psi_half) <= 1e-3);
  c.note(7, "phi + psi(t*/2, t*/2, 0) / log 2", ps.phi + psi_half / std::log(2.0));

  Rng rng(StreamKey{c.cfg.seed, "verify-psi-box", 0});
  double worst = 0.0;
  for (int i = 0; i < 16; ++i) {
    const double lm = rng.uniform(-2.0, 2.0), lp = rng.uniform(-2.0, 2.0), ls = rng.uniform(-2.0, 2.0);
    const double dev = sk.pressure(lm, lp, ls) - sk.pressure(lm, lp, 0.0) - ls * std::log(2.0);
    worst = std::max(worst, std::abs(dev));
  }
  c.add(7, "max |psi(l,ls) - psi(l,0) - ls log 2| on box", "0", worst, "1e-3", worst <= 1e-3);
}

void criterion8(const Ctx& c) {
  LyapunovOptions lo;
  lo.n_samples = c.scale.lyapunov;
  lo.seed = c.cfg.seed;
  const SignConditionReport rep = check_sign_conditions(c.F, candidate_measures(), lo);
  double worst_sum = rep.acip.minus.value + rep.acip.plus.value;
  for (const auto& m : rep.candidates) worst_sum = std::max(worst_sum, m.minus.value + m.plus.value);
  c.add(8, "max lambda(e-) + lambda(e+) over tested measures", "< 0", worst_sum, "-",
        rep.sums_negative);

  StabilityOptions so;
  so.eps = geometric_grid(1e-1, 1e-3, 4);
  so.n_samples = 500;
  so.seed = c.cfg.seed;
  const SymbolicPoint w = random_point(c.F.base(), Rng(StreamKey{c.cfg.seed, "verify-shares", 0}));
  const StabilityResult st = stability_empirical(c.F, w, 0.0, so);
  std::size_t mismatched = 0;
  for (const auto& r : st.rows)
    if (r.minus + r.plus + r.undecided != r.samples) ++mismatched;
  c.add(8, "rows where minus + plus + undecided != samples", "0", static_cast<double>(mismatched),
        "exact", mismatched == 0);

  const UlamSkeleton sk(c.F, c.cfg.resolution);
  const Theory th = theory(sk);
  const double hm = h_of_u(sk, th.stars(), -1.0), hp = h_of_u(sk, th.stars(), 1.0);
  c.add(8, "|h(-1)|", "0", hm, "1e-6", std::abs(hm) <= 1e-6);
  c.add(8, "|h(+1)|", "0", hp, "1e-6", std::abs(hp) <= 1e-6);
  std::vector<double> h;
  for (int i = 0; i <= 20; ++i) h.push_back(h_of_u(sk, th.stars(), -1.0 + i / 10.0));
  double worst_curv = -HUGE_VAL;
  for (std::size_t i = 1; i + 1 < h.size(); ++i)
    worst_curv = std::max(worst_curv, h[i - 1] + h[i + 1] - 2.0 * h[i]);
  c.add(8, "max second difference of h", "<= 0", worst_curv, "1e-7", worst_curv <= 1e-7);

  Potential shifted;
  shifted.minus = 0.7;
  shifted.plus = -0.3;
  Potential plain = shifted;
  shifted.shift = 1.25;
  const double d = sk.build(shifted).log_spectral_radius() - sk.build(plain).log_spectral_radius();
  c.add(8, "constant shift moves pressure by the shift", "1.25", d, "1e-12", std::abs(d - 1.25) <= 1e-12);

  const MarkovBaseMap& S = c.F.base();
  struct Orbit {
    std::vector<Digit> word;
    double value;
    const char* name;
  };
  for (const Orbit& o : {Orbit{{0, 0, 0, 1}, 1.0 / 15.0, "w4 = 1/15"},
                         Orbit{{0, 1, 0, 1, 1}, 11.0 / 31.0, "w5 = 11/31"}}) {
    const double w0 = periodic_point(S, o.word);
    double w = w0;
    for (std::size_t i = 0; i < o.word.size(); ++i) w = S.eval(w);
    c.add(8, std::string("periodic point ") + o.name, real(o.value), w0, "1e-10",
          std::abs(w0 - o.value) <= 1e-10);
    c.add(8, std::string("S^p residual ") + o.name, "0", std::abs(w - w0), "1e-10",
          std::abs(w - w0) <= 1e-10);
  }

  const CriticalParams cp;
  const std::size_t n = c.scale.equivariance;
  std::vector<double> residual(n, HUGE_VAL);
  parallel_for(n, [&](std::size_t i) {
    const SymbolicPoint p = random_point(S, Rng(StreamKey{c.cfg.seed, "verify-equivariance", i}));
    try {
      const double here = critical_graph(c.F, p, cp);
      const double next = critical_graph(c.F, symbolic_step(p), cp);
      DrivenOrbit orbit(c.F, p);
      residual[i] = std::abs(orbit.step(0, here) - next);
    } catch (const UndecidedBracket&) {
    }
  });
  const auto good = std::count_if(residual.begin(), residual.end(),
                                  [&](double r) { return r <= 10.0 * cp.tol; });
  const double share = static_cast<double>(good) / static_cast<double>(n);
  c.add(8, "share of samples with phi_c equivariance residual <= 10 tol", ">= 0.95", share, "-",
        share >= 0.95);
}

std::string determinism_fingerprint(const Ctx& c) {
  std::string out;
  TailOptions to;
  to.eps = geometric_grid(1e-1, 1e-2, 4);
  to.n_samples = 300;
  to.seed = c.cfg.seed;
  to.method = TailMethod::Tilted;
  to.tilt_resolution = 8;
  for (const auto& r : tail_exponent(c.F, Side::Minus, to).rows)
    out += format_real(r.eps) + "," + format_real(r.estimate) + "\n";
  UncertaintyOptions uo;
  uo.eps = to.eps;
  uo.n_pairs = 300;
  uo.seed = c.cfg.seed;
  for (const auto& r : uncertainty_empirical(c.F, 0.0, uo).rows)
    out += format_real(r.eps) + "," + std::to_string(r.disagree) + "\n";
  return out;
}

void criterion9(const Ctx& c) {
  const std::size_t previous = thread_count();
  set_thread_count(1);
  const std::string one = determinism_fingerprint(c);
  set_thread_count(3);
  const std::string three = determinism_fingerprint(c);
  set_thread_count(previous);
  c.add(9, "sampler output identical with 1 and 3 threads", "identical", one == three, "bytes",
        one == three);
}

void criterion10(const Ctx& c) {
  const double eta = diffusion_eta(-0.25, 0.125);
  c.add(10, "eta(-1/4, 1/8)", "2", eta, "exact", eta == 2.0);
  const double p0 = diffusion_phi(-0.5, 0.25);
  c.add(10, "diffusion phi(-1/2, 1/4, c=0)", "0.5", p0, "exact", p0 == 0.5);
  const double p1 = diffusion_phi(-0.5, 0.25, 1.0);
  c.add(10, "diffusion phi(-1/2, 1/4, c=1)", "-0.5", p1, "exact", p1 == -0.5);

  std::vector<double> rel, lambda;
  for (double a : {0.62, 0.58, 0.56, 0.54, 0.52, 0.51}) {
    const SkewProduct G(c.F.base(), arctan_family(a, c.cfg.b, c.cfg.c, c.cfg.d));
    const UlamSkeleton sk(G, c.cfg.resolution);
    const double l = side_pressure_slope(sk, Side::Minus);
    const double D = diffusion_coefficient(sk, Side::Minus);
    const double t = find_t_star(sk, Side::Minus).t;
    lambda.push_back(l);
    rel.push_back(std::abs(t - diffusion_eta(l, D)) / t);
    c.note(10, "a=" + real(a) + ": lambda(e-) = " + real(l) + ", |t* - eta| / t*", rel.back());
  }
  bool towards_zero = true, decreasing = true;
  for (std::size_t i = 1; i < rel.size(); ++i) {
    towards_zero = towards_zero && lambda[i] > lambda[i - 1] && lambda[i] < 0.0;
    decreasing = decreasing && rel[i] < rel[i - 1];
  }
  c.add(10, "path sends lambda(e-) to 0-", "increasing, < 0", lambda.back(), "-", towards_zero);
  c.add(10, "|t* - eta| / t* decreasing along the path", "decreasing", rel.back(), "trend", decreasing);
}

}  // namespace

bool VerifyReport::criterion_pass(int c) const {
  bool seen = false;
  for (const Claim& cl : claims)
    if (cl.criterion == c) {
      seen = true;
      if (cl.gating && !cl.pass) return false;
    }
  return seen && !aborted;
}

bool VerifyReport::pass() const {
  if (aborted) return false;
  return std::all_of(claims.begin(), claims.end(),
                     [](const Claim& c) { return !c.gating || c.pass; });
}

VerifyReport run_verify(const ExperimentConfig& cfg_in, const VerifyOptions& opt) {
  ExperimentConfig cfg = cfg_in;
  cfg.model = "arctan";
  const SkewProduct F = opt.fault == "endpoint" ? corrupted(cfg) : make_system(cfg);
  if (!opt.fault.empty() && opt.fault != "endpoint")
    throw ParameterError("unknown fault '" + opt.fault + "' (known: endpoint)");

  VerifyReport rep;
  const Ctx ctx{cfg, opt.quick ? kQuick : kFull, F, rep.claims};
  criterion0(ctx);
  if (std::any_of(rep.claims.begin(), rep.claims.end(), [](const Claim& c) { return !c.pass; })) {
    rep.aborted = true;
    return rep;
  }
  const std::vector<std::function<void(const Ctx&)>> all = {
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9, criterion10};
  for (int i = 1; i <= 10; ++i)
    if (opt.criteria.empty() || opt.criteria.count(i)) all[static_cast<std::size_t>(i - 1)](ctx);
  return rep;
}

std::string format_table(const VerifyReport& r) {
  std::size_t wc = 5, we = 8, wt = 9;
  for (const Claim& c : r.claims) {
    wc = std::max(wc, c.claim.size());
    we = std::max(we, c.expected.size());
    wt = std::max(wt, c.tolerance.size());
  }
  auto pad = [](std::string s, std::size_t w) { return s.append(w > s.size() ? w - s.size() : 0, ' '); };
  std::string out = pad("#", 3) + "  " + pad("claim", wc) + "  " + pad("expected", we) + "  " +
                    pad("observed", 14) + "  " + pad("tolerance", wt) + "  result\n";
  for (const Claim& c : r.claims) {
    const char* res = !c.gating ? "info" : c.pass ? "PASS" : "FAIL";
    out += pad(std::to_string(c.criterion), 3) + "  " + pad(c.claim, wc) + "  " + pad(c.expected, we) +
           "  " + pad(real(c.observed), 14) + "  " + pad(c.tolerance, wt) + "  " + res + "\n";
  }
  if (r.aborted) out += "model validation failed; criteria not run\n";
  return out;
}

Csv verify_csv(const VerifyReport& r) {
  Csv csv({"criterion", "claim", "expected", "observed", "tolerance", "gating", "pass"});
  for (const Claim& c : r.claims) {
    csv << static_cast<std::size_t>(c.criterion) << c.claim << c.expected << c.observed << c.tolerance
        << (c.gating ? "yes" : "no") << (c.pass ? "pass" : "fail");
    csv.end_row();
  }
  return csv;
}

}  // namespace skewlab::cli
