#include "pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "output.hpp"
#include "skewlab/estimators.hpp"
#include "skewlab/parallel.hpp"

namespace skewlab::cli {

namespace {

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

std::string word_label(const MeasureSpec& m) { return m.label(); }

LyapunovOptions lyapunov_options(const ExperimentConfig& cfg) {
  LyapunovOptions o;
  o.n_samples = cfg.lyapunov_samples;
  o.seed = cfg.seed;
  return o;
}

enum class Needs { Family, Intermingling };

/// Model check that throws when a required condition fails. Family-only
/// pipelines also run in the regime where the endpoint graphs attract uniformly.
void require_model(const SkewProduct& F, const ExperimentConfig& cfg, Needs needs) {
  const ModelCheck mc = check_model(F, cfg, needs == Needs::Intermingling);
  if (!mc.ok()) throw HypothesisFailure(mc.violations);
}

void report_fit(RunRecorder& rec, const std::string& prefix, const ScalingFit& fit) {
  rec.note(prefix + ".slope", format_real(fit.slope));
  if (!fit.flags.empty()) rec.note(prefix + ".flags", join(fit.flags, "; "));
}

Csv fit_csv() {
  return Csv({"quantity", "slope", "slope_se", "intercept", "rms_residual", "eps_min", "eps_max",
              "points", "flags"});
}

void fit_row(Csv& csv, const std::string& name, const ScalingFit& f) {
  csv << name << f.slope << f.slope_se << f.intercept << f.rms_residual << f.eps_min << f.eps_max
      << f.points << join(f.flags, "; ");
  csv.end_row();
}

std::vector<std::filesystem::path> run_validate(const ExperimentConfig& cfg, RunRecorder& rec) {
  const SkewProduct F = make_system(cfg);
  const ModelCheck mc = check_model(F, cfg);

  Csv checks({"check", "observed", "threshold", "required", "pass"});
  auto row = [&](const std::string& name, double obs, double thr, bool required, bool pass) {
    checks << name << obs << thr << (required ? "yes" : "no") << (pass ? "pass" : "fail");
    checks.end_row();
  };
  row("endpoint_invariance", mc.family.max_endpoint_error, 1e-12, true, mc.family.endpoints_ok);
  row("monotonicity", mc.family.min_deriv, 0.0, true, mc.family.monotone);
  row("negative_schwarzian", mc.family.max_schwarzian, 0.0, true, mc.family.negative_schwarzian);
  row("acip_minus_contracting", mc.signs.acip.minus.value, 0.0, true, mc.signs.acip_minus_negative);
  row("acip_plus_contracting", mc.signs.acip.plus.value, 0.0, true, mc.signs.acip_plus_negative);
  double top_minus = -HUGE_VAL, top_plus = -HUGE_VAL, top_sum = -HUGE_VAL;
  for (const auto& m : mc.signs.candidates) {
    top_minus = std::max(top_minus, m.minus.value);
    top_plus = std::max(top_plus, m.plus.value);
    top_sum = std::max(top_sum, m.minus.value + m.plus.value);
  }
  top_sum = std::max(top_sum, mc.signs.acip.minus.value + mc.signs.acip.plus.value);
  row("expanding_measure_minus", top_minus, 0.0, true, mc.signs.has_expanding_minus);
  row("expanding_measure_plus", top_plus, 0.0, true, mc.signs.has_expanding_plus);
  row("exponent_sums_negative", top_sum, 0.0, false, mc.signs.sums_negative);
  rec.write("validate.csv", checks);

  Csv measures({"measure", "lambda_minus", "se_minus", "lambda_plus", "se_plus", "sum"});
  auto mrow = [&](const MeasureExponents& m) {
    measures << word_label(m.measure) << m.minus.value << m.minus.std_error << m.plus.value
             << m.plus.std_error << (m.minus.value + m.plus.value);
    measures.end_row();
  };
  mrow(mc.signs.acip);
  for (const auto& m : mc.signs.candidates) mrow(m);
  rec.write("measures.csv", measures);

  if (!mc.ok()) {
    rec.note("violations", join(mc.violations, "; "));
    rec.finish("fail");
    throw HypothesisFailure(mc.violations);
  }
  return rec.finish("pass");
}

std::vector<std::filesystem::path> run_basin_grid(const ExperimentConfig& cfg, RunRecorder& rec) {
  const SkewProduct F = make_system(cfg);
  require_model(F, cfg, Needs::Family);
  const BasinGrid g = basin_grid(F, cfg.grid_w, cfg.grid_x, cfg.seed);

  std::vector<std::string> header = {"row", "x"};
  for (std::size_t j = 0; j < g.n_w; ++j) header.push_back("col_" + std::to_string(j));
  Csv labels(header);
  std::size_t counts[3] = {0, 0, 0};
  for (std::size_t r = 0; r < g.n_x; ++r) {
    labels << r << g.fibre_coord(r);
    for (std::size_t j = 0; j < g.n_w; ++j) {
      const BasinLabel l = g.at(r, j);
      ++counts[static_cast<int>(l)];
      labels << (l == BasinLabel::Minus ? "-1" : l == BasinLabel::Plus ? "1" : "0");
    }
    labels.end_row();
  }
  rec.write("basin_grid.csv", labels);

  Csv columns({"col", "w"});
  for (std::size_t j = 0; j < g.n_w; ++j) {
    columns << j << g.base_coord(j);
    columns.end_row();
  }
  rec.write("basin_columns.csv", columns);

  if (cfg.grid_image) {
    std::string pgm = "P5\n" + std::to_string(g.n_w) + " " + std::to_string(g.n_x) + "\n255\n";
    for (std::size_t r = g.n_x; r-- > 0;)  // top image row is x = e+
      for (std::size_t j = 0; j < g.n_w; ++j) {
        const BasinLabel l = g.at(r, j);
        pgm += static_cast<char>(l == BasinLabel::Minus ? 0 : l == BasinLabel::Plus ? 255 : 128);
      }
    rec.write("basin_grid.pgm", pgm);
  }
  rec.note("labels.minus", std::to_string(counts[0]));
  rec.note("labels.plus", std::to_string(counts[1]));
  rec.note("labels.undecided", std::to_string(counts[2]));
  return rec.finish("pass");
}

TailOptions tail_options(const ExperimentConfig& cfg, double tilt) {
  TailOptions o;
  o.eps = eps_grid(cfg);
  o.n_samples = cfg.samples;
  o.seed = cfg.seed;
  o.method = cfg.tail_method == "plain" ? TailMethod::Plain : TailMethod::Tilted;
  o.tilt = tilt;
  o.tilt_resolution = cfg.resolution;
  return o;
}

std::vector<std::filesystem::path> run_phi_profile(const ExperimentConfig& cfg, RunRecorder& rec) {
  const SkewProduct F = make_system(cfg);
  require_model(F, cfg, Needs::Intermingling);
  const UlamSkeleton sk(F, cfg.resolution);
  const Theory th = theory(sk);

  Csv rows({"side", "method", "eps", "estimate", "std_error", "hits", "samples", "dropped"});
  Csv fits({"side", "method", "slope", "slope_se", "rms_residual", "t_star", "relative_error",
            "drop_rate", "flags"});
  for (Side side : {Side::Minus, Side::Plus}) {
    const double t = side == Side::Minus ? th.minus.t : th.plus.t;
    const TailResult r = tail_exponent(F, side, tail_options(cfg, t));
    for (const auto& row : r.rows) {
      rows << std::string(to_string(side)) << cfg.tail_method << row.eps << row.estimate
           << row.std_error << row.hits << row.samples << row.dropped;
      rows.end_row();
    }
    fits << std::string(to_string(side)) << cfg.tail_method << r.fit.slope << r.fit.slope_se
         << r.fit.rms_residual << t << std::abs(r.fit.slope - t) / t << r.drop_rate()
         << join(r.fit.flags, "; ");
    fits.end_row();
    report_fit(rec, "tail_" + std::string(to_string(side)), r.fit);
  }
  rec.write("phi_profile.csv", rows);
  rec.write("tail_fit.csv", fits);
  return rec.finish("pass");
}

std::vector<std::filesystem::path> run_pressure(const ExperimentConfig& cfg, RunRecorder& rec) {
  const SkewProduct F = make_system(cfg);
  require_model(F, cfg, Needs::Intermingling);
  const UlamSkeleton sk(F, cfg.resolution);
  const Theory th = theory(sk);
  const PhiStar ps = phi_star(sk, th.stars());

  Csv q({"quantity", "value"});
  auto put = [&](const std::string& k, double v) {
    q << k << v;
    q.end_row();
  };
  put("resolution", static_cast<double>(cfg.resolution));
  put("psi_000", sk.pressure(0, 0, 0));
  for (Side side : {Side::Minus, Side::Plus}) {
    const std::string s(to_string(side));
    const RootResult& r = side == Side::Minus ? th.minus : th.plus;
    const double slope = side_pressure_slope(sk, side);
    const double D = diffusion_coefficient(sk, side);
    put("t_star_" + s, r.t);
    put("t_star_" + s + "_residual", r.residual);
    put("t_star_" + s + "_bracket_lo", r.lo);
    put("t_star_" + s + "_bracket_hi", r.hi);
    put("pressure_slope_" + s, slope);
    put("diffusion_" + s, D);
    if (slope < 0.0 && D > 0.0) {
      put("eta_" + s, diffusion_eta(slope, D));
      put("diffusion_phi_" + s, diffusion_phi(slope, D));
    }
  }
  put("u_star", ps.u_star);
  put("phi", ps.phi);
  rec.write("pressure.csv", q);

  Csv sweep({"u", "lambda_minus", "lambda_plus", "h"});
  for (int i = 0; i <= 40; ++i) {
    const double u = -1.0 + i / 20.0;
    sweep << u << (1.0 - u) * th.minus.t / 2.0 << (1.0 + u) * th.plus.t / 2.0
          << h_of_u(sk, th.stars(), u);
    sweep.end_row();
  }
  rec.write("pressure_sweep.csv", sweep);
  rec.note("t_star_minus", format_real(th.minus.t));
  rec.note("t_star_plus", format_real(th.plus.t));
  rec.note("u_star", format_real(ps.u_star));
  rec.note("phi", format_real(ps.phi));
  return rec.finish("pass");
}

std::vector<std::filesystem::path> run_stability(const ExperimentConfig& cfg, RunRecorder& rec) {
  const SkewProduct F = make_system(cfg);
  require_model(F, cfg, Needs::Intermingling);
  const UlamSkeleton sk(F, cfg.resolution);
  const Theory th = theory(sk);
  const LyapunovOptions lo = lyapunov_options(cfg);
  const double lm = lyapunov_graph(F, MeasureSpec::acip(), Side::Minus, lo).value;
  const double lp = lyapunov_graph(F, MeasureSpec::acip(), Side::Plus, lo).value;
  const double base = base_lyapunov(F, MeasureSpec::acip(), lo);

  Csv rows({"point", "row", "w", "x", "eps", "samples", "minus", "plus", "undecided", "share_minus",
            "share_plus", "share_undecided"});
  Csv summary({"point", "row", "w", "x", "phi_c", "sigma_minus", "sigma_minus_se", "sigma_plus",
               "sigma_plus_se", "sigma_empirical", "sigma_theoretical", "flags"});
  const double e_minus = F.fibres().lower();
  for (std::size_t p = 0; p < cfg.stability_points; ++p) {
    const SymbolicPoint w = random_point(F.base(), Rng(StreamKey{cfg.seed, "stability-points", p}));
    const double w0 = symbolic_embed(F.base(), w);
    const double pc = critical_graph(F, w);
    struct Case {
      StabilityRowKind kind;
      double x;
    };
    for (const Case c : {Case{StabilityRowKind::BelowCritical, 0.5 * (e_minus + pc)},
                         Case{StabilityRowKind::AtCritical, pc}}) {
      StabilityOptions o;
      o.eps = eps_grid(cfg);
      o.n_samples = cfg.samples;
      o.seed = derive_seed(StreamKey{cfg.seed, "stability-square", p});
      const StabilityResult r = stability_empirical(F, w, c.x, o);
      const int kind = static_cast<int>(c.kind);
      for (const auto& row : r.rows) {
        rows << p << std::to_string(kind) << w0 << c.x << row.eps << row.samples << row.minus
             << row.plus << row.undecided << row.share_minus << row.share_plus << row.share_undecided;
        rows.end_row();
      }
      StabilityCase sc{c.kind, lm, lp, base, th.minus.t, th.plus.t};
      std::vector<std::string> flags = r.minus.flags;
      flags.insert(flags.end(), r.plus.flags.begin(), r.plus.flags.end());
      summary << p << std::to_string(kind) << w0 << c.x << pc << r.minus.slope << r.minus.slope_se
              << r.plus.slope << r.plus.slope_se << (r.plus.slope - r.minus.slope)
              << stability_theoretical(sc) << join(flags, "; ");
      summary.end_row();
    }
  }
  rec.write("stability.csv", rows);
  rec.write("stability_summary.csv", summary);
  return rec.finish("pass");
}

std::vector<std::filesystem::path> run_uncertainty(const ExperimentConfig& cfg, RunRecorder& rec) {
  const SkewProduct F = make_system(cfg);
  require_model(F, cfg, Needs::Intermingling);
  const UlamSkeleton sk(F, cfg.resolution);
  const PhiStar ps = phi_star(sk, theory(sk).stars());
  UncertaintyOptions o;
  o.eps = eps_grid(cfg);
  o.n_pairs = cfg.samples;
  o.seed = cfg.seed;
  const double x = F.fibres().fibre().midpoint();
  const UncertaintyResult r = uncertainty_empirical(F, x, o);

  Csv rows({"eps", "pairs", "disagree", "undecided", "probability"});
  for (const auto& row : r.rows) {
    rows << row.eps << row.pairs << row.disagree << row.undecided << row.probability;
    rows.end_row();
  }
  rec.write("uncertainty.csv", rows);
  Csv fit = fit_csv();
  fit_row(fit, "uncertainty_exponent", r.fit);
  rec.write("uncertainty_fit.csv", fit);
  rec.note("x", format_real(x));
  rec.note("phi", format_real(ps.phi));
  report_fit(rec, "uncertainty", r.fit);
  return rec.finish("pass");
}

std::vector<std::filesystem::path> run_dimension(const ExperimentConfig& cfg, RunRecorder& rec) {
  const SkewProduct F = make_system(cfg);
  require_model(F, cfg, Needs::Family);
  const MarkovBaseMap& S = F.base();
  const Interval I = S.domain();

  const std::size_t n = cfg.dimension_points;
  std::vector<double> ws(n), ys(n);
  std::vector<std::uint8_t> ok(n, 0);
  parallel_for(n, [&](std::size_t i) {
    ws[i] = I.lo + I.length() * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    try {
      ys[i] = critical_graph(F, point_near(S, ws[i], Rng(StreamKey{cfg.seed, "dimension", i})));
      ok[i] = 1;
    } catch (const UndecidedBracket&) {
    }
  });
  std::vector<double> wk, yk;
  Csv graph({"w", "phi_c"});
  for (std::size_t i = 0; i < n; ++i) {
    if (!ok[i]) continue;
    wk.push_back(ws[i]);
    yk.push_back(ys[i]);
    graph << ws[i] << ys[i];
    graph.end_row();
  }
  rec.write("critical_graph.csv", graph);

  const BoxDimension box = box_dimension(wk, yk, dyadic_box_sizes(wk.size(), I.length()));
  Csv counts({"size", "boxes"});
  for (const auto& c : box.counts) {
    counts << c.size << c.boxes;
    counts.end_row();
  }
  rec.write("box_counts.csv", counts);

  const UlamSkeleton sk(F, cfg.resolution);
  std::vector<double> phi_cells(sk.size());
  parallel_for(sk.size(), [&](std::size_t c) {
    phi_cells[c] = critical_graph(
        F, point_near(S, sk.midpoint(c), Rng(StreamKey{cfg.seed, "dimension-cells", c})));
  });
  Csv dims({"method", "dimension", "residual", "valid", "flags"});
  dims << "box_counting" << box.fit.slope << box.fit.rms_residual << (box.degenerate ? "no" : "yes")
       << join(box.fit.flags, "; ");
  dims.end_row();
  try {
    const BedfordResult b = bedford_dimension(sk, phi_cells);
    dims << "pressure_zero" << b.t << b.residual << (b.valid ? "yes" : "no") << "";
  } catch (const NoZeroInRange& e) {
    dims << "pressure_zero" << std::nan("") << std::nan("") << "no" << e.what();
  }
  dims.end_row();
  rec.write("dimension.csv", dims);
  rec.note("dropped_points", std::to_string(n - wk.size()));
  return rec.finish("pass");
}

}  // namespace

HypothesisFailure::HypothesisFailure(std::vector<std::string> violations)
    : Error("model conditions violated: " + join(violations, "; ")),
      violations_(std::move(violations)) {}

std::vector<MeasureSpec> candidate_measures() {
  return {MeasureSpec::periodic({0}), MeasureSpec::periodic({1}),
          MeasureSpec::periodic({0, 0, 0, 1}), MeasureSpec::periodic({0, 1, 0, 1, 1})};
}

ModelCheck check_model(const SkewProduct& F, const ExperimentConfig& cfg, bool signs) {
  ModelCheck mc;
  mc.family = validate_family(F.fibres());
  mc.violations = mc.family.failures;
  if (!signs || !mc.family.endpoints_ok || !mc.family.monotone) return mc;
  mc.signs = check_sign_conditions(F, candidate_measures(), lyapunov_options(cfg));
  if (!mc.signs.pass())
    mc.violations.insert(mc.violations.end(), mc.signs.failures.begin(), mc.signs.failures.end());
  return mc;
}

Theory theory(const UlamSkeleton& sk) {
  return {find_t_star(sk, Side::Minus), find_t_star(sk, Side::Plus)};
}

const std::vector<std::string>& pipeline_names() {
  static const std::vector<std::string> names = {"validate",  "basin-grid",  "phi-profile",
                                                 "pressure",  "stability",   "uncertainty",
                                                 "dimension"};
  return names;
}

std::vector<std::filesystem::path> run_pipeline(const std::string& name, const ExperimentConfig& cfg) {
  using Runner = std::function<std::vector<std::filesystem::path>(const ExperimentConfig&, RunRecorder&)>;
  static const std::map<std::string, Runner> runners = {
      {"validate", run_validate},       {"basin-grid", run_basin_grid},
      {"phi-profile", run_phi_profile}, {"pressure", run_pressure},
      {"stability", run_stability},     {"uncertainty", run_uncertainty},
      {"dimension", run_dimension},
  };
  const auto it = runners.find(name);
  if (it == runners.end()) throw ParameterError("unknown pipeline '" + name + "'");
  RunRecorder rec(std::filesystem::path(cfg.out) / name, name, cfg);
  return it->second(cfg, rec);
}

}  // namespace skewlab::cli
