#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "skewlab/error.hpp"
#include "skewlab/estimators.hpp"
#include "skewlab/parallel.hpp"
#include "support.hpp"

using namespace skewlab;

namespace {

SkewProduct example(double a = 0.9) { return SkewProduct(make_doubling(), arctan_family(a, 0.4, 0.9, 0.8)); }

std::vector<ScalingPoint> power_law(double exponent, double scale, std::size_t n = 8) {
  std::vector<ScalingPoint> pts;
  for (double e : geometric_grid(0.1, 1e-3, n)) pts.push_back({e, scale * std::pow(e, exponent)});
  return pts;
}

}  // namespace

TEST(LogLogFit, ExactPowerLaws) {
  const ScalingFit sq = loglog_fit(power_law(2.0, 1.0));
  EXPECT_NEAR(sq.slope, 2.0, 1e-12);
  EXPECT_NEAR(sq.rms_residual, 0.0, 1e-12);
  EXPECT_EQ(sq.points, 8u);
  const ScalingFit flat = loglog_fit(power_law(0.0, 3.0));
  EXPECT_EQ(flat.slope, 0.0);
  EXPECT_EQ(flat.rms_residual, 0.0);
}

TEST(LogLogFit, NoisyPowerLaw) {
  Rng rng(StreamKey{7, "noise", 0});
  std::vector<ScalingPoint> pts;
  for (double e : geometric_grid(0.1, 1e-3, 12)) pts.push_back({e, std::pow(e, 1.5) * std::exp(0.05 * (rng.uniform() - 0.5) * 3.4)});
  const ScalingFit f = loglog_fit(pts);
  EXPECT_NEAR(f.slope, 1.5, 0.05);
  EXPECT_GT(f.slope_se, 0.0);
}

TEST(LogLogFit, ScaleInvariance) {
  test::for_all(50, "rescale", [](Rng& r) { return std::pair{r.uniform(-1, 3), r.uniform(-40, 40)}; },
                [](std::pair<double, double> c) {
                  const double base = loglog_fit(power_law(c.first, 1.0)).slope;
                  const double pow2 = std::ldexp(1.0, static_cast<int>(c.second));
                  EXPECT_EQ(loglog_fit(power_law(c.first, pow2)).slope, base);
                  EXPECT_NEAR(loglog_fit(power_law(c.first, 3.7)).slope, base, 1e-12);
                });
}

TEST(LogLogFit, RejectsBadInput) {
  EXPECT_THROW(loglog_fit(power_law(1.0, 1.0, 3)), EstimationError);
  auto pts = power_law(1.0, 1.0);
  pts[2].value = 0.0;
  EXPECT_THROW(loglog_fit(pts), EstimationError);
  pts[2].value = -1.0;
  EXPECT_THROW(loglog_fit(pts), EstimationError);
}

TEST(GeometricGrid, EndpointsAndRatio) {
  const auto g = geometric_grid(0.1, 1e-3, 8);
  ASSERT_EQ(g.size(), 8u);
  EXPECT_DOUBLE_EQ(g.front(), 0.1);
  EXPECT_NEAR(g.back(), 1e-3, 1e-18);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], g[1] / g[0], 1e-12);
}

TEST(StabilityTheory, RowsAndSigns) {
  StabilityCase c;
  c.lambda_minus = -0.2;
  c.lambda_plus = -0.3;
  c.base_exponent = std::log(2.0);
  c.t_minus = 2.0;
  c.t_plus = 8.0;
  c.row = StabilityRowKind::AtCritical;
  EXPECT_EQ(stability_theoretical(c), 0.0);
  c.row = StabilityRowKind::BelowCritical;
  EXPECT_GT(stability_theoretical(c), 0.0);
  c.row = StabilityRowKind::AboveCritical;
  EXPECT_LT(stability_theoretical(c), 0.0);
  c.row = StabilityRowKind::AtMinus;
  c.lambda_minus = 0.1;
  EXPECT_GT(stability_theoretical(c), 0.0);
  c.lambda_minus = 1.0;
  EXPECT_THROW(stability_theoretical(c), UnsupportedCase);
  c.row = StabilityRowKind::BelowCritical;
  c.lambda_minus = 0.1;
  EXPECT_THROW(stability_theoretical(c), DomainError);
}

TEST(StabilityEmpirical, SharesAndExclusivity) {
  const SkewProduct F = example();
  StabilityOptions o;
  o.eps = geometric_grid(0.1, 0.005, 5);
  o.n_samples = 1500;
  for (std::size_t p = 0; p < 3; ++p) {
    SCOPED_TRACE(p);
    const SymbolicPoint w = random_point(F.base(), Rng(StreamKey{3, "stability-test", p}));
    const double pc = critical_graph(F, w);
    const double x = (pc + F.fibres().fibre().lo) / 2;
    o.seed = p + 1;
    const StabilityResult r = stability_empirical(F, w, x, o);
    for (const StabilityRow& row : r.rows) {
      EXPECT_EQ(row.minus + row.plus + row.undecided, row.samples);
      EXPECT_NEAR(row.share_minus + row.share_plus, 1.0 - row.share_undecided, 1e-12);
    }
    const bool sig_minus = r.minus.slope - 3 * r.minus.slope_se > 0.05;
    const bool sig_plus = r.plus.slope - 3 * r.plus.slope_se > 0.05;
    EXPECT_FALSE(sig_minus && sig_plus);
  }
}

TEST(Uncertainty, ProbabilitiesAndSlope) {
  const SkewProduct F = example();
  UncertaintyOptions o;
  o.eps = geometric_grid(0.1, 0.005, 5);
  o.n_pairs = 3000;
  const UncertaintyResult r = uncertainty_empirical(F, 0.0, o);
  for (const UncertaintyRow& row : r.rows) {
    EXPECT_GE(row.probability, 0.0);
    EXPECT_LE(row.probability, 1.0);
    EXPECT_LE(row.disagree + row.undecided, row.pairs);
  }
  EXPECT_GE(r.fit.slope, -0.05);
}

TEST(Tail, PlainAndTiltedAgree) {
  const SkewProduct F = example();
  TailOptions o;
  o.eps = {0.1, 0.07, 0.05, 0.035};
  o.n_samples = 3000;
  o.method = TailMethod::Plain;
  const TailResult plain = tail_exponent(F, Side::Minus, o);
  o.method = TailMethod::Tilted;
  o.tilt = 2.0;
  const TailResult tilted = tail_exponent(F, Side::Minus, o);
  ASSERT_EQ(plain.rows.size(), tilted.rows.size());
  for (std::size_t i = 0; i < plain.rows.size(); ++i) {
    const TailRow &a = plain.rows[i], &b = tilted.rows[i];
    const double se = std::hypot(a.std_error, b.std_error);
    EXPECT_NEAR(a.estimate, b.estimate, 4 * se) << "eps " << a.eps;
  }
  EXPECT_GT(plain.fit.slope, 0.0);
  EXPECT_GT(tilted.fit.slope, 0.0);
}

TEST(Tail, TruncatesEmptyBins) {
  const SkewProduct F = example();
  TailOptions o;
  o.eps = {0.2, 0.15, 0.1, 0.07, 0.05, 1e-5, 1e-6};
  o.n_samples = 4000;
  o.method = TailMethod::Plain;
  const TailResult r = tail_exponent(F, Side::Minus, o);
  EXPECT_GE(r.fit.points, 4u);
  EXPECT_LT(r.fit.points, o.eps.size());
  ASSERT_FALSE(r.fit.flags.empty());
  EXPECT_NE(r.fit.flags.front().find("truncated"), std::string::npos);
  o.eps = geometric_grid(1e-5, 1e-7, 4);
  EXPECT_THROW(tail_exponent(F, Side::Minus, o), EstimationError);
}

TEST(Tail, DeterministicAcrossThreadCounts) {
  const SkewProduct F = example();
  TailOptions o;
  o.eps = {0.1, 0.05, 0.025, 0.0125};
  o.n_samples = 300;
  o.method = TailMethod::Tilted;
  o.tilt = 2.0;
  set_thread_count(1);
  const TailResult one = tail_exponent(F, Side::Minus, o);
  set_thread_count(3);
  const TailResult three = tail_exponent(F, Side::Minus, o);
  set_thread_count(0);
  EXPECT_EQ(one.fit.slope, three.fit.slope);
  for (std::size_t i = 0; i < one.rows.size(); ++i) EXPECT_EQ(one.rows[i].estimate, three.rows[i].estimate);
}

TEST(BoxDimension, SmoothGraphsHaveDimensionOne) {
  const std::size_t n = 4096;
  std::vector<double> w(n), flat(n, 0.25), line(n), wave(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = (static_cast<double>(i) + 0.5) / n;
    line[i] = 0.3 * w[i] - 0.1;
    wave[i] = std::sin(6.0 * w[i]);
  }
  const auto sizes = dyadic_box_sizes(n);
  const BoxDimension c = box_dimension(w, flat, sizes);
  EXPECT_TRUE(c.degenerate);
  EXPECT_NEAR(c.fit.slope, 1.0, 0.05);
  EXPECT_NEAR(box_dimension(w, line, sizes).fit.slope, 1.0, 0.05);
  // steep sections inflate the coarse counts
  EXPECT_NEAR(box_dimension(w, wave, sizes).fit.slope, 1.0, 0.1);
  EXPECT_FALSE(box_dimension(w, wave, sizes).degenerate);
}

TEST(BoxDimension, WeierstrassGraph) {
  // sum 2^{-k/2} cos(2^k pi w) has box dimension 1.5
  const std::size_t n = 1 << 14;
  std::vector<double> w(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = (static_cast<double>(i) + 0.5) / n;
    for (int k = 0; k < 20; ++k) y[i] += std::pow(2.0, -0.5 * k) * std::cos(std::ldexp(M_PI, k) * w[i]);
  }
  EXPECT_NEAR(box_dimension(w, y, dyadic_box_sizes(n)).fit.slope, 1.5, 0.1);
}

TEST(BoxDimension, AgreesWithPressureZeroInUniformRegime) {
  const SkewProduct F = example(1.2);
  const std::size_t n = 4096;
  const MarkovBaseMap& S = F.base();
  std::vector<double> w(n), y(n);
  parallel_for(n, [&](std::size_t i) {
    w[i] = (static_cast<double>(i) + 0.5) / n;
    y[i] = critical_graph(F, point_near(S, w[i], Rng(StreamKey{1, "box-check", i})));
  });
  const BoxDimension box = box_dimension(w, y, dyadic_box_sizes(n));
  const UlamSkeleton sk(F, 10);
  std::vector<double> cells(sk.size());
  parallel_for(sk.size(), [&](std::size_t c) {
    cells[c] = critical_graph(F, point_near(S, sk.midpoint(c), Rng(StreamKey{1, "box-cells", c})));
  });
  const BedfordResult b = bedford_dimension(sk, cells);
  EXPECT_LE(b.residual, 1e-6);
  EXPECT_NEAR(box.fit.slope, b.t, 0.1 * b.t);
}
