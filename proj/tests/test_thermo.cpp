#include <gtest/gtest.h>

#include <cmath>

#include "skewlab/error.hpp"
#include "skewlab/thermo.hpp"
#include "support.hpp"

using namespace skewlab;

namespace {

SkewProduct example(double a = 0.9) { return SkewProduct(make_doubling(), arctan_family(a, 0.4, 0.9, 0.8)); }

/// Moebius fibres x / (x + e^{0.2}(1 - x)): f'(0) = e^{-0.2}, f'(1) = e^{0.2} for every w.
SkewProduct constant_contraction() {
  const double k = std::exp(0.2);
  return SkewProduct(make_doubling(),
                     custom_family("moebius", {0, 1}, [k](double, double x) { return x / (x + k * (1 - x)); },
                                   [k](double, double x) {
                                     const double d = x + k * (1 - x);
                                     return k / (d * d);
                                   }),
                     Check::Skip);
}

const UlamSkeleton& example_k10() {
  static const SkewProduct F = example();
  static const UlamSkeleton sk(F, 10);
  return sk;
}

}  // namespace

TEST(Ulam, DoublingAtResolutionOne) {
  const SkewProduct F = example();
  const UlamOperator M = build_ulam(F, {}, 1);
  ASSERT_EQ(M.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(M.entry(i, j), 0.5);
  const SpectralResult s = M.spectral();
  EXPECT_NEAR(std::exp(s.log_radius), 1.0, 1e-14);
  EXPECT_NEAR(s.log_radius, 0.0, 1e-14);

  Potential shifted;
  shifted.shift = 0.3;
  EXPECT_NEAR(build_ulam(F, shifted, 1).log_spectral_radius(), 0.3, 1e-14);
}

TEST(Ulam, ResolutionOverflow) {
  const SkewProduct F = example();
  EXPECT_THROW(UlamSkeleton(F, 21), ResolutionOverflow);
}

TEST(Ulam, ConstantShiftIsExact) {
  const UlamSkeleton& sk = example_k10();
  test::for_all(20, "shift",
                [](Rng& r) { return std::tuple{r.uniform(-3, 3), r.uniform(-3, 3), r.uniform(-1, 1)}; },
                [&](std::tuple<double, double, double> c) {
                  const auto [lm, lp, shift] = c;
                  Potential p;
                  p.minus = lm;
                  p.plus = lp;
                  Potential q = p;
                  q.shift = shift;
                  EXPECT_NEAR(sk.build(q).log_spectral_radius() - sk.build(p).log_spectral_radius(), shift, 1e-12);
                });
}

TEST(Pressure, NormalizedAtZero) {
  const SkewProduct F = example();
  EXPECT_LE(std::abs(pressure(F, 0, 0, 0, 12)), 1e-3);
  const UlamSkeleton& sk = example_k10();
  EXPECT_LE(std::abs(side_pressure(sk, Side::Minus, 0.0)), 1e-3);
  EXPECT_LT(side_pressure_slope(sk, Side::Minus), 0.0);
  EXPECT_LT(side_pressure_slope(sk, Side::Plus), 0.0);
}

TEST(Pressure, BaseCoefficientIsLinearForDoubling) {
  const UlamSkeleton& sk = example_k10();
  test::for_all(20, "base-linear",
                [](Rng& r) { return std::tuple{r.uniform(-2, 4), r.uniform(-2, 8), r.uniform(-2, 2)}; },
                [&](std::tuple<double, double, double> c) {
                  const auto [lm, lp, ls] = c;
                  EXPECT_NEAR(sk.pressure(lm, lp, ls) - sk.pressure(lm, lp, 0), ls * std::log(2.0), 1e-12);
                });
}

TEST(Pressure, SlopeMatchesLyapunovExponent) {
  const SkewProduct F = example();
  const UlamSkeleton sk(F, 12);
  for (Side s : {Side::Minus, Side::Plus}) {
    LyapunovOptions o;
    o.n_samples = 200000;
    const LyapunovEstimate mc = lyapunov_graph(F, MeasureSpec::acip(), s, o);
    const double tol = std::max(0.02 * std::abs(mc.value), 3 * mc.std_error);
    EXPECT_NEAR(side_pressure_slope(sk, s), mc.value, tol);
  }
}

TEST(Pressure, ConvexAlongRandomLines) {
  const UlamSkeleton& sk = example_k10();
  test::for_all(10, "convex",
                [](Rng& r) {
                  std::array<double, 6> v{};
                  for (double& x : v) x = r.uniform(-1, 1);
                  return v;
                },
                [&](const std::array<double, 6>& v) {
                  std::vector<double> p;
                  for (int i = 0; i <= 20; ++i) {
                    const double s = -2.0 + i * 0.2;
                    p.push_back(sk.pressure(v[0] + s * v[3], 2 * v[1] + s * v[4], v[2] + s * v[5]));
                  }
                  for (std::size_t i = 1; i + 1 < p.size(); ++i) EXPECT_GE(p[i - 1] + p[i + 1] - 2 * p[i], -1e-6);
                });
}

TEST(Pressure, IncreasingInBaseCoefficient) {
  const UlamSkeleton& sk = example_k10();
  test::for_all(10, "monotone-base", [](Rng& r) { return std::pair{r.uniform(-2, 3), r.uniform(-2, 8)}; },
                [&](std::pair<double, double> c) {
                  double prev = sk.pressure(c.first, c.second, -2.0);
                  for (int i = 1; i <= 8; ++i) {
                    const double cur = sk.pressure(c.first, c.second, -2.0 + 0.5 * i);
                    EXPECT_GT(cur, prev);
                    prev = cur;
                  }
                });
}

TEST(Pressure, GradientSumIsNegative) {
  const UlamSkeleton& sk = example_k10();
  test::for_all(10, "negative-sum", [](Rng& r) { return std::pair{r.uniform(-1, 3), r.uniform(-1, 8)}; },
                [&](std::pair<double, double> c) {
                  const double h = 1e-4;
                  const auto [lm, lp] = c;
                  const double dm = (sk.pressure(lm + h, lp, 0) - sk.pressure(lm - h, lp, 0)) / (2 * h);
                  const double dp = (sk.pressure(lm, lp + h, 0) - sk.pressure(lm, lp - h, 0)) / (2 * h);
                  EXPECT_LT(dm + dp, 0.0);
                });
}

TEST(Pressure, StableUnderRefinement) {
  const SkewProduct F = example();
  // Midpoint weights leave an O(|lambda| 4^-k) error; the box corners need k = 14.
  const UlamSkeleton k10(F, 10), k14(F, 14), k16(F, 16);
  const TStars ts{find_t_star(k10, Side::Minus).t, find_t_star(k10, Side::Plus).t};
  test::for_all(12, "refine",
                [&](Rng& r) {
                  return std::tuple{r.uniform(-2, 2) * ts.minus, r.uniform(-2, 2) * ts.plus, r.uniform(-2, 2)};
                },
                [&](std::tuple<double, double, double> c) {
                  const auto [lm, lp, ls] = c;
                  EXPECT_LE(std::abs(k14.pressure(lm, lp, ls) - k16.pressure(lm, lp, ls)), 1e-3);
                });
}

TEST(TStar, ExampleRootsAreCertified) {
  const SkewProduct F = example();
  const UlamSkeleton k10(F, 10), k12(F, 12);
  for (Side s : {Side::Minus, Side::Plus}) {
    const RootResult r = find_t_star(k12, s);
    EXPECT_GT(r.t, 0.0);
    EXPECT_LE(r.residual, 1e-8);
    EXPECT_LE(std::abs(side_pressure(k12, s, r.t)), 1e-8);
    EXPECT_LT(side_pressure(k12, s, r.t / 2), 0.0);
    EXPECT_GT(side_pressure(k12, s, 2 * r.t), 0.0);
    EXPECT_LT(r.p_lo, 0.0);
    EXPECT_GT(r.p_hi, 0.0);
    EXPECT_LT(std::abs(find_t_star(k10, s).t - r.t) / r.t, 0.01);
  }
}

TEST(TStar, ConstantContractionHasNoPositiveZero) {
  const SkewProduct F = constant_contraction();
  const UlamSkeleton sk(F, 6);
  EXPECT_NEAR(side_pressure(sk, Side::Minus, 3.0), -0.6, 1e-12);
  EXPECT_THROW(find_t_star(sk, Side::Minus), NoPositiveZero);
  EXPECT_THROW(find_t_star(sk, Side::Plus), NegativeSlopeViolation);
}

TEST(TStar, SpeciesSidesCoincide) {
  const SkewProduct G(make_tent_logistic_conjugate(), species_coupling_family(0.5));
  const UlamSkeleton sk(G, 10);
  const RootResult m = find_t_star(sk, Side::Minus), p = find_t_star(sk, Side::Plus);
  EXPECT_NEAR(m.t, p.t, 1e-6);
  EXPECT_NEAR(m.t, 1.0, 1e-9);
  EXPECT_LT(side_pressure(sk, Side::Minus, 0.5), 0.0);
  EXPECT_GT(side_pressure(sk, Side::Minus, 2.0), 0.0);
}

TEST(RootFunction, VanishesAtTheEndsAndIsConcave) {
  const UlamSkeleton& sk = example_k10();
  const TStars ts{find_t_star(sk, Side::Minus).t, find_t_star(sk, Side::Plus).t};
  EXPECT_NEAR(h_of_u(sk, ts, -1.0), 0.0, 1e-6);
  EXPECT_NEAR(h_of_u(sk, ts, 1.0), 0.0, 1e-6);
  std::vector<double> h;
  for (int i = 0; i <= 40; ++i) h.push_back(h_of_u(sk, ts, -1.0 + i / 20.0));
  for (std::size_t i = 1; i + 1 < h.size(); ++i) {
    EXPECT_GT(h[i], 0.0);
    EXPECT_LE(h[i - 1] + h[i + 1] - 2 * h[i], 1e-4);
  }
  const PhiStar ps = phi_star(sk, ts);
  EXPECT_GT(ps.phi, 0.0);
  EXPECT_GT(ps.u_star, -1.0);
  EXPECT_LT(ps.u_star, 1.0);
  for (double v : h) EXPECT_LE(v, ps.phi + 1e-7);
}

TEST(Diffusion, HandArithmetic) {
  EXPECT_EQ(diffusion_eta(-0.1, 0.05), 2.0);
  EXPECT_NEAR(diffusion_phi(-0.1, 0.05), 0.1, 1e-15);
  EXPECT_EQ(diffusion_eta(-0.25, 0.125), 2.0);
  EXPECT_EQ(diffusion_phi(-0.5, 0.25, 1.0), -0.5);
  const double l = -0.3, D = 0.7, eta = diffusion_eta(l, D);
  EXPECT_NEAR(l * eta + D * eta * eta, 0.0, 1e-15);
  EXPECT_THROW(diffusion_eta(0.1, 1.0), DomainError);
  EXPECT_THROW(diffusion_eta(-0.1, 0.0), DomainError);
  EXPECT_THROW(diffusion_phi(0.0, 1.0), DomainError);
}

TEST(Diffusion, CoefficientIsHalfTheCurvature) {
  const UlamSkeleton& sk = example_k10();
  const double h = 1e-4;
  const double curv = (side_pressure(sk, Side::Minus, h) - 2 * side_pressure(sk, Side::Minus, 0) +
                       side_pressure(sk, Side::Minus, -h)) / (h * h);
  EXPECT_NEAR(diffusion_coefficient(sk, Side::Minus), curv / 2, 1e-6);
  EXPECT_GT(diffusion_coefficient(sk, Side::Minus), 0.0);
}

TEST(PressureZeroDimension, RootResidualAndRange) {
  const SkewProduct F = example(1.5);
  const UlamSkeleton sk(F, 8);
  const std::vector<double> flat(sk.size(), 0.0);
  try {
    const BedfordResult r = bedford_dimension(sk, flat, 0.0, 2.0);
    EXPECT_LE(r.residual, 1e-6);
    EXPECT_EQ(r.valid, r.t > 1.0);
  } catch (const NoZeroInRange&) {
    SUCCEED();
  }
  EXPECT_THROW(bedford_dimension(sk, flat, 10.0, 11.0), NoZeroInRange);
}
