#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "skewlab/base_maps.hpp"
#include "skewlab/error.hpp"
#include "support.hpp"

using namespace skewlab;

namespace {

std::vector<Digit> bits_of(unsigned v, std::size_t n) {
  std::vector<Digit> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = static_cast<Digit>((v >> (n - 1 - i)) & 1u);
  return d;
}

}  // namespace

TEST(Doubling, EvalAndDerivative) {
  const MarkovBaseMap S = make_doubling();
  EXPECT_EQ(S.eval(0.25), 0.5);
  EXPECT_EQ(S.eval(0.3), 0.6);
  EXPECT_EQ(S.eval(0.5), 0.0);  // right-continuous branch choice
  for (double w : {0.0, 0.1, 0.5, 0.77, 1.0}) EXPECT_EQ(S.abs_deriv(w), 2.0);
  EXPECT_TRUE(S.full_branch());
  EXPECT_TRUE(S.piecewise_affine());
  EXPECT_THROW(S.eval(1.5), DomainError);
  EXPECT_THROW(S.eval(-0.1), DomainError);
}

TEST(Tent, EvalAndConjugacy) {
  const MarkovBaseMap T = make_tent_logistic_conjugate();
  EXPECT_EQ(T.eval(0.25), 0.5);
  EXPECT_EQ(T.eval(0.75), 0.5);
  EXPECT_NEAR(T.coordinate(0.5), 0.5, 1e-15);
  EXPECT_NEAR(logistic_conjugacy(0.5), std::pow(std::sin(std::numbers::pi / 4), 2), 1e-15);
  // The coordinate conjugates the tent map to the logistic map.
  for (double w : {0.1, 0.3, 0.6, 0.9}) {
    const double xi = logistic_conjugacy(w);
    EXPECT_NEAR(logistic_conjugacy(T.eval(w)), 4 * xi * (1 - xi), 1e-14);
  }
}

TEST(Tent, LogisticCoordinateHasMeanOneHalf) {
  const MarkovBaseMap T = make_tent_logistic_conjugate();
  Rng rng(11);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = T.coordinate(T.sample_acip(rng));
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  EXPECT_NEAR(mean, 0.5, 4 * se);
}

TEST(MarkovBaseMap, RejectsNonExpandingAndNonMarkovMaps) {
  const Interval left{0.0, 0.5}, right{0.5, 1.0};
  // slope 1 is not expanding
  EXPECT_THROW(MarkovBaseMap("flat", {0, 1},
                             {Branch::from_affine({0, 1}, {1.0, 0.0})},
                             [](Rng& r) { return r.uniform(); }),
               ParameterError);
  // image [0, 0.8) is not a union of partition intervals
  EXPECT_THROW(MarkovBaseMap("broken", {0, 1},
                             {Branch::from_affine(left, {1.6, 0.0}), Branch::from_affine(right, {2.0, -1.0})},
                             [](Rng& r) { return r.uniform(); }),
               ParameterError);
}

TEST(MarkovBaseMap, RejectsNonMixingMap) {
  // Each half maps onto itself: Markov and expanding, but not mixing.
  std::vector<Branch> br = {Branch::from_affine({0.0, 0.25}, {2.0, 0.0}),
                            Branch::from_affine({0.25, 0.5}, {2.0, -0.5}),
                            Branch::from_affine({0.5, 0.75}, {2.0, -0.5}),
                            Branch::from_affine({0.75, 1.0}, {2.0, -1.0})};
  EXPECT_THROW(MarkovBaseMap("split", {0, 1}, br, [](Rng& r) { return r.uniform(); }), ParameterError);
}

TEST(SymbolicPoint, ShiftAndEmbed) {
  const MarkovBaseMap S = make_doubling();
  const SymbolicPoint p = SymbolicPoint::finite({0, 1, 1, 1});
  EXPECT_EQ(symbolic_embed(S, p, 4), 0.4375);
  const SymbolicPoint q = symbolic_step(p);
  EXPECT_EQ(q.digit(0), 1);
  EXPECT_EQ(q.digit(1), 1);
  EXPECT_EQ(q.digit(2), 1);
  EXPECT_EQ(q.budget(), 3u);
}

TEST(SymbolicPoint, FiniteBudgetNeverTruncates) {
  const MarkovBaseMap S = make_doubling();
  const SymbolicPoint p = SymbolicPoint::finite({0, 1});
  EXPECT_FALSE(p.extendable());
  EXPECT_THROW(symbolic_embed(S, p, 3), DigitBudgetExhausted);
  EXPECT_THROW(p.digit(2), DigitBudgetExhausted);
}

TEST(SymbolicPoint, PeriodicRepeats) {
  const SymbolicPoint p = SymbolicPoint::periodic({0, 1, 1});
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(p.digit(i), (i % 3 == 0) ? 0 : 1);
}

TEST(SymbolicPoint, ShiftCommutesWithMapOnAllDepthEightWords) {
  const MarkovBaseMap S = make_doubling();
  const std::size_t k = 7;
  for (unsigned v = 0; v < 256; ++v) {
    const SymbolicPoint p = SymbolicPoint::finite(bits_of(v, 8));
    const double lhs = symbolic_embed(S, symbolic_step(p), k);
    const double rhs = S.eval(symbolic_embed(S, p, k + 1));
    EXPECT_LE(std::abs(lhs - rhs), std::ldexp(1.0, -static_cast<int>(k))) << v;
  }
}

TEST(SymbolicPoint, EmbeddingConvergesMonotonically) {
  const MarkovBaseMap S = make_doubling();
  test::for_all(200, "embed-monotone", [&](Rng& rng) { return random_point(S, Rng(rng.bits())); },
                [&](const SymbolicPoint& p) {
                  double prev = symbolic_embed(S, p, 1);
                  for (std::size_t k = 2; k <= 50; ++k) {
                    const double cur = symbolic_embed(S, p, k);
                    ASSERT_GE(cur, prev);
                    ASSERT_LE(cur - prev, std::ldexp(1.0, -static_cast<int>(k - 1)));
                    prev = cur;
                  }
                });
}

TEST(SymbolicPoint, SymbolicOrbitMatchesFloatOrbit) {
  const MarkovBaseMap S = make_doubling();
  const std::size_t budget = 64;
  test::for_all(1000, "float-orbit", [&](Rng& rng) { return random_point(S, Rng(rng.bits())); },
                [&](const SymbolicPoint& p) {
                  double w = symbolic_embed(S, p, 53);
                  SymbolicPoint q = p;
                  for (std::size_t n = 1; n <= 45; ++n) {
                    w = S.eval(w);
                    q = symbolic_step(q);
                    const double exact = symbolic_embed(S, q, budget - n);
                    ASSERT_LE(std::abs(exact - w), std::ldexp(1.0, -static_cast<int>(53 - n)) + 1e-16);
                  }
                });
}

TEST(PeriodicPoint, DoublingRationals) {
  const MarkovBaseMap S = make_doubling();
  const std::vector<Digit> w4 = {0, 0, 0, 1}, w5 = {0, 1, 0, 1, 1}, w1 = {0};
  EXPECT_NEAR(periodic_point(S, w4), 1.0 / 15.0, 1e-12);
  EXPECT_NEAR(periodic_point(S, w5), 11.0 / 31.0, 1e-12);
  EXPECT_EQ(periodic_point(S, w1), 0.0);
  EXPECT_NEAR(periodic_point(S, w4), 0.0666, 1e-4);
  EXPECT_NEAR(periodic_point(S, w5), 0.3548, 1e-4);
}

TEST(PeriodicPoint, AllWordsUpToLengthEight) {
  for (const MarkovBaseMap& S : {make_doubling(), make_tent_logistic_conjugate()}) {
    for (std::size_t len = 1; len <= 8; ++len)
      for (unsigned v = 0; v < (1u << len); ++v) {
        const auto word = bits_of(v, len);
        const double w0 = periodic_point(S, word);
        // Doubling: the period-p point is k / (2^p - 1), with k the word read in binary.
        if (S.name() == make_doubling().name() && v + 1 != (1u << len)) {
          EXPECT_NEAR(w0, v / static_cast<double>((1u << len) - 1), 1e-12);
        }
        double w = w0;
        for (std::size_t i = 0; i < len; ++i) w = S.eval(w);
        EXPECT_LE(std::abs(w - w0), 1e-10) << S.name() << " word " << v << " len " << len;
      }
  }
}

TEST(PeriodicPoint, OrbitListsEveryPoint) {
  const MarkovBaseMap S = make_doubling();
  const std::vector<Digit> w4 = {0, 0, 0, 1};
  const auto orbit = periodic_orbit(S, w4);
  ASSERT_EQ(orbit.size(), 4u);
  EXPECT_NEAR(orbit[1], 2.0 / 15.0, 1e-12);
  EXPECT_NEAR(orbit[3], 8.0 / 15.0, 1e-12);
}

TEST(AcipSampler, PushforwardIsInvariant) {
  for (const MarkovBaseMap& S : {make_doubling(), make_tent_logistic_conjugate()}) {
    Rng rng(3);
    const std::size_t n = 20000;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = S.sample_acip(rng);
      b[i] = S.eval(S.sample_acip(rng));
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    // Two-sample Kolmogorov-Smirnov distance.
    double ks = 0.0;
    std::size_t i = 0, j = 0;
    while (i < n && j < n) {
      if (a[i] <= b[j]) ++i;
      else ++j;
      ks = std::max(ks, std::abs(static_cast<double>(i) - static_cast<double>(j)) / n);
    }
    EXPECT_LE(ks, 3.0 / std::sqrt(static_cast<double>(n))) << S.name();
  }
}

TEST(PointNear, KeepsTheFloatItinerary) {
  const MarkovBaseMap S = make_doubling();
  for (double w : {0.1, 0.3333, 0.75, 0.999}) {
    const SymbolicPoint p = point_near(S, w, Rng(5));
    EXPECT_EQ(symbolic_embed(S, p), w);
    EXPECT_TRUE(p.extendable());
  }
}

TEST(Itinerary, AdmissibleWords) {
  const MarkovBaseMap S = make_doubling();
  const auto it = S.itinerary(0.4375, 4);
  EXPECT_EQ(it, (std::vector<Digit>{0, 1, 1, 1}));
  EXPECT_TRUE(S.admissible(it));
  const Interval c = S.cylinder(it);
  EXPECT_EQ(c.lo, 0.4375);
  EXPECT_EQ(c.hi, 0.5);
}
