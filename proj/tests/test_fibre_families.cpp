#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "skewlab/error.hpp"
#include "skewlab/fibre_families.hpp"
#include "support.hpp"

using namespace skewlab;

namespace {

constexpr double kPi = std::numbers::pi;

FibreFamily example_arctan() { return arctan_family(0.9, 0.4, 0.9, 0.8); }

/// Species coupling rebuilt from plain callables, so derivatives come from stencils.
FibreFamily species_by_stencil(double alpha) {
  return custom_family(
      "species-stencil", {0.0, 1.0},
      [alpha](double w, double x) { return x + alpha * x * (1 - x) * std::cos(3 * kPi * w); },
      [alpha](double w, double x) { return 1 + alpha * std::cos(3 * kPi * w) * (1 - 2 * x); });
}

}  // namespace

TEST(ArctanFamily, FixesEndpointsExactly) {
  const FibreFamily f = example_arctan();
  test::for_all(1000, "arctan-endpoints", [](Rng& r) { return r.uniform(); }, [&](double w) {
    EXPECT_EQ(f.eval(w, -1.0), -1.0);
    EXPECT_EQ(f.eval(w, 1.0), 1.0);
    // The raw formula, without the endpoint shortcut.
    const FibreCoeffs k = f.prepare(w);
    EXPECT_LE(std::abs(f.model().apply(k, 1.0) - 1.0), 1e-14);
    EXPECT_LE(std::abs(f.model().apply(k, -1.0) + 1.0), 1e-14);
  });
}

TEST(ArctanFamily, ClosedFormMatchesLinearSolve) {
  // C and D solve C*(+1) + D = atan(A + B), C*(-1) + D = atan(B - A); redo it by Cramer's rule.
  for (int i = 0; i < 1000; ++i) {
    const double w = i / 1000.0;
    const ArctanCoefficients k = arctan_coefficients(0.9, 0.4, 0.9, 0.8, w);
    EXPECT_NEAR(k.A, 0.9 + 0.4 * std::cos(2 * kPi * w), 1e-15);
    EXPECT_NEAR(k.B, 0.9 * std::sin(2 * kPi * w + 0.8), 1e-15);
    const double r1 = std::atan(k.A + k.B), r2 = std::atan(k.B - k.A);
    const double det = 1.0 * 1.0 - 1.0 * (-1.0);
    const double C = (r1 * 1.0 - 1.0 * r2) / det;
    const double D = (1.0 * r2 - (-1.0) * r1) / det;
    EXPECT_NEAR(k.C, C, 1e-14);
    EXPECT_NEAR(k.D, D, 1e-14);
    EXPECT_NEAR((std::atan(k.A + k.B) - k.D) / k.C, 1.0, 1e-14);
    EXPECT_NEAR((std::atan(-k.A + k.B) - k.D) / k.C, -1.0, 1e-14);
  }
}

TEST(ArctanFamily, RejectsVanishingA) {
  EXPECT_THROW(arctan_family(0.4, 0.4, 0.9, 0.8), ParameterError);
  EXPECT_THROW(arctan_family(0.3, -0.5, 0.9, 0.8), ParameterError);
  EXPECT_NO_THROW(arctan_family(0.8, 0.4, 0.9, 0.8));
}

TEST(ArctanFamily, ValidatesForExampleParameters) {
  for (double a : {0.8, 0.9, 1.0, 1.2, 2.0}) {
    const FamilyReport r = validate_family(arctan_family(a, 0.4, 0.9, 0.8));
    EXPECT_TRUE(r.pass()) << "a=" << a;
    EXPECT_LT(r.max_schwarzian, 0.0);
    EXPECT_GT(r.schwarzian_points, 0u);
  }
}

TEST(ArctanFamily, DerivativeMatchesFiniteDifference) {
  const FibreFamily f = example_arctan();
  test::for_all(500, "arctan-deriv", [](Rng& r) { return std::pair{r.uniform(), r.uniform(-0.99, 0.99)}; },
                [&](std::pair<double, double> p) {
                  const auto [w, x] = p;
                  const double h = 1e-6;
                  const double fd = (f.eval(w, x + h) - f.eval(w, x - h)) / (2 * h);
                  EXPECT_NEAR(f.deriv(w, x), fd, 1e-6 * std::abs(fd));
                });
}

TEST(ArctanFamily, ClosedFormHigherDerivativesMatchStencils) {
  const FibreFamily f = example_arctan();
  const FibreFamily g = custom_family(
      "arctan-stencil", f.fibre(), [f](double w, double x) { return f.eval(w, x); },
      [f](double w, double x) { return f.deriv(w, x); });
  test::for_all(200, "arctan-schwarzian", [](Rng& r) { return std::pair{r.uniform(), r.uniform(-0.95, 0.95)}; },
                [&](std::pair<double, double> p) {
                  const auto [w, x] = p;
                  EXPECT_NEAR(schwarzian(f, w, x), schwarzian(g, w, x), 1e-5);
                  EXPECT_NEAR(second_derivative(f, w, x), second_derivative(g, w, x), 1e-6);
                });
}

TEST(SpeciesFamily, EndpointsAndBounds) {
  const FibreFamily f = species_coupling_family(0.5);
  for (int i = 0; i <= 100; ++i) {
    const double w = i / 100.0;
    EXPECT_EQ(f.eval(w, 0.0), 0.0);
    EXPECT_EQ(f.eval(w, 1.0), 1.0);
    EXPECT_EQ(f.model().apply(f.prepare(w), 0.0), 0.0);
    EXPECT_EQ(f.model().apply(f.prepare(w), 1.0), 1.0);
  }
  const FamilyReport r = validate_family(f);
  EXPECT_TRUE(r.pass());
  // min f' = 1 - |alpha|, reached at x in {0, 1} where cos = +-1 (w = 0 and w = 1/3 lie on the grid or near it).
  EXPECT_NEAR(r.min_deriv, 0.5, 1e-3);
  EXPECT_GE(r.min_deriv, 0.5 - 1e-12);
}

TEST(SpeciesFamily, RejectsLargeAlpha) {
  EXPECT_THROW(species_coupling_family(1.5), ParameterError);
  const FamilyReport r = validate_family(species_coupling_family(1.5, Check::Skip));
  EXPECT_FALSE(r.monotone);
  EXPECT_FALSE(r.pass());
  EXPECT_NEAR(r.min_deriv, -0.5, 1e-3);
}

TEST(SpeciesFamily, SchwarzianClosedFormAndStencil) {
  const FibreFamily f = species_coupling_family(0.5);
  const FibreFamily g = species_by_stencil(0.5);
  test::for_all(300, "species-schwarzian", [](Rng& r) { return std::pair{r.uniform(), r.uniform()}; },
                [&](std::pair<double, double> p) {
                  const auto [w, x] = p;
                  const double c0 = 0.5 * std::cos(3 * kPi * w);
                  const double f1 = 1 + c0 * (1 - 2 * x), f2 = -2 * c0;
                  EXPECT_NEAR(second_derivative(f, w, x), f2, 1e-14);
                  EXPECT_NEAR(second_derivative(g, w, x), f2, 1e-6);
                  EXPECT_NEAR(schwarzian(f, w, x), -1.5 * (f2 / f1) * (f2 / f1), 1e-12);
                  EXPECT_LE(schwarzian(f, w, x), 0.0);
                  EXPECT_NEAR(schwarzian(g, w, x), schwarzian(f, w, x), 1e-6);
                });
}

TEST(Schwarzian, VanishingDerivativeIsSingular) {
  const FibreFamily f = species_coupling_family(1.0, Check::Skip);
  // cos(0) = 1, x = 1: f' = 1 + 1 * (1 - 2) = 0.
  EXPECT_THROW(schwarzian(f, 0.0, 1.0), SingularityError);
}

TEST(ValidateFamily, CorruptedEndpointIsNamed) {
  const FibreFamily good = example_arctan();
  const FibreFamily bad = custom_family(
      "corrupted", good.fibre(),
      [good](double w, double x) { return good.model().apply(good.prepare(w), x) + 1e-6; },
      [good](double w, double x) { return good.model().deriv(good.prepare(w), x); });
  const FamilyReport r = validate_family(bad);
  EXPECT_FALSE(r.endpoints_ok);
  ASSERT_FALSE(r.failures.empty());
  EXPECT_NE(r.failures.front().find("endpoint"), std::string::npos);
}

TEST(FibreFamily, LogDerivativeAtEndpoints) {
  const FibreFamily f = species_coupling_family(0.5);
  const auto [lm, lp] = f.log_deriv_at_endpoints(0.0);
  EXPECT_NEAR(lm, std::log(1.5), 1e-15);
  EXPECT_NEAR(lp, std::log(0.5), 1e-15);
}
