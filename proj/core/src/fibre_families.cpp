#include "skewlab/fibre_families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "skewlab/error.hpp"

namespace skewlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kStencilStep = 1e-4;
constexpr double kEndpointTol = 1e-12;
constexpr double kFlatTol = 1e-12;

class ArctanModel final : public FibreModel {
 public:
  ArctanModel(double a, double b, double c, double d) : a_(a), b_(b), c_(c), d_(d) {}

  FibreCoeffs prepare(double w) const override {
    const ArctanCoefficients k = arctan_coefficients(a_, b_, c_, d_, w);
    return {{k.A, k.B, 1.0 / k.C, k.D}};
  }
  double apply(const FibreCoeffs& k, double x) const override {
    return (std::atan(k.c[0] * x + k.c[1]) - k.c[3]) * k.c[2];
  }
  double deriv(const FibreCoeffs& k, double x) const override {
    const double u = k.c[0] * x + k.c[1];
    return k.c[0] * k.c[2] / (1.0 + u * u);
  }
  std::optional<double> second(const FibreCoeffs& k, double x) const override {
    const double A = k.c[0];
    const double u = A * x + k.c[1];
    const double q = 1.0 + u * u;
    return -2.0 * A * A * u * k.c[2] / (q * q);
  }
  std::optional<double> third(const FibreCoeffs& k, double x) const override {
    const double A = k.c[0];
    const double u = A * x + k.c[1];
    const double q = 1.0 + u * u;
    return A * A * A * (6.0 * u * u - 2.0) * k.c[2] / (q * q * q);
  }

 private:
  double a_, b_, c_, d_;
};

class SpeciesModel final : public FibreModel {
 public:
  explicit SpeciesModel(double alpha) : alpha_(alpha) {}

  FibreCoeffs prepare(double w) const override {
    return {{alpha_ * std::cos(3.0 * std::numbers::pi * w), 0.0, 0.0, 0.0}};
  }
  double apply(const FibreCoeffs& k, double x) const override {
    return x + k.c[0] * x * (1.0 - x);
  }
  double deriv(const FibreCoeffs& k, double x) const override {
    return 1.0 + k.c[0] * (1.0 - 2.0 * x);
  }
  std::optional<double> second(const FibreCoeffs& k, double) const override {
    return -2.0 * k.c[0];
  }
  std::optional<double> third(const FibreCoeffs&, double) const override { return 0.0; }

 private:
  double alpha_;
};

/// Keeps w in c[0]; the callables see (w, x) directly.
class CallableModel final : public FibreModel {
 public:
  CallableModel(std::function<double(double, double)> eval,
                std::function<double(double, double)> deriv)
      : eval_(std::move(eval)), deriv_(std::move(deriv)) {}

  FibreCoeffs prepare(double w) const override { return {{w, 0.0, 0.0, 0.0}}; }
  double apply(const FibreCoeffs& k, double x) const override { return eval_(k.c[0], x); }
  double deriv(const FibreCoeffs& k, double x) const override { return deriv_(k.c[0], x); }

 private:
  std::function<double(double, double)> eval_;
  std::function<double(double, double)> deriv_;
};

// Five-point stencils applied to the closed-form f'.
double stencil_second(const FibreFamily& fam, const FibreCoeffs& k, double x) {
  const double h = kStencilStep;
  const FibreModel& m = fam.model();
  return (m.deriv(k, x - 2 * h) - 8 * m.deriv(k, x - h) + 8 * m.deriv(k, x + h) -
          m.deriv(k, x + 2 * h)) /
         (12 * h);
}

double stencil_third(const FibreFamily& fam, const FibreCoeffs& k, double x) {
  const double h = kStencilStep;
  const FibreModel& m = fam.model();
  return (-m.deriv(k, x - 2 * h) + 16 * m.deriv(k, x - h) - 30 * m.deriv(k, x) +
          16 * m.deriv(k, x + h) - m.deriv(k, x + 2 * h)) /
         (12 * h * h);
}

}  // namespace

FibreFamily::FibreFamily(std::string name, Interval fibre, std::shared_ptr<const FibreModel> model,
                         Params params)
    : name_(std::move(name)), fibre_(fibre), model_(std::move(model)), params_(std::move(params)) {
  if (!model_) throw ParameterError("fibre family '" + name_ + "' has no model");
  if (!(fibre_.lo < fibre_.hi)) throw ParameterError("fibre interval must satisfy e- < e+");
}

double FibreFamily::log_deriv(double w, double x) const { return std::log(deriv(w, x)); }

std::pair<double, double> FibreFamily::log_deriv_at_endpoints(double w) const {
  const FibreCoeffs k = prepare(w);
  return {std::log(model_->deriv(k, fibre_.lo)), std::log(model_->deriv(k, fibre_.hi))};
}

ArctanCoefficients arctan_coefficients(double a, double b, double c, double d, double w) {
  const double A = a + b * std::cos(kTwoPi * w);
  const double B = c * std::sin(kTwoPi * w + d);
  const double hi = std::atan(A + B);
  const double lo = std::atan(B - A);
  return {A, B, 0.5 * (hi - lo), 0.5 * (hi + lo)};
}

FibreFamily arctan_family(double a, double b, double c, double d) {
  if (a == 0.0 || !(std::abs(b) < std::abs(a)))
    throw ParameterError("arctan family needs |b| < |a| (A(w) must not vanish)");
  return FibreFamily("arctan", {-1.0, 1.0}, std::make_shared<ArctanModel>(a, b, c, d),
                     {{"a", a}, {"b", b}, {"c", c}, {"d", d}});
}

FibreFamily species_coupling_family(double alpha, Check check) {
  if (check == Check::Enforce && !(std::abs(alpha) < 1.0))
    throw ParameterError("species family needs |alpha| < 1 (f' = 1 - |alpha| at worst)");
  return FibreFamily("species", {0.0, 1.0}, std::make_shared<SpeciesModel>(alpha),
                     {{"alpha", alpha}});
}

FibreFamily custom_family(std::string name, Interval fibre,
                          std::function<double(double, double)> eval,
                          std::function<double(double, double)> deriv, FibreFamily::Params params) {
  if (!eval || !deriv) throw ParameterError("custom family needs eval and deriv");
  return FibreFamily(std::move(name), fibre,
                     std::make_shared<CallableModel>(std::move(eval), std::move(deriv)),
                     std::move(params));
}

double second_derivative(const FibreFamily& fam, double w, double x) {
  const FibreCoeffs k = fam.prepare(w);
  if (auto v = fam.model().second(k, x)) return *v;
  return stencil_second(fam, k, x);
}

double schwarzian(const FibreFamily& fam, double w, double x) {
  const FibreCoeffs k = fam.prepare(w);
  const FibreModel& m = fam.model();
  const double d1 = m.deriv(k, x);
  if (!(d1 > 0.0))
    throw SingularityError("Schwarzian undefined: f' = " + std::to_string(d1) + " at w = " +
                           std::to_string(w) + ", x = " + std::to_string(x));
  const auto d2c = m.second(k, x);
  const auto d3c = m.third(k, x);
  const double d2 = d2c ? *d2c : stencil_second(fam, k, x);
  const double d3 = d3c ? *d3c : stencil_third(fam, k, x);
  const double r = d2 / d1;
  return d3 / d1 - 1.5 * r * r;
}

FamilyReport validate_family(const FibreFamily& fam, std::size_t n_w, std::size_t n_x) {
  FamilyReport rep;
  rep.min_deriv = std::numeric_limits<double>::infinity();
  rep.max_schwarzian = -std::numeric_limits<double>::infinity();
  const Interval J = fam.fibre();
  const FibreModel& m = fam.model();
  n_w = std::max<std::size_t>(n_w, 2);
  n_x = std::max<std::size_t>(n_x, 2);

  for (std::size_t i = 0; i < n_w; ++i) {
    const double w = static_cast<double>(i) / static_cast<double>(n_w - 1);
    const FibreCoeffs k = fam.prepare(w);
    // The raw model, not FibreFamily::apply, so a broken formula shows up here.
    rep.max_endpoint_error = std::max({rep.max_endpoint_error, std::abs(m.apply(k, J.lo) - J.lo),
                                       std::abs(m.apply(k, J.hi) - J.hi)});
    for (std::size_t j = 0; j < n_x; ++j) {
      const double x = J.lo + J.length() * static_cast<double>(j) / static_cast<double>(n_x - 1);
      const double d1 = m.deriv(k, x);
      rep.min_deriv = std::min(rep.min_deriv, d1);
      if (!(d1 > 0.0)) continue;
      const auto d2c = m.second(k, x);
      const double d2 = d2c ? *d2c : stencil_second(fam, k, x);
      if (std::abs(d2) <= kFlatTol) continue;
      const auto d3c = m.third(k, x);
      const double d3 = d3c ? *d3c : stencil_third(fam, k, x);
      const double r = d2 / d1;
      rep.max_schwarzian = std::max(rep.max_schwarzian, d3 / d1 - 1.5 * r * r);
      ++rep.schwarzian_points;
    }
  }

  rep.endpoints_ok = rep.max_endpoint_error <= kEndpointTol;
  rep.monotone = rep.min_deriv > 0.0;
  rep.negative_schwarzian = rep.max_schwarzian < 0.0;
  if (!rep.endpoints_ok)
    rep.failures.push_back("endpoint invariant: f_w(e-) = e-, f_w(e+) = e+ violated (max error " +
                           std::to_string(rep.max_endpoint_error) + ")");
  if (!rep.monotone)
    rep.failures.push_back("monotonicity: min f' = " + std::to_string(rep.min_deriv) + " <= 0");
  if (!rep.negative_schwarzian)
    rep.failures.push_back("negative Schwarzian: max Sf = " + std::to_string(rep.max_schwarzian));
  return rep;
}

}  // namespace skewlab
