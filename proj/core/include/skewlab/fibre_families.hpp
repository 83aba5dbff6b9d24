#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "skewlab/interval.hpp"

namespace skewlab {

/// Endpoint graph selector: e- (Minus) or e+ (Plus).
enum class Side { Minus, Plus };

constexpr std::string_view to_string(Side s) noexcept { return s == Side::Minus ? "minus" : "plus"; }

/// Per-ω data of one fibre map, computed once and reused along an orbit.
struct FibreCoeffs {
  std::array<double, 4> c{};
};

/// Fibre map x -> f_w(x) split into an ω-only stage (prepare) and a cheap
/// x-stage (apply/deriv). `w` is the driving coordinate, i.e. the base point
/// after the base map's coordinate transform.
class FibreModel {
 public:
  virtual ~FibreModel() = default;

  virtual FibreCoeffs prepare(double w) const = 0;
  virtual double apply(const FibreCoeffs& k, double x) const = 0;
  virtual double deriv(const FibreCoeffs& k, double x) const = 0;

  /// Closed-form f'' and f''' when available.
  virtual std::optional<double> second(const FibreCoeffs&, double) const { return std::nullopt; }
  virtual std::optional<double> third(const FibreCoeffs&, double) const { return std::nullopt; }
};

/// Increasing fibre maps of J = [e-, e+] fixing both endpoints.
///
/// apply() returns the endpoints themselves at x = e-/e+, so the endpoint
/// graphs are invariant bit for bit.
class FibreFamily {
 public:
  using Params = std::vector<std::pair<std::string, double>>;

  FibreFamily(std::string name, Interval fibre, std::shared_ptr<const FibreModel> model,
              Params params = {});

  const std::string& name() const noexcept { return name_; }
  Interval fibre() const noexcept { return fibre_; }
  double lower() const noexcept { return fibre_.lo; }
  double upper() const noexcept { return fibre_.hi; }
  double endpoint(Side s) const noexcept { return s == Side::Minus ? fibre_.lo : fibre_.hi; }
  const Params& params() const noexcept { return params_; }
  const FibreModel& model() const noexcept { return *model_; }

  FibreCoeffs prepare(double w) const { return model_->prepare(w); }

  double apply(const FibreCoeffs& k, double x) const {
    if (x == fibre_.lo || x == fibre_.hi) return x;
    return model_->apply(k, x);
  }
  double apply_deriv(const FibreCoeffs& k, double x) const { return model_->deriv(k, x); }

  double eval(double w, double x) const { return apply(prepare(w), x); }
  double deriv(double w, double x) const { return model_->deriv(prepare(w), x); }
  double log_deriv(double w, double x) const;

  /// (log f'_w(e-), log f'_w(e+)).
  std::pair<double, double> log_deriv_at_endpoints(double w) const;

  std::optional<double> second(double w, double x) const { return model_->second(prepare(w), x); }
  std::optional<double> third(double w, double x) const { return model_->third(prepare(w), x); }

 private:
  std::string name_;
  Interval fibre_;
  std::shared_ptr<const FibreModel> model_;
  Params params_;
};

/// A(w), B(w), C(w), D(w) of the arctan family.
struct ArctanCoefficients {
  double A, B, C, D;
};
ArctanCoefficients arctan_coefficients(double a, double b, double c, double d, double w);

/// f_w(x) = (atan(A x + B) - D) / C on [-1, 1], with A = a + b cos 2πw,
/// B = c sin(2πw + d) and C, D fixed by f_w(±1) = ±1.
/// Throws ParameterError unless |b| < |a|.
FibreFamily arctan_family(double a, double b, double c, double d);

enum class Check { Enforce, Skip };

/// f_w(x) = x + αx(1 - x)cos(3πw) on [0, 1]. Throws ParameterError for
/// |α| >= 1 unless `check` is Skip (used to exercise the validator).
FibreFamily species_coupling_family(double alpha, Check check = Check::Enforce);

/// Family from plain callables. f'' and f''' fall back to finite differences.
FibreFamily custom_family(std::string name, Interval fibre,
                          std::function<double(double, double)> eval,
                          std::function<double(double, double)> deriv, FibreFamily::Params params = {});

/// Sf = f'''/f' - 3/2 (f''/f')^2. Uses closed-form derivatives when the model
/// has them, else 5-point stencils of f' with step 1e-4.
/// Throws SingularityError when f'_w(x) <= 0.
double schwarzian(const FibreFamily& fam, double w, double x);

/// f''_w(x), closed form or stencil.
double second_derivative(const FibreFamily& fam, double w, double x);

struct FamilyReport {
  double max_endpoint_error = 0.0;
  double min_deriv = 0.0;
  double max_schwarzian = 0.0;  ///< over grid points with |f''| > 1e-12; -inf if none
  std::size_t schwarzian_points = 0;
  bool endpoints_ok = false;
  bool monotone = false;
  bool negative_schwarzian = false;
  std::vector<std::string> failures;

  bool pass() const noexcept { return endpoints_ok && monotone && negative_schwarzian; }
};

/// Checks the fibre invariants on an n_w x n_x grid over [0,1] x J (both
/// endpoints included).
FamilyReport validate_family(const FibreFamily& fam, std::size_t n_w = 256, std::size_t n_x = 256);

}  // namespace skewlab
