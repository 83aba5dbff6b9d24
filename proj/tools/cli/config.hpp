#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "skewlab/dynamics.hpp"

namespace skewlab::cli {

/// Flat experiment record. Every field has a default; to_text/parse_config
/// round-trip exactly (reals are written with 17 significant digits).
struct ExperimentConfig {
  std::string model = "arctan";  ///< arctan | species
  double a = 0.9;
  double b = 0.4;
  double c = 0.9;
  double d = 0.8;
  double alpha = 0.5;
  std::string base = "doubling";  ///< doubling | tent
  std::uint64_t seed = 1;
  std::size_t samples = 100000;
  std::size_t lyapunov_samples = 1000000;
  std::size_t resolution = 10;
  double eps_min = 1e-3;
  double eps_max = 1e-1;
  std::size_t eps_count = 8;
  std::string tail_method = "tilted";  ///< tilted | plain
  std::size_t grid_w = 256;
  std::size_t grid_x = 256;
  bool grid_image = true;
  std::size_t stability_points = 10;
  std::size_t dimension_points = 4096;
  std::string out = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

/// key = value lines; '#' starts a comment. Unknown keys and malformed values
/// throw ParameterError naming the line.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});
std::string to_text(const ExperimentConfig& cfg);

/// Sets one key from its text form (the same rules as a config line).
void set_field(ExperimentConfig& cfg, const std::string& key, const std::string& value);

std::vector<double> eps_grid(const ExperimentConfig& cfg);

MarkovBaseMap make_base(const ExperimentConfig& cfg);
FibreFamily make_family(const ExperimentConfig& cfg);
/// The model's fibre family over its base; the invariant checks are left to validation.
SkewProduct make_system(const ExperimentConfig& cfg);

std::string format_real(double v);

}  // namespace skewlab::cli
