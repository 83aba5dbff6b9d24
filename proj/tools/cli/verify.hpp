#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "config.hpp"
#include "output.hpp"

namespace skewlab::cli {

struct Claim {
  int criterion = 0;
  std::string claim;
  std::string expected;
  double observed = 0.0;
  std::string tolerance;
  bool pass = false;
  bool gating = true;  ///< informational rows never fail a criterion
};

struct VerifyOptions {
  bool quick = false;      ///< reduced sample counts
  std::string fault;       ///< "" or "endpoint": corrupt the fibre family's upper endpoint
  std::set<int> criteria;  ///< empty: all of 1..10
};

struct VerifyReport {
  std::vector<Claim> claims;
  bool aborted = false;  ///< model validation failed; no criterion ran

  bool criterion_pass(int c) const;
  bool pass() const;
};

/// Model validation (criterion 0) followed by the selected criteria, all at
/// desk scale. The arctan model and seed come from `cfg`.
VerifyReport run_verify(const ExperimentConfig& cfg, const VerifyOptions& opt);

std::string format_table(const VerifyReport& r);
Csv verify_csv(const VerifyReport& r);

}  // namespace skewlab::cli
