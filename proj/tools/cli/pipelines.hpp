#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"
#include "skewlab/error.hpp"
#include "skewlab/fibre_families.hpp"
#include "skewlab/thermo.hpp"

namespace skewlab::cli {

/// A model-class condition failed; dependent pipelines do not run.
class HypothesisFailure : public Error {
 public:
  explicit HypothesisFailure(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Family invariants and sign conditions of one model.
struct ModelCheck {
  FamilyReport family;
  SignConditionReport signs;
  std::vector<std::string> violations;

  bool ok() const noexcept { return violations.empty(); }
};

/// Periodic orbits used as test measures besides the acip.
std::vector<MeasureSpec> candidate_measures();

/// `signs` adds the intermingling sign conditions to the family invariants.
ModelCheck check_model(const SkewProduct& F, const ExperimentConfig& cfg, bool signs = true);

/// Endpoint roots and exponents shared by several pipelines.
struct Theory {
  RootResult minus;
  RootResult plus;
  TStars stars() const { return {minus.t, plus.t}; }
};

Theory theory(const UlamSkeleton& sk);

const std::vector<std::string>& pipeline_names();

/// Runs one pipeline into `<cfg.out>/<name>/` and returns the written files,
/// manifest last. Throws HypothesisFailure when the model check fails (for
/// `validate` after its report is written).
std::vector<std::filesystem::path> run_pipeline(const std::string& name, const ExperimentConfig& cfg);

}  // namespace skewlab::cli
