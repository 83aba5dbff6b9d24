#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "cli/config.hpp"
#include "cli/output.hpp"
#include "cli/pipelines.hpp"
#include "cli/verify.hpp"

namespace cli = skewlab::cli;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> resolution;
  std::optional<double> eps_min, eps_max;
  std::optional<std::size_t> eps_count;
  std::vector<std::string> sets;
};

cli::ExperimentConfig resolve(const Overrides& o) {
  cli::ExperimentConfig cfg;
  if (!o.config.empty()) cfg = cli::load_config(o.config);
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw skewlab::ParameterError("--set expects key=value, got '" + kv + "'");
    cli::set_field(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
  if (o.samples) cfg.samples = *o.samples;
  if (o.resolution) cfg.resolution = *o.resolution;
  if (o.eps_min) cfg.eps_min = *o.eps_min;
  if (o.eps_max) cfg.eps_max = *o.eps_max;
  if (o.eps_count) cfg.eps_count = *o.eps_count;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"skewlab: intermingled-basin experiments on skew products"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--samples", o.samples, "Monte-Carlo samples (per eps where applicable)");
  app.add_option("--resolution", o.resolution, "Ulam resolution k");
  app.add_option("--eps-min", o.eps_min, "smallest eps of the grid");
  app.add_option("--eps-max", o.eps_max, "largest eps of the grid");
  app.add_option("--eps-count", o.eps_count, "number of eps grid points");
  app.add_option("--set", o.sets, "extra config override key=value (repeatable)");

  std::string pipeline;
  for (const auto& name : cli::pipeline_names())
    app.add_subcommand(name, "run the " + name + " pipeline")->callback([&pipeline, name] { pipeline = name; });

  bool quick = false;
  std::string fault;
  std::vector<int> criteria;
  auto* verify = app.add_subcommand("verify", "run the acceptance suite and print a claim table");
  verify->add_flag("--quick", quick, "reduced sample counts");
  verify->add_option("--inject-fault", fault, "corrupt the model (endpoint)");
  verify->add_option("--criterion", criteria, "run only these criteria (1-10)");

  auto* show = app.add_subcommand("config", "print the resolved configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    const cli::ExperimentConfig cfg = resolve(o);
    if (show->parsed()) {
      std::cout << cli::to_text(cfg);
      return 0;
    }
    if (verify->parsed()) {
      cli::VerifyOptions vo;
      vo.quick = quick;
      vo.fault = fault;
      vo.criteria.insert(criteria.begin(), criteria.end());
      const cli::VerifyReport rep = cli::run_verify(cfg, vo);
      std::cout << cli::format_table(rep);
      cli::RunRecorder rec(std::filesystem::path(cfg.out) / "verify", "verify", cfg);
      rec.write("verify.csv", cli::verify_csv(rep));
      rec.finish(rep.pass() ? "pass" : "fail");
      std::cout << (rep.pass() ? "verify: all claims hold\n" : "verify: FAILED\n");
      return rep.pass() ? 0 : 1;
    }
    for (const auto& f : cli::run_pipeline(pipeline, cfg)) std::cout << f.string() << "\n";
    return 0;
  } catch (const cli::HypothesisFailure& e) {
    std::cerr << "skewlab: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "skewlab: " << e.what() << "\n";
    return 1;
  }
}
