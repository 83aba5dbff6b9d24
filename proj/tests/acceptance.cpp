// Acceptance runner: one criterion per invocation (or all), full desk scale.
// Prints the claim table and one "criterion N: PASS|FAIL" line per criterion;
// a criterion also fails when it exceeds its runtime budget.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <iostream>
#include <map>
#include <string>

#include "cli/config.hpp"
#include "cli/verify.hpp"
#include "skewlab/parallel.hpp"

namespace cli = skewlab::cli;

namespace {

// Seconds; 0 means no budget.
const std::map<int, double> kBudget = {{1, 10},   {2, 60},   {3, 120}, {4, 1200}, {5, 1800},
                                       {6, 1200}, {7, 300},  {8, 300}, {9, 0},    {10, 0}};

// Determinism across thread counts of the whole quick suite output.
bool quick_suite_identical(const cli::ExperimentConfig& cfg) {
  cli::VerifyOptions o;
  o.quick = true;
  for (int c = 1; c <= 10; ++c)
    if (c != 9) o.criteria.insert(c);
  std::string text[2];
  const std::size_t previous = skewlab::thread_count();
  const std::size_t threads[2] = {1, 3};
  for (int i = 0; i < 2; ++i) {
    skewlab::set_thread_count(threads[i]);
    text[i] = cli::verify_csv(cli::run_verify(cfg, o)).text();
  }
  skewlab::set_thread_count(previous);
  return text[0] == text[1];
}

bool run(int criterion, const cli::ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  cli::VerifyOptions o;
  o.criteria = {criterion};
  const cli::VerifyReport rep = cli::run_verify(cfg, o);
  std::cout << cli::format_table(rep);
  bool pass = !rep.aborted && rep.criterion_pass(criterion);
  if (criterion == 9) {
    const bool same = quick_suite_identical(cfg);
    std::cout << "  quick suite CSV identical at 1 and 3 threads: " << (same ? "yes" : "no") << "\n";
    pass = pass && same;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double budget = kBudget.at(criterion);
  const bool in_time = budget == 0 || secs < budget;
  char line[160];
  std::snprintf(line, sizeof line, "criterion %d: %s (%.1f s, budget %s)", criterion,
                pass && in_time ? "PASS" : "FAIL", secs,
                budget == 0 ? "none" : (std::to_string(static_cast<int>(budget)) + " s").c_str());
  std::cout << line << (in_time ? "" : " over budget") << std::endl;
  return pass && in_time;
}

}  // namespace

int main(int argc, char** argv) {
  cli::ExperimentConfig cfg;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--criterion") && i + 1 < argc) {
      only = std::stoi(argv[++i]);
    } else if (!std::strcmp(argv[i], "--out") && i + 1 < argc) {
      cfg.out = argv[++i];
    } else if (!std::strcmp(argv[i], "--seed") && i + 1 < argc) {
      cfg.seed = std::stoull(argv[++i]);
    } else {
      std::cerr << "usage: skewlab_acceptance [--criterion N] [--seed S] [--out DIR]\n";
      return 2;
    }
  }
  if (only != 0 && !kBudget.count(only)) {
    std::cerr << "no criterion " << only << "\n";
    return 2;
  }
  bool ok = true;
  try {
    if (only != 0) {
      ok = run(only, cfg);
    } else {
      for (const auto& [c, budget] : kBudget) ok = run(c, cfg) && ok;
    }
  } catch (const std::exception& e) {
    std::cout << "criterion " << only << ": FAIL (" << e.what() << ")" << std::endl;
    return 1;
  }
  return ok ? 0 : 1;
}
