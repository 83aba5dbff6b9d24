#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace skewlab::cli {

/// Comma-separated table with a mandatory header row; reals use %.17g.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header);

  Csv& operator<<(double v);
  Csv& operator<<(std::size_t v);
  Csv& operator<<(const std::string& v);
  Csv& operator<<(const char* v) { return *this << std::string(v); }
  /// Closes the current row; throws when its width differs from the header.
  void end_row();

  const std::vector<std::string>& header() const noexcept { return header_; }
  std::string text() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::string> row_;
  std::string body_;
};

std::string sha256_hex(const std::string& bytes);

/// Collects the files of one run and writes manifest.txt (flat key=value)
/// listing each with its SHA-256.
class RunRecorder {
 public:
  RunRecorder(std::filesystem::path dir, std::string pipeline, const ExperimentConfig& cfg);

  void write(const std::string& name, const std::string& bytes);
  void write(const std::string& name, const Csv& csv) { write(name, csv.text()); }
  void note(const std::string& key, const std::string& value);
  /// Writes the manifest and returns every file path of the run, manifest last.
  std::vector<std::filesystem::path> finish(const std::string& status);

  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
  std::string pipeline_;
  ExperimentConfig cfg_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::pair<std::string, std::string>> files_;  // name, hash
  std::vector<std::pair<std::string, std::string>> notes_;
};

}  // namespace skewlab::cli
