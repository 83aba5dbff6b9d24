#include "output.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>

#include "skewlab/error.hpp"
#include "skewlab/parallel.hpp"

namespace skewlab::cli {

Csv::Csv(std::vector<std::string> header) : header_(std::move(header)) {
  for (std::size_t i = 0; i < header_.size(); ++i) body_ += (i ? "," : "") + header_[i];
  body_ += "\n";
}

Csv& Csv::operator<<(double v) {
  row_.push_back(format_real(v));
  return *this;
}

Csv& Csv::operator<<(std::size_t v) {
  row_.push_back(std::to_string(v));
  return *this;
}

Csv& Csv::operator<<(const std::string& v) {
  if (v.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    row_.push_back(q + "\"");
  } else {
    row_.push_back(v);
  }
  return *this;
}

void Csv::end_row() {
  if (row_.size() != header_.size())
    throw Error("csv row has " + std::to_string(row_.size()) + " fields, header has " +
                std::to_string(header_.size()));
  for (std::size_t i = 0; i < row_.size(); ++i) body_ += (i ? "," : "") + row_[i];
  body_ += "\n";
  row_.clear();
}

std::string Csv::text() const { return body_; }

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

RunRecorder::RunRecorder(std::filesystem::path dir, std::string pipeline, const ExperimentConfig& cfg)
    : dir_(std::move(dir)), pipeline_(std::move(pipeline)), cfg_(cfg),
      start_(std::chrono::steady_clock::now()) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (!std::filesystem::is_directory(dir_))
    throw ParameterError("output directory '" + dir_.string() + "' is not writable");
}

void RunRecorder::write(const std::string& name, const std::string& bytes) {
  const auto path = dir_ / name;
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("cannot write '" + path.string() + "'");
  files_.emplace_back(name, sha256_hex(bytes));
}

void RunRecorder::note(const std::string& key, const std::string& value) {
  notes_.emplace_back(key, value);
}

std::vector<std::filesystem::path> RunRecorder::finish(const std::string& status) {
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  std::string m;
  m += "tool = skewlab\n";
  m += "version = " SKEWLAB_VERSION "\n";
  m += "compiler = " __VERSION__ "\n";
  m += std::string("openssl = ") + OPENSSL_VERSION_TEXT + "\n";
  m += "pipeline = " + pipeline_ + "\n";
  m += "status = " + status + "\n";
  m += "seed = " + std::to_string(cfg_.seed) + "\n";
  m += "threads = " + std::to_string(thread_count()) + "\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", wall);
  m += std::string("wall_time_s = ") + buf + "\n";
  for (const auto& [k, v] : notes_) m += "note." + k + " = " + v + "\n";
  std::string cfg_text = to_text(cfg_);
  std::size_t pos = 0;
  while (pos < cfg_text.size()) {
    const auto nl = cfg_text.find('\n', pos);
    m += "config." + cfg_text.substr(pos, nl - pos) + "\n";
    pos = nl + 1;
  }
  for (const auto& [name, hash] : files_) m += "file." + name + ".sha256 = " + hash + "\n";

  std::vector<std::filesystem::path> paths;
  for (const auto& f : files_) paths.push_back(dir_ / f.first);
  const auto mpath = dir_ / "manifest.txt";
  std::ofstream out(mpath, std::ios::binary);
  out << m;
  if (!out) throw Error("cannot write '" + mpath.string() + "'");
  paths.push_back(mpath);
  return paths;
}

}  // namespace skewlab::cli
