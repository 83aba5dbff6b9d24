#include "config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "skewlab/error.hpp"
#include "skewlab/estimators.hpp"

namespace skewlab::cli {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ParameterError("config key '" + key + "': not a real number: '" + v + "'");
  return out;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ParameterError("config key '" + key + "': not a non-negative integer: '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ParameterError("config key '" + key + "': expected true or false, got '" + v + "'");
}

std::string parse_choice(const std::string& key, const std::string& v,
                         std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (v == a) return v;
  std::string msg = "config key '" + key + "': '" + v + "' is not one of";
  for (const char* a : allowed) msg += std::string(" ") + a;
  throw ParameterError(msg);
}

struct Field {
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

template <class T>
Field real_field(const char* key, T ExperimentConfig::*m) {
  return {key, [m](const ExperimentConfig& c) { return format_real(c.*m); },
          [key, m](ExperimentConfig& c, const std::string& v) { c.*m = parse_real(key, v); }};
}

template <class T>
Field count_field(const char* key, T ExperimentConfig::*m) {
  return {key, [m](const ExperimentConfig& c) { return std::to_string(c.*m); },
          [key, m](ExperimentConfig& c, const std::string& v) {
            c.*m = static_cast<T>(parse_unsigned(key, v));
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"model", [](const ExperimentConfig& c) { return c.model; },
       [](ExperimentConfig& c, const std::string& v) {
         c.model = parse_choice("model", v, {"arctan", "species"});
       }},
      real_field("a", &ExperimentConfig::a),
      real_field("b", &ExperimentConfig::b),
      real_field("c", &ExperimentConfig::c),
      real_field("d", &ExperimentConfig::d),
      real_field("alpha", &ExperimentConfig::alpha),
      {"base", [](const ExperimentConfig& c) { return c.base; },
       [](ExperimentConfig& c, const std::string& v) {
         c.base = parse_choice("base", v, {"doubling", "tent"});
       }},
      count_field("seed", &ExperimentConfig::seed),
      count_field("samples", &ExperimentConfig::samples),
      count_field("lyapunov_samples", &ExperimentConfig::lyapunov_samples),
      count_field("resolution", &ExperimentConfig::resolution),
      real_field("eps_min", &ExperimentConfig::eps_min),
      real_field("eps_max", &ExperimentConfig::eps_max),
      count_field("eps_count", &ExperimentConfig::eps_count),
      {"tail_method", [](const ExperimentConfig& c) { return c.tail_method; },
       [](ExperimentConfig& c, const std::string& v) {
         c.tail_method = parse_choice("tail_method", v, {"tilted", "plain"});
       }},
      count_field("grid_w", &ExperimentConfig::grid_w),
      count_field("grid_x", &ExperimentConfig::grid_x),
      {"grid_image", [](const ExperimentConfig& c) { return std::string(c.grid_image ? "true" : "false"); },
       [](ExperimentConfig& c, const std::string& v) { c.grid_image = parse_bool("grid_image", v); }},
      count_field("stability_points", &ExperimentConfig::stability_points),
      count_field("dimension_points", &ExperimentConfig::dimension_points),
      {"out", [](const ExperimentConfig& c) { return c.out; },
       [](ExperimentConfig& c, const std::string& v) { c.out = v; }},
  };
  return table;
}

}  // namespace

void set_field(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  for (const Field& f : fields())
    if (key == f.key) {
      f.set(cfg, value);
      return;
    }
  throw ParameterError("unknown config key '" + key + "'");
}

ExperimentConfig parse_config(const std::string& text, ExperimentConfig cfg) {
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParameterError("config line " + std::to_string(number) + ": expected key = value");
    try {
      set_field(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ParameterError& e) {
      throw ParameterError("config line " + std::to_string(number) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string to_text(const ExperimentConfig& cfg) {
  std::string out;
  for (const Field& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return out;
}

std::vector<double> eps_grid(const ExperimentConfig& cfg) {
  return geometric_grid(cfg.eps_max, cfg.eps_min, cfg.eps_count);
}

MarkovBaseMap make_base(const ExperimentConfig& cfg) {
  return cfg.base == "tent" ? make_tent_logistic_conjugate() : make_doubling();
}

FibreFamily make_family(const ExperimentConfig& cfg) {
  if (cfg.model == "species") return species_coupling_family(cfg.alpha, Check::Skip);
  return arctan_family(cfg.a, cfg.b, cfg.c, cfg.d);
}

SkewProduct make_system(const ExperimentConfig& cfg) {
  return SkewProduct(make_base(cfg), make_family(cfg), Check::Skip);
}

}  // namespace skewlab::cli
