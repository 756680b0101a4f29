// Run configuration: flat "key = value" lines grouped by [section] headers,
// '#' comments, no nesting. Unknown sections or keys are hard errors so a
// typo cannot silently change an experiment.

#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dfdreg/rates.hpp"

namespace dfdreg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ProblemKind { hp, hp_unbounded, volterra, files };
enum class DfdSource { svd, example_hp, derive };

struct RunConfig {
  // [problem]
  ProblemKind problem = ProblemKind::hp;
  long n = 0;
  std::string path;  // kind = files: directory holding a serialized DFD

  // [dfd]
  DfdSource dfd_source = DfdSource::svd;
  std::string v_path;  // source = derive: frame file for v

  // [regularization]
  std::string filter_spec = "tikhonov:rate_form";
  double rho = 1.0;
  double mu = 1.0;
  double c = 1.0;
  std::optional<double> delta;  // noise level for invert
  std::optional<double> alpha;  // direct alpha override for invert

  // [study]
  double delta_max = 1e-1;
  double delta_min = 1e-6;
  int points_per_decade = 10;
  int noise_draws = 5;
  SourceProfile source_profile = Geometric{0.5};

  // [run]
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";

  std::string raw_text;  // verbatim config, embedded in output headers

  std::vector<double> delta_grid() const {
    if (!(delta_min > 0.0) || !(delta_max > delta_min))
      throw ConfigError("study: need 0 < delta_min < delta_max");
    if (points_per_decade < 1) throw ConfigError("study: points_per_decade must be >= 1");
    const double decades = std::log10(delta_max / delta_min);
    const int steps = std::max(1, static_cast<int>(std::lround(decades * points_per_decade)));
    std::vector<double> grid(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i)
      grid[static_cast<std::size_t>(i)] =
          delta_max * std::pow(delta_min / delta_max, static_cast<double>(i) / steps);
    grid.front() = delta_max;
    grid.back() = delta_min;
    return grid;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& value, const std::string& key) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for '" + key + "': '" + value + "'");
  }
  if (used != value.size()) throw ConfigError("trailing junk in value for '" + key + "'");
  return d;
}

inline long parse_long(const std::string& value, const std::string& key) {
  std::size_t used = 0;
  long n = 0;
  try {
    n = std::stol(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("bad integer value for '" + key + "': '" + value + "'");
  }
  if (used != value.size()) throw ConfigError("trailing junk in value for '" + key + "'");
  return n;
}

inline SourceProfile parse_source_profile(const std::string& value) {
  std::istringstream in(value);
  std::string kind;
  in >> kind;
  if (kind == "geometric") {
    double ratio = 0.5;
    if (in >> ratio) {
      if (!(ratio > 0.0)) throw ConfigError("source: geometric ratio must be positive");
    }
    return Geometric{ratio};
  }
  if (kind == "one_hot") {
    long nu = 0;
    if (!(in >> nu) || nu < 0) throw ConfigError("source: one_hot needs a nonnegative index");
    return OneHot{static_cast<std::size_t>(nu)};
  }
  throw ConfigError("source: unknown profile '" + value + "' (use geometric or one_hot)");
}

}  // namespace detail

inline RunConfig parse_run_config(const std::string& text) {
  RunConfig config;
  config.raw_text = text;

  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "problem" && section != "dfd" && section != "regularization" &&
          section != "study" && section != "run")
        throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": empty key or value");

    auto unknown = [&]() -> ConfigError {
      return ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key +
                         "' in section [" + section + "]");
    };

    if (section == "problem") {
      if (key == "kind") {
        if (value == "hp") config.problem = ProblemKind::hp;
        else if (value == "hp_unbounded") config.problem = ProblemKind::hp_unbounded;
        else if (value == "volterra") config.problem = ProblemKind::volterra;
        else if (value == "files") config.problem = ProblemKind::files;
        else throw ConfigError("line " + std::to_string(line_no) + ": unknown problem kind '" + value + "'");
      } else if (key == "n") {
        config.n = detail::parse_long(value, key);
      } else if (key == "path") {
        config.path = value;
      } else {
        throw unknown();
      }
    } else if (section == "dfd") {
      if (key == "source") {
        if (value == "svd") config.dfd_source = DfdSource::svd;
        else if (value == "example_hp") config.dfd_source = DfdSource::example_hp;
        else if (value == "derive") config.dfd_source = DfdSource::derive;
        else throw ConfigError("line " + std::to_string(line_no) + ": unknown dfd source '" + value + "'");
      } else if (key == "v_path") {
        config.v_path = value;
      } else {
        throw unknown();
      }
    } else if (section == "regularization") {
      if (key == "filter") config.filter_spec = value;
      else if (key == "rho") config.rho = detail::parse_double(value, key);
      else if (key == "mu") config.mu = detail::parse_double(value, key);
      else if (key == "c") config.c = detail::parse_double(value, key);
      else if (key == "delta") config.delta = detail::parse_double(value, key);
      else if (key == "alpha") config.alpha = detail::parse_double(value, key);
      else throw unknown();
    } else if (section == "study") {
      if (key == "delta_max") config.delta_max = detail::parse_double(value, key);
      else if (key == "delta_min") config.delta_min = detail::parse_double(value, key);
      else if (key == "points_per_decade")
        config.points_per_decade = static_cast<int>(detail::parse_long(value, key));
      else if (key == "noise_draws")
        config.noise_draws = static_cast<int>(detail::parse_long(value, key));
      else if (key == "source") config.source_profile = detail::parse_source_profile(value);
      else throw unknown();
    } else if (section == "run") {
      if (key == "seed") {
        try {
          config.seed = std::stoull(value);
        } catch (const std::exception&) {
          throw ConfigError("line " + std::to_string(line_no) + ": bad seed '" + value + "'");
        }
      } else if (key == "out") {
        config.out_dir = value;
      } else {
        throw unknown();
      }
    } else {
      throw ConfigError("line " + std::to_string(line_no) + ": key '" + key +
                        "' appears before any [section] header");
    }
  }
  return config;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str());
}

}  // namespace dfdreg
