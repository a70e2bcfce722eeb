#include "simperc/config.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace simperc {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) {
  throw std::invalid_argument("config: " + message);
}

int read_int(const json& value, const char* key) {
  if (!value.is_number_integer()) {
    fail(std::string(key) + " must be an integer");
  }
  return value.get<int>();
}

std::uint64_t read_u64(const json& value, const char* key) {
  if (value.is_number_unsigned()) return value.get<std::uint64_t>();
  if (value.is_number_integer() && value.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(value.get<std::int64_t>());
  }
  fail(std::string(key) + " must be a nonnegative integer");
}

double read_double(const json& value, const char* key) {
  if (!value.is_number()) fail(std::string(key) + " must be a number");
  return value.get<double>();
}

std::string read_string(const json& value, const char* key) {
  if (!value.is_string()) fail(std::string(key) + " must be a string");
  return value.get<std::string>();
}

std::vector<double> read_grid(const json& value, const char* key) {
  std::vector<double> grid;
  if (value.is_array()) {
    for (const auto& entry : value) {
      if (!entry.is_number()) {
        fail(std::string(key) + " entries must be numbers");
      }
      grid.push_back(entry.get<double>());
    }
  } else if (value.is_number()) {
    grid.push_back(value.get<double>());
  } else {
    fail(std::string(key) + " must be a number or an array of numbers");
  }
  return grid;
}

json config_json(const ExperimentConfig& config) {
  json j;
  j["version"] = config.version;
  j["kind"] = to_string(config.kind);
  j["D"] = config.D;
  j["d"] = config.d;
  j["lambda"] = config.lambda_grid;
  j["radius"] = config.radius_grid;
  j["r0"] = config.r0;
  j["w"] = config.w;
  j["s"] = config.s;
  j["s_grid"] = config.s_grid;
  j["L"] = config.L;
  j["p"] = config.p;
  j["delta"] = config.delta;
  j["replicas"] = config.replicas;
  j["root_seed"] = config.root_seed;
  j["workers"] = config.workers;
  j["out_dir"] = config.out_dir;
  j["coupling"] = to_string(config.coupling);
  return j;
}

bool strictly_increasing(const std::vector<double>& grid) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) return false;
  }
  return true;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kTheta: return "theta";
    case ExperimentKind::kCrossing: return "crossing";
    case ExperimentKind::kCycle: return "cycle";
    case ExperimentKind::kDelaunayCycle: return "delaunay-cycle";
    case ExperimentKind::kOsssAudit: return "osss-audit";
    case ExperimentKind::kEnhancement: return "enhancement";
  }
  throw std::logic_error("config: unhandled experiment kind");
}

ExperimentKind kind_from_string(const std::string& name) {
  if (name == "theta") return ExperimentKind::kTheta;
  if (name == "crossing") return ExperimentKind::kCrossing;
  if (name == "cycle") return ExperimentKind::kCycle;
  if (name == "delaunay-cycle") return ExperimentKind::kDelaunayCycle;
  if (name == "osss-audit") return ExperimentKind::kOsssAudit;
  if (name == "enhancement") return ExperimentKind::kEnhancement;
  fail("unknown experiment kind '" + name + "'");
}

const char* to_string(CouplingMode mode) {
  switch (mode) {
    case CouplingMode::kNone: return "none";
    case CouplingMode::kLambda: return "lambda";
    case CouplingMode::kRadius: return "radius";
  }
  throw std::logic_error("config: unhandled coupling mode");
}

CouplingMode coupling_from_string(const std::string& name) {
  if (name == "none") return CouplingMode::kNone;
  if (name == "lambda") return CouplingMode::kLambda;
  if (name == "radius") return CouplingMode::kRadius;
  fail("unknown coupling mode '" + name + "'");
}

ExperimentConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("parse error: ") + e.what());
  }
  if (!j.is_object()) fail("top level must be an object");

  ExperimentConfig config;
  bool saw_radius = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "version") {
      config.version = read_int(value, "version");
    } else if (key == "kind") {
      config.kind = kind_from_string(read_string(value, "kind"));
    } else if (key == "D") {
      config.D = read_int(value, "D");
    } else if (key == "d") {
      config.d = read_int(value, "d");
    } else if (key == "lambda") {
      config.lambda_grid = read_grid(value, "lambda");
    } else if (key == "radius" || key == "r" || key == "n") {
      if (saw_radius) fail("duplicate radius key ('radius', 'r', 'n')");
      saw_radius = true;
      config.radius_grid = read_grid(value, "radius");
    } else if (key == "r0") {
      config.r0 = read_double(value, "r0");
    } else if (key == "w") {
      config.w = read_double(value, "w");
    } else if (key == "s") {
      config.s = read_double(value, "s");
    } else if (key == "s_grid") {
      config.s_grid = read_grid(value, "s_grid");
    } else if (key == "L") {
      config.L = read_int(value, "L");
    } else if (key == "p") {
      config.p = read_double(value, "p");
    } else if (key == "delta") {
      config.delta = read_double(value, "delta");
    } else if (key == "replicas") {
      config.replicas = read_u64(value, "replicas");
    } else if (key == "root_seed") {
      config.root_seed = read_u64(value, "root_seed");
    } else if (key == "workers") {
      config.workers = read_int(value, "workers");
    } else if (key == "out_dir") {
      config.out_dir = read_string(value, "out_dir");
    } else if (key == "coupling") {
      config.coupling = coupling_from_string(read_string(value, "coupling"));
    } else {
      fail("unknown key '" + key + "'");
    }
  }
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot read '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return config_from_json_text(buffer.str());
}

std::string config_to_json_text(const ExperimentConfig& config) {
  return config_json(config).dump(2) + "\n";
}

void save_config(const ExperimentConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("config: cannot write '" + path + "'");
  out << config_to_json_text(config);
  if (!out) throw std::runtime_error("config: write failed for '" + path + "'");
}

void validate_config(const ExperimentConfig& config) {
  if (config.version != kConfigVersion) {
    fail("unsupported version " + std::to_string(config.version));
  }
  if (config.D < 1 || config.D > 3) fail("D must be 1, 2 or 3");
  if (config.d < 1 || config.d > 3) fail("d must be 1, 2 or 3");
  if (config.lambda_grid.empty()) fail("lambda grid must not be empty");
  for (double lambda : config.lambda_grid) {
    if (!(lambda > 0.0)) fail("lambda must be positive");
  }
  if (config.radius_grid.empty()) fail("radius grid must not be empty");
  if (config.replicas == 0) fail("replicas must be at least 1");
  if (config.workers < 1) fail("workers must be at least 1");
  if (config.out_dir.empty()) fail("out_dir must not be empty");
  if (!config.s_grid.empty() && config.kind != ExperimentKind::kOsssAudit) {
    fail("s_grid is only available for osss-audit");
  }

  switch (config.kind) {
    case ExperimentKind::kTheta:
      for (double r : config.radius_grid) {
        if (!(r >= 1.0)) fail("theta requires r >= 1");
      }
      break;
    case ExperimentKind::kCrossing:
      for (double n : config.radius_grid) {
        if (!(n > 2.0)) fail("crossing requires n > 2");
      }
      if (!(config.r0 > 0.0)) fail("crossing requires r0 > 0");
      break;
    case ExperimentKind::kCycle:
      for (double n : config.radius_grid) {
        if (!(n > 2.0)) fail("cycle requires n > 2");
        if (!(config.w > 0.0 && config.w < n / 4.0)) {
          fail("cycle requires 0 < w < n/4");
        }
      }
      if (!(config.r0 > 0.0)) fail("cycle requires r0 > 0");
      break;
    case ExperimentKind::kDelaunayCycle:
      if (config.D != 2) fail("delaunay-cycle requires D = 2");
      for (double ell : config.radius_grid) {
        if (!(ell > 0.0)) fail("delaunay-cycle requires a positive radius");
      }
      break;
    case ExperimentKind::kOsssAudit: {
      double r_min = config.radius_grid.front();
      double r_max = config.radius_grid.front();
      for (double r : config.radius_grid) {
        if (!(r >= 1.0)) fail("osss-audit requires r >= 1");
        r_min = std::min(r_min, r);
        r_max = std::max(r_max, r);
      }
      std::vector<double> ss =
          config.s_grid.empty() ? std::vector<double>{config.s} : config.s_grid;
      for (double s : ss) {
        if (!(s >= 1.0 && s <= r_min)) fail("osss-audit requires 1 <= s <= r");
      }
      if (!strictly_increasing(ss)) {
        fail("osss-audit s_grid must be strictly increasing");
      }
      const double L = static_cast<double>(config.L);
      if (!(L >= 2.0 * r_max) || !(L >= r_max + 2.0)) {
        fail("osss-audit requires L >= 2r and L >= r + 2");
      }
      break;
    }
    case ExperimentKind::kEnhancement:
      if (!(config.r0 > 2.0)) {
        fail("enhancement requires r0 > 2 (the enhancement hypothesis: the "
             "r0-ball around a special point must have room for two unit-"
             "separated witness balls)");
      }
      for (double n : config.radius_grid) {
        if (!(n > 2.0)) fail("enhancement requires n > 2");
      }
      if (config.delta < 0.0) fail("delta must be nonnegative");
      if (!(config.p - config.delta > 0.0 && config.p + config.delta < 1.0)) {
        fail("enhancement requires 0 < p - delta and p + delta < 1");
      }
      break;
  }

  if (config.coupling != CouplingMode::kNone) {
    if (config.kind != ExperimentKind::kTheta &&
        config.kind != ExperimentKind::kCrossing) {
      fail("coupling is only available for theta and crossing");
    }
    const std::vector<double>& grid = config.coupling == CouplingMode::kLambda
                                          ? config.lambda_grid
                                          : config.radius_grid;
    if (!strictly_increasing(grid)) {
      fail("coupled grid must be strictly increasing");
    }
  }
}

std::uint64_t config_cell_hash(const ExperimentConfig& config, double lambda,
                               double radius) {
  json j = config_json(config);
  j.erase("out_dir");
  j.erase("workers");
  json h;
  h["artifact"] = kArtifactVersion;
  h["cell_lambda"] = lambda;
  h["cell_radius"] = radius;
  h["config"] = j;
  return fnv1a(h.dump());
}

}  // namespace simperc
