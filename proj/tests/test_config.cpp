#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "simperc/config.hpp"

using namespace simperc;

namespace {

ExperimentConfig sample_config() {
  ExperimentConfig config;
  config.kind = ExperimentKind::kOsssAudit;
  config.D = 2;
  config.d = 1;
  config.lambda_grid = {0.6, 1.0};
  config.radius_grid = {5.0};
  config.s = 2.5;
  config.s_grid = {1.5, 2.5};
  config.L = 10;
  config.replicas = 250;
  config.root_seed = 99;
  config.workers = 4;
  config.out_dir = "results";
  return config;
}

template <typename Fn>
std::string validation_message(Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return {};
}

std::string message_for(const ExperimentConfig& config) {
  return validation_message([&] { validate_config(config); });
}

}  // namespace

TEST_CASE("config: canonical text round trips through the parser") {
  ExperimentConfig config = sample_config();
  std::string text = config_to_json_text(config);
  REQUIRE(!text.empty());
  CHECK(text.back() == '\n');
  ExperimentConfig back = config_from_json_text(text);
  CHECK(back == config);

  ExperimentConfig defaults;
  CHECK(config_from_json_text("{}") == defaults);
  CHECK(config_from_json_text(config_to_json_text(defaults)) == defaults);
}

TEST_CASE("config: save and load preserve every field") {
  namespace fs = std::filesystem;
  ExperimentConfig config = sample_config();
  fs::path path = fs::temp_directory_path() / "simperc_config_test.json";
  save_config(config, path.string());
  CHECK(load_config(path.string()) == config);
  fs::remove(path);
  CHECK_THROWS_AS(load_config(path.string()), std::runtime_error);
}

TEST_CASE("config: scalars widen to grids and radius accepts aliases") {
  ExperimentConfig a = config_from_json_text(
      "{\"lambda\": 1.5, \"radius\": 3.5}");
  CHECK(a.lambda_grid == std::vector<double>{1.5});
  CHECK(a.radius_grid == std::vector<double>{3.5});

  ExperimentConfig b = config_from_json_text("{\"r\": [2.0, 4.0]}");
  CHECK(b.radius_grid == std::vector<double>{2.0, 4.0});

  ExperimentConfig c = config_from_json_text("{\"n\": 6}");
  CHECK(c.radius_grid == std::vector<double>{6.0});

  ExperimentConfig d = config_from_json_text("{\"s_grid\": 2.0}");
  CHECK(d.s_grid == std::vector<double>{2.0});

  CHECK_THROWS_WITH_AS(config_from_json_text("{\"r\": 2.0, \"n\": 3.0}"),
                       "config: duplicate radius key ('radius', 'r', 'n')",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      config_from_json_text("{\"radius\": 2.0, \"r\": 2.0}"),
      "config: duplicate radius key ('radius', 'r', 'n')",
      std::invalid_argument);
}

TEST_CASE("config: strict parsing rejects malformed input") {
  CHECK_THROWS_WITH_AS(config_from_json_text("{\"bogus\": 1}"),
                       "config: unknown key 'bogus'", std::invalid_argument);
  CHECK_THROWS_WITH_AS(config_from_json_text("{\"kind\": \"frobnicate\"}"),
                       "config: unknown experiment kind 'frobnicate'",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(config_from_json_text("{\"coupling\": \"both\"}"),
                       "config: unknown coupling mode 'both'",
                       std::invalid_argument);
  CHECK_THROWS_AS(config_from_json_text("[1, 2]"), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json_text("{\"lambda\": \"high\"}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_json_text("{\"lambda\": [1.0, \"x\"]}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_json_text("{\"version\": \"1\"}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_json_text("{\"replicas\": -3}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_json_text("{\"out_dir\": 7}"),
                  std::invalid_argument);
  CHECK_THROWS_AS(config_from_json_text("{not json"), std::invalid_argument);
}

TEST_CASE("config: kind and coupling names round trip") {
  for (ExperimentKind kind :
       {ExperimentKind::kTheta, ExperimentKind::kCrossing,
        ExperimentKind::kCycle, ExperimentKind::kDelaunayCycle,
        ExperimentKind::kOsssAudit, ExperimentKind::kEnhancement}) {
    CHECK(kind_from_string(to_string(kind)) == kind);
  }
  for (CouplingMode mode : {CouplingMode::kNone, CouplingMode::kLambda,
                            CouplingMode::kRadius}) {
    CHECK(coupling_from_string(to_string(mode)) == mode);
  }
}

TEST_CASE("config: shared field validation") {
  ExperimentConfig base;
  base.kind = ExperimentKind::kTheta;
  base.radius_grid = {5.0};
  CHECK_NOTHROW(validate_config(base));

  ExperimentConfig bad = base;
  bad.version = 2;
  CHECK(message_for(bad) == "config: unsupported version 2");
  bad = base;
  bad.D = 4;
  CHECK(message_for(bad) == "config: D must be 1, 2 or 3");
  bad = base;
  bad.d = 0;
  CHECK(message_for(bad) == "config: d must be 1, 2 or 3");
  bad = base;
  bad.lambda_grid = {};
  CHECK(message_for(bad) == "config: lambda grid must not be empty");
  bad = base;
  bad.lambda_grid = {1.0, 0.0};
  CHECK(message_for(bad) == "config: lambda must be positive");
  bad = base;
  bad.radius_grid = {};
  CHECK(message_for(bad) == "config: radius grid must not be empty");
  bad = base;
  bad.replicas = 0;
  CHECK(message_for(bad) == "config: replicas must be at least 1");
  bad = base;
  bad.workers = 0;
  CHECK(message_for(bad) == "config: workers must be at least 1");
  bad = base;
  bad.out_dir = "";
  CHECK(message_for(bad) == "config: out_dir must not be empty");
  bad = base;
  bad.s_grid = {1.5};
  CHECK(message_for(bad) == "config: s_grid is only available for osss-audit");
}

TEST_CASE("config: per-kind validation") {
  ExperimentConfig theta;
  theta.kind = ExperimentKind::kTheta;
  theta.radius_grid = {0.5};
  CHECK(message_for(theta) == "config: theta requires r >= 1");

  ExperimentConfig crossing;
  crossing.kind = ExperimentKind::kCrossing;
  crossing.radius_grid = {2.0};
  CHECK(message_for(crossing) == "config: crossing requires n > 2");
  crossing.radius_grid = {4.0};
  crossing.r0 = 0.0;
  CHECK(message_for(crossing) == "config: crossing requires r0 > 0");
  crossing.r0 = 1.5;
  CHECK_NOTHROW(validate_config(crossing));

  ExperimentConfig cycle;
  cycle.kind = ExperimentKind::kCycle;
  cycle.radius_grid = {4.0};
  cycle.w = 0.9;
  CHECK_NOTHROW(validate_config(cycle));
  cycle.w = 1.0;
  CHECK(message_for(cycle) == "config: cycle requires 0 < w < n/4");
  cycle.w = 0.0;
  CHECK(message_for(cycle) == "config: cycle requires 0 < w < n/4");

  ExperimentConfig dc;
  dc.kind = ExperimentKind::kDelaunayCycle;
  dc.radius_grid = {2.0};
  CHECK_NOTHROW(validate_config(dc));
  dc.D = 3;
  CHECK(message_for(dc) == "config: delaunay-cycle requires D = 2");
  dc.D = 2;
  dc.radius_grid = {0.0};
  CHECK(message_for(dc) ==
        "config: delaunay-cycle requires a positive radius");
}

TEST_CASE("config: osss-audit validation ties s, r and L together") {
  ExperimentConfig osss;
  osss.kind = ExperimentKind::kOsssAudit;
  osss.radius_grid = {5.0};
  osss.s = 2.5;
  osss.L = 10;
  CHECK_NOTHROW(validate_config(osss));

  ExperimentConfig bad = osss;
  bad.radius_grid = {0.5};
  CHECK(message_for(bad) == "config: osss-audit requires r >= 1");
  bad = osss;
  bad.s = 0.5;
  CHECK(message_for(bad) == "config: osss-audit requires 1 <= s <= r");
  bad = osss;
  bad.s = 6.0;
  CHECK(message_for(bad) == "config: osss-audit requires 1 <= s <= r");
  bad = osss;
  bad.s_grid = {2.0, 2.0};
  CHECK(message_for(bad) ==
        "config: osss-audit s_grid must be strictly increasing");
  bad = osss;
  bad.L = 9;
  CHECK(message_for(bad) ==
        "config: osss-audit requires L >= 2r and L >= r + 2");
  bad = osss;
  bad.radius_grid = {1.5};
  bad.s = 1.5;
  bad.L = 3;
  CHECK(message_for(bad) ==
        "config: osss-audit requires L >= 2r and L >= r + 2");
  bad.L = 4;
  CHECK_NOTHROW(validate_config(bad));

  // With an s sweep, every entry must respect the smallest radius.
  ExperimentConfig sweep = osss;
  sweep.s_grid = {1.0, 2.0, 5.0};
  CHECK_NOTHROW(validate_config(sweep));
  sweep.radius_grid = {4.0, 5.0};
  CHECK(message_for(sweep) == "config: osss-audit requires 1 <= s <= r");
}

TEST_CASE("config: enhancement validation names the hypothesis") {
  ExperimentConfig enh;
  enh.kind = ExperimentKind::kEnhancement;
  enh.radius_grid = {3.0};
  enh.r0 = 2.5;
  enh.p = 0.5;
  enh.delta = 0.1;
  CHECK_NOTHROW(validate_config(enh));

  ExperimentConfig bad = enh;
  bad.r0 = 2.0;
  std::string msg = message_for(bad);
  CHECK(msg.find("r0 > 2") != std::string::npos);
  CHECK(msg.find("witness balls") != std::string::npos);

  bad = enh;
  bad.radius_grid = {2.0};
  CHECK(message_for(bad) == "config: enhancement requires n > 2");
  bad = enh;
  bad.delta = -0.1;
  CHECK(message_for(bad) == "config: delta must be nonnegative");
  bad = enh;
  bad.p = 0.95;
  CHECK(message_for(bad) ==
        "config: enhancement requires 0 < p - delta and p + delta < 1");
  bad = enh;
  bad.p = 0.05;
  CHECK(message_for(bad) ==
        "config: enhancement requires 0 < p - delta and p + delta < 1");
}

TEST_CASE("config: coupling is limited to monotone theta/crossing grids") {
  ExperimentConfig coupled;
  coupled.kind = ExperimentKind::kTheta;
  coupled.lambda_grid = {0.5, 1.0, 1.5};
  coupled.radius_grid = {5.0};
  coupled.coupling = CouplingMode::kLambda;
  CHECK_NOTHROW(validate_config(coupled));

  coupled.coupling = CouplingMode::kRadius;
  coupled.radius_grid = {4.0, 6.0};
  CHECK_NOTHROW(validate_config(coupled));

  ExperimentConfig bad = coupled;
  bad.kind = ExperimentKind::kCycle;
  bad.radius_grid = {4.0, 6.0};
  bad.w = 0.9;
  CHECK(message_for(bad) ==
        "config: coupling is only available for theta and crossing");

  bad = coupled;
  bad.coupling = CouplingMode::kLambda;
  bad.lambda_grid = {1.5, 1.0};
  CHECK(message_for(bad) == "config: coupled grid must be strictly increasing");

  bad = coupled;
  bad.coupling = CouplingMode::kRadius;
  bad.radius_grid = {6.0, 6.0};
  CHECK(message_for(bad) == "config: coupled grid must be strictly increasing");
}

TEST_CASE("config: cell hash tracks science, not placement") {
  ExperimentConfig config = sample_config();
  const std::uint64_t h = config_cell_hash(config, 1.0, 5.0);
  CHECK(config_cell_hash(config, 1.0, 5.0) == h);

  CHECK(config_cell_hash(config, 1.5, 5.0) != h);
  CHECK(config_cell_hash(config, 1.0, 6.0) != h);

  ExperimentConfig moved = config;
  moved.out_dir = "elsewhere";
  moved.workers = 16;
  CHECK(config_cell_hash(moved, 1.0, 5.0) == h);

  ExperimentConfig more = config;
  more.replicas += 1;
  CHECK(config_cell_hash(more, 1.0, 5.0) != h);

  ExperimentConfig reseeded = config;
  reseeded.root_seed += 1;
  CHECK(config_cell_hash(reseeded, 1.0, 5.0) != h);

  ExperimentConfig other_kind = config;
  other_kind.kind = ExperimentKind::kTheta;
  other_kind.s_grid = {};
  CHECK(config_cell_hash(other_kind, 1.0, 5.0) != h);
}
