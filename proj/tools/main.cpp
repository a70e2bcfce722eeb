#include <array>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "simperc/config.hpp"
#include "simperc/runner.hpp"

namespace {

using nlohmann::json;
using namespace simperc;

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  int workers = 0;
  std::optional<std::uint64_t> seed;
  bool resume = false;
  bool timings = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Experiment config (JSON)")
      ->required();
  cmd->add_option("--out", args.out_dir,
                  "Output directory (overrides the config)");
  cmd->add_option("--workers", args.workers,
                  "Worker threads (overrides config and SIMPERC_WORKERS)");
  cmd->add_option("--seed", args.seed, "Root seed (overrides the config)");
  cmd->add_flag("--resume", args.resume,
                "Skip cells whose outputs match the current cell hash");
  cmd->add_flag("--timings", args.timings,
                "Record wall-clock timings (off by default so reruns are "
                "byte-identical)");
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return std::string(buf);
}

int run_kind(ExperimentKind kind, const CommonArgs& args) {
  ExperimentConfig config = load_config(args.config_path);
  if (config.kind != kind) {
    throw std::invalid_argument(std::string("config: kind '") +
                                to_string(config.kind) +
                                "' does not match subcommand '" +
                                to_string(kind) + "'");
  }
  RunOptions options;
  options.out_dir = args.out_dir;
  options.workers = args.workers;
  options.seed = args.seed;
  options.resume = args.resume;
  options.timings = args.timings;
  RunReport report = run_experiment(config, options);

  json cells = json::array();
  for (const CellOutcome& cell : report.cells) {
    cells.push_back(json{{"lambda", cell.lambda},
                         {"radius", cell.radius},
                         {"hash", hex16(cell.hash)},
                         {"skipped", cell.skipped},
                         {"summary", cell.summary_path},
                         {"csv", cell.csv_path}});
  }
  json out;
  out["out_dir"] = report.out_dir;
  out["workers"] = report.workers;
  out["cells"] = cells;
  std::cout << out.dump(2) << "\n";
  return 0;
}

void emit_error(const char* type, const std::string& message) {
  json doc;
  doc["error"] = json{{"type", type}, {"message", message}};
  std::cerr << doc.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Poisson simplicial percolation experiments"};
  app.require_subcommand(1);

  struct KindSpec {
    ExperimentKind kind;
    const char* help;
  };
  const std::array<KindSpec, 6> kinds = {{
      {ExperimentKind::kTheta,
       "Origin reach probability over a lambda/radius grid"},
      {ExperimentKind::kCrossing, "Face and star crossing probabilities"},
      {ExperimentKind::kCycle,
       "Cycle crossing with face/star containment checks"},
      {ExperimentKind::kDelaunayCycle,
       "Delaunay growth and outer-boundary cycle candidates"},
      {ExperimentKind::kOsssAudit,
       "Exploration revealment, influence and pivot audits"},
      {ExperimentKind::kEnhancement,
       "Coupled thinning comparison across mark parameters"},
  }};
  std::array<CommonArgs, 6> kind_args;
  std::array<CLI::App*, 6> kind_cmds{};
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    kind_cmds[i] = app.add_subcommand(to_string(kinds[i].kind), kinds[i].help);
    add_common(kind_cmds[i], kind_args[i]);
  }

  CLI::App* plot = app.add_subcommand(
      "plotdata", "Merge cell summaries into a long-format TSV");
  std::vector<std::string> summary_paths;
  std::string plot_out;
  plot->add_option("summaries", summary_paths, "Cell summary JSON files")
      ->required();
  plot->add_option("--out", plot_out, "Output TSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < kinds.size(); ++i) {
      if (kind_cmds[i]->parsed()) {
        return run_kind(kinds[i].kind, kind_args[i]);
      }
    }
    if (plot->parsed()) {
      emit_plotdata(summary_paths, plot_out);
      std::cout << json{{"plotdata", plot_out}}.dump() << "\n";
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    emit_error("config", e.what());
    return 2;
  } catch (const std::runtime_error& e) {
    emit_error("io", e.what());
    return 3;
  } catch (const std::logic_error& e) {
    emit_error("internal", e.what());
    return 4;
  } catch (const std::exception& e) {
    emit_error("error", e.what());
    return 1;
  }
  return 1;
}
