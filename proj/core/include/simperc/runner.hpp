#pragma once

// Configuration-driven experiment orchestration: grid-cell execution with
// static replica partitioning across workers, per-cell persistence
// (summary JSON + replica CSV), content-addressed resume, and plot-data
// emission.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "simperc/config.hpp"

namespace simperc {

struct RunOptions {
  std::string out_dir;  // overrides the config when nonempty
  int workers = 0;      // overrides the config when positive
  std::optional<std::uint64_t> seed;
  bool resume = false;
  bool timings = false;  // fill the runtime_ms CSV column
};

// Worker count precedence: options (CLI) > SIMPERC_WORKERS > config.
int resolve_workers(const ExperimentConfig& config, const RunOptions& options);

struct CellOutcome {
  double lambda = 0.0;
  double radius = 0.0;
  std::uint64_t hash = 0;
  bool skipped = false;  // resumed from existing outputs
  std::string summary_path;
  std::string csv_path;
};

struct RunReport {
  std::string out_dir;
  int workers = 1;
  std::vector<CellOutcome> cells;
};

// Executes the config's grid. One summary JSON and one replica CSV per
// cell, written CSV first so a summary marks a completed cell; with
// resume, cells whose summary carries the current cell hash are skipped.
// Coupled grids are computed jointly and resumed all-or-nothing. The
// replica index, not the worker, determines every random stream, so the
// output bytes are independent of the worker count (runtime_ms excepted,
// which stays empty unless timings are requested).
RunReport run_experiment(const ExperimentConfig& config,
                         const RunOptions& options);

// Long-format TSV (parameter columns, measure, estimate, ci_lo, ci_hi)
// from cell summaries of a single experiment kind; mixed kinds are
// rejected. Theta runs with a radius grid get decay-fit metadata appended
// as comment rows.
void emit_plotdata(const std::vector<std::string>& summary_paths,
                   const std::string& out_path);

}  // namespace simperc
