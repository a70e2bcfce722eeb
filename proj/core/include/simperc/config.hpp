#pragma once

// Versioned JSON experiment configuration: strict parsing, per-kind
// validation, canonical serialization and the content hash behind
// cell-level resume.

#include <cstdint>
#include <string>
#include <vector>

namespace simperc {

inline constexpr int kConfigVersion = 1;
// Bumped whenever an output format or estimator changes meaning; part of
// every cell hash so stale results are never mistaken for current ones.
inline constexpr int kArtifactVersion = 1;

enum class ExperimentKind {
  kTheta,
  kCrossing,
  kCycle,
  kDelaunayCycle,
  kOsssAudit,
  kEnhancement,
};

const char* to_string(ExperimentKind kind);
ExperimentKind kind_from_string(const std::string& name);

// Replica coupling across grid cells: superposition in lambda, or shared
// realizations across the radius grid. Available for theta and crossing.
enum class CouplingMode { kNone, kLambda, kRadius };

const char* to_string(CouplingMode mode);
CouplingMode coupling_from_string(const std::string& name);

struct ExperimentConfig {
  int version = kConfigVersion;
  ExperimentKind kind = ExperimentKind::kTheta;
  int D = 2;
  int d = 1;
  std::vector<double> lambda_grid = {1.0};
  // Reach radius r for theta and osss-audit, crossing radius n for
  // crossing, cycle and enhancement, axis half length for delaunay-cycle.
  std::vector<double> radius_grid = {5.0};
  double r0 = 2.5;
  double w = 0.5;              // collar width (cycle)
  double s = 2.5;              // exploration sphere radius (osss-audit)
  std::vector<double> s_grid;  // optional s sweep (osss-audit)
  int L = 10;                  // site lattice cutoff (osss-audit)
  double p = 0.5;              // first-mark parameter (enhancement)
  double delta = 0.1;          // enhancement offset
  std::uint64_t replicas = 100;
  std::uint64_t root_seed = 0;
  int workers = 1;
  std::string out_dir = "out";
  CouplingMode coupling = CouplingMode::kNone;

  bool operator==(const ExperimentConfig&) const = default;
};

// Strict parse of a JSON object: unknown keys are rejected, "radius" also
// accepts the aliases "r" and "n", and grid-valued fields ("lambda",
// "radius", "s_grid") accept a scalar or an array.
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Canonical form: sorted keys, grids as arrays, every field present.
// Parsing the output yields an equal config.
std::string config_to_json_text(const ExperimentConfig& config);
void save_config(const ExperimentConfig& config, const std::string& path);

// Throws std::invalid_argument when a field violates a precondition of
// the operations the named experiment runs.
void validate_config(const ExperimentConfig& config);

// Content address of one grid cell: FNV-1a over the canonical config with
// out_dir and workers removed, the cell's lambda and radius, and the
// artifact version. Relocated or re-parallelized reruns therefore hash
// identically; any scientific change does not.
std::uint64_t config_cell_hash(const ExperimentConfig& config, double lambda,
                               double radius);

}  // namespace simperc
