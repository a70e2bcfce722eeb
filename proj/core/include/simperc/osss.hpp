#pragma once

// Exploration-based audit of the crossing event {o ~> dist r}.
//
// explore() runs the two-phase revealment algorithm: first every lattice
// box meeting the annulus of radius s is revealed, then boxes within
// distance 1 of a vertex of a revealed cluster meeting the sphere of
// radius s, lowest lexicographic site first, restricted to |site| <= L.
// The final decision agrees with the global crossing indicator; the audit
// estimators measure per-site revealment, resampling influence and
// insertion pivotality under common random numbers.

#include <cstdint>
#include <span>
#include <vector>

#include "simperc/percolation.hpp"
#include "simperc/point_process.hpp"
#include "simperc/stats.hpp"

namespace simperc {

struct ExplorationSpec {
  int d = 1;
  double s = 2.5;  // tracking sphere radius, >= 1
  double r = 5.0;  // decision radius, >= s
  int L = 10;      // lattice cutoff, >= 2r
};

struct ExplorationState {
  // Revealed sites in visit order, D coordinates per step.
  std::vector<std::int32_t> site_order_flat;
  std::size_t first_phase = 0;  // prefix length of the annulus phase
  bool decision = false;
  std::vector<std::int32_t> revealed_points;  // ids, ascending
};

// The realization window must contain every lattice box Q_1(x), |x| <= L.
// The origin is adjoined internally (it is never part of the sample).
ExplorationState explore(const Realization& real,
                         const ExplorationSpec& spec);

// All lattice sites with Euclidean norm <= L, lexicographic order,
// D coordinates per site.
std::vector<std::int32_t> lattice_sites(int D, int L);

struct SiteAccumulator {
  std::vector<std::int32_t> site;
  // Edits in this box provably cannot affect the event (box further than
  // r + 1 from the origin); estimators report exact zeros, no replicas.
  bool local_zero = false;
  std::uint64_t reveals = 0;
  std::uint64_t inf_flips = 0;
  std::uint64_t piv_flips = 0;
  std::uint64_t joint_flips = 0;  // influence and pivot flip in the same replica
};

struct OsssAuditSpec {
  int D = 2;
  int d = 1;
  double lambda = 1.0;
  double r = 5.0;
  double s = 2.5;
  int L = 10;
  std::uint64_t replicas = 1000;
  // First replica index; blocks [offset, offset + replicas) from the same
  // root seed merge into one run, which is how workers split the load.
  std::uint64_t replica_offset = 0;
  std::uint64_t root_seed = 0;
  bool run_exploration = true;
  bool run_influence = true;
  bool run_pivot = true;
  // Sites to audit, D coordinates each; empty means all of I_L.
  std::vector<std::int32_t> sites_flat;
};

struct OsssAuditRun {
  std::uint64_t replicas = 0;
  std::uint64_t crossings = 0;
  double theta_hat = 0.0;
  WilsonInterval theta_ci;
  std::vector<SiteAccumulator> sites;
  std::vector<std::uint8_t> decisions;   // per replica, block order
  std::vector<std::int32_t> n_points;
};

// Batch driver: one base realization per replica shared by every
// estimator (common random numbers); edit streams are derived per
// (replica, site index) so results do not depend on evaluation order.
OsssAuditRun osss_audit_run(const OsssAuditSpec& spec);

struct SiteEstimate {
  double estimate = 0.0;
  WilsonInterval ci;
  std::uint64_t hits = 0;
  std::uint64_t n = 0;
  bool local_zero = false;
};

SiteEstimate revealment_estimate(const OsssAuditSpec& spec,
                                 std::span<const std::int32_t> site);
SiteEstimate influence_estimate(const OsssAuditSpec& spec,
                                std::span<const std::int32_t> site);
SiteEstimate pivot_estimate(const OsssAuditSpec& spec,
                            std::span<const std::int32_t> site);

struct OsssCheckReport {
  double lhs = 0.0;        // theta(1 - theta)
  double rhs = 0.0;        // sum over sites of revealment * influence
  double pooled_se = 0.0;  // first-order error propagation, sites
                           // treated as independent
  bool holds = false;      // lhs <= rhs + z * pooled_se
};

OsssCheckReport osss_check(const OsssAuditRun& run, double z = 3.0);

struct InfluenceBoundReport {
  double inf_hat = 0.0;
  double piv_hat = 0.0;
  double coeff = 0.0;      // lambda * exp(lambda)
  double paired_se = 0.0;  // SE of mean(inf_i - coeff * piv_i)
  bool holds = false;      // inf_hat <= coeff * piv_hat + z * paired_se
};

InfluenceBoundReport influence_bound_check(const SiteAccumulator& site,
                                           std::uint64_t replicas,
                                           double lambda, double z = 3.0);

struct PoissonRatioBound {
  double max_ratio = 0.0;  // max over 1 <= k <= k_max
  double bound = 0.0;      // lambda * exp(lambda)
  std::vector<double> ratios;
};

// Ratios P(M >= k) / P(M = k-1) for M ~ Poisson(lambda), evaluated by the
// term recurrence t_0 = lambda/k, t_{j+1} = t_j * lambda/(k+j+1) carried in
// log space. Throws std::logic_error if any ratio exceeds lambda*e^lambda.
PoissonRatioBound poisson_ratio_bound(double lambda, int k_max);

}  // namespace simperc
