#pragma once

// Special points, the Gamma thinning map, thinned crossing estimators and
// the mark-pivotality machinery behind the enhancement comparison.
//
// A point x of a finite set is special when its r0-ball contains, besides
// x itself, exactly two groups of d points, each group packed into a ball
// of radius 1/8 centered within 7/8 of x, the two balls more than distance
// 1 apart, and nothing else. Deleting a special point removes two isolated
// d-simplices and cannot affect face clusters, but can cut a star chain;
// the thinning T(Lambda, xi1, xi2) keeps a special point only when both of
// its marks are 1 and a plain point whenever its first mark is 1.

#include <cstdint>
#include <vector>

#include "simperc/percolation.hpp"
#include "simperc/point_process.hpp"
#include "simperc/stats.hpp"

namespace simperc {

struct SpecialPointReport {
  int point_id = -1;
  Point y_center;
  Point z_center;
  std::vector<int> group_y;  // ids inside B_{1/8}(y*), ascending
  std::vector<int> group_z;
  double meb_radius_y = 0.0;
  double meb_radius_z = 0.0;
  double dist_y = 0.0;      // |y* - x|
  double dist_z = 0.0;      // |z* - x|
  double separation = 0.0;  // |y* - z*|
};

// Conservative detector: reports x iff the points of the r0-ball around x
// (x excluded) split into two groups of exactly d whose minimal enclosing
// balls have radius <= 1/8, centers within 7/8 of x but further than 1/8
// (so x itself stays outside both witness balls), centers more than 5/4
// apart, with no other point inside the r0-ball. Sound but possibly
// incomplete: witness centers are restricted to minimal-enclosing-ball
// centers. Every report is re-verified against the raw definition before
// being returned. Requires r0 > 2.
std::vector<SpecialPointReport> detect_special(const Realization& real,
                                               double r0, int d);

// Raw-definition check of a report: ball containment, exact membership
// counts, separation and r0-ball exclusion.
bool verify_special_report(const Realization& real, double r0, int d,
                           const SpecialPointReport& rep);

// Feasibility audit with witness centers searched on a lattice of the
// given step instead of taken from minimal enclosing balls. Slower and
// still incomplete (in the other direction); used to probe how much the
// conservative detector misses.
std::vector<SpecialPointReport> detect_special_refined(const Realization& real,
                                                       double r0, int d,
                                                       double step);

struct ThinnedSet {
  std::vector<int> survivors;  // ids, ascending
  std::vector<int> special;    // ids of special points, ascending
};

// Survival rule: xi1(x) * xi2(x) for special x, xi1(x) otherwise.
ThinnedSet gamma_thin(const MarkedRealization& marked, double r0, int d);

struct ThinSpec {
  int D = 2;
  int d = 1;
  double lambda = 1.0;
  double p = 1.0;
  double q = 1.0;
  double r0 = 2.5;
  double n = 4.0;  // crossing radius, > 2
  std::uint64_t replicas = 100;
  std::uint64_t root_seed = 0;
};

// Monte Carlo means of the crossing functions applied to the thinned set.
// Window: ball of radius n + 2 + r0, so both the crossing chains and the
// special status of every point they can use are unaffected by the window
// boundary. Marks are thresholded per-point uniforms from dedicated
// streams, so runs sharing (root seed, replica) are coupled across (p, q).
ExperimentRecord theta_face_thin(const ThinSpec& spec);
ExperimentRecord theta_star_thin(const ThinSpec& spec);

struct PivOutcome {
  bool with_one = false;  // crossing with the edited mark forced to 1
  bool with_zero = false;
  bool pivotal = false;   // with_one != with_zero
};

// Pivotality of the mark j in {1,2} of a continuum location x for the
// thinned star crossing at radius n: x is adjoined to the configuration,
// mark j at x is evaluated at both settings, and for ell > 0 the second
// mark field is first forced to 1 on B_{ell+r0}(x) \ {x}. ell = 0 yields
// the plain events (no forcing). other_mark_at_x supplies the mark of x
// that is not being edited; the outcome never depends on the stored value
// of the edited mark at x.
PivOutcome piv_events(const MarkedRealization& marked, const Point& x, int j,
                      double ell, double n, double r0, int d,
                      bool other_mark_at_x);

struct EnhancementSpec {
  int D = 2;
  int d = 1;
  double lambda = 1.0;
  double p = 0.5;
  double delta = 0.1;  // 0 < p - delta, p + delta < 1
  double r0 = 2.5;
  std::vector<double> n_grid;
  std::uint64_t replicas = 200;
  // First replica index; workers run disjoint blocks and merge rows.
  std::uint64_t replica_offset = 0;
  std::uint64_t root_seed = 0;
};

struct EnhancementRow {
  double n = 0.0;
  std::uint64_t replicas = 0;
  // "minus" side: (p - delta, q = 1/2); "plus" side: (p + delta, q = 1/4).
  std::uint64_t minus_star = 0;
  std::uint64_t plus_star = 0;
  std::uint64_t minus_face = 0;
  std::uint64_t plus_face = 0;
  double minus_star_hat = 0.0;
  double plus_star_hat = 0.0;
  double minus_face_hat = 0.0;
  double plus_face_hat = 0.0;
  WilsonInterval minus_star_ci;
  WilsonInterval plus_star_ci;
  double mean_special = 0.0;  // special points per replica
  bool minus_exceeds = false;
  // Per-replica indicators in block order, for replica-level output.
  std::vector<std::uint8_t> minus_star_ind;
  std::vector<std::uint8_t> plus_star_ind;
  std::vector<std::uint8_t> minus_face_ind;
  std::vector<std::uint8_t> plus_face_ind;
  std::vector<std::int32_t> n_points;
};

struct EnhancementReport {
  std::vector<EnhancementRow> rows;
};

// Paired comparison of Theta*(lambda, p - delta, 1/2) against
// Theta*(lambda, p + delta, 1/4) over the n grid. Both sides of each
// replica share the realization and the mark uniforms, so the comparison
// is coupled; the ordering is reported, not asserted.
EnhancementReport enhancement_experiment(const EnhancementSpec& spec);

}  // namespace simperc
