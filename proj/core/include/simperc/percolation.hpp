#pragma once

// Crossing events and their Monte Carlo estimators.
//
// Three crossing notions over the d-simplex complex of a realization, in
// strictly increasing permissiveness:
//   cycle crossing  =>  face crossing  =>  proximity (star) crossing.
//
// All events are evaluated on the realization as given; the estimators
// size their sampling windows so the events are window-independent where
// the theory guarantees it (a chain from the origin is determined by the
// points within distance r + 1).

#include <cstdint>
#include <optional>
#include <vector>

#include "simperc/point_process.hpp"
#include "simperc/rips.hpp"
#include "simperc/stats.hpp"

namespace simperc {

enum class Tri { kZero, kOne, kUndetermined };

// Face crossing f_n: a face-connected chain of d-simplices whose first
// member meets the closed unit ball at the origin and whose last member
// meets the sphere of radius n. Requires n > 2 so the two ends are
// separated; the realization window must contain B_{n+1}(o).
bool crossing_face(const std::vector<Point>& points, const GridIndex& grid,
                   int d, double n);
bool crossing_face(const Realization& real, int d, double n);

// Proximity variant: consecutive chain members within hull distance r0.
bool crossing_star(const std::vector<Point>& points, const GridIndex& grid,
                   int d, double n, double r0);
bool crossing_star(const Realization& real, int d, double n, double r0);

struct CycleCrossing {
  Tri verdict = Tri::kZero;
  // Witness simplex ids (into enumerate_d_simplices of the same input)
  // when verdict == kOne.
  std::vector<std::int32_t> witness;
};

// Cycle crossing: a face-connected family M of d-simplices meeting both
// B_1(o) and the sphere of radius n, whose mod-2 boundary is supported on
// faces meeting the collar {|z| <= 1 + w} u {|z| >= n - w}. Returns kOne
// with a verified witness, kZero when the relative-cycle space of every
// both-end component is trivial or misses an end (a certificate of
// absence), and kUndetermined when the greedy witness search is exhausted
// without a certificate either way.
CycleCrossing cycle_crossing(const std::vector<Point>& points,
                             const GridIndex& grid, int d, double n,
                             double w);
CycleCrossing cycle_crossing(const Realization& real, int d, double n,
                             double w);

// Largest vertex norm reachable through face-connected chains of
// d-simplices starting at a simplex with vertex `o_id`. Returns -infinity
// when no simplex contains o_id. The origin-to-distance-r event is
// "reach > r", so one evaluation serves a whole r-grid.
double theta_reach(const std::vector<Point>& points, const GridIndex& grid,
                   int d, int o_id);

// Indicator of {o ~> complement of B_r(o)} on X u {o}.
bool theta_indicator(const Realization& real, int d, double r);

struct ThetaSpec {
  int D = 2;
  int d = 1;
  double lambda = 1.0;
  double r = 4.0;
  std::uint64_t replicas = 1000;
  std::uint64_t root_seed = 0;
};

struct ExperimentRecord {
  std::uint64_t replicas = 0;
  std::uint64_t successes = 0;
  double estimate = 0.0;
  WilsonInterval ci;
  std::vector<std::uint8_t> indicators;
  std::vector<std::int32_t> n_points;
};

// Monte Carlo estimate of theta_r. Window: ball of radius r + 2 at the
// origin, origin adjoined to every replica.
ExperimentRecord theta_estimate(const ThetaSpec& spec);

struct DecayFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t used = 0;  // radii with positive estimates
};

// Least-squares fit of log(theta) against r over the positive estimates.
DecayFit decay_fit(const std::vector<double>& rs,
                   const std::vector<double>& thetas);

}  // namespace simperc
