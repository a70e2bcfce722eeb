#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "simperc/osss.hpp"
#include "simperc/percolation.hpp"
#include "simperc/point_process.hpp"
#include "simperc/random.hpp"

using namespace simperc;
using namespace simperc::test;

namespace {

Realization boxed(std::vector<Point> pts, double half) {
  return Realization(std::move(pts),
                     Region::box(make_point({0.0, 0.0}),
                                 make_point({half, half})),
                     1.0);
}

Realization empty2(double half) { return boxed({}, half); }

ExplorationSpec small_spec() {
  ExplorationSpec spec;
  spec.d = 1;
  spec.s = 1.5;
  spec.r = 2.0;
  spec.L = 4;
  return spec;
}

}  // namespace

TEST_CASE("explore: empty realization runs the annulus phase only") {
  ExplorationSpec spec = small_spec();
  Realization real = empty2(5.0);
  ExplorationState st = explore(real, spec);
  CHECK_FALSE(st.decision);
  CHECK(st.revealed_points.empty());
  REQUIRE(st.site_order_flat.size() % 2 == 0);
  CHECK(st.first_phase == st.site_order_flat.size() / 2);
  CHECK(st.first_phase > 0);
  CHECK(audit_exploration(real, spec, st));
}

TEST_CASE("explore: radial chain crosses, dark cluster stays unrevealed") {
  std::vector<Point> pts;
  for (int k = 1; k <= 5; ++k) pts.push_back(make_point({0.9 * k, 0.0}));
  pts.push_back(make_point({0.0, -4.3}));
  pts.push_back(make_point({0.0, -4.9}));

  ExplorationSpec spec;
  spec.d = 1;
  spec.s = 1.5;
  spec.r = 3.0;
  spec.L = 6;
  Realization real = boxed(pts, 7.0);
  ExplorationState st = explore(real, spec);

  CHECK(st.decision);
  for (std::int32_t id = 0; id < 5; ++id) {
    CHECK(std::binary_search(st.revealed_points.begin(),
                             st.revealed_points.end(), id));
  }
  // The off-axis pair is outside the annulus and never adjacent to the
  // tracked cluster, so its boxes are never revealed.
  CHECK_FALSE(std::binary_search(st.revealed_points.begin(),
                                 st.revealed_points.end(), 5));
  CHECK_FALSE(std::binary_search(st.revealed_points.begin(),
                                 st.revealed_points.end(), 6));
  CHECK(st.site_order_flat.size() / 2 > st.first_phase);
  CHECK(audit_exploration(real, spec, st));
}

TEST_CASE("explore: deterministic and equal to the direct indicator") {
  ExplorationSpec spec = small_spec();
  for (int rep = 0; rep < 24; ++rep) {
    double lambda = (rep % 3 == 0) ? 0.4 : (rep % 3 == 1 ? 0.9 : 1.3);
    Region window =
        Region::box(make_point({0.0, 0.0}), make_point({5.0, 5.0}));
    Realization real = sample_poisson(window, lambda, 7103u, rep);
    ExplorationState st = explore(real, spec);
    ExplorationState st2 = explore(real, spec);
    CHECK(st.site_order_flat == st2.site_order_flat);
    CHECK(st.revealed_points == st2.revealed_points);
    CHECK(st.first_phase == st2.first_phase);
    CHECK(st.decision == st2.decision);

    CHECK(st.decision == (oracle_theta_reach(real.points(), 1) > spec.r));
    CHECK(st.decision == theta_indicator(real, 1, spec.r));
    CHECK(audit_exploration(real, spec, st));
  }
}

TEST_CASE("explore: step-by-step audit for d = 2") {
  ExplorationSpec spec = small_spec();
  spec.d = 2;
  for (int rep = 0; rep < 8; ++rep) {
    Region window =
        Region::box(make_point({0.0, 0.0}), make_point({5.0, 5.0}));
    Realization real = sample_poisson(window, 1.0, 7121u, rep);
    ExplorationState st = explore(real, spec);
    CHECK(st.decision == (oracle_theta_reach(real.points(), 2) > spec.r));
    CHECK(audit_exploration(real, spec, st));
  }
}

TEST_CASE("explore: precondition violations throw") {
  ExplorationSpec spec = small_spec();
  CHECK_THROWS_AS(explore(empty2(4.5), spec), std::invalid_argument);

  ExplorationSpec bad = spec;
  bad.s = 0.9;
  CHECK_THROWS_AS(explore(empty2(5.0), bad), std::invalid_argument);
  bad = spec;
  bad.r = 1.2;  // r < s
  CHECK_THROWS_AS(explore(empty2(5.0), bad), std::invalid_argument);
  bad = spec;
  bad.L = 3;  // L < 2r
  CHECK_THROWS_AS(explore(empty2(5.0), bad), std::invalid_argument);
}

TEST_CASE("lattice_sites: norm cutoff in lexicographic order") {
  std::vector<std::int32_t> sites = lattice_sites(2, 2);
  std::vector<std::int32_t> expect = {
      -2, 0, -1, -1, -1, 0, -1, 1, 0, -2, 0, -1, 0,
      0,  0, 1,  0,  2,  1, -1, 1, 0, 1,  1, 2,  0};
  CHECK(sites == expect);
  CHECK_THROWS_AS(lattice_sites(2, -1), std::invalid_argument);
  CHECK_THROWS_AS(lattice_sites(4, 2), std::invalid_argument);
}

TEST_CASE("revealment: annulus sites are certain, dark sites are null") {
  OsssAuditSpec spec;
  spec.D = 2;
  spec.d = 1;
  spec.lambda = 0.5;
  spec.r = 2.0;
  spec.s = 1.5;
  spec.L = 4;
  spec.replicas = 60;
  spec.root_seed = 71u;

  // Q_1((1,1)) meets the annulus of radius s, so phase 1 reveals it in
  // every replica.
  std::array<std::int32_t, 2> annulus = {1, 1};
  SiteEstimate always = revealment_estimate(spec, annulus);
  CHECK(always.estimate == 1.0);
  CHECK(always.hits == spec.replicas);
  CHECK_FALSE(always.local_zero);

  // A far site needs a spawning cluster; with a vanishing intensity there
  // is none.
  OsssAuditSpec faint = spec;
  faint.lambda = 1e-9;
  std::array<std::int32_t, 2> far = {4, 0};
  SiteEstimate never = revealment_estimate(faint, far);
  CHECK(never.estimate == 0.0);
  CHECK(never.hits == 0);
}

TEST_CASE("influence and pivot report exact zeros outside the local box") {
  OsssAuditSpec spec;
  spec.D = 2;
  spec.d = 1;
  spec.lambda = 0.8;
  spec.r = 2.5;
  spec.s = 1.5;
  spec.L = 5;
  spec.replicas = 10;
  spec.root_seed = 73u;

  // Q_1((5,0)) lies at distance 4 > r + 1 from the origin.
  std::array<std::int32_t, 2> dark = {5, 0};
  SiteEstimate inf = influence_estimate(spec, dark);
  CHECK(inf.local_zero);
  CHECK(inf.estimate == 0.0);
  CHECK(inf.n == 0);
  SiteEstimate piv = pivot_estimate(spec, dark);
  CHECK(piv.local_zero);
  CHECK(piv.estimate == 0.0);

  std::array<std::int32_t, 2> near = {1, 0};
  SiteEstimate inf_near = influence_estimate(spec, near);
  CHECK_FALSE(inf_near.local_zero);
  CHECK(inf_near.n == spec.replicas);
}

TEST_CASE("audit run: base decisions do not depend on the site list") {
  OsssAuditSpec spec;
  spec.D = 2;
  spec.d = 1;
  spec.lambda = 0.8;
  spec.r = 2.0;
  spec.s = 1.5;
  spec.L = 4;
  spec.replicas = 50;
  spec.root_seed = 79u;
  spec.run_exploration = true;
  spec.run_influence = true;
  spec.run_pivot = true;

  OsssAuditSpec a = spec;
  a.sites_flat = {0, 0};
  OsssAuditSpec b = spec;
  b.sites_flat = {1, 0, 0, 2};
  OsssAuditRun ra = osss_audit_run(a);
  OsssAuditRun rb = osss_audit_run(b);
  CHECK(ra.decisions == rb.decisions);
  CHECK(ra.crossings == rb.crossings);
  CHECK(ra.n_points == rb.n_points);
  CHECK(ra.crossings > 0);
  CHECK(ra.crossings < ra.replicas);

  // Pivot insertions are attempted only on non-crossing replicas.
  for (const SiteAccumulator& s : rb.sites) {
    CHECK(s.piv_flips <= rb.replicas - rb.crossings);
    CHECK(s.joint_flips <= std::min(s.inf_flips, s.piv_flips));
    CHECK(s.reveals <= rb.replicas);
  }
}

TEST_CASE("audit run: worker blocks merge into the single-run totals") {
  OsssAuditSpec spec;
  spec.D = 2;
  spec.d = 1;
  spec.lambda = 0.8;
  spec.r = 2.0;
  spec.s = 1.5;
  spec.L = 4;
  spec.root_seed = 83u;
  spec.sites_flat = {0, 0, 1, 1, 0, 2};

  OsssAuditSpec full = spec;
  full.replicas = 80;
  OsssAuditSpec lo = spec;
  lo.replicas = 40;
  OsssAuditSpec hi = spec;
  hi.replicas = 40;
  hi.replica_offset = 40;

  OsssAuditRun rf = osss_audit_run(full);
  OsssAuditRun rl = osss_audit_run(lo);
  OsssAuditRun rh = osss_audit_run(hi);

  CHECK(rl.crossings + rh.crossings == rf.crossings);
  std::vector<std::uint8_t> cat = rl.decisions;
  cat.insert(cat.end(), rh.decisions.begin(), rh.decisions.end());
  CHECK(cat == rf.decisions);
  std::vector<std::int32_t> np = rl.n_points;
  np.insert(np.end(), rh.n_points.begin(), rh.n_points.end());
  CHECK(np == rf.n_points);

  REQUIRE(rl.sites.size() == rf.sites.size());
  for (std::size_t i = 0; i < rf.sites.size(); ++i) {
    CHECK(rl.sites[i].site == rf.sites[i].site);
    CHECK(rl.sites[i].reveals + rh.sites[i].reveals == rf.sites[i].reveals);
    CHECK(rl.sites[i].inf_flips + rh.sites[i].inf_flips ==
          rf.sites[i].inf_flips);
    CHECK(rl.sites[i].piv_flips + rh.sites[i].piv_flips ==
          rf.sites[i].piv_flips);
    CHECK(rl.sites[i].joint_flips + rh.sites[i].joint_flips ==
          rf.sites[i].joint_flips);
  }

  // Rerunning the full block is bitwise stable.
  OsssAuditRun rf2 = osss_audit_run(full);
  CHECK(rf2.decisions == rf.decisions);
  CHECK(rf2.sites[1].inf_flips == rf.sites[1].inf_flips);
}

TEST_CASE("audit run: invalid specifications throw") {
  OsssAuditSpec spec;
  spec.lambda = 0.0;
  CHECK_THROWS_AS(osss_audit_run(spec), std::invalid_argument);
  spec.lambda = 1.0;
  spec.replicas = 0;
  CHECK_THROWS_AS(osss_audit_run(spec), std::invalid_argument);
  spec.replicas = 10;
  spec.s = 0.5;
  CHECK_THROWS_AS(osss_audit_run(spec), std::invalid_argument);
  spec.s = 2.5;
  spec.L = 6;  // < 2r with r = 5
  CHECK_THROWS_AS(osss_audit_run(spec), std::invalid_argument);
  spec.L = 10;
  spec.sites_flat = {1, 2, 3};  // not a multiple of D
  CHECK_THROWS_AS(osss_audit_run(spec), std::invalid_argument);
}

TEST_CASE("osss_check: vanishing intensity gives a trivially held bound") {
  OsssAuditSpec spec;
  spec.D = 2;
  spec.d = 1;
  spec.lambda = 1e-6;
  spec.r = 2.0;
  spec.s = 1.5;
  spec.L = 4;
  spec.replicas = 150;
  spec.root_seed = 89u;
  OsssAuditRun run = osss_audit_run(spec);
  CHECK(run.crossings == 0);
  OsssCheckReport rep = osss_check(run);
  CHECK(rep.lhs == 0.0);
  CHECK(rep.rhs >= 0.0);
  CHECK(rep.holds);
}

TEST_CASE("osss_check: degenerate s = r is still reported") {
  OsssAuditSpec spec;
  spec.D = 2;
  spec.d = 1;
  spec.lambda = 0.6;
  spec.r = 1.5;
  spec.s = 1.5;
  spec.L = 4;  // exploration needs L >= r + 2 as well as L >= 2r
  spec.replicas = 150;
  spec.root_seed = 97u;
  OsssAuditRun run = osss_audit_run(spec);
  OsssCheckReport rep = osss_check(run);
  CHECK(std::isfinite(rep.lhs));
  CHECK(std::isfinite(rep.rhs));
  CHECK(std::isfinite(rep.pooled_se));
  CHECK(rep.pooled_se > 0.0);
  CHECK(rep.holds);
}

TEST_CASE("influence_bound_check: four-cell arithmetic") {
  SiteAccumulator acc;
  acc.site = {0, 0};
  acc.inf_flips = 30;
  acc.piv_flips = 10;
  acc.joint_flips = 5;
  const std::uint64_t m = 100;
  const double lambda = 1.0;
  InfluenceBoundReport rep = influence_bound_check(acc, m, lambda);

  const double c = lambda * std::exp(lambda);
  CHECK(rep.coeff == doctest::Approx(c).epsilon(1e-15));
  CHECK(rep.inf_hat == doctest::Approx(0.30).epsilon(1e-15));
  CHECK(rep.piv_hat == doctest::Approx(0.10).epsilon(1e-15));

  // d_i = inf_i - c * piv_i over the four joint cells:
  // 25 ones, 5 of (1 - c), 5 of -c, 65 zeros.
  const double mean = (25.0 + 5.0 * (1.0 - c) - 5.0 * c) / 100.0;
  const double ex2 =
      (25.0 + 5.0 * (1.0 - c) * (1.0 - c) + 5.0 * c * c) / 100.0;
  const double se = std::sqrt((ex2 - mean * mean) / 100.0);
  CHECK(rep.paired_se == doctest::Approx(se).epsilon(1e-12));
  CHECK(rep.holds == (rep.inf_hat <= c * rep.piv_hat + 3.0 * se));

  SiteAccumulator zero;
  zero.site = {9, 9};
  zero.local_zero = true;
  InfluenceBoundReport z = influence_bound_check(zero, m, lambda);
  CHECK(z.inf_hat == 0.0);
  CHECK(z.piv_hat == 0.0);
  CHECK(z.holds);
}

TEST_CASE("poisson_ratio_bound: closed forms and monotone tail") {
  PoissonRatioBound one = poisson_ratio_bound(1.0, 20);
  REQUIRE(one.ratios.size() == 20);
  CHECK(one.bound == doctest::Approx(std::exp(1.0)).epsilon(1e-15));
  // P(M >= 1) / P(M = 0) = e - 1, P(M >= 2) / P(M = 1) = e - 2.
  CHECK(one.ratios[0] ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
  CHECK(one.ratios[1] ==
        doctest::Approx(std::exp(1.0) - 2.0).epsilon(1e-11));
  CHECK(one.max_ratio == one.ratios[0]);
  for (std::size_t k = 1; k < one.ratios.size(); ++k) {
    CHECK(one.ratios[k] < one.ratios[k - 1]);
  }

  PoissonRatioBound half = poisson_ratio_bound(0.5, 30);
  CHECK(half.max_ratio <= 0.5 * std::exp(0.5));
  PoissonRatioBound two = poisson_ratio_bound(2.0, 30);
  CHECK(two.max_ratio <= two.bound);

  CHECK_THROWS_AS(poisson_ratio_bound(0.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(poisson_ratio_bound(1.0, 0), std::invalid_argument);
}
