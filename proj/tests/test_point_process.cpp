#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "simperc/point_process.hpp"

using namespace simperc;
using test::random_points;

TEST_CASE("identical seed lineage reproduces the sample bit for bit") {
  Region win = Region::ball(Point::Zero(2), 4.0);
  Realization a = sample_poisson(win, 1.3, 42, 7);
  Realization b = sample_poisson(win, 1.3, 42, 7);
  REQUIRE(a.points().size() == b.points().size());
  for (std::size_t i = 0; i < a.points().size(); ++i) {
    CHECK(a.points()[i] == b.points()[i]);
  }
  Realization c = sample_poisson(win, 1.3, 42, 8);
  CHECK(a.points().size() != c.points().size());
}

TEST_CASE("vanishing intensity leaves the window empty") {
  Region unit = Region::box(Point::Zero(2), Point::Constant(2, 0.5));
  std::size_t total = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    total += sample_poisson(unit, 1e-9, 5, rep).points().size();
  }
  CHECK(total == 0);
}

TEST_CASE("Poisson count mean over a volume-100 box") {
  Region box = Region::box(Point::Zero(2), Point::Constant(2, 5.0));
  const std::uint64_t replicas = 10000;
  double sum = 0.0;
  for (std::uint64_t rep = 0; rep < replicas; ++rep) {
    sum += static_cast<double>(sample_poisson(box, 2.0, 99, rep)
                                   .points().size());
  }
  double mean_count = sum / static_cast<double>(replicas);
  // Estimator sd = sqrt(200/10000) ~ 0.1414.
  CHECK(std::abs(mean_count - 200.0) <= 3.0 * std::sqrt(200.0 / replicas));
}

TEST_CASE("points land inside the region") {
  Region ball = Region::ball(Point::Zero(3), 2.5);
  Realization real = sample_poisson(ball, 1.0, 3, 0);
  CHECK(real.points().size() > 0);
  for (const Point& p : real.points()) CHECK(ball.contains(p));
}

TEST_CASE("grid index equals linear scan") {
  RngStream rng(derive_seed(21, StreamTag::kTest, 0));
  std::vector<Point> pts = random_points(rng, 2, 1000, -8.0, 8.0);
  Realization real = test::wrap_points(pts);
  for (int query = 0; query < 100; ++query) {
    Point x(2);
    x[0] = rng.uniform(-8.0, 8.0);
    x[1] = rng.uniform(-8.0, 8.0);
    double r = rng.uniform(0.0, 3.0);
    std::vector<int> got = real.neighbors_within(x, r);
    std::vector<int> want;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if ((pts[i] - x).norm() <= r + kGeomEps) {
        want.push_back(static_cast<int>(i));
      }
    }
    CHECK(got == want);
  }
}

TEST_CASE("neighbors_within basics") {
  std::vector<Point> pts = {make_point({0, 0}), make_point({0.9, 0}),
                            make_point({2, 0})};
  Realization real = test::wrap_points(pts);
  CHECK(real.neighbors_within(make_point({0, 0}), 0.0) ==
        std::vector<int>{0});
  CHECK(real.neighbors_within(make_point({0, 0}), 1.0) ==
        std::vector<int>{0, 1});
}

TEST_CASE("resample_in_box touches only the box") {
  Region win = Region::box(Point::Zero(2), Point::Constant(2, 6.0));
  Realization real = sample_poisson(win, 1.5, 17, 3);
  Point x = make_point({1.0, -2.0});
  RngStream edit = derive_stream(17, StreamTag::kResampleEdit, 3);
  Realization out = resample_in_box(real, x, edit);

  auto in_box = [&](const Point& p) {
    return std::abs(p[0] - x[0]) <= 1.0 && std::abs(p[1] - x[1]) <= 1.0;
  };
  std::multiset<std::pair<double, double>> before, after;
  for (const Point& p : real.points()) {
    if (!in_box(p)) before.emplace(p[0], p[1]);
  }
  for (const Point& p : out.points()) {
    if (!in_box(p)) after.emplace(p[0], p[1]);
  }
  CHECK(before == after);
  for (const Point& p : out.points()) CHECK(win.contains(p));
}

TEST_CASE("resample_in_box leaves an empty box empty when the draw is empty") {
  std::vector<Point> pts = {make_point({4.0, 4.0})};
  Region win = Region::box(Point::Zero(2), Point::Constant(2, 6.0));
  Realization real(pts, win, 1e-9);
  RngStream edit = derive_stream(1, StreamTag::kResampleEdit, 0);
  Realization out = resample_in_box(real, make_point({0.0, 0.0}), edit);
  REQUIRE(out.points().size() == 1);
  CHECK(out.points()[0] == pts[0]);
}

TEST_CASE("resampled box content matches the sampling law") {
  // Counts inside the resampled box over many replicas: mean and variance
  // both approach lambda * vol = 1.2 * 4 = 4.8 (Poisson).
  const double lambda = 1.2;
  Region win = Region::box(Point::Zero(2), Point::Constant(2, 3.0));
  Point x = Point::Zero(2);
  const std::uint64_t replicas = 5000;
  double sum = 0.0, sum2 = 0.0;
  for (std::uint64_t rep = 0; rep < replicas; ++rep) {
    Realization real = sample_poisson(win, lambda, 23, rep);
    RngStream edit = derive_stream(23, StreamTag::kResampleEdit, rep);
    Realization out = resample_in_box(real, x, edit);
    int count = 0;
    for (const Point& p : out.points()) {
      if (std::abs(p[0]) <= 1.0 && std::abs(p[1]) <= 1.0) ++count;
    }
    sum += count;
    sum2 += static_cast<double>(count) * count;
  }
  double mean_count = sum / replicas;
  double var = sum2 / replicas - mean_count * mean_count;
  double expect = lambda * 4.0;
  CHECK(std::abs(mean_count - expect) <= 3.0 * std::sqrt(expect / replicas));
  // Var(sample variance of Poisson) ~ (mu + 2 mu^2) / n; 3 sigma ~ 0.32.
  CHECK(std::abs(var - expect) <=
        3.0 * std::sqrt((expect + 2 * expect * expect) / replicas));
}

TEST_CASE("resample_in_box rejects boxes leaving the region") {
  Region win = Region::box(Point::Zero(2), Point::Constant(2, 3.0));
  Realization real = sample_poisson(win, 1.0, 1, 0);
  RngStream edit = derive_stream(1, StreamTag::kResampleEdit, 0);
  CHECK_THROWS_AS(resample_in_box(real, make_point({2.5, 0.0}), edit),
                  std::invalid_argument);
}

TEST_CASE("add_point") {
  Region win = Region::box(Point::Zero(2), Point::Constant(2, 2.0));
  Realization empty({}, win, 1.0);
  Realization one = add_point(empty, make_point({0.5, 0.5}));
  CHECK(one.points().size() == 1);
  CHECK(one.neighbors_within(make_point({0.5, 0.5}), 0.1) ==
        std::vector<int>{0});

  Realization two = add_point(one, make_point({0.5, 0.5}));
  CHECK(two.duplicate_flag());
  CHECK_FALSE(one.duplicate_flag());

  CHECK_THROWS_AS(add_point(one, make_point({5.0, 0.0})),
                  std::invalid_argument);
}

TEST_CASE("nonpositive intensity is rejected") {
  Region win = Region::box(Point::Zero(2), Point::Constant(2, 1.0));
  CHECK_THROWS_AS(sample_poisson(win, 0.0, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(sample_poisson(win, -1.0, 1, 0), std::invalid_argument);
}

TEST_CASE("poisson_points superposition adds an independent layer") {
  Region win = Region::ball(Point::Zero(2), 3.0);
  Realization base = sample_poisson(win, 0.8, 31, 2);
  RngStream inc = derive_stream(31, StreamTag::kSuperpose, 2, 1);
  std::vector<Point> extra = poisson_points(win, 0.4, inc);
  for (const Point& p : extra) CHECK(win.contains(p));
  // The union has every base point and every increment point.
  std::vector<Point> merged = base.points();
  merged.insert(merged.end(), extra.begin(), extra.end());
  CHECK(merged.size() == base.points().size() + extra.size());
}

TEST_CASE("points text round trip") {
  Region win = Region::ball(Point::Zero(3), 2.0);
  Realization real = sample_poisson(win, 1.1, 77, 0);
  std::ostringstream os;
  write_points_text(os, real);
  std::istringstream is(os.str());
  std::vector<Point> back = read_points_text(is);
  REQUIRE(back.size() == real.points().size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK((back[i] - real.points()[i]).norm() <= 1e-9);
  }

  std::istringstream bad("wrong-header 1\n2 0\n");
  CHECK_THROWS(read_points_text(bad));
}

TEST_CASE("mark uniforms couple thinning monotonically across p") {
  Region win = Region::ball(Point::Zero(2), 4.0);
  Realization real = sample_poisson(win, 1.5, 41, 5);
  MarkUniforms u = sample_mark_uniforms(real, 41, 5);
  REQUIRE(u.u1.size() == real.points().size());
  REQUIRE(u.u2.size() == real.points().size());

  MarkedRealization lo = marks_from_uniforms(real, u, 0.3, 0.5);
  MarkedRealization hi = marks_from_uniforms(real, u, 0.8, 0.5);
  for (std::size_t i = 0; i < u.u1.size(); ++i) {
    CHECK(lo.xi1[i] <= hi.xi1[i]);
    CHECK(lo.xi2[i] == hi.xi2[i]);
  }

  MarkedRealization direct = sample_marks(real, 0.3, 0.5, 41, 5);
  CHECK(direct.xi1 == lo.xi1);
  CHECK(direct.xi2 == lo.xi2);
}
