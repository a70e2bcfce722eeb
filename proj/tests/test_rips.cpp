#include <algorithm>
#include <set>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "simperc/rips.hpp"

using namespace simperc;
using test::EdgeSet;
using test::Tuple;
using test::edges_of;
using test::faces_of;
using test::oracle_components;
using test::oracle_enumerate;
using test::oracle_face_edges;
using test::oracle_star_edges;
using test::random_points;
using test::tuples_of;
using test::wrap_points;

namespace {

Realization square_points(double side) {
  std::vector<Point> pts = {make_point({0, 0}), make_point({side, 0}),
                            make_point({0, side}), make_point({side, side})};
  return wrap_points(std::move(pts));
}

std::vector<std::int32_t> all_indices(std::size_t n) {
  std::vector<std::int32_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<std::int32_t>(i);
  return ids;
}

}  // namespace

TEST_CASE("enumerate_d_simplices small configurations") {
  Realization tri = wrap_points(
      {make_point({0, 0}), make_point({0.5, 0}), make_point({0.25, 0.4})});
  SimplexTable t2 = enumerate_d_simplices(tri, 2);
  REQUIRE(t2.size() == 1);
  CHECK(tuples_of(t2)[0] == Tuple{0, 1, 2});

  Realization far = wrap_points({make_point({0, 0}), make_point({2, 0})});
  CHECK(enumerate_d_simplices(far, 1).size() == 0);

  Realization sq = square_points(0.9);
  CHECK(enumerate_d_simplices(sq, 1).size() == 4);
  CHECK(enumerate_d_simplices(sq, 2).size() == 0);
}

TEST_CASE("enumerate_d_simplices equals the subset-scan oracle") {
  RngStream rng(derive_seed(31, StreamTag::kTest, 0));
  for (int iter = 0; iter < 12; ++iter) {
    int D = iter % 2 == 0 ? 2 : 3;
    std::vector<Point> pts = random_points(rng, D, 30, 0.0, 2.0);
    Realization real = wrap_points(pts);
    for (int d = 1; d <= D; ++d) {
      SimplexTable table = enumerate_d_simplices(real, d);
      CHECK(tuples_of(table) == oracle_enumerate(pts, d));
    }
  }
}

TEST_CASE("monotonicity of enumeration under point insertion") {
  RngStream rng(derive_seed(32, StreamTag::kTest, 0));
  std::vector<Point> pts = random_points(rng, 2, 25, 0.0, 2.5);
  std::vector<Point> more = pts;
  for (const Point& p : random_points(rng, 2, 10, 0.0, 2.5)) {
    more.push_back(p);
  }
  for (int d : {1, 2}) {
    auto small = tuples_of(enumerate_d_simplices(wrap_points(pts), d));
    auto big = tuples_of(enumerate_d_simplices(wrap_points(more), d));
    std::set<Tuple> big_set(big.begin(), big.end());
    for (const Tuple& t : small) CHECK(big_set.count(t) == 1);
  }
}

TEST_CASE("face_adjacency shares exactly a (d-1)-face") {
  // Two triangles sharing an edge, two sharing only a vertex.
  Realization real = wrap_points(
      {make_point({0, 0}), make_point({0.8, 0}), make_point({0.4, 0.6}),
       make_point({0.4, -0.6}), make_point({-0.5, 0.3})});
  SimplexTable table = enumerate_d_simplices(real, 2);
  auto tuples = tuples_of(table);
  auto idx_of = [&](const Tuple& t) {
    return static_cast<std::int32_t>(
        std::find(tuples.begin(), tuples.end(), t) - tuples.begin());
  };
  std::int32_t top = idx_of({0, 1, 2});
  std::int32_t bottom = idx_of({0, 1, 3});
  std::int32_t left = idx_of({0, 2, 4});
  REQUIRE(top < static_cast<std::int32_t>(tuples.size()));
  REQUIRE(bottom < static_cast<std::int32_t>(tuples.size()));
  REQUIRE(left < static_cast<std::int32_t>(tuples.size()));

  EdgeSet edges = edges_of(face_adjacency(table));
  auto has = [&](std::int32_t a, std::int32_t b) {
    return edges.count({std::min(a, b), std::max(a, b)}) == 1;
  };
  CHECK(has(top, bottom));      // share edge {0,1}
  CHECK(has(top, left));        // share edge {0,2}
  CHECK_FALSE(has(bottom, left));  // share only vertex 0
}

TEST_CASE("face_adjacency equals the pairwise oracle") {
  RngStream rng(derive_seed(33, StreamTag::kTest, 0));
  for (int iter = 0; iter < 10; ++iter) {
    int D = iter % 2 == 0 ? 2 : 3;
    std::vector<Point> pts = random_points(rng, D, 28, 0.0, 2.2);
    Realization real = wrap_points(pts);
    for (int d = 1; d <= D; ++d) {
      SimplexTable table = enumerate_d_simplices(real, d);
      CHECK(edges_of(face_adjacency(table)) ==
            oracle_face_edges(tuples_of(table)));
    }
  }
}

TEST_CASE("star_adjacency contains face adjacency and matches the oracle") {
  RngStream rng(derive_seed(34, StreamTag::kTest, 0));
  for (int iter = 0; iter < 8; ++iter) {
    std::vector<Point> pts = random_points(rng, 2, 26, 0.0, 4.0);
    Realization real = wrap_points(pts);
    SimplexTable table = enumerate_d_simplices(real, 1);
    EdgeSet face = edges_of(face_adjacency(table));
    EdgeSet star = edges_of(star_adjacency(table, real.points(), real.grid(), 2.5));
    CHECK(star == oracle_star_edges(tuples_of(table), pts, 2.5));
    for (const auto& e : face) CHECK(star.count(e) == 1);

    EdgeSet tight = edges_of(star_adjacency(table, real.points(), real.grid(), 1e-12));
    for (const auto& e : face) CHECK(tight.count(e) == 1);
  }
}

TEST_CASE("star_adjacency separation thresholds") {
  // Two unit-diameter segments with hull gap exactly 1.5.
  Realization real = wrap_points(
      {make_point({0, 0}), make_point({1, 0}), make_point({2.5, 0}),
       make_point({3.5, 0})});
  SimplexTable table = enumerate_d_simplices(real, 1);
  REQUIRE(table.size() == 2);
  CHECK(edges_of(star_adjacency(table, real.points(), real.grid(), 2.5)).size() == 1);
  CHECK(edges_of(star_adjacency(table, real.points(), real.grid(), 1.0)).empty());
}

TEST_CASE("boundary_mod2 on hand-built families") {
  Realization real = wrap_points(
      {make_point({0, 0}), make_point({0.8, 0}), make_point({0.4, 0.6}),
       make_point({0.4, -0.6})});
  SimplexTable table = enumerate_d_simplices(real, 2);
  auto tuples = tuples_of(table);
  auto idx_of = [&](const Tuple& t) {
    return static_cast<std::int32_t>(
        std::find(tuples.begin(), tuples.end(), t) - tuples.begin());
  };
  std::int32_t top = idx_of({0, 1, 2});
  std::int32_t bottom = idx_of({0, 1, 3});

  std::vector<std::int32_t> one = {top};
  CHECK(faces_of(boundary_mod2(table, one)) ==
        std::set<Tuple>{{0, 1}, {0, 2}, {1, 2}});

  std::vector<std::int32_t> both = {top, bottom};
  CHECK(faces_of(boundary_mod2(table, both)) ==
        std::set<Tuple>{{0, 2}, {1, 2}, {0, 3}, {1, 3}});
}

TEST_CASE("tetrahedron facets have empty boundary") {
  // Four 2-simplices forming the boundary of a tetrahedron with unit-short
  // edges.
  std::vector<Point> pts = {make_point({0, 0, 0}), make_point({0.9, 0, 0}),
                            make_point({0.45, 0.78, 0}),
                            make_point({0.45, 0.26, 0.73})};
  Realization real = wrap_points(pts);
  SimplexTable table = enumerate_d_simplices(real, 2);
  REQUIRE(table.size() == 4);
  std::vector<std::int32_t> all = all_indices(table.size());
  CHECK(boundary_mod2(table, all).size() == 0);
  CHECK(is_cycle(table, all));
}

TEST_CASE("boundary_mod2 is linear over symmetric difference") {
  RngStream rng(derive_seed(35, StreamTag::kTest, 0));
  for (int iter = 0; iter < 20; ++iter) {
    int D = iter % 2 == 0 ? 2 : 3;
    std::vector<Point> pts = random_points(rng, D, 30, 0.0, 2.0);
    Realization real = wrap_points(pts);
    int d = 1 + static_cast<int>(rng.uniform_below(D));
    SimplexTable table = enumerate_d_simplices(real, d);
    if (table.size() < 2) continue;

    std::vector<std::int32_t> a, b;
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (rng.bernoulli(0.4)) a.push_back(static_cast<std::int32_t>(i));
      if (rng.bernoulli(0.4)) b.push_back(static_cast<std::int32_t>(i));
    }
    std::vector<std::int32_t> sym;
    std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                  std::back_inserter(sym));
    std::set<Tuple> ba = faces_of(boundary_mod2(table, a));
    std::set<Tuple> bb = faces_of(boundary_mod2(table, b));
    std::set<Tuple> want;
    std::set_symmetric_difference(ba.begin(), ba.end(), bb.begin(), bb.end(),
                                  std::inserter(want, want.begin()));
    CHECK(faces_of(boundary_mod2(table, sym)) == want);
  }
}

TEST_CASE("is_cycle on paths and loops") {
  // Triangle as three 1-simplices: a cycle. Two-edge open path: not.
  Realization tri = wrap_points(
      {make_point({0, 0}), make_point({0.9, 0}), make_point({0.45, 0.7})});
  SimplexTable edges = enumerate_d_simplices(tri, 1);
  REQUIRE(edges.size() == 3);
  CHECK(is_cycle(edges, all_indices(3)));

  Realization path = wrap_points(
      {make_point({0, 0}), make_point({0.9, 0}), make_point({1.8, 0})});
  SimplexTable pe = enumerate_d_simplices(path, 1);
  REQUIRE(pe.size() == 2);
  CHECK_FALSE(is_cycle(pe, all_indices(2)));
}

TEST_CASE("face_components on hand-built and random subsets") {
  // Two far triangles plus a chain of three edge-sharing triangles.
  RngStream rng(derive_seed(36, StreamTag::kTest, 0));
  std::vector<Point> pts = random_points(rng, 2, 32, 0.0, 3.0);
  Realization real = wrap_points(pts);
  SimplexTable table = enumerate_d_simplices(real, 1);
  AdjacencyGraph graph = face_adjacency(table);

  std::vector<std::int32_t> subset;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (rng.bernoulli(0.6)) subset.push_back(static_cast<std::int32_t>(i));
  }
  CHECK(face_components(graph, subset) ==
        oracle_components(table.size(), edges_of(graph), subset));

  Realization two = wrap_points(
      {make_point({0, 0}), make_point({0.8, 0}), make_point({0.4, 0.6}),
       make_point({5, 5}), make_point({5.8, 5}), make_point({5.4, 5.6})});
  SimplexTable t2 = enumerate_d_simplices(two, 2);
  REQUIRE(t2.size() == 2);
  CHECK(face_components(face_adjacency(t2), all_indices(2)).size() == 2);
}

TEST_CASE("face index is consistent and searchable") {
  RngStream rng(derive_seed(37, StreamTag::kTest, 0));
  std::vector<Point> pts = random_points(rng, 2, 30, 0.0, 2.0);
  Realization real = wrap_points(pts);
  SimplexTable table = enumerate_d_simplices(real, 2);
  FaceIndex index = build_face_index(table);

  std::size_t incidences = 0;
  for (std::size_t f = 0; f < index.face_count(); ++f) {
    auto face = index.face(f);
    CHECK(index.find(face) == static_cast<std::int64_t>(f));
    for (std::int32_t s : index.incident(f)) {
      auto t = table.tuple(s);
      Tuple inter;
      std::set_intersection(t.begin(), t.end(), face.begin(), face.end(),
                            std::back_inserter(inter));
      CHECK(inter.size() == face.size());
      ++incidences;
    }
  }
  CHECK(incidences == table.size() * 3);

  Tuple missing = {1000, 1001};
  CHECK(build_face_index(enumerate_d_simplices(real, 1)).find(missing) == -1);
}

TEST_CASE("simplices text round trip") {
  RngStream rng(derive_seed(38, StreamTag::kTest, 0));
  std::vector<Point> pts = random_points(rng, 2, 20, 0.0, 2.0);
  Realization real = wrap_points(pts);
  SimplexTable table = enumerate_d_simplices(real, 1);
  std::ostringstream os;
  write_simplices_text(os, table);
  std::istringstream is(os.str());
  SimplexTable back = read_simplices_text(is);
  CHECK(back.d == table.d);
  CHECK(back.flat == table.flat);

  std::istringstream bad("nope 1\n1 0\n");
  CHECK_THROWS(read_simplices_text(bad));
}
