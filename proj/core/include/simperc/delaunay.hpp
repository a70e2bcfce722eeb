#pragma once

// Delaunay tessellation of a finite window and the vacant-cell growth
// structures built on top of it.
//
// The triangulation is incremental Bowyer-Watson with a determinant
// in-sphere predicate. Dimension 2 is the supported configuration;
// dimension 3 runs the same code path but stays behind an explicit opt-in
// until its robustness story is settled.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "simperc/point_process.hpp"
#include "simperc/rips.hpp"

namespace simperc {

struct DelaunayComplex {
  int D = 2;
  // Full-dimensional cells as sorted (D+1)-tuples of point ids, in
  // lexicographic order.
  std::vector<std::int32_t> cells;
  // neighbor(i, k): cell across the facet opposite tuple position k of
  // cell i, or -1 on the convex hull.
  std::vector<std::int32_t> neighbors;
  std::vector<Point> circumcenters;
  std::vector<double> circumradii;

  std::size_t size() const { return cells.size() / (D + 1); }
  std::span<const std::int32_t> tuple(std::size_t i) const {
    return {cells.data() + i * (D + 1), static_cast<std::size_t>(D + 1)};
  }
  std::span<const std::int32_t> nbrs(std::size_t i) const {
    return {neighbors.data() + i * (D + 1), static_cast<std::size_t>(D + 1)};
  }
};

struct DelaunayOptions {
  // Dimension 3 uses the same incremental scheme but is not part of the
  // supported surface yet; callers must opt in.
  bool enable_3d = false;
};

// Tessellates the realization. Requires at least D+1 points and no exact
// duplicates; co-spherical ties are broken deterministically by insertion
// order (ascending point id).
DelaunayComplex delaunay(const Realization& real,
                         const DelaunayOptions& options = {});

// vacant(i): no point of the realization within distance 1/2 of the cell's
// circumcenter.
std::vector<std::uint8_t> vacancy_flags(const DelaunayComplex& cx,
                                        const Realization& real);

// Facet-adjacent cells whose circumcenter segment clears every ball
// B_{1/2}(x), x a point of the realization. Throws std::invalid_argument
// if the cells are not facet-adjacent.
bool v_adjacent(const DelaunayComplex& cx, const Realization& real,
                std::int32_t a, std::int32_t b);

struct KGrowth {
  std::vector<std::int32_t> k0;     // cells meeting the axis segment
  std::vector<std::int32_t> k;      // closure under v-adjacency, sorted
  std::vector<std::int32_t> visit;  // BFS discovery order of k
};

// K_0 = cells whose hull meets the coordinate-axis segment
// {x_1 = ... = x_{D-1} = 0, |x_D| <= axis_half_length}; K = the closure of
// K_0 under v-adjacency steps (both endpoints of every step vacant by
// construction of the clearance test).
KGrowth grow_K(const DelaunayComplex& cx, const Realization& real,
               double axis_half_length);

// Facets of the outer simplex boundary of M: facets with odd incidence in
// M whose far side lies in the unbounded complement component (flood fill
// of the complement seeded at hull-adjacent cells).
FaceSet outer_boundary(const DelaunayComplex& cx,
                       std::span<const std::int32_t> m);

struct CycleFamily {
  std::vector<std::int32_t> faces_flat;  // (D)-tuples... arity D per facet
  bool cycle_ok = false;
  // True when the cycle test had to exempt faces within distance 2 of the
  // window boundary (measured at face vertices).
  bool clipped = false;
};

// Face-connected components of the outer boundary of K, each with a
// collar-aware cycle verdict.
std::vector<CycleFamily> cycle_candidate(const DelaunayComplex& cx,
                                         const Realization& real,
                                         double axis_half_length);

struct CircumradiusStats {
  double max_radius = 0.0;
  std::size_t cells_considered = 0;
};

// Largest circumradius among cells meeting B_ell(o); the growth diagnostic
// compares it against sqrt(ell).
CircumradiusStats circumradius_stats(const DelaunayComplex& cx,
                                     const Realization& real, double ell);

// True iff p lies in the closed hull of cell i (barycentric test).
bool cell_contains(const DelaunayComplex& cx, const Realization& real,
                   std::size_t i, const Point& p);

// Plain-text serialization of the cell tuples (geometry is re-derivable
// from the point file): header "simperc-delaunay 1", then "D m", then one
// sorted tuple per line.
void write_delaunay_text(std::ostream& os, const DelaunayComplex& cx);
std::vector<std::int32_t> read_delaunay_text(std::istream& is, int& D);

}  // namespace simperc
