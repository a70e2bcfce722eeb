#pragma once

// Poisson realizations on bounded windows, with a unit-cell grid index for
// range queries and deterministic seed lineage for every sample and edit.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "simperc/geometry.hpp"
#include "simperc/random.hpp"

namespace simperc {

class Region {
 public:
  enum class Kind { kBox, kBall };

  static Region box(Point center, Point half_widths);
  static Region ball(Point center, double radius);

  Kind kind() const { return kind_; }
  int dim() const { return static_cast<int>(center_.size()); }
  const Point& center() const { return center_; }
  const Point& half_widths() const { return half_widths_; }
  double radius() const { return radius_; }

  bool contains(const Point& p) const;
  double volume() const;
  // Axis-aligned bounding box, as (lo, hi) corner pair.
  std::pair<Point, Point> bounding_box() const;
  // Distance from an interior point to the region boundary.
  double boundary_distance(const Point& p) const;

 private:
  Region() = default;
  Kind kind_ = Kind::kBox;
  Point center_;
  Point half_widths_;  // box only
  double radius_ = 0.0;  // ball only
};

// Uniform grid with cell side 1 over integer coordinates: cell(p) = floor(p).
class GridIndex {
 public:
  GridIndex() = default;
  explicit GridIndex(const std::vector<Point>& points);

  void insert(int id, const Point& p);
  // Ids of indexed points with |p - x| <= r + kGeomEps, ascending.
  std::vector<int> query_ball(const std::vector<Point>& points,
                              const Point& x, double r) const;
  bool any_within(const std::vector<Point>& points, const Point& x,
                  double r) const;

 private:
  std::unordered_map<std::uint64_t, std::vector<int>> cells_;
  int dim_ = 0;
};

struct SeedInfo {
  std::uint64_t root = 0;
  std::uint64_t replica = 0;
};

class Realization {
 public:
  Realization(std::vector<Point> points, Region region, double intensity,
              SeedInfo seed = {});

  int dim() const { return region_.dim(); }
  const std::vector<Point>& points() const { return points_; }
  const Region& region() const { return region_; }
  double intensity() const { return intensity_; }
  const SeedInfo& seed() const { return seed_; }
  const GridIndex& grid() const { return grid_; }
  // Set when add_point received coordinates already present (a null event
  // under the continuum model, accepted with this flag raised).
  bool duplicate_flag() const { return duplicate_flag_; }
  void set_duplicate_flag() { duplicate_flag_ = true; }

  std::vector<int> neighbors_within(const Point& x, double r) const {
    return grid_.query_ball(points_, x, r);
  }

 private:
  std::vector<Point> points_;
  Region region_;
  double intensity_ = 0.0;
  SeedInfo seed_;
  GridIndex grid_;
  bool duplicate_flag_ = false;
};

// Homogeneous Poisson sample on the region. Point count is Poisson with
// mean intensity * volume; locations are iid uniform (rejection from the
// bounding box for ball regions).
Realization sample_poisson(const Region& region, double intensity,
                           std::uint64_t root_seed, std::uint64_t replica);

// Same sampling recipe, drawn from an explicit stream. Superposition
// couplings add increments of intensity (lambda' - lambda) on top of a
// base realization; by independence the union is a Poisson process of the
// larger intensity.
std::vector<Point> poisson_points(const Region& region, double intensity,
                                  RngStream& rng);

// Replaces the points inside the closed box x + [-1/2,1/2]^D with a fresh
// Poisson sample of the same intensity, drawn from `edit`. The box must be
// contained in the region.
Realization resample_in_box(const Realization& real, const Point& x,
                            RngStream& edit);

// Returns a copy with p appended. Exact coordinate duplicates are accepted
// but flagged (see Realization::duplicate_flag).
Realization add_point(const Realization& real, const Point& p);

// Plain-text serialization: header "simperc-points 1", then "D N", then one
// point per line with 12 fractional digits, space separated.
void write_points_text(std::ostream& os, const Realization& real);
std::vector<Point> read_points_text(std::istream& is);

struct MarkedRealization {
  Realization base;
  std::vector<std::uint8_t> xi1;
  std::vector<std::uint8_t> xi2;
};

// Per-point uniforms backing the two mark layers; thresholding them at
// (p, q) yields marks that are monotone-coupled across parameter values.
struct MarkUniforms {
  std::vector<double> u1;
  std::vector<double> u2;
};

MarkUniforms sample_mark_uniforms(const Realization& real,
                                  std::uint64_t root_seed,
                                  std::uint64_t replica);
MarkedRealization marks_from_uniforms(const Realization& real,
                                      const MarkUniforms& u, double p,
                                      double q);
MarkedRealization sample_marks(const Realization& real, double p, double q,
                               std::uint64_t root_seed,
                               std::uint64_t replica);

}  // namespace simperc
