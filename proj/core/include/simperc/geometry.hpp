#pragma once

// Exact low-dimensional geometric kernels.
//
// Everything downstream (complex construction, adjacency, vacancy tests)
// reduces to the handful of primitives in this header. Distances between
// convex hulls of up to four points are computed exactly (up to floating
// point) by enumerating sub-feature pairs, so no iterative GJK-style
// tolerance tuning is involved.
//
// Points are fixed-capacity Eigen vectors: dimension is dynamic up to
// kMaxDim but storage is inline, which keeps the hot paths allocation-free.

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace simperc {

inline constexpr int kMaxDim = 8;

// Single tolerance knob for geometric threshold tests. Comparisons against
// a formation or adjacency threshold t are implemented as "<= t + kGeomEps".
inline constexpr double kGeomEps = 1e-9;

using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::AutoAlign,
                            kMaxDim, 1>;

Point make_point(std::initializer_list<double> coords);

struct Ball {
  Point center;
  double radius = 0.0;

  bool contains(const Point& p, double slack = kGeomEps) const {
    return (p - center).norm() <= radius + slack;
  }
};

/// Geometric d-simplex: d+1 affinely independent vertices in R^D, d <= D.
/// Construction validates distinctness and affine independence; the
/// convex-hull operations below may therefore assume a clean vertex set.
class GeomSimplex {
 public:
  explicit GeomSimplex(std::vector<Point> vertices);

  int dim() const { return static_cast<int>(vertices_.size()) - 1; }
  int ambient_dim() const { return static_cast<int>(vertices_[0].size()); }
  const std::vector<Point>& vertices() const { return vertices_; }

 private:
  std::vector<Point> vertices_;
};

/// Euclidean distance from p to the closed convex hull of `vertices`.
/// Exact via projection onto every sub-face (vertex subsets), taking the
/// minimum over projections with valid barycentric coordinates.
double point_simplex_distance(const Point& p, std::span<const Point> vertices);
double point_simplex_distance(const Point& p, const GeomSimplex& s);

/// Euclidean distance between the closed convex hulls of two vertex sets.
/// Exact for simplices of dimension <= 3 by sub-feature pair enumeration:
/// the closest pair is attained on some pair of faces, and on that pair the
/// affine least-squares critical point has valid barycentric coordinates.
double simplex_simplex_distance(std::span<const Point> a,
                                std::span<const Point> b);
double simplex_simplex_distance(const GeomSimplex& a, const GeomSimplex& b);

/// Cheap decision "hull distance <= threshold + kGeomEps" with early accept
/// on vertex distances and early reject on the vertex-distance lower bound.
/// Falls back to the exact kernel only when the bounds do not decide.
bool simplex_within_distance(std::span<const Point> a,
                             std::span<const Point> b, double threshold);

/// True iff the closed segment [a,b] keeps distance strictly greater than
/// `radius` from every center. Degenerate segments (a == b) reduce to a
/// point test.
bool segment_clear_of_balls(const Point& a, const Point& b,
                            std::span<const Point> centers, double radius);

/// Smallest enclosing ball (Welzl's algorithm, move-to-front, deterministic
/// ordering). Exact support-set solves for supports of up to D+1 points.
Ball min_enclosing_ball(std::span<const Point> points);

/// Smallest ball with all vertices on its boundary (the circumball of the
/// simplex within its affine hull). Throws std::invalid_argument on
/// affinely dependent input.
Ball circumball(std::span<const Point> vertices);
Ball circumball(const GeomSimplex& s);

/// Largest pairwise vertex distance.
double simplex_diameter(std::span<const Point> vertices);

}  // namespace simperc
