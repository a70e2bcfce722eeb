#include "simperc/geometry.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "simperc/random.hpp"

namespace simperc {

namespace {

// Affine least-squares projection helper.
//
// For a vertex subset {v_0..v_{m-1}} and target t, solves
//   min_u | (v_0 + B u) - t |,  B = [v_1-v_0, ..., v_{m-1}-v_0],
// returning the minimum-norm u when B is rank deficient. The caller checks
// whether the implied barycentric coordinates are admissible.
struct AffineSolve {
  Eigen::VectorXd u;
  Point foot;
};

AffineSolve solve_affine(std::span<const Point> verts,
                         const std::uint32_t mask, const Point& target) {
  int m = 0;
  int idx[kMaxDim + 1];
  for (std::uint32_t i = 0; i < verts.size(); ++i) {
    if (mask & (1u << i)) idx[m++] = static_cast<int>(i);
  }
  const Point& v0 = verts[idx[0]];
  AffineSolve out;
  if (m == 1) {
    out.u.resize(0);
    out.foot = v0;
    return out;
  }
  Eigen::MatrixXd B(v0.size(), m - 1);
  for (int j = 1; j < m; ++j) B.col(j - 1) = verts[idx[j]] - v0;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(B);
  out.u = cod.solve((target - v0).eval());
  out.foot = v0 + B * out.u;
  return out;
}

bool barycentric_valid(const Eigen::VectorXd& u, double tol = kGeomEps) {
  double sum = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    if (u[i] < -tol) return false;
    sum += u[i];
  }
  return sum <= 1.0 + tol;
}

double point_segment_distance(const Point& p, const Point& a,
                              const Point& b) {
  Point ab = b - a;
  double denom = ab.squaredNorm();
  if (denom <= 0.0) return (p - a).norm();
  double t = (p - a).dot(ab) / denom;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

Point make_point(std::initializer_list<double> coords) {
  Point p(static_cast<Eigen::Index>(coords.size()));
  Eigen::Index i = 0;
  for (double c : coords) p[i++] = c;
  return p;
}

GeomSimplex::GeomSimplex(std::vector<Point> vertices)
    : vertices_(std::move(vertices)) {
  if (vertices_.empty()) throw std::invalid_argument("simplex: no vertices");
  const Eigen::Index D = vertices_[0].size();
  for (const Point& v : vertices_) {
    if (v.size() != D) throw std::invalid_argument("simplex: mixed dimensions");
  }
  if (static_cast<Eigen::Index>(vertices_.size()) > D + 1) {
    throw std::invalid_argument("simplex: more than D+1 vertices");
  }
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices_.size(); ++j) {
      if (vertices_[i] == vertices_[j]) {
        throw std::invalid_argument("simplex: duplicate vertices");
      }
    }
  }
  if (vertices_.size() >= 2) {
    Eigen::MatrixXd B(D, vertices_.size() - 1);
    for (std::size_t j = 1; j < vertices_.size(); ++j) {
      B.col(j - 1) = vertices_[j] - vertices_[0];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
    if (qr.rank() < static_cast<Eigen::Index>(vertices_.size()) - 1) {
      throw std::invalid_argument("simplex: affinely dependent vertices");
    }
  }
}

double point_simplex_distance(const Point& p,
                              std::span<const Point> vertices) {
  if (vertices.empty()) {
    throw std::invalid_argument("point_simplex_distance: empty vertex set");
  }
  if (vertices.size() == 1) return (p - vertices[0]).norm();
  if (vertices.size() == 2) {
    return point_segment_distance(p, vertices[0], vertices[1]);
  }
  double best = std::numeric_limits<double>::infinity();
  const std::uint32_t full = (1u << vertices.size()) - 1u;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    AffineSolve s = solve_affine(vertices, mask, p);
    if (!barycentric_valid(s.u)) continue;
    best = std::min(best, (p - s.foot).norm());
  }
  return best;
}

double point_simplex_distance(const Point& p, const GeomSimplex& s) {
  return point_simplex_distance(p, std::span<const Point>(s.vertices()));
}

double simplex_simplex_distance(std::span<const Point> a,
                                std::span<const Point> b) {
  if (a.empty() || b.empty()) {
    throw std::invalid_argument("simplex_simplex_distance: empty vertex set");
  }
  if (a.size() == 1) return point_simplex_distance(a[0], b);
  if (b.size() == 1) return point_simplex_distance(b[0], a);

  // Minimize |p - q| over p in hull(a), q in hull(b) by enumerating face
  // pairs. For each pair, the critical point of the affine relaxation is
  // computed jointly: columns [A, -B] against right-hand side b0 - a0.
  double best = std::numeric_limits<double>::infinity();
  const std::uint32_t fullA = (1u << a.size()) - 1u;
  const std::uint32_t fullB = (1u << b.size()) - 1u;
  int idxA[kMaxDim + 1], idxB[kMaxDim + 1];
  for (std::uint32_t ma = 1; ma <= fullA; ++ma) {
    int na = 0;
    for (std::uint32_t i = 0; i < a.size(); ++i) {
      if (ma & (1u << i)) idxA[na++] = static_cast<int>(i);
    }
    for (std::uint32_t mb = 1; mb <= fullB; ++mb) {
      int nb = 0;
      for (std::uint32_t i = 0; i < b.size(); ++i) {
        if (mb & (1u << i)) idxB[nb++] = static_cast<int>(i);
      }
      const Point& a0 = a[idxA[0]];
      const Point& b0 = b[idxB[0]];
      if (na == 1 && nb == 1) {
        best = std::min(best, (a0 - b0).norm());
        continue;
      }
      Eigen::MatrixXd M(a0.size(), na - 1 + nb - 1);
      for (int j = 1; j < na; ++j) M.col(j - 1) = a[idxA[j]] - a0;
      for (int j = 1; j < nb; ++j) M.col(na - 1 + j - 1) = -(b[idxB[j]] - b0);
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
      Eigen::VectorXd v = cod.solve((b0 - a0).eval());
      if (!barycentric_valid(v.head(na - 1)) ||
          !barycentric_valid(v.tail(nb - 1))) {
        continue;
      }
      Point p = a0;
      for (int j = 1; j < na; ++j) p += v[j - 1] * (a[idxA[j]] - a0);
      Point q = b0;
      for (int j = 1; j < nb; ++j) q += v[na - 1 + j - 1] * (b[idxB[j]] - b0);
      best = std::min(best, (p - q).norm());
    }
  }
  return best;
}

double simplex_simplex_distance(const GeomSimplex& a, const GeomSimplex& b) {
  return simplex_simplex_distance(std::span<const Point>(a.vertices()),
                                  std::span<const Point>(b.vertices()));
}

bool simplex_within_distance(std::span<const Point> a,
                             std::span<const Point> b, double threshold) {
  double min_vv = std::numeric_limits<double>::infinity();
  for (const Point& pa : a) {
    for (const Point& pb : b) {
      min_vv = std::min(min_vv, (pa - pb).norm());
    }
  }
  if (min_vv <= threshold + kGeomEps) return true;
  // Any hull point is within diameter of every vertex, so min vertex
  // distance overestimates the hull distance by at most diam(a) + diam(b).
  if (min_vv - simplex_diameter(a) - simplex_diameter(b) >
      threshold + kGeomEps) {
    return false;
  }
  return simplex_simplex_distance(a, b) <= threshold + kGeomEps;
}

bool segment_clear_of_balls(const Point& a, const Point& b,
                            std::span<const Point> centers, double radius) {
  for (const Point& c : centers) {
    if (point_segment_distance(c, a, b) <= radius) return false;
  }
  return true;
}

namespace {

// Ball through all support points, centered in their affine hull. This is
// the unique smallest ball having every support point on its boundary.
Ball ball_from_support(const std::vector<Point>& support, Eigen::Index D) {
  Ball ball;
  if (support.empty()) {
    ball.center = Point::Zero(D);
    ball.radius = -1.0;  // contains() fails for every point
    return ball;
  }
  if (support.size() == 1) {
    ball.center = support[0];
    ball.radius = 0.0;
    return ball;
  }
  const Point& p0 = support[0];
  const int m = static_cast<int>(support.size());
  Eigen::MatrixXd A(D, m - 1);
  Eigen::VectorXd rhs(m - 1);
  for (int j = 1; j < m; ++j) {
    A.col(j - 1) = support[j] - p0;
    rhs[j - 1] = 0.5 * (support[j] - p0).squaredNorm();
  }
  // Normal equations (A^T A) y = rhs give the center p0 + A y in the
  // affine hull. COD tolerates near-degenerate supports.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(
      (A.transpose() * A).eval());
  Eigen::VectorXd y = cod.solve(rhs);
  ball.center = p0 + A * y;
  ball.radius = (ball.center - p0).norm();
  return ball;
}

Ball welzl(std::vector<const Point*>& pts, std::size_t end,
           std::vector<Point>& support, Eigen::Index D) {
  Ball ball = ball_from_support(support, D);
  if (support.size() == static_cast<std::size_t>(D) + 1) return ball;
  for (std::size_t i = 0; i < end; ++i) {
    if (ball.contains(*pts[i])) continue;
    support.push_back(*pts[i]);
    ball = welzl(pts, i, support, D);
    support.pop_back();
    // Move-to-front keeps the expected recursion shallow.
    const Point* hit = pts[i];
    for (std::size_t j = i; j > 0; --j) pts[j] = pts[j - 1];
    pts[0] = hit;
  }
  return ball;
}

}  // namespace

Ball min_enclosing_ball(std::span<const Point> points) {
  if (points.empty()) {
    throw std::invalid_argument("min_enclosing_ball: empty input");
  }
  const Eigen::Index D = points[0].size();
  std::vector<const Point*> pts(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) pts[i] = &points[i];
  // Deterministic shuffle: fixed internal seed, not part of run lineage.
  RngStream rng(derive_seed(0x6d696e6261ULL, StreamTag::kShuffle,
                            points.size()));
  for (std::size_t i = points.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.uniform_below(i));
    std::swap(pts[i - 1], pts[j]);
  }
  std::vector<Point> support;
  support.reserve(static_cast<std::size_t>(D) + 1);
  return welzl(pts, pts.size(), support, D);
}

Ball circumball(std::span<const Point> vertices) {
  if (vertices.empty()) throw std::invalid_argument("circumball: empty input");
  const Eigen::Index D = vertices[0].size();
  if (vertices.size() >= 2) {
    Eigen::MatrixXd B(D, vertices.size() - 1);
    for (std::size_t j = 1; j < vertices.size(); ++j) {
      B.col(j - 1) = vertices[j] - vertices[0];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
    if (qr.rank() < static_cast<Eigen::Index>(vertices.size()) - 1) {
      throw std::invalid_argument("circumball: affinely dependent vertices");
    }
  }
  std::vector<Point> support(vertices.begin(), vertices.end());
  return ball_from_support(support, D);
}

Ball circumball(const GeomSimplex& s) {
  return circumball(std::span<const Point>(s.vertices()));
}

double simplex_diameter(std::span<const Point> vertices) {
  double diam = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices.size(); ++j) {
      diam = std::max(diam, (vertices[i] - vertices[j]).norm());
    }
  }
  return diam;
}

}  // namespace simperc
