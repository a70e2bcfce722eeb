#include "simperc/point_process.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace simperc {

namespace {

std::uint64_t cell_key(const Point& p) {
  // FNV-1a over the floored integer coordinates.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    auto c = static_cast<std::int64_t>(std::floor(p[i]));
    auto u = static_cast<std::uint64_t>(c);
    for (int b = 0; b < 8; ++b) {
      h ^= (u >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::uint64_t cell_key_int(const std::int64_t* c, int dim) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int i = 0; i < dim; ++i) {
    auto u = static_cast<std::uint64_t>(c[i]);
    for (int b = 0; b < 8; ++b) {
      h ^= (u >> (8 * b)) & 0xffu;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace

Region Region::box(Point center, Point half_widths) {
  if (center.size() != half_widths.size()) {
    throw std::invalid_argument("region: dimension mismatch");
  }
  for (Eigen::Index i = 0; i < half_widths.size(); ++i) {
    if (!(half_widths[i] > 0.0)) {
      throw std::invalid_argument("region: nonpositive box half width");
    }
  }
  Region r;
  r.kind_ = Kind::kBox;
  r.center_ = std::move(center);
  r.half_widths_ = std::move(half_widths);
  return r;
}

Region Region::ball(Point center, double radius) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("region: nonpositive ball radius");
  }
  Region r;
  r.kind_ = Kind::kBall;
  r.center_ = std::move(center);
  r.radius_ = radius;
  return r;
}

bool Region::contains(const Point& p) const {
  if (kind_ == Kind::kBox) {
    for (Eigen::Index i = 0; i < center_.size(); ++i) {
      if (std::abs(p[i] - center_[i]) > half_widths_[i]) return false;
    }
    return true;
  }
  return (p - center_).norm() <= radius_;
}

double Region::volume() const {
  const int D = dim();
  if (kind_ == Kind::kBox) {
    double v = 1.0;
    for (Eigen::Index i = 0; i < half_widths_.size(); ++i) {
      v *= 2.0 * half_widths_[i];
    }
    return v;
  }
  // Unit-ball volume pi^(D/2) / Gamma(D/2 + 1), scaled by radius^D.
  double unit = std::pow(M_PI, D / 2.0) / std::tgamma(D / 2.0 + 1.0);
  return unit * std::pow(radius_, D);
}

std::pair<Point, Point> Region::bounding_box() const {
  Point lo = center_, hi = center_;
  if (kind_ == Kind::kBox) {
    lo -= half_widths_;
    hi += half_widths_;
  } else {
    lo.array() -= radius_;
    hi.array() += radius_;
  }
  return {lo, hi};
}

double Region::boundary_distance(const Point& p) const {
  if (kind_ == Kind::kBall) return radius_ - (p - center_).norm();
  double d = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < center_.size(); ++i) {
    d = std::min(d, half_widths_[i] - std::abs(p[i] - center_[i]));
  }
  return d;
}

GridIndex::GridIndex(const std::vector<Point>& points) {
  if (!points.empty()) dim_ = static_cast<int>(points[0].size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    insert(static_cast<int>(i), points[i]);
  }
}

void GridIndex::insert(int id, const Point& p) {
  dim_ = static_cast<int>(p.size());
  cells_[cell_key(p)].push_back(id);
}

std::vector<int> GridIndex::query_ball(const std::vector<Point>& points,
                                       const Point& x, double r) const {
  std::vector<int> out;
  if (cells_.empty()) return out;
  const double reach = r + kGeomEps;
  std::int64_t lo[kMaxDim], hi[kMaxDim], cur[kMaxDim];
  const int D = static_cast<int>(x.size());
  for (int i = 0; i < D; ++i) {
    lo[i] = static_cast<std::int64_t>(std::floor(x[i] - reach));
    hi[i] = static_cast<std::int64_t>(std::floor(x[i] + reach));
    cur[i] = lo[i];
  }
  for (;;) {
    auto it = cells_.find(cell_key_int(cur, D));
    if (it != cells_.end()) {
      for (int id : it->second) {
        if ((points[id] - x).norm() <= reach) out.push_back(id);
      }
    }
    int axis = 0;
    while (axis < D) {
      if (++cur[axis] <= hi[axis]) break;
      cur[axis] = lo[axis];
      ++axis;
    }
    if (axis == D) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool GridIndex::any_within(const std::vector<Point>& points, const Point& x,
                           double r) const {
  if (cells_.empty()) return false;
  const double reach = r + kGeomEps;
  std::int64_t lo[kMaxDim], hi[kMaxDim], cur[kMaxDim];
  const int D = static_cast<int>(x.size());
  for (int i = 0; i < D; ++i) {
    lo[i] = static_cast<std::int64_t>(std::floor(x[i] - reach));
    hi[i] = static_cast<std::int64_t>(std::floor(x[i] + reach));
    cur[i] = lo[i];
  }
  for (;;) {
    auto it = cells_.find(cell_key_int(cur, D));
    if (it != cells_.end()) {
      for (int id : it->second) {
        if ((points[id] - x).norm() <= reach) return true;
      }
    }
    int axis = 0;
    while (axis < D) {
      if (++cur[axis] <= hi[axis]) break;
      cur[axis] = lo[axis];
      ++axis;
    }
    if (axis == D) break;
  }
  return false;
}

Realization::Realization(std::vector<Point> points, Region region,
                         double intensity, SeedInfo seed)
    : points_(std::move(points)),
      region_(std::move(region)),
      intensity_(intensity),
      seed_(seed),
      grid_(points_) {}

std::vector<Point> poisson_points(const Region& region, double intensity,
                                  RngStream& rng) {
  if (!(intensity > 0.0)) {
    throw std::invalid_argument("poisson_points: nonpositive intensity");
  }
  const double mean = intensity * region.volume();
  const std::uint64_t count = rng.poisson(mean);
  auto [lo, hi] = region.bounding_box();
  const int D = region.dim();
  std::vector<Point> pts;
  pts.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    Point p(D);
    for (;;) {
      for (int i = 0; i < D; ++i) p[i] = rng.uniform(lo[i], hi[i]);
      if (region.contains(p)) break;
    }
    pts.push_back(p);
  }
  return pts;
}

Realization sample_poisson(const Region& region, double intensity,
                           std::uint64_t root_seed, std::uint64_t replica) {
  RngStream rng = derive_stream(root_seed, StreamTag::kPointProcess, replica);
  return Realization(poisson_points(region, intensity, rng), region, intensity,
                     SeedInfo{root_seed, replica});
}

Realization resample_in_box(const Realization& real, const Point& x,
                            RngStream& edit) {
  const int D = real.dim();
  if (static_cast<int>(x.size()) != D) {
    throw std::invalid_argument("resample_in_box: dimension mismatch");
  }
  // The edit box must sit inside the window, otherwise the resampled law
  // would differ from the restriction of the model.
  const Region& region = real.region();
  if (region.kind() == Region::Kind::kBox) {
    for (int i = 0; i < D; ++i) {
      if (std::abs(x[i] - region.center()[i]) + 0.5 >
          region.half_widths()[i] + kGeomEps) {
        throw std::invalid_argument("resample_in_box: box leaves the region");
      }
    }
  } else {
    Point corner(D);
    for (int c = 0; c < (1 << D); ++c) {
      for (int i = 0; i < D; ++i) corner[i] = x[i] + ((c >> i) & 1 ? 0.5 : -0.5);
      if ((corner - region.center()).norm() > region.radius() + kGeomEps) {
        throw std::invalid_argument("resample_in_box: box leaves the region");
      }
    }
  }
  std::vector<Point> pts;
  pts.reserve(real.points().size());
  for (const Point& p : real.points()) {
    bool inside = true;
    for (int i = 0; i < D; ++i) {
      if (std::abs(p[i] - x[i]) > 0.5) {
        inside = false;
        break;
      }
    }
    if (!inside) pts.push_back(p);
  }
  const std::uint64_t count = edit.poisson(real.intensity());
  for (std::uint64_t k = 0; k < count; ++k) {
    Point p(D);
    for (int i = 0; i < D; ++i) p[i] = edit.uniform(x[i] - 0.5, x[i] + 0.5);
    pts.push_back(p);
  }
  return Realization(std::move(pts), real.region(), real.intensity(),
                     real.seed());
}

Realization add_point(const Realization& real, const Point& p) {
  if (!real.region().contains(p)) {
    throw std::invalid_argument("add_point: point outside region");
  }
  bool dup = false;
  for (int id : real.neighbors_within(p, 0.0)) {
    if (real.points()[id] == p) {
      dup = true;
      break;
    }
  }
  std::vector<Point> pts = real.points();
  pts.push_back(p);
  Realization out(std::move(pts), real.region(), real.intensity(),
                  real.seed());
  if (dup || real.duplicate_flag()) out.set_duplicate_flag();
  return out;
}

void write_points_text(std::ostream& os, const Realization& real) {
  os << "simperc-points 1\n";
  os << real.dim() << ' ' << real.points().size() << '\n';
  char buf[64];
  for (const Point& p : real.points()) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.12f", p[i]);
      if (i) os << ' ';
      os << buf;
    }
    os << '\n';
  }
}

std::vector<Point> read_points_text(std::istream& is) {
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "simperc-points" || version != 1) {
    throw std::runtime_error("read_points_text: bad header");
  }
  int D = 0;
  std::size_t n = 0;
  is >> D >> n;
  if (D < 1 || D > kMaxDim) {
    throw std::runtime_error("read_points_text: bad dimension");
  }
  std::vector<Point> pts;
  pts.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Point p(D);
    for (int i = 0; i < D; ++i) {
      if (!(is >> p[i])) {
        throw std::runtime_error("read_points_text: truncated file");
      }
    }
    pts.push_back(p);
  }
  return pts;
}

MarkUniforms sample_mark_uniforms(const Realization& real,
                                  std::uint64_t root_seed,
                                  std::uint64_t replica) {
  MarkUniforms u;
  RngStream s1 = derive_stream(root_seed, StreamTag::kMarks1, replica);
  RngStream s2 = derive_stream(root_seed, StreamTag::kMarks2, replica);
  const std::size_t n = real.points().size();
  u.u1.resize(n);
  u.u2.resize(n);
  for (std::size_t i = 0; i < n; ++i) u.u1[i] = s1.uniform01();
  for (std::size_t i = 0; i < n; ++i) u.u2[i] = s2.uniform01();
  return u;
}

MarkedRealization marks_from_uniforms(const Realization& real,
                                      const MarkUniforms& u, double p,
                                      double q) {
  MarkedRealization m{real, {}, {}};
  const std::size_t n = real.points().size();
  m.xi1.resize(n);
  m.xi2.resize(n);
  for (std::size_t i = 0; i < n; ++i) m.xi1[i] = u.u1[i] < p ? 1 : 0;
  for (std::size_t i = 0; i < n; ++i) m.xi2[i] = u.u2[i] < q ? 1 : 0;
  return m;
}

MarkedRealization sample_marks(const Realization& real, double p, double q,
                               std::uint64_t root_seed,
                               std::uint64_t replica) {
  return marks_from_uniforms(real, sample_mark_uniforms(real, root_seed,
                                                        replica),
                             p, q);
}

}  // namespace simperc
