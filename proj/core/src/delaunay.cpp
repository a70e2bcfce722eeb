#include "simperc/delaunay.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace simperc {

namespace {

constexpr int kMaxCellVerts = 4;  // D + 1 for D <= 3

struct PoolCell {
  std::array<std::int32_t, kMaxCellVerts> v;
  std::array<std::int32_t, kMaxCellVerts> nb;
  bool alive = true;
};

struct Builder {
  int D;
  std::vector<Point> pts;  // input points + D+1 super vertices
  std::vector<PoolCell> pool;
  std::int32_t hint = 0;

  int verts_per_cell() const { return D + 1; }

  double orient_sign(const PoolCell& c) const {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3> M(D, D);
    for (int k = 1; k <= D; ++k) {
      M.row(k - 1) = (pts[c.v[k]] - pts[c.v[0]]).head(D).transpose();
    }
    const double det = M.determinant();
    return det >= 0.0 ? 1.0 : -1.0;
  }

  // Strict in-circumsphere test with a deterministic tie rule: values within
  // the scaled tolerance count as outside, so co-spherical configurations
  // resolve by insertion order (ascending id). The sign of the lifted
  // determinant relative to the (v1-v0, ..., vD-v0) orientation flips with
  // the parity of D.
  bool in_sphere(const PoolCell& c, const Point& p) const {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 4, 4> M(D + 1,
                                                                     D + 1);
    double scale = 1.0;
    for (int k = 0; k <= D; ++k) {
      Point d = pts[c.v[k]] - p;
      for (int j = 0; j < D; ++j) M(k, j) = d[j];
      M(k, D) = d.squaredNorm();
      scale *= std::max(M.row(k).norm(), 1e-30);
    }
    const double det = M.determinant();
    const double parity = (D % 2 == 0) ? 1.0 : -1.0;
    return parity * orient_sign(c) * det > 1e-12 * scale;
  }

  bool barycentric_inside(const PoolCell& c, const Point& p,
                          int* worst_slot) const {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3> M(D, D);
    for (int k = 1; k <= D; ++k) {
      M.col(k - 1) = (pts[c.v[k]] - pts[c.v[0]]).head(D);
    }
    Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1> beta =
        M.fullPivLu().solve((p - pts[c.v[0]]).head(D).eval());
    double coord0 = 1.0;
    double worst = 0.0;
    int slot = -1;
    for (int k = 1; k <= D; ++k) {
      coord0 -= beta[k - 1];
      if (beta[k - 1] < worst) {
        worst = beta[k - 1];
        slot = k;
      }
    }
    if (coord0 < worst) {
      worst = coord0;
      slot = 0;
    }
    if (worst >= -1e-12) return true;
    *worst_slot = slot;
    return false;
  }

  std::int32_t locate(const Point& p) {
    std::int32_t cur = hint;
    if (cur < 0 || cur >= static_cast<std::int32_t>(pool.size()) ||
        !pool[cur].alive) {
      cur = -1;
      for (std::int32_t i = static_cast<std::int32_t>(pool.size()); i-- > 0;) {
        if (pool[i].alive) {
          cur = i;
          break;
        }
      }
    }
    std::size_t steps = 0;
    const std::size_t cap = 8 * pool.size() + 64;
    while (cur >= 0 && steps++ < cap) {
      int slot = -1;
      if (barycentric_inside(pool[cur], p, &slot)) return cur;
      cur = pool[cur].nb[slot];
    }
    // Degenerate walk; fall back to a scan.
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(pool.size()); ++i) {
      int slot;
      if (pool[i].alive && barycentric_inside(pool[i], p, &slot)) return i;
    }
    throw std::runtime_error("delaunay: point location failed");
  }

  void insert(std::int32_t pid) {
    const Point& p = pts[pid];
    std::int32_t start = locate(p);
    for (int k = 0; k <= D; ++k) {
      if (pts[pool[start].v[k]] == p) {
        throw std::invalid_argument("delaunay: duplicate point");
      }
    }
    // Cavity: connected cells whose circumball strictly contains p.
    std::vector<std::int32_t> cavity;
    std::vector<std::int32_t> stack;
    std::unordered_map<std::int32_t, bool> in_cavity;
    auto test = [&](std::int32_t cell) {
      auto it = in_cavity.find(cell);
      if (it != in_cavity.end()) return it->second;
      bool in = in_sphere(pool[cell], p);
      in_cavity.emplace(cell, in);
      return in;
    };
    if (!test(start)) {
      // p sits on a boundary of the located cell within tolerance;
      // retriangulating just that cell keeps the structure valid.
      in_cavity[start] = true;
    }
    stack.push_back(start);
    cavity.push_back(start);
    std::vector<char> queued_flags;  // tracked via map; stack holds cavity
    while (!stack.empty()) {
      std::int32_t cell = stack.back();
      stack.pop_back();
      for (int k = 0; k <= D; ++k) {
        std::int32_t nb = pool[cell].nb[k];
        if (nb < 0 || in_cavity.count(nb)) continue;  // decided already
        if (test(nb)) {
          cavity.push_back(nb);
          stack.push_back(nb);
        }
      }
    }
    // Boundary facets of the cavity -> new cells around p.
    struct NewCell {
      std::array<std::int32_t, kMaxCellVerts> v;
      std::int32_t outside;
      std::int32_t outside_slot;
    };
    std::vector<NewCell> fresh;
    for (std::int32_t cell : cavity) {
      for (int k = 0; k <= D; ++k) {
        std::int32_t nb = pool[cell].nb[k];
        bool nb_in = nb >= 0 && in_cavity.count(nb) && in_cavity[nb];
        if (nb_in) continue;
        NewCell nc;
        int w = 0;
        for (int j = 0; j <= D; ++j) {
          if (j != k) nc.v[w++] = pool[cell].v[j];
        }
        nc.v[w] = pid;
        nc.outside = nb;
        nc.outside_slot = -1;
        if (nb >= 0) {
          for (int j = 0; j <= D; ++j) {
            if (pool[nb].nb[j] == cell) nc.outside_slot = j;
          }
        }
        fresh.push_back(nc);
      }
    }
    for (std::int32_t cell : cavity) pool[cell].alive = false;
    // Allocate the new cells, wire the outward neighbors, then match the
    // p-containing facets pairwise among siblings.
    std::vector<std::int32_t> ids;
    for (const NewCell& nc : fresh) {
      PoolCell cell;
      cell.v = nc.v;
      cell.nb.fill(-1);
      cell.nb[D] = nc.outside;  // slot opposite p (p is at position D)
      std::int32_t id = static_cast<std::int32_t>(pool.size());
      pool.push_back(cell);
      if (nc.outside >= 0) pool[nc.outside].nb[nc.outside_slot] = id;
      ids.push_back(id);
    }
    std::unordered_map<std::uint64_t, std::pair<std::int32_t, int>> open;
    auto facet_key = [&](const PoolCell& cell, int drop) {
      std::array<std::int32_t, kMaxCellVerts> f{};
      int w = 0;
      for (int j = 0; j <= D; ++j) {
        if (j != drop) f[w++] = cell.v[j];
      }
      std::sort(f.begin(), f.begin() + D);
      std::uint64_t h = 1469598103934665603ULL;
      for (int j = 0; j < D; ++j) {
        h ^= static_cast<std::uint32_t>(f[j]);
        h *= 1099511628211ULL;
      }
      return h;
    };
    for (std::int32_t id : ids) {
      for (int k = 0; k < D; ++k) {  // facets containing p
        std::uint64_t key = facet_key(pool[id], k);
        auto it = open.find(key);
        if (it == open.end()) {
          open.emplace(key, std::make_pair(id, k));
        } else {
          pool[id].nb[k] = it->second.first;
          pool[it->second.first].nb[it->second.second] = id;
          open.erase(it);
        }
      }
    }
    hint = ids.empty() ? hint : ids.back();
  }
};

}  // namespace

DelaunayComplex delaunay(const Realization& real,
                         const DelaunayOptions& options) {
  const int D = real.dim();
  if (D == 3 && !options.enable_3d) {
    throw std::invalid_argument(
        "delaunay: dimension 3 requires DelaunayOptions::enable_3d");
  }
  if (D < 2 || D > 3) {
    throw std::invalid_argument("delaunay: supported dimensions are 2 and 3");
  }
  const std::size_t n = real.points().size();
  if (n < static_cast<std::size_t>(D) + 1) {
    throw std::invalid_argument("delaunay: need at least D+1 points");
  }

  Builder b;
  b.D = D;
  b.pts = real.points();
  auto [lo, hi] = real.region().bounding_box();
  double extent = 1.0;
  for (int i = 0; i < D; ++i) {
    extent = std::max(extent, hi[i] - lo[i]);
  }
  for (const Point& p : b.pts) {
    for (int i = 0; i < D; ++i) {
      extent = std::max({extent, p[i] - lo[i], hi[i] - p[i] + 0.0});
    }
  }
  Point center = (lo + hi) / 2.0;
  // Corner super-simplex far enough out that no circumball of the final
  // triangulation can reach its vertices.
  const double M = 16.0 * (extent + 2.0);
  Point v0 = center;
  for (int i = 0; i < D; ++i) v0[i] -= M * (D + 2);
  PoolCell root;
  root.nb.fill(-1);
  b.pts.push_back(v0);
  root.v[0] = static_cast<std::int32_t>(b.pts.size()) - 1;
  for (int k = 1; k <= D; ++k) {
    Point vk = v0;
    vk[k - 1] += M * (D + 2) * (D + 1) * 2.0;
    b.pts.push_back(vk);
    root.v[k] = static_cast<std::int32_t>(b.pts.size()) - 1;
  }
  b.pool.push_back(root);
  for (std::int32_t pid = 0; pid < static_cast<std::int32_t>(n); ++pid) {
    b.insert(pid);
  }

  // Compact: drop super-vertex cells, sort tuples, order lexicographically.
  DelaunayComplex cx;
  cx.D = D;
  std::vector<std::int32_t> keep;
  for (std::int32_t i = 0; i < static_cast<std::int32_t>(b.pool.size()); ++i) {
    if (!b.pool[i].alive) continue;
    bool super = false;
    for (int k = 0; k <= D; ++k) {
      if (b.pool[i].v[k] >= static_cast<std::int32_t>(n)) super = true;
    }
    if (!super) keep.push_back(i);
  }
  // Lexicographic order of sorted tuples.
  std::vector<std::array<std::int32_t, kMaxCellVerts>> sorted_tuples(
      keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    auto t = b.pool[keep[i]].v;
    std::sort(t.begin(), t.begin() + D + 1);
    sorted_tuples[i] = t;
  }
  std::vector<std::int32_t> order(keep.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t c) {
    return std::lexicographical_compare(
        sorted_tuples[a].begin(), sorted_tuples[a].begin() + D + 1,
        sorted_tuples[c].begin(), sorted_tuples[c].begin() + D + 1);
  });
  std::vector<std::int32_t> new_of_pool(b.pool.size(), -1);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    new_of_pool[keep[order[rank]]] = static_cast<std::int32_t>(rank);
  }
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const PoolCell& cell = b.pool[keep[order[rank]]];
    // Re-sort vertices and carry the opposite-neighbor slots along.
    std::array<int, kMaxCellVerts> perm{};
    std::iota(perm.begin(), perm.begin() + D + 1, 0);
    std::sort(perm.begin(), perm.begin() + D + 1,
              [&](int x, int y) { return cell.v[x] < cell.v[y]; });
    for (int k = 0; k <= D; ++k) {
      cx.cells.push_back(cell.v[perm[k]]);
    }
    for (int k = 0; k <= D; ++k) {
      std::int32_t nb = cell.nb[perm[k]];
      cx.neighbors.push_back(nb < 0 ? -1 : new_of_pool[nb]);
    }
  }
  cx.circumcenters.reserve(cx.size());
  cx.circumradii.reserve(cx.size());
  std::vector<Point> verts(D + 1);
  for (std::size_t i = 0; i < cx.size(); ++i) {
    auto t = cx.tuple(i);
    for (int k = 0; k <= D; ++k) verts[k] = real.points()[t[k]];
    Ball ball = circumball(verts);
    cx.circumcenters.push_back(ball.center);
    cx.circumradii.push_back(ball.radius);
  }
  return cx;
}

std::vector<std::uint8_t> vacancy_flags(const DelaunayComplex& cx,
                                        const Realization& real) {
  std::vector<std::uint8_t> vacant(cx.size(), 0);
  for (std::size_t i = 0; i < cx.size(); ++i) {
    vacant[i] = real.grid().any_within(real.points(), cx.circumcenters[i], 0.5)
                    ? 0
                    : 1;
  }
  return vacant;
}

bool v_adjacent(const DelaunayComplex& cx, const Realization& real,
                std::int32_t a, std::int32_t b) {
  if (a < 0 || b < 0 || a >= static_cast<std::int32_t>(cx.size()) ||
      b >= static_cast<std::int32_t>(cx.size())) {
    throw std::invalid_argument("v_adjacent: cell id out of range");
  }
  bool adjacent = false;
  for (std::int32_t nb : cx.nbrs(a)) adjacent = adjacent || nb == b;
  if (!adjacent) {
    throw std::invalid_argument("v_adjacent: cells are not facet-adjacent");
  }
  const Point& ca = cx.circumcenters[a];
  const Point& cb = cx.circumcenters[b];
  Point mid = (ca + cb) / 2.0;
  double reach = (ca - cb).norm() / 2.0 + 0.5;
  std::vector<int> cand = real.grid().query_ball(real.points(), mid, reach);
  std::vector<Point> centers;
  centers.reserve(cand.size());
  for (int id : cand) centers.push_back(real.points()[id]);
  return segment_clear_of_balls(ca, cb, centers, 0.5);
}

KGrowth grow_K(const DelaunayComplex& cx, const Realization& real,
               double axis_half_length) {
  if (!(axis_half_length > 0.0)) {
    throw std::invalid_argument("grow_K: nonpositive axis length");
  }
  const int D = cx.D;
  KGrowth out;
  Point a = Point::Zero(D), b = Point::Zero(D);
  a[D - 1] = -axis_half_length;
  b[D - 1] = axis_half_length;
  std::vector<Point> seg{a, b};
  std::vector<Point> verts(D + 1);
  for (std::size_t i = 0; i < cx.size(); ++i) {
    auto t = cx.tuple(i);
    for (int k = 0; k <= D; ++k) verts[k] = real.points()[t[k]];
    if (simplex_within_distance(verts, seg, 0.0)) {
      out.k0.push_back(static_cast<std::int32_t>(i));
    }
  }
  std::vector<char> in_k(cx.size(), 0);
  std::vector<std::int32_t> queue;
  for (std::int32_t s : out.k0) {
    in_k[s] = 1;
    queue.push_back(s);
    out.visit.push_back(s);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    std::int32_t cur = queue[head];
    for (std::int32_t nb : cx.nbrs(cur)) {
      if (nb < 0 || in_k[nb]) continue;
      if (v_adjacent(cx, real, cur, nb)) {
        in_k[nb] = 1;
        queue.push_back(nb);
        out.visit.push_back(nb);
      }
    }
  }
  out.k = queue;
  std::sort(out.k.begin(), out.k.end());
  return out;
}

FaceSet outer_boundary(const DelaunayComplex& cx,
                       std::span<const std::int32_t> m) {
  const int D = cx.D;
  std::vector<char> in_m(cx.size(), 0);
  for (std::int32_t s : m) {
    if (s < 0 || s >= static_cast<std::int32_t>(cx.size())) {
      throw std::invalid_argument("outer_boundary: cell id out of range");
    }
    in_m[s] = 1;
  }
  // Unbounded complement component: flood from hull-adjacent cells.
  std::vector<char> unbounded(cx.size(), 0);
  std::vector<std::int32_t> queue;
  for (std::size_t i = 0; i < cx.size(); ++i) {
    if (in_m[i]) continue;
    bool hull = false;
    for (std::int32_t nb : cx.nbrs(i)) hull = hull || nb < 0;
    if (hull) {
      unbounded[i] = 1;
      queue.push_back(static_cast<std::int32_t>(i));
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (std::int32_t nb : cx.nbrs(queue[head])) {
      if (nb >= 0 && !in_m[nb] && !unbounded[nb]) {
        unbounded[nb] = 1;
        queue.push_back(nb);
      }
    }
  }
  std::vector<std::int32_t> tuples;  // arity D facets
  for (std::int32_t s : m) {
    auto t = cx.tuple(s);
    auto nb = cx.nbrs(s);
    for (int k = 0; k <= D; ++k) {
      const bool outer = nb[k] < 0 || (!in_m[nb[k]] && unbounded[nb[k]]);
      if (!outer) continue;
      for (int j = 0; j <= D; ++j) {
        if (j != k) tuples.push_back(t[j]);
      }
    }
  }
  // Deterministic order.
  const std::size_t cnt = tuples.size() / D;
  std::vector<std::int32_t> order(cnt);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t x, std::int32_t y) {
    return std::lexicographical_compare(
        tuples.begin() + x * D, tuples.begin() + (x + 1) * D,
        tuples.begin() + y * D, tuples.begin() + (y + 1) * D);
  });
  FaceSet out;
  out.arity = D;
  for (std::int32_t idx : order) {
    out.flat.insert(out.flat.end(), tuples.begin() + idx * D,
                    tuples.begin() + (idx + 1) * D);
  }
  return out;
}

std::vector<CycleFamily> cycle_candidate(const DelaunayComplex& cx,
                                         const Realization& real,
                                         double axis_half_length) {
  std::vector<CycleFamily> out;
  KGrowth growth = grow_K(cx, real, axis_half_length);
  if (growth.k.empty()) return out;
  FaceSet ob = outer_boundary(cx, growth.k);
  if (ob.flat.empty()) return out;
  SimplexTable sub;
  sub.d = cx.D - 1;
  sub.flat = ob.flat;
  AdjacencyGraph graph = face_adjacency(sub);
  std::vector<std::int32_t> all(sub.size());
  std::iota(all.begin(), all.end(), 0);
  for (const auto& comp : face_components(graph, all)) {
    CycleFamily fam;
    for (std::int32_t f : comp) {
      auto t = sub.tuple(f);
      fam.faces_flat.insert(fam.faces_flat.end(), t.begin(), t.end());
    }
    FaceSet bd = boundary_mod2(sub, comp);
    fam.cycle_ok = true;
    for (std::size_t f = 0; f < bd.size(); ++f) {
      // Sub-boundary faces are tolerated only near the window edge, where
      // the finite tessellation truncates the family.
      double dist = std::numeric_limits<double>::infinity();
      for (std::int32_t pid : bd.tuple(f)) {
        dist = std::min(dist,
                        real.region().boundary_distance(real.points()[pid]));
      }
      if (dist <= 2.0 + kGeomEps) {
        fam.clipped = true;
      } else {
        fam.cycle_ok = false;
      }
    }
    out.push_back(std::move(fam));
  }
  return out;
}

CircumradiusStats circumradius_stats(const DelaunayComplex& cx,
                                     const Realization& real, double ell) {
  if (!(ell > 0.0)) {
    throw std::invalid_argument("circumradius_stats: nonpositive ell");
  }
  const int D = cx.D;
  Point origin = Point::Zero(D);
  CircumradiusStats stats;
  std::vector<Point> verts(D + 1);
  for (std::size_t i = 0; i < cx.size(); ++i) {
    auto t = cx.tuple(i);
    double minv = std::numeric_limits<double>::infinity();
    double diam = 0.0;
    for (int k = 0; k <= D; ++k) {
      verts[k] = real.points()[t[k]];
      minv = std::min(minv, verts[k].norm());
    }
    bool meets;
    if (minv <= ell + kGeomEps) {
      meets = true;
    } else {
      for (int k = 0; k <= D; ++k) {
        for (int j = k + 1; j <= D; ++j) {
          diam = std::max(diam, (verts[k] - verts[j]).norm());
        }
      }
      meets = minv - diam <= ell + kGeomEps &&
              point_simplex_distance(origin, verts) <= ell + kGeomEps;
    }
    if (!meets) continue;
    stats.max_radius = std::max(stats.max_radius, cx.circumradii[i]);
    ++stats.cells_considered;
  }
  return stats;
}

bool cell_contains(const DelaunayComplex& cx, const Realization& real,
                   std::size_t i, const Point& p) {
  const int D = cx.D;
  auto t = cx.tuple(i);
  Eigen::MatrixXd M(D, D);
  for (int k = 1; k <= D; ++k) {
    M.col(k - 1) = (real.points()[t[k]] - real.points()[t[0]]).head(D);
  }
  Eigen::VectorXd beta =
      M.fullPivLu().solve((p - real.points()[t[0]]).head(D).eval());
  double coord0 = 1.0;
  for (int k = 0; k < D; ++k) {
    if (beta[k] < -1e-9) return false;
    coord0 -= beta[k];
  }
  return coord0 >= -1e-9;
}

void write_delaunay_text(std::ostream& os, const DelaunayComplex& cx) {
  os << "simperc-delaunay 1\n" << cx.D << ' ' << cx.size() << '\n';
  for (std::size_t i = 0; i < cx.size(); ++i) {
    auto t = cx.tuple(i);
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (k) os << ' ';
      os << t[k];
    }
    os << '\n';
  }
}

std::vector<std::int32_t> read_delaunay_text(std::istream& is, int& D) {
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "simperc-delaunay" || version != 1) {
    throw std::runtime_error("read_delaunay_text: bad header");
  }
  std::size_t m = 0;
  is >> D >> m;
  std::vector<std::int32_t> flat;
  flat.reserve(m * (D + 1));
  for (std::size_t i = 0; i < m * (D + 1); ++i) {
    std::int32_t v;
    if (!(is >> v)) {
      throw std::runtime_error("read_delaunay_text: truncated file");
    }
    flat.push_back(v);
  }
  return flat;
}

}  // namespace simperc
