#include "simperc/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace simperc {

namespace {

Point origin_point(int D) { return Point::Zero(D); }

struct TouchTester {
  const std::vector<Point>& points;
  const SimplexTable& table;
  Point origin;
  // -1 unknown, else cached verdict.
  mutable std::vector<std::int8_t> inner_cache;
  mutable std::vector<std::int8_t> sphere_cache;
  double n = 0.0;

  TouchTester(const std::vector<Point>& pts, const SimplexTable& tbl,
              double n_)
      : points(pts),
        table(tbl),
        origin(origin_point(pts.empty() ? 1 : static_cast<int>(pts[0].size()))),
        inner_cache(tbl.size(), -1),
        sphere_cache(tbl.size(), -1),
        n(n_) {}

  double min_vertex_norm(std::size_t s) const {
    double m = std::numeric_limits<double>::infinity();
    for (std::int32_t pid : table.tuple(s)) {
      m = std::min(m, points[pid].norm());
    }
    return m;
  }
  double max_vertex_norm(std::size_t s) const {
    double m = 0.0;
    for (std::int32_t pid : table.tuple(s)) {
      m = std::max(m, points[pid].norm());
    }
    return m;
  }

  double exact_origin_distance(std::size_t s) const {
    auto t = table.tuple(s);
    std::vector<Point> verts(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) verts[k] = points[t[k]];
    return point_simplex_distance(origin, verts);
  }

  // Hull meets the closed unit ball at the origin.
  bool inner(std::size_t s) const {
    if (inner_cache[s] >= 0) return inner_cache[s] != 0;
    bool hit;
    const double minv = min_vertex_norm(s);
    if (minv <= 1.0 + kGeomEps) {
      hit = true;
    } else if (minv - 1.0 > 1.0 + kGeomEps) {
      // Every hull point is within the simplex diameter (<= 1) of the
      // nearest vertex, so the hull stays outside the unit ball.
      hit = false;
    } else {
      hit = exact_origin_distance(s) <= 1.0 + kGeomEps;
    }
    inner_cache[s] = hit ? 1 : 0;
    return hit;
  }

  // Hull meets the sphere of radius n: reaches out to n and dips under n.
  bool sphere(std::size_t s) const {
    if (sphere_cache[s] >= 0) return sphere_cache[s] != 0;
    bool hit;
    if (max_vertex_norm(s) < n - kGeomEps) {
      hit = false;
    } else if (min_vertex_norm(s) <= n + kGeomEps) {
      hit = true;
    } else {
      hit = exact_origin_distance(s) <= n + kGeomEps;
    }
    sphere_cache[s] = hit ? 1 : 0;
    return hit;
  }
};

// Union-find components through shared (d-1)-faces, without materializing
// the full adjacency graph.
UnionFind face_union(const SimplexTable& table) {
  UnionFind uf(table.size());
  FaceIndex index = build_face_index(table);
  for (std::size_t f = 0; f < index.face_count(); ++f) {
    auto inc = index.incident(f);
    for (std::size_t k = 1; k < inc.size(); ++k) uf.unite(inc[0], inc[k]);
  }
  return uf;
}

bool component_crossing(const SimplexTable& table, UnionFind& uf,
                        const TouchTester& touch) {
  const std::size_t m = table.size();
  std::vector<std::uint8_t> root_inner(m, 0), root_sphere(m, 0);
  for (std::size_t s = 0; s < m; ++s) {
    // Cheap pre-filters: only simplices near the ends need exact tests.
    if (touch.min_vertex_norm(s) <= 2.0 + kGeomEps && touch.inner(s)) {
      root_inner[uf.find(static_cast<int>(s))] = 1;
    }
    if (touch.max_vertex_norm(s) >= touch.n - kGeomEps && touch.sphere(s)) {
      root_sphere[uf.find(static_cast<int>(s))] = 1;
    }
  }
  for (std::size_t s = 0; s < m; ++s) {
    if (root_inner[s] && root_sphere[s]) return true;
  }
  return false;
}

}  // namespace

bool crossing_face(const std::vector<Point>& points, const GridIndex& grid,
                   int d, double n) {
  if (!(n > 2.0)) throw std::invalid_argument("crossing_face: need n > 2");
  SimplexTable table = enumerate_d_simplices(points, grid, d);
  if (table.size() == 0) return false;
  UnionFind uf = face_union(table);
  TouchTester touch(points, table, n);
  return component_crossing(table, uf, touch);
}

bool crossing_face(const Realization& real, int d, double n) {
  return crossing_face(real.points(), real.grid(), d, n);
}

bool crossing_star(const std::vector<Point>& points, const GridIndex& grid,
                   int d, double n, double r0) {
  if (!(n > 2.0)) throw std::invalid_argument("crossing_star: need n > 2");
  if (!(r0 > 0.0)) throw std::invalid_argument("crossing_star: need r0 > 0");
  SimplexTable table = enumerate_d_simplices(points, grid, d);
  if (table.size() == 0) return false;
  AdjacencyGraph graph = star_adjacency(table, points, grid, r0);
  UnionFind uf(table.size());
  for (auto [a, b] : graph.edges) uf.unite(a, b);
  TouchTester touch(points, table, n);
  return component_crossing(table, uf, touch);
}

bool crossing_star(const Realization& real, int d, double n, double r0) {
  return crossing_star(real.points(), real.grid(), d, n, r0);
}

namespace {

// --- GF(2) kernel machinery for relative cycles ---------------------------

struct BitVec {
  std::vector<std::uint64_t> w;

  explicit BitVec(std::size_t bits) : w((bits + 63) / 64, 0) {}
  void set(std::size_t i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
  bool test(std::size_t i) const {
    return (w[i >> 6] >> (i & 63)) & 1u;
  }
  void operator^=(const BitVec& o) {
    for (std::size_t k = 0; k < w.size(); ++k) w[k] ^= o.w[k];
  }
  bool any() const {
    for (std::uint64_t x : w) {
      if (x) return true;
    }
    return false;
  }
  // Highest set bit index, or -1.
  std::int64_t top() const {
    for (std::size_t k = w.size(); k-- > 0;) {
      if (w[k]) {
        return static_cast<std::int64_t>(k) * 64 + (63 - __builtin_clzll(w[k]));
      }
    }
    return -1;
  }
  std::vector<std::int32_t> set_bits() const {
    std::vector<std::int32_t> out;
    for (std::size_t k = 0; k < w.size(); ++k) {
      std::uint64_t x = w[k];
      while (x) {
        int b = __builtin_ctzll(x);
        out.push_back(static_cast<std::int32_t>(k * 64 + b));
        x &= x - 1;
      }
    }
    return out;
  }
};

struct CollarTester {
  const std::vector<Point>& points;
  Point origin;
  double n, w;

  bool face_in_collar(std::span<const std::int32_t> face) const {
    double minv = std::numeric_limits<double>::infinity();
    double maxv = 0.0;
    for (std::int32_t pid : face) {
      double nn = points[pid].norm();
      minv = std::min(minv, nn);
      maxv = std::max(maxv, nn);
    }
    if (maxv >= n - w - kGeomEps) return true;  // reaches the outer collar
    if (minv <= 1.0 + w + kGeomEps) return true;  // vertex in inner collar
    if (minv - 1.0 > 1.0 + w + kGeomEps) return false;  // hull stays clear
    std::vector<Point> verts(face.size());
    for (std::size_t k = 0; k < face.size(); ++k) verts[k] = points[face[k]];
    return point_simplex_distance(origin, verts) <= 1.0 + w + kGeomEps;
  }
};

struct ComponentContext {
  const SimplexTable& table;
  const AdjacencyGraph& graph;
  const std::vector<std::int32_t>& members;  // global simplex ids, sorted
  std::vector<std::int32_t> local_of;        // global -> local or -1
};

// Face-connected pieces of a set of global simplex ids, using the full
// adjacency graph (membership-restricted BFS).
std::vector<std::vector<std::int32_t>> pieces_of(
    const AdjacencyGraph& graph, const std::vector<std::int32_t>& ids) {
  return face_components(graph, ids);
}

bool verify_witness(const SimplexTable& table, const AdjacencyGraph& graph,
                    const TouchTester& touch, const CollarTester& collar,
                    const std::vector<std::int32_t>& M) {
  if (M.empty()) return false;
  if (pieces_of(graph, M).size() != 1) return false;
  bool has_inner = false, has_sphere = false;
  for (std::int32_t s : M) {
    has_inner = has_inner || touch.inner(s);
    has_sphere = has_sphere || touch.sphere(s);
  }
  if (!has_inner || !has_sphere) return false;
  FaceSet bd = boundary_mod2(table, M);
  for (std::size_t f = 0; f < bd.size(); ++f) {
    if (!collar.face_in_collar(bd.tuple(f))) return false;
  }
  return true;
}

// Shortest unit-graph path from the closed unit ball to norm >= n, using
// only the edges of one component. Sound d=1 witness when it exists: a
// simple path's odd vertices are its two endpoints, which lie in the
// collars by choice of source and target.
std::optional<std::vector<std::int32_t>> path_witness_d1(
    const SimplexTable& table, const std::vector<Point>& points,
    const std::vector<std::int32_t>& members, double n) {
  std::unordered_map<std::int64_t, std::int32_t> edge_id;
  std::unordered_map<std::int32_t, std::vector<std::int32_t>> adj;
  auto key = [](std::int32_t a, std::int32_t b) {
    return (static_cast<std::int64_t>(std::min(a, b)) << 32) |
           static_cast<std::uint32_t>(std::max(a, b));
  };
  for (std::int32_t s : members) {
    auto t = table.tuple(s);
    edge_id[key(t[0], t[1])] = s;
    adj[t[0]].push_back(t[1]);
    adj[t[1]].push_back(t[0]);
  }
  std::unordered_map<std::int32_t, std::int32_t> parent;
  std::vector<std::int32_t> queue;
  for (auto& [pid, _] : adj) {
    if (points[pid].norm() <= 1.0 + kGeomEps) {
      parent.emplace(pid, pid);
      queue.push_back(pid);
    }
  }
  std::sort(queue.begin(), queue.end());
  for (std::size_t head = 0; head < queue.size(); ++head) {
    std::int32_t v = queue[head];
    if (points[v].norm() >= n - kGeomEps) {
      std::vector<std::int32_t> M;
      std::int32_t cur = v;
      while (parent[cur] != cur) {
        M.push_back(edge_id[key(cur, parent[cur])]);
        cur = parent[cur];
      }
      if (!M.empty()) return M;
      continue;  // an isolated source inside both collars, keep looking
    }
    for (std::int32_t nb : adj[v]) {
      if (parent.emplace(nb, v).second) queue.push_back(nb);
    }
  }
  return std::nullopt;
}

}  // namespace

CycleCrossing cycle_crossing(const std::vector<Point>& points,
                             const GridIndex& grid, int d, double n,
                             double w) {
  if (!(n > 2.0)) throw std::invalid_argument("cycle_crossing: need n > 2");
  if (!(w > 0.0 && w < n / 4.0)) {
    throw std::invalid_argument("cycle_crossing: need 0 < w < n/4");
  }
  CycleCrossing result;
  SimplexTable table = enumerate_d_simplices(points, grid, d);
  if (table.size() == 0) return result;
  AdjacencyGraph graph = face_adjacency(table);
  std::vector<std::int32_t> all(table.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    all[i] = static_cast<std::int32_t>(i);
  }
  TouchTester touch(points, table, n);
  CollarTester collar{points,
                      origin_point(static_cast<int>(points[0].size())), n, w};

  bool undetermined_somewhere = false;
  for (const auto& members : face_components(graph, all)) {
    bool has_inner = false, has_sphere = false;
    for (std::int32_t s : members) {
      if (!has_inner && touch.min_vertex_norm(s) <= 2.0 + kGeomEps) {
        has_inner = touch.inner(s);
      }
      if (!has_sphere && touch.max_vertex_norm(s) >= n - kGeomEps) {
        has_sphere = touch.sphere(s);
      }
      if (has_inner && has_sphere) break;
    }
    if (!has_inner || !has_sphere) continue;  // cannot host a witness

    if (d == 1) {
      auto M = path_witness_d1(table, points, members, n);
      if (M && verify_witness(table, graph, touch, collar, *M)) {
        std::sort(M->begin(), M->end());
        result.verdict = Tri::kOne;
        result.witness = std::move(*M);
        return result;
      }
    }

    // Relative-cycle space of the component: kernel of the boundary matrix
    // restricted to interior faces (faces not meeting the collar).
    SimplexTable sub;
    sub.d = table.d;
    for (std::int32_t s : members) {
      auto t = table.tuple(s);
      sub.flat.insert(sub.flat.end(), t.begin(), t.end());
    }
    FaceIndex faces = build_face_index(sub);
    std::vector<std::int32_t> interior_row(faces.face_count(), -1);
    std::int32_t rows = 0;
    for (std::size_t f = 0; f < faces.face_count(); ++f) {
      if (!collar.face_in_collar(faces.face(f))) interior_row[f] = rows++;
    }
    const std::size_t c = members.size();
    std::vector<BitVec> basis;  // kernel vectors over local columns
    {
      std::vector<std::pair<BitVec, BitVec>> pivots;  // (reduced col, comb)
      std::vector<std::int64_t> pivot_of_row(rows, -1);
      for (std::size_t j = 0; j < c; ++j) {
        BitVec v(static_cast<std::size_t>(rows));
        BitVec comb(c);
        comb.set(j);
        auto t = table.tuple(members[j]);
        std::vector<std::int32_t> face(table.d);
        for (int drop = 0; drop <= table.d; ++drop) {
          int k2 = 0;
          for (int k = 0; k <= table.d; ++k) {
            if (k != drop) face[k2++] = t[k];
          }
          std::int64_t fi = faces.find(face);
          if (fi >= 0 && interior_row[fi] >= 0) {
            v.set(static_cast<std::size_t>(interior_row[fi]));
          }
        }
        for (;;) {
          std::int64_t r = v.top();
          if (r < 0) {
            basis.push_back(comb);
            break;
          }
          std::int64_t p = pivot_of_row[r];
          if (p < 0) {
            pivot_of_row[r] = static_cast<std::int64_t>(pivots.size());
            pivots.emplace_back(std::move(v), std::move(comb));
            break;
          }
          v ^= pivots[p].first;
          comb ^= pivots[p].second;
        }
      }
    }
    if (basis.empty()) continue;  // trivial relative-cycle space

    // Necessary condition: some kernel vector must reach each end. The
    // union of basis supports bounds the support of every kernel vector.
    BitVec support(c);
    for (const BitVec& b : basis) {
      for (std::size_t k = 0; k < support.w.size(); ++k) {
        support.w[k] |= b.w[k];
      }
    }
    bool support_inner = false, support_sphere = false;
    for (std::int32_t local : support.set_bits()) {
      std::int32_t s = members[local];
      support_inner = support_inner || touch.inner(s);
      support_sphere = support_sphere || touch.sphere(s);
      if (support_inner && support_sphere) break;
    }
    if (!support_inner || !support_sphere) continue;

    // Greedy search: basis vectors, a capped set of pairwise sums, and the
    // total sum. Any face-connected piece of a relative cycle is again a
    // relative cycle, so pieces are tested individually.
    auto try_candidate = [&](const BitVec& cand) -> bool {
      std::vector<std::int32_t> ids;
      for (std::int32_t local : cand.set_bits()) ids.push_back(members[local]);
      for (auto& piece : pieces_of(graph, ids)) {
        bool pi = false, ps = false;
        for (std::int32_t s : piece) {
          pi = pi || touch.inner(s);
          ps = ps || touch.sphere(s);
        }
        if (pi && ps && verify_witness(table, graph, touch, collar, piece)) {
          result.verdict = Tri::kOne;
          result.witness = piece;
          return true;
        }
      }
      return false;
    };
    for (const BitVec& b : basis) {
      if (try_candidate(b)) return result;
    }
    const std::size_t cap = std::min<std::size_t>(basis.size(), 48);
    for (std::size_t i = 0; i < cap; ++i) {
      for (std::size_t j = i + 1; j < cap; ++j) {
        BitVec v = basis[i];
        v ^= basis[j];
        if (try_candidate(v)) return result;
      }
    }
    if (basis.size() > 1) {
      BitVec total(c);
      for (const BitVec& b : basis) total ^= b;
      if (try_candidate(total)) return result;
    }
    undetermined_somewhere = true;
  }
  result.verdict = undetermined_somewhere ? Tri::kUndetermined : Tri::kZero;
  return result;
}

CycleCrossing cycle_crossing(const Realization& real, int d, double n,
                             double w) {
  return cycle_crossing(real.points(), real.grid(), d, n, w);
}

double theta_reach(const std::vector<Point>& points, const GridIndex& grid,
                   int d, int o_id) {
  SimplexTable table = enumerate_d_simplices(points, grid, d);
  const std::size_t m = table.size();
  if (m == 0) return -std::numeric_limits<double>::infinity();
  UnionFind uf = face_union(table);
  std::vector<double> root_max(m, -std::numeric_limits<double>::infinity());
  std::vector<std::uint8_t> root_has_o(m, 0);
  for (std::size_t s = 0; s < m; ++s) {
    int r = uf.find(static_cast<int>(s));
    double mx = 0.0;
    bool has_o = false;
    for (std::int32_t pid : table.tuple(s)) {
      mx = std::max(mx, points[pid].norm());
      has_o = has_o || pid == o_id;
    }
    root_max[r] = std::max(root_max[r], mx);
    if (has_o) root_has_o[r] = 1;
  }
  double reach = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < m; ++r) {
    if (root_has_o[r]) reach = std::max(reach, root_max[r]);
  }
  return reach;
}

bool theta_indicator(const Realization& real, int d, double r) {
  if (!(r >= 1.0)) throw std::invalid_argument("theta_indicator: need r >= 1");
  const int D = real.dim();
  std::vector<Point> pts = real.points();
  pts.push_back(origin_point(D));
  GridIndex grid(pts);
  const int o_id = static_cast<int>(pts.size()) - 1;
  // A simplex meets the complement of the closed ball B_r iff its largest
  // vertex norm exceeds r.
  return theta_reach(pts, grid, d, o_id) > r;
}

ExperimentRecord theta_estimate(const ThetaSpec& spec) {
  if (spec.replicas == 0) {
    throw std::invalid_argument("theta_estimate: need replicas >= 1");
  }
  if (!(spec.lambda > 0.0)) {
    throw std::invalid_argument("theta_estimate: need lambda > 0");
  }
  if (!(spec.r >= 1.0)) {
    throw std::invalid_argument("theta_estimate: need r >= 1");
  }
  Region window = Region::ball(origin_point(spec.D), spec.r + 2.0);
  ExperimentRecord rec;
  rec.replicas = spec.replicas;
  rec.indicators.reserve(spec.replicas);
  rec.n_points.reserve(spec.replicas);
  for (std::uint64_t rep = 0; rep < spec.replicas; ++rep) {
    Realization real =
        sample_poisson(window, spec.lambda, spec.root_seed, rep);
    bool hit = theta_indicator(real, spec.d, spec.r);
    rec.indicators.push_back(hit ? 1 : 0);
    rec.n_points.push_back(static_cast<std::int32_t>(real.points().size()));
    rec.successes += hit ? 1 : 0;
  }
  rec.estimate =
      static_cast<double>(rec.successes) / static_cast<double>(rec.replicas);
  rec.ci = wilson_interval(rec.successes, rec.replicas);
  return rec;
}

DecayFit decay_fit(const std::vector<double>& rs,
                   const std::vector<double>& thetas) {
  if (rs.size() != thetas.size()) {
    throw std::invalid_argument("decay_fit: length mismatch");
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    if (thetas[i] > 0.0) {
      xs.push_back(rs[i]);
      ys.push_back(std::log(thetas[i]));
    }
  }
  if (xs.size() < 2) {
    throw std::invalid_argument("decay_fit: fewer than 2 positive estimates");
  }
  LinearFit fit = linear_fit(xs, ys);
  return DecayFit{fit.slope, fit.intercept, fit.r2, xs.size()};
}

}  // namespace simperc
