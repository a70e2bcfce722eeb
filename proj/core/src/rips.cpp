#include "simperc/rips.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace simperc {

namespace {

void extend_clique(const std::vector<std::vector<std::int32_t>>& nbr_up,
                   std::vector<std::int32_t>& tuple,
                   const std::vector<std::int32_t>& cand, int want,
                   std::vector<std::int32_t>& out) {
  if (static_cast<int>(tuple.size()) == want) {
    out.insert(out.end(), tuple.begin(), tuple.end());
    return;
  }
  for (std::size_t ci = 0; ci < cand.size(); ++ci) {
    std::int32_t v = cand[ci];
    // Candidates for the extended tuple: remaining cand entries that are
    // also up-neighbors of v (two-pointer intersection, both sorted).
    std::vector<std::int32_t> next;
    const auto& nv = nbr_up[v];
    std::size_t a = ci + 1, b = 0;
    while (a < cand.size() && b < nv.size()) {
      if (cand[a] < nv[b]) {
        ++a;
      } else if (nv[b] < cand[a]) {
        ++b;
      } else {
        next.push_back(cand[a]);
        ++a;
        ++b;
      }
    }
    tuple.push_back(v);
    extend_clique(nbr_up, tuple, next, want, out);
    tuple.pop_back();
  }
}

void build_csr(AdjacencyGraph& g) {
  g.adj_offsets.assign(g.n + 1, 0);
  for (auto [a, b] : g.edges) {
    ++g.adj_offsets[a + 1];
    ++g.adj_offsets[b + 1];
  }
  for (std::size_t i = 0; i < g.n; ++i) g.adj_offsets[i + 1] += g.adj_offsets[i];
  g.adj_flat.resize(2 * g.edges.size());
  std::vector<std::int32_t> cursor(g.adj_offsets.begin(),
                                   g.adj_offsets.end() - 1);
  for (auto [a, b] : g.edges) {
    g.adj_flat[cursor[a]++] = b;
    g.adj_flat[cursor[b]++] = a;
  }
  for (std::size_t i = 0; i < g.n; ++i) {
    std::sort(g.adj_flat.begin() + g.adj_offsets[i],
              g.adj_flat.begin() + g.adj_offsets[i + 1]);
  }
}

}  // namespace

SimplexTable enumerate_d_simplices(const std::vector<Point>& points,
                                   const GridIndex& grid, int d) {
  if (d < 1) throw std::invalid_argument("enumerate_d_simplices: d < 1");
  const int n = static_cast<int>(points.size());
  SimplexTable table;
  table.d = d;
  // Up-neighbor lists: j > i with |p_i - p_j| <= 1 + eps. Cliques in this
  // DAG, listed in ascending-id order, are exactly the sorted tuples.
  std::vector<std::vector<std::int32_t>> nbr_up(n);
  for (int i = 0; i < n; ++i) {
    for (int j : grid.query_ball(points, points[i], 1.0)) {
      if (j > i) nbr_up[i].push_back(j);
    }
  }
  std::vector<std::int32_t> tuple;
  tuple.reserve(d + 1);
  for (int i = 0; i < n; ++i) {
    tuple.push_back(i);
    extend_clique(nbr_up, tuple, nbr_up[i], d + 1, table.flat);
    tuple.pop_back();
  }
  return table;
}

SimplexTable enumerate_d_simplices(const Realization& real, int d) {
  return enumerate_d_simplices(real.points(), real.grid(), d);
}

std::int64_t FaceIndex::find(std::span<const std::int32_t> f) const {
  if (static_cast<int>(f.size()) != arity) return -1;
  std::int64_t lo = 0, hi = static_cast<std::int64_t>(face_count()) - 1;
  while (lo <= hi) {
    std::int64_t mid = (lo + hi) / 2;
    auto cur = face(mid);
    int cmp = 0;
    for (int k = 0; k < arity; ++k) {
      if (cur[k] != f[k]) {
        cmp = cur[k] < f[k] ? -1 : 1;
        break;
      }
    }
    if (cmp == 0) return mid;
    if (cmp < 0) {
      lo = mid + 1;
    } else {
      hi = mid - 1;
    }
  }
  return -1;
}

FaceIndex build_face_index(const SimplexTable& table) {
  const int arity = table.d;  // faces are d-tuples of a (d+1)-tuple
  const std::size_t m = table.size();
  // Record (face tuple, simplex id) pairs, then sort and group.
  std::vector<std::int32_t> rec;  // (arity + 1) stride
  rec.reserve(m * (table.d + 1) * (arity + 1));
  for (std::size_t s = 0; s < m; ++s) {
    auto t = table.tuple(s);
    for (int drop = 0; drop <= table.d; ++drop) {
      for (int k = 0; k <= table.d; ++k) {
        if (k != drop) rec.push_back(t[k]);
      }
      rec.push_back(static_cast<std::int32_t>(s));
    }
  }
  const std::size_t stride = arity + 1;
  const std::size_t cnt = rec.empty() ? 0 : rec.size() / stride;
  std::vector<std::int32_t> order(cnt);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    const std::int32_t* pa = rec.data() + a * stride;
    const std::int32_t* pb = rec.data() + b * stride;
    return std::lexicographical_compare(pa, pa + stride, pb, pb + stride);
  });
  FaceIndex index;
  index.arity = arity;
  index.incident_offsets.push_back(0);
  std::size_t i = 0;
  while (i < cnt) {
    const std::int32_t* cur = rec.data() + order[i] * stride;
    index.face_flat.insert(index.face_flat.end(), cur, cur + arity);
    std::size_t j = i;
    while (j < cnt &&
           std::equal(cur, cur + arity, rec.data() + order[j] * stride)) {
      index.incident_flat.push_back(rec[order[j] * stride + arity]);
      ++j;
    }
    index.incident_offsets.push_back(
        static_cast<std::int32_t>(index.incident_flat.size()));
    i = j;
  }
  return index;
}

AdjacencyGraph face_adjacency(const SimplexTable& table) {
  AdjacencyGraph g;
  g.mode = AdjacencyMode::kFace;
  g.n = table.size();
  FaceIndex index = build_face_index(table);
  for (std::size_t f = 0; f < index.face_count(); ++f) {
    auto inc = index.incident(f);
    for (std::size_t a = 0; a < inc.size(); ++a) {
      for (std::size_t b = a + 1; b < inc.size(); ++b) {
        g.edges.emplace_back(std::min(inc[a], inc[b]),
                             std::max(inc[a], inc[b]));
      }
    }
  }
  // Two distinct simplices share at most one (d-1)-face, so no duplicates.
  std::sort(g.edges.begin(), g.edges.end());
  build_csr(g);
  return g;
}

AdjacencyGraph star_adjacency(const SimplexTable& table,
                              const std::vector<Point>& points,
                              const GridIndex& grid, double r0) {
  if (!(r0 > 0.0)) throw std::invalid_argument("star_adjacency: r0 <= 0");
  AdjacencyGraph g;
  g.mode = AdjacencyMode::kStar;
  g.n = table.size();
  VertexIncidence inc = vertex_incidence(
      table, static_cast<int>(points.size()));
  std::vector<Point> va, vb;
  std::vector<std::int32_t> cand;
  std::vector<std::int64_t> last_seen(table.size(), -1);
  for (std::size_t s = 0; s < table.size(); ++s) {
    auto t = table.tuple(s);
    cand.clear();
    for (std::int32_t pid : t) {
      for (int nb : grid.query_ball(points, points[pid], r0 + 2.0)) {
        for (std::int32_t other : inc.incident(nb)) {
          if (other > static_cast<std::int32_t>(s) &&
              last_seen[other] != static_cast<std::int64_t>(s)) {
            last_seen[other] = static_cast<std::int64_t>(s);
            cand.push_back(other);
          }
        }
      }
    }
    std::sort(cand.begin(), cand.end());
    va.assign(t.size(), Point());
    for (std::size_t k = 0; k < t.size(); ++k) va[k] = points[t[k]];
    for (std::int32_t other : cand) {
      auto u = table.tuple(other);
      vb.assign(u.size(), Point());
      for (std::size_t k = 0; k < u.size(); ++k) vb[k] = points[u[k]];
      if (simplex_within_distance(va, vb, r0)) {
        g.edges.emplace_back(static_cast<std::int32_t>(s), other);
      }
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  build_csr(g);
  return g;
}

VertexIncidence vertex_incidence(const SimplexTable& table, int n_points) {
  VertexIncidence inc;
  inc.offsets.assign(n_points + 1, 0);
  const std::size_t m = table.size();
  for (std::size_t s = 0; s < m; ++s) {
    for (std::int32_t pid : table.tuple(s)) ++inc.offsets[pid + 1];
  }
  for (int i = 0; i < n_points; ++i) inc.offsets[i + 1] += inc.offsets[i];
  inc.flat.resize(m * (table.d + 1));
  std::vector<std::int32_t> cursor(inc.offsets.begin(),
                                   inc.offsets.end() - 1);
  for (std::size_t s = 0; s < m; ++s) {
    for (std::int32_t pid : table.tuple(s)) {
      inc.flat[cursor[pid]++] = static_cast<std::int32_t>(s);
    }
  }
  return inc;
}

FaceSet boundary_mod2(const SimplexTable& table,
                      std::span<const std::int32_t> subset) {
  const int arity = table.d;
  const std::size_t stride = arity;
  std::vector<std::int32_t> faces;
  faces.reserve(subset.size() * (table.d + 1) * stride);
  for (std::int32_t s : subset) {
    auto t = table.tuple(s);
    for (int drop = 0; drop <= table.d; ++drop) {
      for (int k = 0; k <= table.d; ++k) {
        if (k != drop) faces.push_back(t[k]);
      }
    }
  }
  const std::size_t cnt = stride ? faces.size() / stride : 0;
  std::vector<std::int32_t> order(cnt);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    const std::int32_t* pa = faces.data() + a * stride;
    const std::int32_t* pb = faces.data() + b * stride;
    return std::lexicographical_compare(pa, pa + stride, pb, pb + stride);
  });
  FaceSet out;
  out.arity = arity;
  std::size_t i = 0;
  while (i < cnt) {
    const std::int32_t* cur = faces.data() + order[i] * stride;
    std::size_t j = i;
    while (j < cnt &&
           std::equal(cur, cur + stride, faces.data() + order[j] * stride)) {
      ++j;
    }
    if ((j - i) % 2 == 1) out.flat.insert(out.flat.end(), cur, cur + stride);
    i = j;
  }
  return out;
}

bool is_cycle(const SimplexTable& table,
              std::span<const std::int32_t> subset) {
  return boundary_mod2(table, subset).flat.empty();
}

std::vector<std::vector<std::int32_t>> face_components(
    const AdjacencyGraph& graph, std::span<const std::int32_t> subset) {
  std::vector<std::int32_t> members(subset.begin(), subset.end());
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  std::vector<char> in_subset(graph.n, 0);
  for (std::int32_t s : members) in_subset[s] = 1;
  UnionFind uf(graph.n);
  for (std::int32_t s : members) {
    for (std::int32_t nb : graph.neighbors(s)) {
      if (in_subset[nb]) uf.unite(s, nb);
    }
  }
  std::vector<std::vector<std::int32_t>> comps;
  std::vector<std::int64_t> root_to_comp(graph.n, -1);
  for (std::int32_t s : members) {
    int r = uf.find(s);
    if (root_to_comp[r] < 0) {
      root_to_comp[r] = static_cast<std::int64_t>(comps.size());
      comps.emplace_back();
    }
    comps[root_to_comp[r]].push_back(s);
  }
  return comps;
}

void write_simplices_text(std::ostream& os, const SimplexTable& table) {
  os << "simperc-simplices 1\n" << table.d << ' ' << table.size() << '\n';
  for (std::size_t i = 0; i < table.size(); ++i) {
    auto t = table.tuple(i);
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (k) os << ' ';
      os << t[k];
    }
    os << '\n';
  }
}

SimplexTable read_simplices_text(std::istream& is) {
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "simperc-simplices" || version != 1) {
    throw std::runtime_error("read_simplices_text: bad header");
  }
  SimplexTable table;
  std::size_t m = 0;
  is >> table.d >> m;
  table.flat.reserve(m * (table.d + 1));
  for (std::size_t i = 0; i < m * (table.d + 1); ++i) {
    std::int32_t v;
    if (!(is >> v)) {
      throw std::runtime_error("read_simplices_text: truncated file");
    }
    table.flat.push_back(v);
  }
  return table;
}

}  // namespace simperc
