#pragma once

// Combinatorial layer: d-simplex tables over a realization, face and
// proximity adjacency, mod-2 boundaries and face-connected components.
//
// A d-simplex is stored as its sorted (d+1)-tuple of point ids; tables are
// flat arrays in lexicographic tuple order, so equality of tables is
// equality of vectors. Geometric predicates are delegated to the kernels
// in geometry.hpp; everything in this header is exact integer work.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "simperc/point_process.hpp"

namespace simperc {

struct SimplexTable {
  int d = 1;
  std::vector<std::int32_t> flat;  // size() * (d+1) ids, tuples sorted, lex order

  std::size_t size() const { return flat.size() / (d + 1); }
  std::span<const std::int32_t> tuple(std::size_t i) const {
    return {flat.data() + i * (d + 1), static_cast<std::size_t>(d + 1)};
  }
};

// All d-simplices of the realization: (d+1)-subsets of distinct points with
// pairwise distances <= 1 + kGeomEps. Ordered clique extension over
// ascending ids; output is lexicographically sorted by construction.
SimplexTable enumerate_d_simplices(const std::vector<Point>& points,
                                   const GridIndex& grid, int d);
SimplexTable enumerate_d_simplices(const Realization& real, int d);

// Sorted face tuples (arity = d) with their incident simplex lists.
struct FaceIndex {
  int arity = 1;
  std::vector<std::int32_t> face_flat;
  std::vector<std::int32_t> incident_offsets;  // face_count + 1
  std::vector<std::int32_t> incident_flat;

  std::size_t face_count() const {
    return incident_offsets.empty() ? 0 : incident_offsets.size() - 1;
  }
  std::span<const std::int32_t> face(std::size_t i) const {
    return {face_flat.data() + i * arity, static_cast<std::size_t>(arity)};
  }
  std::span<const std::int32_t> incident(std::size_t i) const {
    return {incident_flat.data() + incident_offsets[i],
            static_cast<std::size_t>(incident_offsets[i + 1] -
                                     incident_offsets[i])};
  }
  // Index of a sorted face tuple, or -1.
  std::int64_t find(std::span<const std::int32_t> face) const;
};

FaceIndex build_face_index(const SimplexTable& table);

enum class AdjacencyMode { kFace, kStar };

struct AdjacencyGraph {
  AdjacencyMode mode = AdjacencyMode::kFace;
  std::size_t n = 0;  // number of simplices in the underlying table
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;  // i < j, sorted
  std::vector<std::int32_t> adj_offsets;
  std::vector<std::int32_t> adj_flat;

  std::span<const std::int32_t> neighbors(std::size_t i) const {
    return {adj_flat.data() + adj_offsets[i],
            static_cast<std::size_t>(adj_offsets[i + 1] - adj_offsets[i])};
  }
};

// Face adjacency: tuples share exactly d ids, i.e. a common (d-1)-face.
AdjacencyGraph face_adjacency(const SimplexTable& table);

// Proximity adjacency: hull distance <= r0 + kGeomEps. Candidate pairs are
// pruned through the point grid (hull distance r implies some vertex pair
// within r + 2), then decided by the exact kernel.
AdjacencyGraph star_adjacency(const SimplexTable& table,
                              const std::vector<Point>& points,
                              const GridIndex& grid, double r0);

// Simplex ids incident to each point id, CSR layout.
struct VertexIncidence {
  std::vector<std::int32_t> offsets;
  std::vector<std::int32_t> flat;
  std::span<const std::int32_t> incident(std::size_t point_id) const {
    return {flat.data() + offsets[point_id],
            static_cast<std::size_t>(offsets[point_id + 1] -
                                     offsets[point_id])};
  }
};

VertexIncidence vertex_incidence(const SimplexTable& table, int n_points);

struct FaceSet {
  int arity = 1;
  std::vector<std::int32_t> flat;
  std::size_t size() const {
    return arity == 0 ? 0 : flat.size() / arity;
  }
  std::span<const std::int32_t> tuple(std::size_t i) const {
    return {flat.data() + i * arity, static_cast<std::size_t>(arity)};
  }
};

// Mod-2 boundary of a simplex family: the (d-1)-faces with odd incidence
// count in the family. Linear over symmetric difference by construction.
FaceSet boundary_mod2(const SimplexTable& table,
                      std::span<const std::int32_t> subset);

// A family is a d-cycle when its mod-2 boundary vanishes.
bool is_cycle(const SimplexTable& table,
              std::span<const std::int32_t> subset);

// Connected components of a simplex subset in the given adjacency graph.
// Components and their members are sorted ascending.
std::vector<std::vector<std::int32_t>> face_components(
    const AdjacencyGraph& graph, std::span<const std::int32_t> subset);

// Plain-text serialization of the tuple list: header "simperc-simplices 1",
// then "d m", then one sorted tuple per line.
void write_simplices_text(std::ostream& os, const SimplexTable& table);
SimplexTable read_simplices_text(std::istream& is);

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), rank_(n, 0) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = static_cast<int>(i);
  }
  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
};

}  // namespace simperc
