#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace spherepack {

using Tet = std::array<int, 4>;
using Edge = std::array<int, 2>;
using Face = std::array<int, 3>;

/// Closed simplicial 3-complex given by its tetrahedra. Edges and faces are
/// derived, stored as sorted index tuples in lexicographic order. Immutable
/// after construction.
///
/// Construction only checks per-tet well-formedness (indices in range, four
/// distinct vertices). Global manifold properties are reported by validate().
class Triangulation {
 public:
  Triangulation(int vertex_count, std::vector<Tet> tets);

  int vertex_count() const noexcept { return vertex_count_; }
  const std::vector<Tet>& tets() const noexcept { return tets_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<Face>& faces() const noexcept { return faces_; }

  /// Tets containing vertex v, ascending.
  const std::vector<std::size_t>& tets_of_vertex(int v) const { return vertex_tets_.at(v); }
  /// Tets containing edge e (index into edges()), ascending.
  const std::vector<std::size_t>& tets_of_edge(std::size_t e) const { return edge_tets_.at(e); }
  /// Number of tets containing face f (index into faces()).
  int face_multiplicity(std::size_t f) const { return face_multiplicity_.at(f); }

  /// Index of edge {a,b} in edges(), or -1 when a and b are not adjacent.
  long edge_index(int a, int b) const;
  bool adjacent(int a, int b) const { return edge_index(a, b) >= 0; }

  bool operator==(const Triangulation& other) const {
    return vertex_count_ == other.vertex_count_ && tets_ == other.tets_;
  }

 private:
  int vertex_count_;
  std::vector<Tet> tets_;
  std::vector<Edge> edges_;
  std::vector<Face> faces_;
  std::vector<std::vector<std::size_t>> vertex_tets_;
  std::vector<std::vector<std::size_t>> edge_tets_;
  std::vector<int> face_multiplicity_;
  std::map<Edge, std::size_t> edge_lookup_;
};

struct Violation {
  enum class Kind { FaceMultiplicity, Disconnected, IsolatedVertex };
  Kind kind;
  std::string message;
};

struct ValidationReport {
  int vertex_count = 0;
  std::size_t edge_count = 0;
  std::size_t face_count = 0;
  std::size_t tet_count = 0;
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

/// Parses `{"vertices": N, "tets": [[a,b,c,d], ...]}`. Throws ParseError on a
/// malformed document, an out-of-range index or a repeated vertex in a tet.
Triangulation parse_triangulation(std::string_view text);
std::string serialize_triangulation(const Triangulation& t);

/// Closed-manifold check limited to face multiplicity 2 and connectivity of the
/// 1-skeleton. Link conditions are not checked.
ValidationReport validate(const Triangulation& t);

/// "pentachoron" (boundary of the 4-simplex) or "cross16" (boundary of the
/// 4-dimensional cross-polytope, vertex 2i = +e_{i+1}, 2i+1 = -e_{i+1}).
Triangulation generate_builtin(std::string_view name);

}  // namespace spherepack
