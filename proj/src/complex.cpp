#include "spherepack/complex.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "spherepack/errors.hpp"

namespace spherepack {

Triangulation::Triangulation(int vertex_count, std::vector<Tet> tets)
    : vertex_count_(vertex_count), tets_(std::move(tets)) {
  if (vertex_count_ <= 0) throw std::invalid_argument("vertex count must be positive");

  std::set<Edge> edge_set;
  std::map<Face, int> face_count;
  vertex_tets_.assign(vertex_count_, {});

  for (std::size_t t = 0; t < tets_.size(); ++t) {
    const Tet& tet = tets_[t];
    for (int v : tet) {
      if (v < 0 || v >= vertex_count_) {
        throw std::invalid_argument("tet " + std::to_string(t) + ": vertex index " +
                                    std::to_string(v) + " out of range");
      }
    }
    Tet sorted = tet;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("tet " + std::to_string(t) + ": duplicate vertex");
    }
    for (int v : tet) vertex_tets_[v].push_back(t);
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) edge_set.insert({sorted[a], sorted[b]});
    for (int skip = 0; skip < 4; ++skip) {
      Face f{};
      int k = 0;
      for (int a = 0; a < 4; ++a)
        if (a != skip) f[k++] = sorted[a];
      ++face_count[f];
    }
  }

  edges_.assign(edge_set.begin(), edge_set.end());
  for (std::size_t e = 0; e < edges_.size(); ++e) edge_lookup_.emplace(edges_[e], e);
  faces_.reserve(face_count.size());
  for (const auto& [f, n] : face_count) {
    faces_.push_back(f);
    face_multiplicity_.push_back(n);
  }

  edge_tets_.assign(edges_.size(), {});
  for (std::size_t t = 0; t < tets_.size(); ++t) {
    const Tet& tet = tets_[t];
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        edge_tets_[static_cast<std::size_t>(edge_index(tet[a], tet[b]))].push_back(t);
  }
}

long Triangulation::edge_index(int a, int b) const {
  if (a > b) std::swap(a, b);
  auto it = edge_lookup_.find(Edge{a, b});
  return it == edge_lookup_.end() ? -1 : static_cast<long>(it->second);
}

Triangulation parse_triangulation(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("triangulation: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("vertices") || !doc.contains("tets"))
    throw ParseError("triangulation: expected object with \"vertices\" and \"tets\"");
  const auto& nv = doc["vertices"];
  if (!nv.is_number_integer() || nv.get<long>() <= 0)
    throw ParseError("triangulation: \"vertices\" must be a positive integer");
  const auto& jt = doc["tets"];
  if (!jt.is_array()) throw ParseError("triangulation: \"tets\" must be an array");

  std::vector<Tet> tets;
  tets.reserve(jt.size());
  for (const auto& row : jt) {
    if (!row.is_array() || row.size() != 4)
      throw ParseError("triangulation: each tet must be an array of 4 integers");
    Tet tet{};
    for (int k = 0; k < 4; ++k) {
      if (!row[k].is_number_integer())
        throw ParseError("triangulation: tet entries must be integers");
      tet[k] = row[k].get<int>();
    }
    tets.push_back(tet);
  }
  try {
    return Triangulation(nv.get<int>(), std::move(tets));
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("triangulation: ") + e.what());
  }
}

std::string serialize_triangulation(const Triangulation& t) {
  nlohmann::json doc;
  doc["vertices"] = t.vertex_count();
  doc["tets"] = nlohmann::json::array();
  for (const Tet& tet : t.tets()) doc["tets"].push_back(tet);
  return doc.dump();
}

ValidationReport validate(const Triangulation& t) {
  ValidationReport rep;
  rep.vertex_count = t.vertex_count();
  rep.edge_count = t.edges().size();
  rep.face_count = t.faces().size();
  rep.tet_count = t.tets().size();

  for (std::size_t f = 0; f < t.faces().size(); ++f) {
    const int m = t.face_multiplicity(f);
    if (m != 2) {
      const Face& face = t.faces()[f];
      std::ostringstream os;
      os << "face {" << face[0] << "," << face[1] << "," << face[2] << "} lies in " << m
         << " tet" << (m == 1 ? "" : "s") << " (expected 2)";
      rep.violations.push_back({Violation::Kind::FaceMultiplicity, os.str()});
    }
  }

  // Connectivity of the 1-skeleton via union-find.
  std::vector<int> parent(t.vertex_count());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Edge& e : t.edges()) parent[find(e[0])] = find(e[1]);

  for (int v = 0; v < t.vertex_count(); ++v) {
    if (t.tets_of_vertex(v).empty()) {
      rep.violations.push_back(
          {Violation::Kind::IsolatedVertex, "vertex " + std::to_string(v) + " lies in no tet"});
    }
  }
  std::set<int> roots;
  for (int v = 0; v < t.vertex_count(); ++v) roots.insert(find(v));
  if (roots.size() > 1) {
    rep.violations.push_back({Violation::Kind::Disconnected,
                              "1-skeleton has " + std::to_string(roots.size()) + " components"});
  }
  return rep;
}

Triangulation generate_builtin(std::string_view name) {
  std::vector<Tet> tets;
  if (name == "pentachoron") {
    for (int skip = 4; skip >= 0; --skip) {
      Tet tet{};
      int k = 0;
      for (int v = 0; v < 5; ++v)
        if (v != skip) tet[k++] = v;
      tets.push_back(tet);
    }
    return Triangulation(5, std::move(tets));
  }
  if (name == "cross16") {
    for (int signs = 0; signs < 16; ++signs) {
      Tet tet{};
      for (int axis = 0; axis < 4; ++axis) tet[axis] = 2 * axis + ((signs >> (3 - axis)) & 1);
      tets.push_back(tet);
    }
    return Triangulation(8, std::move(tets));
  }
  throw std::invalid_argument("unknown builtin triangulation: " + std::string(name));
}

}  // namespace spherepack
