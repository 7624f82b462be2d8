#ifndef FIBERSTRAIN_MESH_HPP
#define FIBERSTRAIN_MESH_HPP

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fiberstrain/error.hpp"
#include "fiberstrain/tensor.hpp"

namespace fiberstrain {

using Tet = std::array<int, 4>;

inline double signed_tet_volume(const Vec3& p0, const Vec3& p1, const Vec3& p2, const Vec3& p3) {
  Mat3 m;
  m.col(0) = p1 - p0;
  m.col(1) = p2 - p0;
  m.col(2) = p3 - p0;
  return m.determinant() / 6.0;
}

// Linear tetrahedral mesh with per-tet region tags and named vertex sets.
// Immutable after construction; tets are stored with positive orientation.
class TetMesh {
 public:
  TetMesh() = default;

  TetMesh(std::vector<Vec3> vertices, std::vector<Tet> tets, std::vector<int> regions = {},
          std::map<std::string, std::vector<int>> vertex_sets = {})
      : vertices_(std::move(vertices)),
        tets_(std::move(tets)),
        regions_(std::move(regions)),
        vertex_sets_(std::move(vertex_sets)) {
    if (regions_.empty()) regions_.assign(tets_.size(), 1);
    if (regions_.size() != tets_.size()) {
      throw ValidationError("region tag count does not match tet count");
    }
    validate_and_orient();
    for (auto& [name, set] : vertex_sets_) {
      std::sort(set.begin(), set.end());
      set.erase(std::unique(set.begin(), set.end()), set.end());
      for (int v : set) check_vertex(v, "vertex set '" + name + "'");
    }
    build_vertex_to_tets();
  }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Tet>& tets() const { return tets_; }
  const std::vector<int>& regions() const { return regions_; }
  const std::map<std::string, std::vector<int>>& vertex_sets() const { return vertex_sets_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_tets() const { return tets_.size(); }
  const Vec3& vertex(int v) const { return vertices_[static_cast<std::size_t>(v)]; }

  double volume(std::size_t t) const {
    const Tet& k = tets_[t];
    return signed_tet_volume(vertex(k[0]), vertex(k[1]), vertex(k[2]), vertex(k[3]));
  }

  bool has_vertex_set(const std::string& name) const { return vertex_sets_.count(name) != 0; }

  const std::vector<int>& vertex_set(const std::string& name) const {
    auto it = vertex_sets_.find(name);
    if (it == vertex_sets_.end()) throw ValidationError("unknown vertex set '" + name + "'");
    return it->second;
  }

  std::span<const int> tets_of_vertex(int v) const {
    const auto b = static_cast<std::size_t>(vertex_tet_offsets_[static_cast<std::size_t>(v)]);
    const auto e = static_cast<std::size_t>(vertex_tet_offsets_[static_cast<std::size_t>(v) + 1]);
    return std::span<const int>(vertex_tet_list_).subspan(b, e - b);
  }

  TetMesh with_regions(std::vector<int> regions) const {
    return TetMesh(vertices_, tets_, std::move(regions), vertex_sets_);
  }

  TetMesh with_vertex_set(const std::string& name, std::vector<int> set) const {
    auto sets = vertex_sets_;
    sets[name] = std::move(set);
    return TetMesh(vertices_, tets_, regions_, std::move(sets));
  }

  double bounding_box_diagonal() const {
    if (vertices_.empty()) return 0.0;
    Vec3 lo = vertices_.front(), hi = vertices_.front();
    for (const auto& p : vertices_) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
  }

 private:
  void check_vertex(int v, const std::string& where) const {
    if (v < 0 || static_cast<std::size_t>(v) >= vertices_.size()) {
      throw ValidationError(where + ": vertex index " + std::to_string(v) + " out of range");
    }
  }

  void validate_and_orient() {
    const double diag = bounding_box_diagonal();
    const double min_six_volume = 1e-12 * diag * diag * diag;
    std::set<Tet> seen;
    for (std::size_t t = 0; t < tets_.size(); ++t) {
      Tet& k = tets_[t];
      for (int v : k) check_vertex(v, "tet " + std::to_string(t));
      double vol = volume(t);
      if (vol < 0.0) {
        std::swap(k[2], k[3]);
        vol = -vol;
      }
      if (!(6.0 * vol > min_six_volume)) {
        throw ValidationError("tet " + std::to_string(t) + " is degenerate (volume " +
                              std::to_string(vol) + ")");
      }
      Tet key = k;
      std::sort(key.begin(), key.end());
      if (!seen.insert(key).second) {
        throw ValidationError("duplicate tet " + std::to_string(t));
      }
    }
  }

  void build_vertex_to_tets() {
    vertex_tet_offsets_.assign(vertices_.size() + 1, 0);
    for (const Tet& k : tets_)
      for (int v : k) ++vertex_tet_offsets_[static_cast<std::size_t>(v) + 1];
    for (std::size_t i = 0; i < vertices_.size(); ++i)
      vertex_tet_offsets_[i + 1] += vertex_tet_offsets_[i];
    vertex_tet_list_.resize(static_cast<std::size_t>(vertex_tet_offsets_.back()));
    std::vector<int> fill(vertex_tet_offsets_.begin(), vertex_tet_offsets_.end() - 1);
    for (std::size_t t = 0; t < tets_.size(); ++t)
      for (int v : tets_[t])
        vertex_tet_list_[static_cast<std::size_t>(fill[static_cast<std::size_t>(v)]++)] =
            static_cast<int>(t);
  }

  std::vector<Vec3> vertices_;
  std::vector<Tet> tets_;
  std::vector<int> regions_;
  std::map<std::string, std::vector<int>> vertex_sets_;
  std::vector<int> vertex_tet_offsets_;
  std::vector<int> vertex_tet_list_;
};

// Tets containing both a and b. Throws when (a, b) is not a mesh edge.
inline std::vector<int> edge_incident_tets(const TetMesh& mesh, int a, int b) {
  const auto n = static_cast<int>(mesh.num_vertices());
  if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
    throw ValidationError("(" + std::to_string(a) + ", " + std::to_string(b) +
                          ") is not a mesh edge");
  }
  std::vector<int> out;
  for (int t : mesh.tets_of_vertex(a)) {
    const Tet& k = mesh.tets()[static_cast<std::size_t>(t)];
    if (std::find(k.begin(), k.end(), b) != k.end()) out.push_back(t);
  }
  if (out.empty()) {
    throw ValidationError("(" + std::to_string(a) + ", " + std::to_string(b) +
                          ") is not a mesh edge");
  }
  return out;
}

// Ordered chain of mesh edges approximating the fiber curve.
struct FiberPath {
  std::vector<int> vertices;
  std::vector<double> edge_lengths;
  std::vector<double> arc_length;  // cumulative, arc_length[0] = 0

  std::size_t num_edges() const { return edge_lengths.size(); }
  double length() const { return arc_length.empty() ? 0.0 : arc_length.back(); }
};

inline FiberPath validate_fiber_path(const TetMesh& mesh, const std::vector<int>& chain) {
  if (chain.size() < 2) throw ValidationError("fiber chain needs at least two vertices");
  std::set<int> seen;
  for (int v : chain) {
    if (v < 0 || static_cast<std::size_t>(v) >= mesh.num_vertices()) {
      throw ValidationError("fiber chain vertex " + std::to_string(v) + " out of range");
    }
    if (!seen.insert(v).second) {
      throw ValidationError("fiber chain repeats vertex " + std::to_string(v));
    }
  }
  FiberPath path;
  path.vertices = chain;
  path.arc_length.push_back(0.0);
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    edge_incident_tets(mesh, chain[i], chain[i + 1]);
    const double len = (mesh.vertex(chain[i + 1]) - mesh.vertex(chain[i])).norm();
    path.edge_lengths.push_back(len);
    path.arc_length.push_back(path.arc_length.back() + len);
  }
  return path;
}

struct BoundaryCondition {
  std::string vertex_set;
  std::array<bool, 3> mask{true, true, true};
  Vec3 value = Vec3::Zero();
};

inline void validate_boundary_condition(const TetMesh& mesh, const BoundaryCondition& bc) {
  if (!(bc.mask[0] || bc.mask[1] || bc.mask[2])) {
    throw ValidationError("boundary condition on '" + bc.vertex_set + "' constrains no component");
  }
  mesh.vertex_set(bc.vertex_set);
}

// Structured box grid: vertex (i, j, k) has index i + (nx+1) (j + (ny+1) k).
struct BoxGrid {
  int nx = 1, ny = 1, nz = 1;
  double lx = 1.0, ly = 1.0, lz = 1.0;

  int vertex(int i, int j, int k) const { return i + (nx + 1) * (j + (ny + 1) * k); }

  // Grid line parallel to `axis` (0, 1, 2) through the given indices of the
  // two remaining axes (in increasing axis order).
  std::vector<int> line(int axis, int first, int second) const {
    if (axis < 0 || axis > 2) throw ArgumentError("grid line axis must be 0, 1 or 2");
    constexpr std::array<std::array<std::size_t, 2>, 3> kOthers{{{1, 2}, {0, 2}, {0, 1}}};
    const auto a = static_cast<std::size_t>(axis);
    const std::array<int, 3> counts{nx, ny, nz};
    std::vector<int> out;
    for (int s = 0; s <= counts[a]; ++s) {
      std::array<int, 3> ijk{};
      ijk[a] = s;
      ijk[kOthers[a][0]] = first;
      ijk[kOthers[a][1]] = second;
      out.push_back(vertex(ijk[0], ijk[1], ijk[2]));
    }
    return out;
  }
};

// Each grid cell is split into the 6 tets of the Kuhn triangulation (all
// sharing the cell diagonal), so every axis-parallel grid line is a chain of
// mesh edges. Vertex sets "xmin", "xmax", "ymin", "ymax", "zmin", "zmax".
inline TetMesh build_box_mesh(const BoxGrid& g) {
  if (g.nx < 1 || g.ny < 1 || g.nz < 1) throw ArgumentError("box mesh counts must be >= 1");
  if (!(g.lx > 0.0 && g.ly > 0.0 && g.lz > 0.0)) {
    throw ArgumentError("box mesh lengths must be positive");
  }
  std::vector<Vec3> verts;
  std::map<std::string, std::vector<int>> sets;
  for (int k = 0; k <= g.nz; ++k)
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i) {
        const int v = static_cast<int>(verts.size());
        verts.emplace_back(g.lx * i / g.nx, g.ly * j / g.ny, g.lz * k / g.nz);
        if (i == 0) sets["xmin"].push_back(v);
        if (i == g.nx) sets["xmax"].push_back(v);
        if (j == 0) sets["ymin"].push_back(v);
        if (j == g.ny) sets["ymax"].push_back(v);
        if (k == 0) sets["zmin"].push_back(v);
        if (k == g.nz) sets["zmax"].push_back(v);
      }

  constexpr std::array<std::array<int, 3>, 6> kPermutations{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  std::vector<Tet> tets;
  tets.reserve(static_cast<std::size_t>(6 * g.nx * g.ny * g.nz));
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        for (const auto& perm : kPermutations) {
          std::array<int, 3> c{i, j, k};
          Tet t{};
          t[0] = g.vertex(c[0], c[1], c[2]);
          for (int step = 0; step < 3; ++step) {
            ++c[static_cast<std::size_t>(perm[static_cast<std::size_t>(step)])];
            t[static_cast<std::size_t>(step + 1)] = g.vertex(c[0], c[1], c[2]);
          }
          tets.push_back(t);
        }
  return TetMesh(std::move(verts), std::move(tets), {}, std::move(sets));
}

inline TetMesh build_box_mesh(int nx, int ny, int nz, double lx, double ly, double lz) {
  return build_box_mesh(BoxGrid{nx, ny, nz, lx, ly, lz});
}

}  // namespace fiberstrain

#endif  // FIBERSTRAIN_MESH_HPP
