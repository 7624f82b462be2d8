#ifndef FIBERSTRAIN_MSH_IO_HPP
#define FIBERSTRAIN_MSH_IO_HPP

// Gmsh MSH 2.2 ASCII subset: $MeshFormat, $PhysicalNames, $Nodes, $Elements.
// Element codes: 4 (tet), 1 (line), 2 (triangle), 15 (point). Tets take their
// region tag from the physical tag. Physical groups of lower dimension become
// named vertex sets, and every physical line group is stitched into an
// ordered vertex chain (a candidate fiber path).

#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fiberstrain/error.hpp"
#include "fiberstrain/format.hpp"
#include "fiberstrain/mesh.hpp"

namespace fiberstrain {

struct MshContent {
  TetMesh mesh;
  std::map<std::string, std::vector<int>> chains;
  std::map<int, std::string> region_names;
};

namespace detail {

inline int msh_nodes_per_element(int type) {
  switch (type) {
    case 1: return 2;
    case 2: return 3;
    case 4: return 4;
    case 15: return 1;
    default:
      throw FormatError("unsupported MSH element type " + std::to_string(type));
  }
}

inline int msh_element_dimension(int type) {
  switch (type) {
    case 15: return 0;
    case 1: return 1;
    case 2: return 2;
    default: return 3;
  }
}

// Orders the line segments of one group into a simple open chain.
inline std::vector<int> stitch_chain(const std::string& name,
                                     const std::vector<std::pair<int, int>>& segments) {
  std::map<int, std::vector<int>> adj;
  std::map<int, bool> starts_segment;
  for (const auto& [a, b] : segments) {
    if (a == b) throw FormatError("line group '" + name + "' has a zero-length segment");
    adj[a].push_back(b);
    adj[b].push_back(a);
    starts_segment[a] = true;
  }
  std::vector<int> ends;
  for (const auto& [v, nbrs] : adj) {
    if (nbrs.size() > 2) {
      throw FormatError("line group '" + name + "' branches at node " + std::to_string(v));
    }
    if (nbrs.size() == 1) ends.push_back(v);
  }
  if (ends.empty()) throw FormatError("line group '" + name + "' is a closed loop");
  if (ends.size() != 2) {
    throw FormatError("line group '" + name + "' is disconnected (" +
                      std::to_string(ends.size()) + " chain ends)");
  }
  int start = ends[0];
  if (!starts_segment[ends[0]] && starts_segment[ends[1]]) start = ends[1];

  std::vector<int> chain{start};
  int prev = -1, cur = start;
  while (true) {
    int next = -1;
    for (int n : adj[cur])
      if (n != prev) next = n;
    if (next < 0) break;
    chain.push_back(next);
    prev = cur;
    cur = next;
  }
  if (chain.size() != segments.size() + 1) {
    throw FormatError("line group '" + name + "' is disconnected");
  }
  return chain;
}

inline std::string expect_token(std::istream& in, const char* what) {
  std::string tok;
  if (!(in >> tok)) throw FormatError(std::string("unexpected end of MSH input in ") + what);
  return tok;
}

template <class T>
T read_value(std::istream& in, const char* what) {
  T v{};
  if (!(in >> v)) throw FormatError(std::string("malformed MSH ") + what);
  return v;
}

inline void expect_end(std::istream& in, const std::string& section) {
  const std::string tok = expect_token(in, section.c_str());
  if (tok != "$End" + section) {
    throw FormatError("expected $End" + section + ", found '" + tok + "'");
  }
}

}  // namespace detail

inline MshContent load_msh(std::istream& in) {
  using detail::read_value;
  std::map<std::pair<int, int>, std::string> physical_names;  // (dim, tag) -> name
  std::vector<Vec3> vertices;
  std::unordered_map<long, int> node_index;
  struct RawElement {
    int type;
    int physical;
    std::vector<long> nodes;
  };
  std::vector<RawElement> elements;
  bool have_format = false, have_nodes = false, have_elements = false;

  std::string tok;
  while (in >> tok) {
    if (tok == "$MeshFormat") {
      const std::string version = detail::expect_token(in, "$MeshFormat");
      const int file_type = read_value<int>(in, "$MeshFormat");
      read_value<int>(in, "$MeshFormat");
      if (version.rfind("2.", 0) != 0) {
        throw FormatError("unsupported MSH version " + version + " (only 2.2 ASCII)");
      }
      if (file_type != 0) throw FormatError("binary MSH files are not supported");
      detail::expect_end(in, "MeshFormat");
      have_format = true;
    } else if (tok == "$PhysicalNames") {
      const int n = read_value<int>(in, "$PhysicalNames count");
      std::string rest;
      std::getline(in, rest);
      for (int i = 0; i < n; ++i) {
        std::string line;
        if (!std::getline(in, line)) throw FormatError("truncated $PhysicalNames");
        std::istringstream ls(line);
        int dim = 0, tag = 0;
        if (!(ls >> dim >> tag)) throw FormatError("malformed $PhysicalNames entry");
        std::string name;
        std::getline(ls, name);
        const auto q0 = name.find('"');
        const auto q1 = name.rfind('"');
        if (q0 == std::string::npos || q1 == q0) {
          throw FormatError("physical name must be quoted");
        }
        physical_names[{dim, tag}] = name.substr(q0 + 1, q1 - q0 - 1);
      }
      detail::expect_end(in, "PhysicalNames");
    } else if (tok == "$Nodes") {
      const long n = read_value<long>(in, "$Nodes count");
      vertices.reserve(static_cast<std::size_t>(n));
      for (long i = 0; i < n; ++i) {
        const long id = read_value<long>(in, "node id");
        Vec3 p;
        p.x() = read_value<double>(in, "node coordinate");
        p.y() = read_value<double>(in, "node coordinate");
        p.z() = read_value<double>(in, "node coordinate");
        if (!node_index.emplace(id, static_cast<int>(vertices.size())).second) {
          throw FormatError("duplicate node id " + std::to_string(id));
        }
        vertices.push_back(p);
      }
      detail::expect_end(in, "Nodes");
      have_nodes = true;
    } else if (tok == "$Elements") {
      const long n = read_value<long>(in, "$Elements count");
      for (long i = 0; i < n; ++i) {
        read_value<long>(in, "element id");
        RawElement e;
        e.type = read_value<int>(in, "element type");
        const int nodes = detail::msh_nodes_per_element(e.type);
        const int ntags = read_value<int>(in, "element tag count");
        e.physical = 0;
        for (int t = 0; t < ntags; ++t) {
          const int tag = read_value<int>(in, "element tag");
          if (t == 0) e.physical = tag;
        }
        for (int k = 0; k < nodes; ++k) e.nodes.push_back(read_value<long>(in, "element node"));
        elements.push_back(std::move(e));
      }
      detail::expect_end(in, "Elements");
      have_elements = true;
    } else if (tok.size() > 1 && tok[0] == '$' && tok.rfind("$End", 0) != 0) {
      const std::string end = "$End" + tok.substr(1);
      std::string skip;
      while (in >> skip && skip != end) {
      }
    } else {
      throw FormatError("unexpected MSH token '" + tok + "'");
    }
  }
  if (!have_format || !have_nodes || !have_elements) {
    throw FormatError("MSH input lacks $MeshFormat, $Nodes or $Elements");
  }

  auto index_of = [&](long id) {
    auto it = node_index.find(id);
    if (it == node_index.end()) throw FormatError("element references unknown node " + std::to_string(id));
    return it->second;
  };
  auto group_name = [&](int dim, int tag) {
    auto it = physical_names.find({dim, tag});
    if (it != physical_names.end()) return it->second;
    return "group_" + std::to_string(dim) + "_" + std::to_string(tag);
  };

  std::vector<Tet> tets;
  std::vector<int> regions;
  std::map<std::string, std::vector<int>> sets;
  std::map<std::string, std::vector<std::pair<int, int>>> lines;
  MshContent out;
  for (const auto& e : elements) {
    const int dim = detail::msh_element_dimension(e.type);
    if (e.type == 4) {
      tets.push_back({index_of(e.nodes[0]), index_of(e.nodes[1]), index_of(e.nodes[2]),
                      index_of(e.nodes[3])});
      regions.push_back(e.physical);
      if (physical_names.count({3, e.physical})) {
        out.region_names[e.physical] = physical_names.at({3, e.physical});
      }
      continue;
    }
    if (e.physical == 0) continue;
    const std::string name = group_name(dim, e.physical);
    auto& set = sets[name];
    for (long id : e.nodes) set.push_back(index_of(id));
    if (e.type == 1) lines[name].emplace_back(index_of(e.nodes[0]), index_of(e.nodes[1]));
  }
  for (const auto& [name, segments] : lines) out.chains[name] = detail::stitch_chain(name, segments);
  out.mesh = TetMesh(std::move(vertices), std::move(tets), std::move(regions), std::move(sets));
  return out;
}

inline MshContent load_msh_string(const std::string& text) {
  std::istringstream in(text);
  return load_msh(in);
}

// Writes tets with their region tags, vertex sets as point elements and
// chains as line elements. Node ids are vertex index + 1.
inline void write_msh(std::ostream& out, const TetMesh& mesh,
                      const std::map<std::string, std::vector<int>>& chains = {},
                      const std::map<int, std::string>& region_names = {}) {
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";

  std::vector<std::string> names;
  std::map<std::string, int> set_tags, chain_tags;
  int next = 1;
  for (const auto& [name, set] : mesh.vertex_sets()) {
    if (chains.count(name)) continue;
    set_tags[name] = next++;
  }
  next = 1;
  for (const auto& [name, chain] : chains) chain_tags[name] = next++;

  out << "$PhysicalNames\n" << set_tags.size() + chain_tags.size() + region_names.size() << "\n";
  for (const auto& [name, tag] : set_tags) out << "0 " << tag << " \"" << name << "\"\n";
  for (const auto& [name, tag] : chain_tags) out << "1 " << tag << " \"" << name << "\"\n";
  for (const auto& [tag, name] : region_names) out << "3 " << tag << " \"" << name << "\"\n";
  out << "$EndPhysicalNames\n";

  out << "$Nodes\n" << mesh.num_vertices() << "\n";
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
    const Vec3& p = mesh.vertices()[i];
    out << i + 1 << ' ' << format_double(p.x()) << ' ' << format_double(p.y()) << ' '
        << format_double(p.z()) << '\n';
  }
  out << "$EndNodes\n";

  std::size_t count = mesh.num_tets();
  for (const auto& [name, tag] : set_tags) count += mesh.vertex_set(name).size();
  for (const auto& [name, chain] : chains) count += chain.size() - 1;
  out << "$Elements\n" << count << "\n";
  std::size_t id = 1;
  for (const auto& [name, tag] : set_tags)
    for (int v : mesh.vertex_set(name))
      out << id++ << " 15 2 " << tag << ' ' << tag << ' ' << v + 1 << '\n';
  for (const auto& [name, chain] : chains)
    for (std::size_t i = 0; i + 1 < chain.size(); ++i)
      out << id++ << " 1 2 " << chain_tags[name] << ' ' << chain_tags[name] << ' '
          << chain[i] + 1 << ' ' << chain[i + 1] + 1 << '\n';
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    const Tet& k = mesh.tets()[t];
    const int region = mesh.regions()[t];
    out << id++ << " 4 2 " << region << ' ' << region << ' ' << k[0] + 1 << ' ' << k[1] + 1
        << ' ' << k[2] + 1 << ' ' << k[3] + 1 << '\n';
  }
  out << "$EndElements\n";
}

}  // namespace fiberstrain

#endif  // FIBERSTRAIN_MSH_IO_HPP
