#ifndef FIBERSTRAIN_PIPELINE_HPP
#define FIBERSTRAIN_PIPELINE_HPP

// End-to-end sensor case: three displacement solutions on one mesh and the
// strain trace along the fiber.
//
//   u_nf  matrix material everywhere, no fiber term
//   u_f   matrix material everywhere plus the fiber stretching term
//   u_r   optional reference with per-region materials (resolved fiber)
//
// Per fiber vertex the trace holds eps_r, eps_nf, T:eps_nf and the extended
// recovery eps_f, where eps_nf and eps_r are volume-weighted averages over
// the incident tets and eps_gamma(u_f) is the arc-length-weighted average of
// the adjacent edge strains.

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fiberstrain/error.hpp"
#include "fiberstrain/fem.hpp"
#include "fiberstrain/format.hpp"
#include "fiberstrain/material_io.hpp"
#include "fiberstrain/mesh.hpp"
#include "fiberstrain/msh_io.hpp"
#include "fiberstrain/stp.hpp"

namespace fiberstrain {

struct CaseConfig {
  TetMesh mesh;
  std::vector<int> fiber_chain;
  Material matrix;
  Material fiber;
  std::optional<std::map<int, Tensor4>> reference_materials;
  double fiber_radius = 0.0;
  std::vector<BoundaryCondition> bcs;
  BodyForce body_force;
  double alpha = 0.0;  // out-of-plane angle of the transfer operator
  // Use alpha = beta at every vertex: the matrix reinforcement stays along
  // the global x-axis while the fiber turns in the x-y plane.
  bool alpha_follows_beta = false;
  SolverSettings solver;
  std::filesystem::path output;
};

struct SensorRow {
  double s = 0.0;
  std::optional<SymTensor2> er;
  SymTensor2 enf;
  SymTensor2 etnf;
  SymTensor2 ef;
};

struct SensorTrace {
  std::vector<SensorRow> rows;
};

struct CaseResult {
  SensorTrace trace;
  FiberPath path;
  DisplacementField u_nf;
  DisplacementField u_f;
  std::optional<DisplacementField> u_r;
  double energy_nf = 0.0;  // total elastic energy of u_nf (no fiber term)
  double energy_f = 0.0;   // total energy of u_f including the fiber term
  std::vector<double> edge_strain_f;     // eps_gamma(u_f) per fiber edge
  std::vector<Vec3> vertex_direction;    // unit tangent per fiber vertex
  std::vector<double> vertex_strain_f;   // eps_gamma(u_f) per fiber vertex
  bool fiber_solve_skipped = false;
};

namespace detail {

// Volume-weighted average of the per-tet strain over the tets around v.
inline SymTensor2 vertex_strain(const TetMesh& mesh, const StrainField& field, int v) {
  SymTensor2 sum;
  double vol = 0.0;
  for (int t : mesh.tets_of_vertex(v)) {
    const double w = mesh.volume(static_cast<std::size_t>(t));
    sum += w * field.per_tet[static_cast<std::size_t>(t)];
    vol += w;
  }
  if (!(vol > 0.0)) throw ValidationError("fiber vertex " + std::to_string(v) + " has no tets");
  return (1.0 / vol) * sum;
}

}  // namespace detail

inline CaseResult run_case(const CaseConfig& cfg, bool skip_reference = false) {
  const TetMesh& mesh = cfg.mesh;
  CaseResult out;
  out.path = validate_fiber_path(mesh, cfg.fiber_chain);
  const FiberPath& path = out.path;
  const FiberSection section = FiberSection::circular(cfg.fiber_radius);
  const Tensor4& c_matrix = cfg.matrix.stiffness;

  ElasticityProblem nf;
  nf.mesh = &mesh;
  nf.materials = MaterialMap::uniform(mesh, c_matrix);
  nf.bcs = cfg.bcs;
  nf.body_force = cfg.body_force;
  nf.solver = cfg.solver;
  const auto sol_nf = solve_elasticity(nf);
  out.u_nf = sol_nf.result.displacement;
  out.energy_nf = quadratic_energy(sol_nf.unconstrained.matrix, out.u_nf);

  const FiberModel fiber =
      make_fiber_model(mesh, path, c_matrix, cfg.fiber.axial_modulus, section);
  bool stiff = false;
  for (double e : fiber.edge_modulus) stiff = stiff || e > 0.0;
  if (stiff) {
    ElasticityProblem f = nf;
    f.fiber = fiber;
    const auto sol_f = solve_elasticity(f);
    out.u_f = sol_f.result.displacement;
    out.energy_f = quadratic_energy(sol_f.unconstrained.matrix, out.u_f);
  } else {
    out.u_f = out.u_nf;
    out.energy_f = out.energy_nf;
    out.fiber_solve_skipped = true;
  }

  std::optional<StrainField> strain_r;
  if (cfg.reference_materials && !skip_reference) {
    ElasticityProblem r = nf;
    r.materials = MaterialMap();
    for (int tag : mesh.regions()) {
      auto it = cfg.reference_materials->find(tag);
      if (it == cfg.reference_materials->end()) {
        throw ConfigError("reference materials lack region " + std::to_string(tag));
      }
      if (!r.materials.contains(tag)) r.materials.set(tag, it->second);
    }
    out.u_r = solve_elasticity(r).result.displacement;
    strain_r = strain_per_tet(mesh, *out.u_r);
  }

  const StrainField strain_nf = strain_per_tet(mesh, out.u_nf);

  const std::size_t nv = path.vertices.size();
  std::vector<Vec3> edge_dir;
  for (std::size_t e = 0; e < path.num_edges(); ++e) {
    const int p1 = path.vertices[e], p2 = path.vertices[e + 1];
    out.edge_strain_f.push_back(edge_fiber_strain(mesh, out.u_f, p1, p2));
    edge_dir.push_back((mesh.vertex(p2) - mesh.vertex(p1)).normalized());
  }

  const StrainTransferOperator base = assemble_stp(c_matrix, cfg.fiber.stiffness, section);
  std::map<std::pair<double, double>, StrainTransferOperator> by_angle;

  for (std::size_t i = 0; i < nv; ++i) {
    double weight = 0.0, strain = 0.0;
    Vec3 tangent = Vec3::Zero();
    for (std::size_t e : {i - 1, i}) {
      if (e >= path.num_edges()) continue;  // i - 1 wraps for i = 0
      const double l = path.edge_lengths[e];
      weight += l;
      strain += l * out.edge_strain_f[e];
      tangent += l * edge_dir[e];
    }
    strain /= weight;
    if (!(tangent.norm() > 1e-12 * weight)) {
      throw ConfigError("fiber reverses direction at vertex " + std::to_string(path.vertices[i]));
    }
    tangent.normalize();
    if (std::hypot(tangent.x(), tangent.y()) < 1e-12) {
      throw ConfigError("fiber tangent at vertex " + std::to_string(path.vertices[i]) +
                        " is normal to the x-y plane; in-plane angle undefined");
    }
    const double beta = std::atan2(tangent.y(), tangent.x());
    const double alpha = cfg.alpha_follows_beta ? beta : cfg.alpha;
    auto it = by_angle.find({alpha, beta});
    if (it == by_angle.end()) it = by_angle.emplace(std::pair{alpha, beta}, rotate_stp(base, alpha, beta)).first;
    const StrainTransferOperator& op = it->second;

    const int v = path.vertices[i];
    SensorRow row;
    row.s = path.arc_length[i];
    row.enf = detail::vertex_strain(mesh, strain_nf, v);
    if (strain_r) row.er = detail::vertex_strain(mesh, *strain_r, v);
    row.etnf = apply_stp(op, row.enf);
    row.ef = extended_recovery(op, row.enf, strain, tangent);
    out.trace.rows.push_back(row);
    out.vertex_direction.push_back(tangent);
    out.vertex_strain_f.push_back(strain);
  }
  return out;
}

// --- CSV trace -------------------------------------------------------------

inline std::string csv_header() {
  std::string h = "s";
  for (const char* prefix : {"er", "enf", "eTnf", "ef"})
    for (const char* c : {"11", "22", "33", "23", "13", "12"}) h += std::string(",") + prefix + c;
  return h;
}

inline std::string format_csv(const SensorTrace& trace) {
  std::string out = csv_header() + "\n";
  auto put = [&](const SymTensor2& t) {
    for (int I = 0; I < 6; ++I) out += "," + format_double(t.component(I));
  };
  for (const auto& row : trace.rows) {
    out += format_double(row.s);
    if (row.er) {
      put(*row.er);
    } else {
      out += ",,,,,,";
    }
    put(row.enf);
    put(row.etnf);
    put(row.ef);
    out += "\n";
  }
  return out;
}

inline void write_csv(const SensorTrace& trace, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << format_csv(trace);
  if (!f) throw IoError("write to " + path.string() + " failed");
}

inline SensorTrace parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) throw FormatError("unexpected CSV header");
  SensorTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 25) throw FormatError("CSV row must have 25 fields");
    auto tensor = [&](std::size_t first) {
      std::array<double, 6> c{};
      for (std::size_t k = 0; k < 6; ++k) c[k] = parse_double(fields[first + k]);
      return SymTensor2::from_components(c[0], c[1], c[2], c[3], c[4], c[5]);
    };
    SensorRow row;
    row.s = parse_double(fields[0]);
    if (!fields[1].empty()) row.er = tensor(1);
    row.enf = tensor(7);
    row.etnf = tensor(13);
    row.ef = tensor(19);
    trace.rows.push_back(row);
  }
  return trace;
}

// --- JSON case configuration ----------------------------------------------

namespace detail {

inline std::array<bool, 3> parse_mask(const nlohmann::json& j) {
  std::array<bool, 3> mask{false, false, false};
  if (j.is_string()) {
    for (char c : j.get<std::string>()) {
      if (c < 'x' || c > 'z') throw ConfigError("components must be drawn from \"xyz\"");
      mask[static_cast<std::size_t>(c - 'x')] = true;
    }
  } else if (j.is_array() && j.size() == 3) {
    for (std::size_t i = 0; i < 3; ++i) mask[i] = j.at(i).get<bool>();
  } else {
    throw ConfigError("components must be a string like \"xz\" or three booleans");
  }
  return mask;
}

inline Vec3 parse_vec3(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError(std::string(what) + " must have 3 entries");
  return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}

inline Material resolve_material(const nlohmann::json& j, const std::filesystem::path& base,
                                 double stress_scale) {
  if (j.is_string()) return load_material(base / j.get<std::string>(), stress_scale);
  return material_from_json(j, stress_scale);
}

inline CaseConfig parse_case(const nlohmann::json& j, const std::filesystem::path& base) {
  CaseConfig cfg;
  double stress_scale = 1.0, length_scale = 1.0;
  if (j.contains("unit_scale")) {
    stress_scale = j.at("unit_scale").value("stress", 1.0);
    length_scale = j.at("unit_scale").value("length", 1.0);
    if (!(stress_scale > 0.0 && length_scale > 0.0)) {
      throw ConfigError("unit_scale entries must be positive");
    }
  }

  if (!j.contains("mesh")) throw ConfigError("config needs \"mesh\"");
  const auto mesh_path = base / j.at("mesh").get<std::string>();
  std::ifstream mesh_in(mesh_path);
  if (!mesh_in) throw IoError("cannot open mesh " + mesh_path.string());
  MshContent msh = load_msh(mesh_in);

  std::vector<Vec3> verts = msh.mesh.vertices();
  for (auto& p : verts) p *= length_scale;
  auto sets = msh.mesh.vertex_sets();
  if (j.contains("vertex_sets")) {
    for (const auto& [name, list] : j.at("vertex_sets").items()) {
      sets[name] = list.get<std::vector<int>>();
    }
  }
  cfg.mesh = TetMesh(std::move(verts), msh.mesh.tets(), msh.mesh.regions(), std::move(sets));

  if (!j.contains("fiber")) throw ConfigError("config needs \"fiber\"");
  const auto& fib = j.at("fiber");
  if (fib.contains("group")) {
    const auto group = fib.at("group").get<std::string>();
    auto it = msh.chains.find(group);
    if (it == msh.chains.end()) throw ConfigError("mesh has no fiber line group '" + group + "'");
    cfg.fiber_chain = it->second;
  } else if (fib.contains("vertices")) {
    cfg.fiber_chain = fib.at("vertices").get<std::vector<int>>();
  } else {
    throw ConfigError("\"fiber\" needs \"group\" or \"vertices\"");
  }
  if (fib.value("reverse", false)) std::reverse(cfg.fiber_chain.begin(), cfg.fiber_chain.end());

  if (!j.contains("materials")) throw ConfigError("config needs \"materials\"");
  const auto& mats = j.at("materials");
  if (!mats.contains("matrix") || !mats.contains("fiber")) {
    throw ConfigError("\"materials\" needs \"matrix\" and \"fiber\"");
  }
  cfg.matrix = resolve_material(mats.at("matrix"), base, stress_scale);
  cfg.fiber = resolve_material(mats.at("fiber"), base, stress_scale);
  if (mats.contains("reference")) {
    std::map<int, Tensor4> ref;
    for (const auto& [tag, m] : mats.at("reference").items()) {
      ref[std::stoi(tag)] = resolve_material(m, base, stress_scale).stiffness;
    }
    cfg.reference_materials = std::move(ref);
  }

  if (!j.contains("fiber_radius")) throw ConfigError("config needs \"fiber_radius\"");
  cfg.fiber_radius = j.at("fiber_radius").get<double>() * length_scale;
  if (!(cfg.fiber_radius > 0.0)) throw ConfigError("fiber_radius must be positive");

  if (j.contains("boundary_conditions")) {
    for (const auto& b : j.at("boundary_conditions")) {
      BoundaryCondition bc;
      bc.vertex_set = b.at("set").get<std::string>();
      bc.mask = b.contains("components") ? parse_mask(b.at("components"))
                                         : std::array<bool, 3>{true, true, true};
      bc.value = Vec3::Zero();
      if (b.contains("value")) bc.value = parse_vec3(b.at("value"), "value") * length_scale;
      if (!cfg.mesh.has_vertex_set(bc.vertex_set)) {
        throw ConfigError("boundary condition references unknown set '" + bc.vertex_set + "'");
      }
      cfg.bcs.push_back(bc);
    }
  }
  if (j.contains("body_force")) {
    cfg.body_force.uniform = parse_vec3(j.at("body_force"), "body_force") *
                             (stress_scale / length_scale);
  }
  if (j.contains("stp") && j.at("stp").contains("alpha")) {
    const auto& a = j.at("stp").at("alpha");
    if (a.is_string()) {
      if (a.get<std::string>() != "follow") throw ConfigError("stp.alpha must be a number or \"follow\"");
      cfg.alpha_follows_beta = true;
    } else {
      cfg.alpha = a.get<double>();
    }
  }
  if (j.contains("solver")) {
    cfg.solver.tolerance = j.at("solver").value("tolerance", cfg.solver.tolerance);
    cfg.solver.max_iterations = j.at("solver").value("max_iterations", 0);
  }
  if (j.contains("output")) cfg.output = base / j.at("output").get<std::string>();
  return cfg;
}

}  // namespace detail

// Paths inside the document are relative to the config file.
inline CaseConfig load_case_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    return detail::parse_case(j, path.parent_path());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace fiberstrain

#endif  // FIBERSTRAIN_PIPELINE_HPP
