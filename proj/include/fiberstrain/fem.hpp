#ifndef FIBERSTRAIN_FEM_HPP
#define FIBERSTRAIN_FEM_HPP

// P1 linear elasticity on tetrahedra with an optional superposed
// one-dimensional fiber stretching term along a chain of mesh edges:
//
//   sum_t  int_t eps(u):C:eps(v) dx  +  sum_e int_e E A eps_g(u) eps_g(v) ds
//     = sum_t int_t f.v dx
//
// Degrees of freedom are ordered 3 * vertex + component.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fiberstrain/error.hpp"
#include "fiberstrain/mesh.hpp"
#include "fiberstrain/sparse.hpp"
#include "fiberstrain/stp.hpp"
#include "fiberstrain/tensor.hpp"

namespace fiberstrain {

class MaterialMap {
 public:
  MaterialMap() = default;

  static MaterialMap uniform(const TetMesh& mesh, const Tensor4& stiffness) {
    MaterialMap m;
    for (int tag : mesh.regions()) m.materials_.emplace(tag, stiffness);
    require_positive_definite(stiffness, "material");
    return m;
  }

  void set(int region, const Tensor4& stiffness) {
    require_positive_definite(stiffness, "material for region " + std::to_string(region));
    materials_[region] = stiffness;
  }

  const Tensor4& at(int region) const {
    auto it = materials_.find(region);
    if (it == materials_.end()) {
      throw ValidationError("no material for region " + std::to_string(region));
    }
    return it->second;
  }

  bool contains(int region) const { return materials_.count(region) != 0; }

 private:
  std::map<int, Tensor4> materials_;
};

// One-dimensional fiber: path, effective stretching modulus per edge, area.
struct FiberModel {
  FiberPath path;
  std::vector<double> edge_modulus;
  double area = 0.0;
};

// Effective modulus max(0, E_f - E_m(v_e)) for each edge direction v_e.
inline FiberModel make_fiber_model(const TetMesh& mesh, const FiberPath& path,
                                   const Tensor4& c_matrix, double fiber_modulus,
                                   const FiberSection& section) {
  FiberModel f;
  f.path = path;
  f.area = section.area;
  for (std::size_t e = 0; e < path.num_edges(); ++e) {
    const Vec3 d = mesh.vertex(path.vertices[e + 1]) - mesh.vertex(path.vertices[e]);
    f.edge_modulus.push_back(effective_fiber_modulus(c_matrix, fiber_modulus, d).modulus);
  }
  return f;
}

inline FiberModel uniform_fiber_model(const FiberPath& path, double modulus, double area) {
  if (!(modulus >= 0.0)) throw ArgumentError("fiber modulus must be nonnegative");
  if (!(area > 0.0)) throw ArgumentError("fiber area must be positive");
  return FiberModel{path, std::vector<double>(path.num_edges(), modulus), area};
}

struct DisplacementField {
  std::vector<double> dofs;

  static DisplacementField zero(std::size_t vertices) {
    return DisplacementField{std::vector<double>(3 * vertices, 0.0)};
  }
  std::size_t num_vertices() const { return dofs.size() / 3; }
  Vec3 at(int v) const {
    const auto i = 3 * static_cast<std::size_t>(v);
    return Vec3(dofs[i], dofs[i + 1], dofs[i + 2]);
  }
  void set(int v, const Vec3& value) {
    const auto i = 3 * static_cast<std::size_t>(v);
    dofs[i] = value.x();
    dofs[i + 1] = value.y();
    dofs[i + 2] = value.z();
  }
};

struct StrainField {
  std::vector<SymTensor2> per_tet;
};

struct SparseSystem {
  CsrMatrix matrix;
  std::vector<double> rhs;
  std::vector<int> constrained_dofs;  // sorted
  std::vector<double> constrained_values;
};

// Gradients of the four barycentric basis functions (rows).
inline Eigen::Matrix<double, 4, 3> basis_gradients(const TetMesh& mesh, std::size_t t) {
  const Tet& k = mesh.tets()[t];
  const Vec3& p0 = mesh.vertex(k[0]);
  Mat3 j;
  j.col(0) = mesh.vertex(k[1]) - p0;
  j.col(1) = mesh.vertex(k[2]) - p0;
  j.col(2) = mesh.vertex(k[3]) - p0;
  const Mat3 inv = j.inverse();
  Eigen::Matrix<double, 4, 3> g;
  g.bottomRows<3>() = inv;
  g.row(0) = -inv.colwise().sum();
  return g;
}

// Voigt strain-displacement matrix of a tet.
inline Eigen::Matrix<double, 6, 12> strain_displacement(const Eigen::Matrix<double, 4, 3>& g) {
  Eigen::Matrix<double, 6, 12> b = Eigen::Matrix<double, 6, 12>::Zero();
  for (int a = 0; a < 4; ++a) {
    const int c = 3 * a;
    b(0, c) = g(a, 0);
    b(1, c + 1) = g(a, 1);
    b(2, c + 2) = g(a, 2);
    b(3, c + 1) = g(a, 2);
    b(3, c + 2) = g(a, 1);
    b(4, c) = g(a, 2);
    b(4, c + 2) = g(a, 0);
    b(5, c) = g(a, 1);
    b(5, c + 1) = g(a, 0);
  }
  return b;
}

inline Eigen::Matrix<double, 12, 12> element_stiffness(const TetMesh& mesh, std::size_t t,
                                                       const Tensor4& stiffness) {
  const double vol = mesh.volume(t);
  if (!(vol > 0.0)) {
    throw AssemblyError("tet " + std::to_string(t) + " has nonpositive volume");
  }
  const auto b = strain_displacement(basis_gradients(mesh, t));
  return vol * b.transpose() * stiffness.voigt_stiffness() * b;
}

inline CsrMatrix assemble_bulk(const TetMesh& mesh, const MaterialMap& materials) {
  std::vector<Triplet> trip;
  trip.reserve(mesh.num_tets() * 144);
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    const auto ke = element_stiffness(mesh, t, materials.at(mesh.regions()[t]));
    const Tet& k = mesh.tets()[t];
    for (int a = 0; a < 4; ++a)
      for (int i = 0; i < 3; ++i)
        for (int b = 0; b < 4; ++b)
          for (int j = 0; j < 3; ++j)
            trip.push_back({3 * k[static_cast<std::size_t>(a)] + i,
                            3 * k[static_cast<std::size_t>(b)] + j, ke(3 * a + i, 3 * b + j)});
  }
  return CsrMatrix::from_triplets(static_cast<int>(3 * mesh.num_vertices()), std::move(trip));
}

// Truss term per edge (p1, p2): E A / |p2 - p1| d d^T on the dof blocks
// [[1, -1], [-1, 1]], d the unit edge direction.
inline CsrMatrix assemble_fiber(const TetMesh& mesh, const FiberModel& fiber) {
  std::vector<Triplet> trip;
  const auto& path = fiber.path;
  for (std::size_t e = 0; e < path.num_edges(); ++e) {
    const double modulus = fiber.edge_modulus.at(e);
    if (modulus == 0.0) continue;
    const int p1 = path.vertices[e], p2 = path.vertices[e + 1];
    const Vec3 delta = mesh.vertex(p2) - mesh.vertex(p1);
    const double len = delta.norm();
    const Vec3 d = delta / len;
    const Mat3 k = (modulus * fiber.area / len) * (d * d.transpose());
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        trip.push_back({3 * p1 + i, 3 * p1 + j, k(i, j)});
        trip.push_back({3 * p2 + i, 3 * p2 + j, k(i, j)});
        trip.push_back({3 * p1 + i, 3 * p2 + j, -k(i, j)});
        trip.push_back({3 * p2 + i, 3 * p1 + j, -k(i, j)});
      }
  }
  return CsrMatrix::from_triplets(static_cast<int>(3 * mesh.num_vertices()), std::move(trip));
}

struct BodyForce {
  Vec3 uniform = Vec3::Zero();
  std::map<int, Vec3> per_region;  // overrides `uniform` for listed regions

  Vec3 at(int region) const {
    auto it = per_region.find(region);
    return it == per_region.end() ? uniform : it->second;
  }
};

// Consistent P1 load: each tet hands f |t| / 4 to each of its vertices.
inline std::vector<double> assemble_rhs(const TetMesh& mesh, const BodyForce& f) {
  std::vector<double> rhs(3 * mesh.num_vertices(), 0.0);
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    const Vec3 share = f.at(mesh.regions()[t]) * (mesh.volume(t) / 4.0);
    for (int v : mesh.tets()[t])
      for (int i = 0; i < 3; ++i) rhs[3 * static_cast<std::size_t>(v) + static_cast<std::size_t>(i)] += share(i);
  }
  return rhs;
}

// Symmetric elimination: constrained rows and columns are replaced by the
// identity, known values are moved to the right-hand side.
inline SparseSystem apply_dirichlet(const SparseSystem& sys, const TetMesh& mesh,
                                    const std::vector<BoundaryCondition>& bcs) {
  std::map<int, double> fixed;
  for (const auto& bc : bcs) {
    validate_boundary_condition(mesh, bc);
    for (int v : mesh.vertex_set(bc.vertex_set))
      for (int i = 0; i < 3; ++i) {
        if (!bc.mask[static_cast<std::size_t>(i)]) continue;
        const int dof = 3 * v + i;
        const double value = bc.value(i);
        auto [it, inserted] = fixed.emplace(dof, value);
        if (!inserted && it->second != value) {
          throw ValidationError("conflicting Dirichlet values on vertex " + std::to_string(v) +
                                " component " + std::to_string(i));
        }
      }
  }
  for (std::size_t k = 0; k < sys.constrained_dofs.size(); ++k) {
    auto [it, inserted] = fixed.emplace(sys.constrained_dofs[k], sys.constrained_values[k]);
    if (!inserted && it->second != sys.constrained_values[k]) {
      throw ValidationError("conflicting Dirichlet values on dof " +
                            std::to_string(sys.constrained_dofs[k]));
    }
  }

  const int n = sys.matrix.size();
  std::vector<char> is_fixed(static_cast<std::size_t>(n), 0);
  std::vector<double> value(static_cast<std::size_t>(n), 0.0);
  for (const auto& [dof, v] : fixed) {
    is_fixed[static_cast<std::size_t>(dof)] = 1;
    value[static_cast<std::size_t>(dof)] = v;
  }

  SparseSystem out;
  out.rhs = sys.rhs;
  std::vector<Triplet> trip;
  trip.reserve(sys.matrix.nonzeros());
  const auto& rp = sys.matrix.row_ptr();
  const auto& cols = sys.matrix.cols();
  const auto& vals = sys.matrix.values();
  for (int r = 0; r < n; ++r) {
    const auto ur = static_cast<std::size_t>(r);
    if (is_fixed[ur]) {
      trip.push_back({r, r, 1.0});
      out.rhs[ur] = value[ur];
      continue;
    }
    for (int k = rp[ur]; k < rp[ur + 1]; ++k) {
      const auto c = static_cast<std::size_t>(cols[static_cast<std::size_t>(k)]);
      const double a = vals[static_cast<std::size_t>(k)];
      if (is_fixed[c]) {
        out.rhs[ur] -= a * value[c];
      } else {
        trip.push_back({r, static_cast<int>(c), a});
      }
    }
  }
  out.matrix = CsrMatrix::from_triplets(n, std::move(trip));
  for (const auto& [dof, v] : fixed) {
    out.constrained_dofs.push_back(dof);
    out.constrained_values.push_back(v);
  }
  return out;
}

struct SolveResult {
  DisplacementField displacement;
  int iterations = 0;
  double relative_residual = 0.0;
};

struct SolverSettings {
  double tolerance = 1e-10;
  int max_iterations = 0;  // 0: 10 x number of dofs
};

// Jacobi-preconditioned conjugate gradients. Constrained dofs start at their
// prescribed values and never change. Convergence is measured on the free
// dofs: |b - K u| / |b| <= tolerance.
inline SolveResult solve_cg(const SparseSystem& sys, const SolverSettings& settings = {}) {
  const int n = sys.matrix.size();
  const auto un = static_cast<std::size_t>(n);
  const int max_iter = settings.max_iterations > 0 ? settings.max_iterations : 10 * n;

  std::vector<char> is_fixed(un, 0);
  SolveResult res;
  res.displacement.dofs.assign(un, 0.0);
  auto& x = res.displacement.dofs;
  for (std::size_t k = 0; k < sys.constrained_dofs.size(); ++k) {
    const auto d = static_cast<std::size_t>(sys.constrained_dofs[k]);
    is_fixed[d] = 1;
    x[d] = sys.constrained_values[k];
  }

  std::vector<double> b_free(un, 0.0);
  for (std::size_t i = 0; i < un; ++i)
    if (!is_fixed[i]) b_free[i] = sys.rhs[i];
  const double b_norm = norm2(b_free);
  if (b_norm == 0.0) return res;

  std::vector<double> r(un), z(un), p(un), q(un);
  sys.matrix.multiply(x, q);
  for (std::size_t i = 0; i < un; ++i) r[i] = is_fixed[i] ? 0.0 : sys.rhs[i] - q[i];

  const auto diag = sys.matrix.diagonal();
  std::vector<double> inv_diag(un, 0.0);
  for (std::size_t i = 0; i < un; ++i) {
    if (is_fixed[i]) continue;
    if (!(diag[i] > 0.0)) {
      throw AssemblyError("nonpositive diagonal at dof " + std::to_string(i) +
                          " (system not SPD on free dofs)");
    }
    inv_diag[i] = 1.0 / diag[i];
  }

  double rel = norm2(r) / b_norm;
  for (std::size_t i = 0; i < un; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = dot(r, z);
  int it = 0;
  while (rel > settings.tolerance) {
    if (it >= max_iter) {
      throw ConvergenceError("conjugate gradients did not converge in " + std::to_string(max_iter) +
                                 " iterations (relative residual " + std::to_string(rel) + ")",
                             rel);
    }
    sys.matrix.multiply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) {
      throw AssemblyError("system is not positive definite on the free dofs");
    }
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < un; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    ++it;
    rel = norm2(r) / b_norm;
    for (std::size_t i = 0; i < un; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < un; ++i) p[i] = z[i] + beta * p[i];
  }
  res.iterations = it;
  res.relative_residual = rel;
  return res;
}

// eps = sym(grad u), constant per tet.
inline StrainField strain_per_tet(const TetMesh& mesh, const DisplacementField& u) {
  StrainField out;
  out.per_tet.reserve(mesh.num_tets());
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    const auto g = basis_gradients(mesh, t);
    Mat3 grad = Mat3::Zero();
    for (int a = 0; a < 4; ++a) grad += u.at(mesh.tets()[t][static_cast<std::size_t>(a)]) * g.row(a);
    out.per_tet.emplace_back(grad);
  }
  return out;
}

// ((u(p2) - u(p1)) . (p2 - p1)) / |p2 - p1|^2
inline double edge_fiber_strain(const TetMesh& mesh, const DisplacementField& u, int p1, int p2) {
  const Vec3 dp = mesh.vertex(p2) - mesh.vertex(p1);
  const double len2 = dp.squaredNorm();
  if (!(len2 > 0.0)) {
    throw ArgumentError("edge (" + std::to_string(p1) + ", " + std::to_string(p2) +
                        ") has coincident vertices");
  }
  return (u.at(p2) - u.at(p1)).dot(dp) / len2;
}

// Sum over the set's vertices of (K u - b), using the operator before
// Dirichlet elimination.
inline Vec3 reaction_force(const SparseSystem& unconstrained, const DisplacementField& u,
                           const TetMesh& mesh, const std::string& vertex_set) {
  const auto ku = unconstrained.matrix * u.dofs;
  Vec3 f = Vec3::Zero();
  for (int v : mesh.vertex_set(vertex_set))
    for (int i = 0; i < 3; ++i) {
      const auto d = 3 * static_cast<std::size_t>(v) + static_cast<std::size_t>(i);
      f(i) += ku[d] - unconstrained.rhs[d];
    }
  return f;
}

// 1/2 u^T K u
inline double quadratic_energy(const CsrMatrix& k, const DisplacementField& u) {
  return 0.5 * dot(u.dofs, k * u.dofs);
}

struct ElasticityProblem {
  const TetMesh* mesh = nullptr;
  MaterialMap materials;
  std::optional<FiberModel> fiber;
  std::vector<BoundaryCondition> bcs;
  BodyForce body_force;
  SolverSettings solver;
};

struct ElasticitySolution {
  SparseSystem unconstrained;  // bulk (+ fiber) operator and load, before BCs
  SolveResult result;
};

inline ElasticitySolution solve_elasticity(const ElasticityProblem& p) {
  if (p.mesh == nullptr) throw ArgumentError("elasticity problem has no mesh");
  const TetMesh& mesh = *p.mesh;
  ElasticitySolution s;
  s.unconstrained.matrix = assemble_bulk(mesh, p.materials);
  if (p.fiber) s.unconstrained.matrix = s.unconstrained.matrix + assemble_fiber(mesh, *p.fiber);
  s.unconstrained.rhs = assemble_rhs(mesh, p.body_force);
  s.result = solve_cg(apply_dirichlet(s.unconstrained, mesh, p.bcs), p.solver);
  return s;
}

}  // namespace fiberstrain

#endif  // FIBERSTRAIN_FEM_HPP
