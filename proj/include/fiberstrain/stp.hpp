#ifndef FIBERSTRAIN_STP_HPP
#define FIBERSTRAIN_STP_HPP

// Analytical strain transfer operator for an uncoated orthotropic fiber of
// elliptic section embedded in an orthotropic matrix (Kollar / Van Steenkiste
// inclusion solution, Lekhnitskii complex potentials).
//
// The operator maps the far-field matrix strain eps_nf to the strain at the
// fiber center, eps_f ~ T : eps_nf. It is assembled in the local frame with
// the fiber along axis 1 and then expressed in a global frame by rotations.

#include <complex>
#include <cmath>
#include <numbers>
#include <string>

#include "fiberstrain/error.hpp"
#include "fiberstrain/tensor.hpp"

namespace fiberstrain {

struct FiberSection {
  double radius = 0.0;
  double semi_axis_a = 0.0;
  double semi_axis_b = 0.0;
  double area = 0.0;

  static FiberSection circular(double radius) {
    if (!(radius > 0.0)) throw ArgumentError("fiber radius must be positive");
    return FiberSection{radius, radius, radius, std::numbers::pi * radius * radius};
  }
};

// Compliance-derived parameters of the plane problem transverse to the fiber.
// mu_r is complex: a negative radicand means the two characteristic roots are
// distinct and purely imaginary, and mu_r = i sqrt(-radicand).
struct LekhnitskiiParams {
  double beta22 = 0.0;
  double beta23 = 0.0;
  double beta33 = 0.0;
  double beta44 = 0.0;
  double mu_r_squared = 0.0;
  std::complex<double> mu_r;
  double mu_i = 0.0;
  std::complex<double> delta1, delta2, delta3, delta4;

  bool imaginary_roots() const { return mu_r_squared < 0.0; }
};

namespace detail {

using Complex = std::complex<double>;
using CMat4 = Eigen::Matrix<Complex, 4, 4>;
using CMat43 = Eigen::Matrix<Complex, 4, 3>;

struct Deltas {
  Complex d1, d2, d3, d4;
};

inline Deltas lekhnitskii_deltas(double b22, double b23, double b33, Complex mu_r, double mu_i) {
  const Complex mod2 = mu_r * mu_r + mu_i * mu_i;
  return {2.0 * b23 + 2.0 * b22 * (mu_r * mu_r - mu_i * mu_i), 4.0 * b22 * mu_r * mu_i,
          2.0 * mu_r * (b23 + b33 / mod2), 2.0 * mu_i * (b23 - b33 / mod2)};
}

// Gaussian elimination with partial pivoting. A pivot below
// 1e-12 * max|a_ij| is treated as singular.
template <class Scalar, int N, int M>
Eigen::Matrix<Scalar, N, M> solve_pivoted(Eigen::Matrix<Scalar, N, N> a,
                                          Eigen::Matrix<Scalar, N, M> b, const char* what) {
  const double scale = a.cwiseAbs().maxCoeff();
  double min_pivot = scale;
  for (int col = 0; col < N; ++col) {
    int piv = col;
    for (int r = col + 1; r < N; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    const double p = std::abs(a(piv, col));
    min_pivot = std::min(min_pivot, p);
    if (!(p > 1e-12 * scale)) {
      throw AssemblyError(std::string("singular ") + what + " (condition estimate " +
                          (p > 0.0 ? std::to_string(scale / p) : std::string("inf")) + ")");
    }
    a.row(col).swap(a.row(piv));
    b.row(col).swap(b.row(piv));
    for (int r = col + 1; r < N; ++r) {
      const Scalar f = a(r, col) / a(col, col);
      a.row(r) -= f * a.row(col);
      b.row(r) -= f * b.row(col);
    }
  }
  for (int r = N - 1; r >= 0; --r) {
    for (int c = r + 1; c < N; ++c) b.row(r) -= a(r, c) * b.row(c);
    b.row(r) /= a(r, r);
  }
  return b;
}

// Rows (eps_2, eps_3, eps_4, Theta) of the fiber response to unit far-field
// strains eps_1 .. eps_4 (Voigt, local frame), for a given mu_r.
inline CMat4 transverse_response(const LekhnitskiiParams& p, Complex mu_r, const Mat6& cm,
                                 const Mat6& cf, double a, double b) {
  const double mu_i = p.mu_i;
  const Deltas d = lekhnitskii_deltas(p.beta22, p.beta23, p.beta33, mu_r, mu_i);

  CMat43 k = CMat43::Zero();
  k(0, 0) = a;
  k(1, 2) = b / 2.0;
  k(2, 2) = a / 2.0;
  k(3, 1) = b;
  Eigen::Matrix<Complex, 4, 1> h(0.0, b, -a, 0.0);

  CMat43 w = CMat43::Zero();
  w(0, 0) = 1.0;
  w(1, 1) = 1.0;
  w(2, 2) = 1.0;
  w(3, 2) = 1.0;

  auto q_of = [](const Mat6& c) {
    Eigen::Matrix<Complex, 3, 3> q = Eigen::Matrix<Complex, 3, 3>::Zero();
    q(0, 0) = c(1, 1);
    q(0, 1) = c(1, 2);
    q(1, 0) = c(2, 1);
    q(1, 1) = c(2, 2);
    q(2, 2) = c(3, 3);
    return q;
  };
  const auto q = q_of(cm);
  const auto qf = q_of(cf);

  CMat4 u;
  u << d.d1, -d.d2, d.d1, d.d2,  //
      d.d2, d.d1, -d.d2, d.d1,   //
      d.d3, -d.d4, -d.d3, -d.d4, //
      d.d4, d.d3, d.d4, -d.d3;

  CMat4 l;
  l << 2.0 * mu_i / b, 2.0 * mu_r / b, 2.0 * mu_i / b, -2.0 * mu_r / b,  //
      2.0 / a, 0.0, 2.0 / a, 0.0,                                        //
      0.0, -2.0 / b, 0.0, -2.0 / b,                                      //
      -2.0 * mu_r / a, 2.0 * mu_i / a, 2.0 * mu_r / a, 2.0 * mu_i / a;

  CMat4 o;
  o << k, h;
  CMat4 n = CMat4::Zero();
  n.leftCols<3>() = w * qf;

  // L^-1 [N | W]
  Eigen::Matrix<Complex, 4, 7> nw;
  nw << n, w;
  const Eigen::Matrix<Complex, 4, 7> linv_nw = solve_pivoted<Complex, 4, 7>(l, nw, "matrix L");
  const CMat4 linv_n = linv_nw.leftCols<4>();
  const CMat43 linv_w = linv_nw.rightCols<3>();

  const CMat4 system = o - u * linv_n;
  const Eigen::Matrix<Complex, 3, 1> axial_mismatch(cf(1, 0) - cm(1, 0), cf(2, 0) - cm(2, 0),
                                                    0.0);
  CMat4 rhs;
  rhs.col(0) = u * linv_w * axial_mismatch;
  rhs.rightCols<3>() = k - u * linv_w * q;
  return solve_pivoted<Complex, 4, 4>(system, rhs, "matrix O - U L^-1 N");
}

inline void require_orthotropic(const Tensor4& c, const char* what) {
  const Mat6 v = c.voigt_stiffness();
  const double scale = v.cwiseAbs().maxCoeff();
  double off = v.topRightCorner<3, 3>().cwiseAbs().maxCoeff();
  off = std::max({off, std::abs(v(3, 4)), std::abs(v(3, 5)), std::abs(v(4, 5))});
  if (off > 1e-8 * scale) {
    throw StpValidityError(std::string(what) +
                           " is not orthotropic in the fiber frame (coupling entry " +
                           std::to_string(off) + " vs scale " + std::to_string(scale) + ")");
  }
}

}  // namespace detail

// beta_ij = S_ij - S_i1 S_j1 / S_11 (Voigt compliance, fiber along axis 1),
// and the roots mu = +-mu_r + i mu_i of the transverse plane problem.
inline LekhnitskiiParams lekhnitskii_params(const Tensor4& compliance) {
  const Mat6 s = compliance.voigt_compliance();
  auto beta = [&](int i, int j) {
    return s(i - 1, j - 1) - s(i - 1, 0) * s(j - 1, 0) / s(0, 0);
  };
  LekhnitskiiParams p;
  p.beta22 = beta(2, 2);
  p.beta23 = beta(2, 3);
  p.beta33 = beta(3, 3);
  p.beta44 = beta(4, 4);

  const double ratio = p.beta33 / (4.0 * p.beta22);
  if (!(ratio > 0.0)) {
    throw StpValidityError("material outside analytical STP validity: beta33/(4 beta22) = " +
                           std::to_string(ratio));
  }
  const double root = std::sqrt(ratio);
  const double shift = (2.0 * p.beta23 + p.beta44) / (4.0 * p.beta22);
  const double mu_i_squared = root + shift;
  if (!(mu_i_squared > 0.0)) {
    throw StpValidityError("material outside analytical STP validity: mu_I radicand = " +
                           std::to_string(mu_i_squared));
  }
  p.mu_i = std::sqrt(mu_i_squared);
  p.mu_r_squared = root - shift;
  p.mu_r = std::sqrt(std::complex<double>(p.mu_r_squared, 0.0));

  const auto d = detail::lekhnitskii_deltas(p.beta22, p.beta23, p.beta33, p.mu_r, p.mu_i);
  p.delta1 = d.d1;
  p.delta2 = d.d2;
  p.delta3 = d.d3;
  p.delta4 = d.d4;
  return p;
}

struct StrainTransferOperator {
  // T in the frame of use, and in the local frame (fiber along axis 1) at the
  // current out-of-plane angle.
  Tensor4 transfer;
  Tensor4 local_transfer;
  Vec3 fiber_direction = Vec3::UnitX();
  double in_plane_angle = 0.0;      // beta, about z from the x-axis
  double out_of_plane_angle = 0.0;  // alpha, between fiber and reinforcement
  // Angular displacement of the sensor per unit local Voigt strain
  // eps_1..eps_4. Kept for inspection; it does not enter T.
  Eigen::Vector4d angular_displacement_row = Eigen::Vector4d::Zero();
  LekhnitskiiParams lekhnitskii;
  // Inputs in the local frame at alpha = 0, needed for re-assembly.
  Tensor4 matrix_stiffness;
  Tensor4 fiber_stiffness;
  FiberSection section;
};

namespace detail {

struct LocalAssembly {
  Tensor4 transfer;
  Eigen::Vector4d theta;
  LekhnitskiiParams params;
};

inline LocalAssembly assemble_local(const Tensor4& c_matrix, const Tensor4& c_fiber,
                                    const FiberSection& sec) {
  if (!(sec.semi_axis_a > 0.0) || sec.semi_axis_a != sec.semi_axis_b) {
    throw ArgumentError("analytical transfer operator requires a circular section (a = b > 0)");
  }
  require_positive_definite(c_matrix, "matrix stiffness");
  require_positive_definite(c_fiber, "fiber stiffness");
  require_orthotropic(c_matrix, "matrix stiffness");
  require_orthotropic(c_fiber, "fiber stiffness");

  const Mat6 cm = c_matrix.voigt_stiffness();
  const Mat6 cf = c_fiber.voigt_stiffness();
  const double a = sec.semi_axis_a, b = sec.semi_axis_b;

  LocalAssembly out;
  out.params = lekhnitskii_params(invert_stiffness(c_matrix));
  const LekhnitskiiParams& p = out.params;

  // The response is an even analytic function of mu_r. Near the double
  // root (mu_r = 0) L and U lose rank, so interpolate linearly in mu_r^2
  // between mu_r^2 = +h and -h.
  CMat4 x;
  const double h = 1e-6 * p.mu_i * p.mu_i;
  if (std::abs(p.mu_r_squared) < h) {
    const Complex s(std::sqrt(h), 0.0);
    const CMat4 plus = transverse_response(p, s, cm, cf, a, b);
    const CMat4 minus = transverse_response(p, Complex(0.0, 1.0) * s, cm, cf, a, b);
    x = 0.5 * (plus + minus) + (p.mu_r_squared / (2.0 * h)) * (plus - minus);
  } else {
    x = transverse_response(p, p.mu_r, cm, cf, a, b);
  }
  const double imag = x.imag().cwiseAbs().maxCoeff();
  if (imag > 1e-8 * std::max(1.0, x.real().cwiseAbs().maxCoeff())) {
    throw StpValidityError("transfer operator has a non-negligible imaginary part (" +
                           std::to_string(imag) + ")");
  }

  Mat6 t = Mat6::Zero();
  t(0, 0) = 1.0;
  t.block<3, 4>(1, 0) = x.real().topRows<3>();
  const double c55 = cm(4, 4), c66 = cm(5, 5);
  t(4, 4) = (b + std::sqrt(c55 / c66) * a) / (b + cf(4, 4) / std::sqrt(c66 * c55) * a);
  t(5, 5) = (a + std::sqrt(c66 / c55) * b) / (a + cf(5, 5) / std::sqrt(c66 * c55) * b);

  out.transfer = Tensor4::from_voigt_strain_map(t);
  out.theta = x.real().row(3).transpose();
  return out;
}

// Tilts the matrix material away from the fiber: rotation by alpha about x in
// the frame where the fiber runs along z, expressed back in the local frame.
inline Tensor4 tilt_matrix_material(const Tensor4& c_local, double alpha) {
  if (alpha == 0.0) return c_local;
  return axis_swap_xz(rotate_tensor4(axis_swap_xz(c_local), RotationMatrix::about_x(alpha)));
}

}  // namespace detail

// Both stiffnesses are given in the local frame (fiber along axis 1) and
// must be orthotropic there.
inline StrainTransferOperator assemble_stp(const Tensor4& c_matrix, const Tensor4& c_fiber,
                                           const FiberSection& sec) {
  auto local = detail::assemble_local(c_matrix, c_fiber, sec);
  StrainTransferOperator op;
  op.transfer = local.transfer;
  op.local_transfer = local.transfer;
  op.angular_displacement_row = local.theta;
  op.lekhnitskii = local.params;
  op.matrix_stiffness = c_matrix;
  op.fiber_stiffness = c_fiber;
  op.section = sec;
  return op;
}

// Sets the out-of-plane angle alpha (absolute; triggers re-assembly with the
// tilted matrix material) and rotates the operator by a further beta about z.
inline StrainTransferOperator rotate_stp(const StrainTransferOperator& op, double alpha,
                                         double beta) {
  StrainTransferOperator out = op;
  if (alpha != op.out_of_plane_angle) {
    auto local = detail::assemble_local(detail::tilt_matrix_material(op.matrix_stiffness, alpha),
                                        op.fiber_stiffness, op.section);
    out.local_transfer = local.transfer;
    out.angular_displacement_row = local.theta;
    out.lekhnitskii = local.params;
    out.out_of_plane_angle = alpha;
  }
  out.in_plane_angle = op.in_plane_angle + beta;
  const auto rz = RotationMatrix::about_z(out.in_plane_angle);
  out.transfer = rotate_tensor4(out.local_transfer, rz);
  out.fiber_direction = rz.matrix().col(0);
  return out;
}

struct EffectiveFiberModulus {
  double matrix_modulus = 0.0;  // E_m = (P:S:P)^-1
  double fiber_modulus = 0.0;   // E_f
  double modulus = 0.0;         // max(0, E_f - E_m)
  Vec3 direction = Vec3::UnitX();
};

// Stretching modulus of a material along unit direction v.
inline double directional_modulus(const Tensor4& stiffness, const Vec3& v) {
  const SymTensor2 p = SymTensor2::outer(v.normalized());
  return 1.0 / double_contract(p, double_contract(invert_stiffness(stiffness), p));
}

inline EffectiveFiberModulus effective_fiber_modulus(const Tensor4& c_matrix, double fiber_modulus,
                                                     const Vec3& v) {
  if (!(v.norm() > 0.0)) throw ArgumentError("fiber direction must be nonzero");
  EffectiveFiberModulus e;
  e.direction = v.normalized();
  e.fiber_modulus = fiber_modulus;
  e.matrix_modulus = directional_modulus(c_matrix, e.direction);
  e.modulus = std::max(0.0, fiber_modulus - e.matrix_modulus);
  return e;
}

inline SymTensor2 apply_stp(const StrainTransferOperator& op, const SymTensor2& eps_nf) {
  return double_contract(op.transfer, eps_nf);
}

// (I - P (x) P) : (T : eps_nf) + P eps_gamma, with P = v v^T.
inline SymTensor2 extended_recovery(const StrainTransferOperator& op, const SymTensor2& eps_nf,
                                    double eps_gamma_f, const Vec3& v) {
  const SymTensor2 p = SymTensor2::outer(v.normalized());
  const SymTensor2 transferred = apply_stp(op, eps_nf);
  const double along = double_contract(p, transferred);
  return transferred - (along - eps_gamma_f) * p;
}

enum class Notation { Voigt, Mandel };

inline Notation parse_notation(const std::string& s) {
  if (s == "voigt") return Notation::Voigt;
  if (s == "mandel") return Notation::Mandel;
  throw ArgumentError("unknown notation '" + s + "' (expected voigt or mandel)");
}

inline const char* to_string(Notation n) { return n == Notation::Voigt ? "voigt" : "mandel"; }

inline Mat6 transfer_matrix(const StrainTransferOperator& op, Notation n) {
  return n == Notation::Voigt ? op.transfer.voigt_strain_map() : op.transfer.mandel();
}

}  // namespace fiberstrain

#endif  // FIBERSTRAIN_STP_HPP
