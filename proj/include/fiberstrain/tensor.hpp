#ifndef FIBERSTRAIN_TENSOR_HPP
#define FIBERSTRAIN_TENSOR_HPP

// Symmetric rank-2 and rank-4 elasticity tensors.
//
// The canonical storage is always the full tensor (3x3 or 3x3x3x3). The
// 6-vector notations exist only as conversions at I/O and solver boundaries:
//
//   Voigt ordering   (11, 22, 33, 23, 13, 12)
//   Voigt strain     shear entries carry 2 eps_ij (engineering shear)
//   Voigt stress     shear entries carry sigma_ij
//   Mandel           shear entries carry sqrt(2) x_ij for strain and stress
//
// A rank-4 tensor A maps symmetric tensors to symmetric tensors through
// (A:X)_ij = A_ijkl X_kl. Its matrix forms are
//
//   Mandel           M_IJ = w_I w_J A_ijkl,  w = (1,1,1,sqrt2,sqrt2,sqrt2)
//   Voigt stiffness  C_IJ = A_ijkl                      (stress = C strain)
//   Voigt compliance S_IJ = v_I v_J A_ijkl,  v = (1,1,1,2,2,2)
//   Voigt strain map T_IJ = v_I A_ijkl                  (strain -> strain)

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "fiberstrain/error.hpp"

namespace fiberstrain {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

inline constexpr std::array<std::pair<int, int>, 6> kVoigtPairs{
    {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}}};

constexpr int voigt_index(int i, int j) noexcept {
  if (i == j) return i;
  return 6 - i - j;  // (1,2)->3, (0,2)->4, (0,1)->5
}

namespace detail {
inline const double kSqrt2 = std::sqrt(2.0);
inline double mandel_weight(int index) { return index < 3 ? 1.0 : kSqrt2; }
inline double engineering_weight(int index) { return index < 3 ? 1.0 : 2.0; }
}  // namespace detail

class SymTensor2 {
 public:
  SymTensor2() : m_(Mat3::Zero()) {}
  explicit SymTensor2(const Mat3& m) : m_(0.5 * (m + m.transpose())) {}

  static SymTensor2 identity() { return SymTensor2(Mat3::Identity()); }

  static SymTensor2 from_components(double xx, double yy, double zz, double yz,
                                    double xz, double xy) {
    Mat3 m;
    m << xx, xy, xz, xy, yy, yz, xz, yz, zz;
    return SymTensor2(m);
  }

  // v v^T, the projector onto direction v when |v| = 1.
  static SymTensor2 outer(const Vec3& v) { return SymTensor2(v * v.transpose()); }

  double operator()(int i, int j) const { return m_(i, j); }
  const Mat3& matrix() const { return m_; }

  // Component in Voigt order without any shear factor.
  double component(int voigt) const {
    const auto [i, j] = kVoigtPairs[voigt];
    return m_(i, j);
  }

  SymTensor2& operator+=(const SymTensor2& o) {
    m_ += o.m_;
    return *this;
  }
  SymTensor2& operator-=(const SymTensor2& o) {
    m_ -= o.m_;
    return *this;
  }
  SymTensor2& operator*=(double s) {
    m_ *= s;
    return *this;
  }
  friend SymTensor2 operator+(SymTensor2 a, const SymTensor2& b) { return a += b; }
  friend SymTensor2 operator-(SymTensor2 a, const SymTensor2& b) { return a -= b; }
  friend SymTensor2 operator*(double s, SymTensor2 a) { return a *= s; }
  friend SymTensor2 operator*(SymTensor2 a, double s) { return a *= s; }

  double max_abs() const { return m_.cwiseAbs().maxCoeff(); }

 private:
  Mat3 m_;
};

inline double double_contract(const SymTensor2& a, const SymTensor2& b) {
  return a.matrix().cwiseProduct(b.matrix()).sum();
}

struct VoigtStrain6 {
  Vec6 values = Vec6::Zero();
};
struct VoigtStress6 {
  Vec6 values = Vec6::Zero();
};
struct MandelVector6 {
  Vec6 values = Vec6::Zero();
};

inline VoigtStrain6 to_voigt_strain(const SymTensor2& t) {
  VoigtStrain6 v;
  for (int I = 0; I < 6; ++I) v.values(I) = detail::engineering_weight(I) * t.component(I);
  return v;
}

inline VoigtStress6 to_voigt_stress(const SymTensor2& t) {
  VoigtStress6 v;
  for (int I = 0; I < 6; ++I) v.values(I) = t.component(I);
  return v;
}

inline MandelVector6 to_mandel(const SymTensor2& t) {
  MandelVector6 v;
  for (int I = 0; I < 6; ++I) v.values(I) = detail::mandel_weight(I) * t.component(I);
  return v;
}

namespace detail {
inline SymTensor2 from_scaled(const Vec6& v, const Vec6& scale) {
  const Vec6 c = v.cwiseQuotient(scale);
  return SymTensor2::from_components(c(0), c(1), c(2), c(3), c(4), c(5));
}
}  // namespace detail

inline SymTensor2 from_voigt(const VoigtStrain6& v) {
  return detail::from_scaled(v.values, (Vec6() << 1, 1, 1, 2, 2, 2).finished());
}

inline SymTensor2 from_voigt(const VoigtStress6& v) {
  return detail::from_scaled(v.values, Vec6::Ones());
}

inline SymTensor2 from_mandel(const MandelVector6& v) {
  const double r = detail::kSqrt2;
  return detail::from_scaled(v.values, (Vec6() << 1, 1, 1, r, r, r).finished());
}

inline double dot(const VoigtStress6& s, const VoigtStrain6& e) { return s.values.dot(e.values); }
inline double dot(const MandelVector6& a, const MandelVector6& b) { return a.values.dot(b.values); }

class RotationMatrix {
 public:
  RotationMatrix() : r_(Mat3::Identity()) {}

  // Rejects matrices that are not proper rotations to 1e-12.
  static RotationMatrix from_matrix(const Mat3& r) {
    const double orth = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
    const double det = r.determinant();
    if (!(orth <= 1e-12) || !(std::abs(det - 1.0) <= 1e-12)) {
      throw ArgumentError("matrix is not a proper rotation (|R^T R - I| = " +
                          std::to_string(orth) + ", det = " + std::to_string(det) + ")");
    }
    return RotationMatrix(r);
  }

  static RotationMatrix about_x(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r << 1, 0, 0, 0, c, -s, 0, s, c;
    return RotationMatrix(r);
  }

  static RotationMatrix about_z(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r << c, -s, 0, s, c, 0, 0, 0, 1;
    return RotationMatrix(r);
  }

  // Rotation by pi about (1,0,1)/sqrt(2): exchanges the x and z axes and
  // flips y. It is its own inverse.
  static RotationMatrix axis_swap_xz() {
    Mat3 r;
    r << 0, 0, 1, 0, -1, 0, 1, 0, 0;
    return RotationMatrix(r);
  }

  RotationMatrix transpose() const { return RotationMatrix(r_.transpose()); }
  const Mat3& matrix() const { return r_; }
  double operator()(int i, int j) const { return r_(i, j); }

  friend RotationMatrix operator*(const RotationMatrix& a, const RotationMatrix& b) {
    return RotationMatrix(a.r_ * b.r_);
  }

 private:
  explicit RotationMatrix(const Mat3& r) : r_(r) {}
  Mat3 r_;
};

inline SymTensor2 rotate(const SymTensor2& t, const RotationMatrix& r) {
  return SymTensor2(r.matrix() * t.matrix() * r.matrix().transpose());
}

class Tensor4 {
 public:
  Tensor4() { c_.fill(0.0); }

  // Symmetrizes the supplied components over ij<->ji and kl<->lk, and over
  // ij<->kl when major_symmetric is set.
  static Tensor4 from_components(const std::array<double, 81>& c, bool major_symmetric) {
    Tensor4 t;
    t.major_ = major_symmetric;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) {
            double v = 0.25 * (c[idx(i, j, k, l)] + c[idx(j, i, k, l)] + c[idx(i, j, l, k)] +
                               c[idx(j, i, l, k)]);
            if (major_symmetric) {
              const double w = 0.25 * (c[idx(k, l, i, j)] + c[idx(l, k, i, j)] +
                                       c[idx(k, l, j, i)] + c[idx(l, k, j, i)]);
              v = 0.5 * (v + w);
            }
            t.c_[idx(i, j, k, l)] = v;
          }
    return t;
  }

  static Tensor4 from_mandel(const Mat6& m, bool major_symmetric) {
    return from_matrix(m, major_symmetric, [](int I, int J) {
      return detail::mandel_weight(I) * detail::mandel_weight(J);
    });
  }

  // Stiffness-like 6x6 (stress = C strain); must be symmetric to 1e-12.
  static Tensor4 from_voigt_stiffness(const Mat6& c) {
    require_symmetric(c, "Voigt stiffness");
    return from_matrix(c, true, [](int, int) { return 1.0; });
  }

  static Tensor4 from_voigt_compliance(const Mat6& s) {
    require_symmetric(s, "Voigt compliance");
    return from_matrix(s, true, [](int I, int J) {
      return detail::engineering_weight(I) * detail::engineering_weight(J);
    });
  }

  // Strain-to-strain map in Voigt strain notation.
  static Tensor4 from_voigt_strain_map(const Mat6& t) {
    return from_matrix(t, false, [](int I, int) { return detail::engineering_weight(I); });
  }

  // Symmetric identity: I:X = X for symmetric X.
  static Tensor4 identity() { return from_mandel(Mat6::Identity(), true); }

  double operator()(int i, int j, int k, int l) const { return c_[idx(i, j, k, l)]; }
  bool major_symmetric() const { return major_; }
  const std::array<double, 81>& components() const { return c_; }

  Mat6 mandel() const {
    return to_matrix([](int I, int J) {
      return detail::mandel_weight(I) * detail::mandel_weight(J);
    });
  }
  Mat6 voigt_stiffness() const {
    return to_matrix([](int, int) { return 1.0; });
  }
  Mat6 voigt_compliance() const {
    return to_matrix([](int I, int J) {
      return detail::engineering_weight(I) * detail::engineering_weight(J);
    });
  }
  Mat6 voigt_strain_map() const {
    return to_matrix([](int I, int) { return detail::engineering_weight(I); });
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  friend Tensor4 operator-(const Tensor4& a, const Tensor4& b) {
    Tensor4 r;
    r.major_ = a.major_ && b.major_;
    for (std::size_t n = 0; n < r.c_.size(); ++n) r.c_[n] = a.c_[n] - b.c_[n];
    return r;
  }

  static constexpr int idx(int i, int j, int k, int l) { return ((i * 3 + j) * 3 + k) * 3 + l; }

 private:
  template <class Weight>
  static Tensor4 from_matrix(const Mat6& m, bool major_symmetric, Weight weight) {
    Tensor4 t;
    t.major_ = major_symmetric;
    for (int I = 0; I < 6; ++I) {
      const auto [i, j] = kVoigtPairs[I];
      for (int J = 0; J < 6; ++J) {
        const auto [k, l] = kVoigtPairs[J];
        const double v = m(I, J) / weight(I, J);
        t.c_[idx(i, j, k, l)] = v;
        t.c_[idx(j, i, k, l)] = v;
        t.c_[idx(i, j, l, k)] = v;
        t.c_[idx(j, i, l, k)] = v;
      }
    }
    return t;
  }

  template <class Weight>
  Mat6 to_matrix(Weight weight) const {
    Mat6 m;
    for (int I = 0; I < 6; ++I) {
      const auto [i, j] = kVoigtPairs[I];
      for (int J = 0; J < 6; ++J) {
        const auto [k, l] = kVoigtPairs[J];
        m(I, J) = weight(I, J) * c_[idx(i, j, k, l)];
      }
    }
    return m;
  }

  static void require_symmetric(const Mat6& m, const char* what) {
    const double scale = m.cwiseAbs().maxCoeff();
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale) {
      throw ArgumentError(std::string(what) + " matrix is not symmetric (max |A - A^T| = " +
                          std::to_string(asym) + ")");
    }
  }

  std::array<double, 81> c_{};
  bool major_ = true;
};

inline SymTensor2 double_contract(const Tensor4& a, const SymTensor2& x) {
  Mat3 out = Mat3::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) s += a(i, j, k, l) * x(k, l);
      out(i, j) = s;
    }
  return SymTensor2(out);
}

// (A:B)_ijkl = A_ijmn B_mnkl
inline Tensor4 compose(const Tensor4& a, const Tensor4& b) {
  std::array<double, 81> c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) {
          double s = 0.0;
          for (int m = 0; m < 3; ++m)
            for (int n = 0; n < 3; ++n) s += a(i, j, m, n) * b(m, n, k, l);
          c[Tensor4::idx(i, j, k, l)] = s;
        }
  return Tensor4::from_components(c, false);
}

inline double max_abs_diff(const Tensor4& a, const Tensor4& b) { return (a - b).max_abs(); }

// Eigenvalues of the Mandel 6x6 form, ascending. Meaningful for major
// symmetric tensors only.
inline Vec6 mandel_eigenvalues(const Tensor4& a) {
  Eigen::SelfAdjointEigenSolver<Mat6> solver(a.mandel(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

// Positive definite when the smallest Mandel eigenvalue exceeds 1e-8 times
// the largest.
inline bool is_positive_definite(const Tensor4& a) {
  if (!a.major_symmetric()) return false;
  const Vec6 ev = mandel_eigenvalues(a);
  return ev(5) > 0.0 && ev(0) > 1e-8 * ev(5);
}

inline void require_positive_definite(const Tensor4& a, const std::string& what) {
  if (!a.major_symmetric()) throw DefinitenessError(what + " lacks major symmetry");
  const Vec6 ev = mandel_eigenvalues(a);
  if (!(ev(5) > 0.0 && ev(0) > 1e-8 * ev(5))) {
    throw DefinitenessError(what + " is not positive definite (Mandel eigenvalues " +
                            std::to_string(ev(0)) + " .. " + std::to_string(ev(5)) + ")");
  }
}

// C_ijkl = lambda d_ij d_kl + mu (d_ik d_jl + d_il d_jk)
inline Tensor4 isotropic_stiffness(double youngs, double poisson) {
  if (!(youngs > 0.0)) throw DefinitenessError("Young's modulus must be positive");
  if (!(poisson > -1.0 && poisson < 0.5)) {
    throw DefinitenessError("Poisson ratio must lie in (-1, 0.5), got " + std::to_string(poisson));
  }
  const double lambda = youngs * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
  const double mu = youngs / (2.0 * (1.0 + poisson));
  Mat6 c = Mat6::Zero();
  c.topLeftCorner<3, 3>().setConstant(lambda);
  c.topLeftCorner<3, 3>().diagonal().array() += 2.0 * mu;
  c.bottomRightCorner<3, 3>().diagonal().setConstant(mu);
  return Tensor4::from_voigt_stiffness(c);
}

// S = C^-1 on the space of symmetric tensors.
inline Tensor4 invert_stiffness(const Tensor4& c) {
  require_positive_definite(c, "stiffness");
  const Mat6 inv = c.mandel().inverse();
  return Tensor4::from_mandel(0.5 * (inv + inv.transpose()), true);
}

// A^R_ijkl = R_im R_jn R_kp R_lq A_mnpq, applied one index at a time.
inline Tensor4 rotate_tensor4(const Tensor4& a, const RotationMatrix& r) {
  std::array<double, 81> cur = a.components();
  std::array<double, 81> next{};
  for (int slot = 0; slot < 4; ++slot) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
          for (int l = 0; l < 3; ++l) {
            std::array<int, 4> ix{i, j, k, l};
            double s = 0.0;
            for (int m = 0; m < 3; ++m) {
              std::array<int, 4> src = ix;
              src[slot] = m;
              s += r(ix[slot], m) * cur[Tensor4::idx(src[0], src[1], src[2], src[3])];
            }
            next[Tensor4::idx(i, j, k, l)] = s;
          }
    cur = next;
  }
  return Tensor4::from_components(cur, a.major_symmetric());
}

inline Tensor4 axis_swap_xz(const Tensor4& a) {
  return rotate_tensor4(a, RotationMatrix::axis_swap_xz());
}

}  // namespace fiberstrain

#endif  // FIBERSTRAIN_TENSOR_HPP
