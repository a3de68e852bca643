#pragma once

#include <array>
#include <cmath>

#include "strainmech/types.hpp"

namespace strainmech {

enum class PlaneMode { Strain, Stress };

// Isotropic elastic parameters. G and kappa follow the plane-mode formulas
// used throughout: kappa = E/(2(1-nu)) for plane stress and
// E/(2(1+nu)(1-2nu)) for plane strain. All constitutive evaluations run at
// unit Young's modulus; the element modulus enters multiplicatively.
struct MaterialParams {
  double E = 1.0;
  double nu = 0.45;
  PlaneMode plane = PlaneMode::Strain;

  double shear_modulus() const { return E / (2.0 * (1.0 + nu)); }
  double kappa() const {
    if (plane == PlaneMode::Stress) return E / (2.0 * (1.0 - nu));
    return E / (2.0 * (1.0 + nu) * (1.0 - 2.0 * nu));
  }
  MaterialParams at_unit_modulus() const {
    MaterialParams m = *this;
    m.E = 1.0;
    return m;
  }
};

// Modified SIMP: E(rho) = Ev + (Es - Ev) rho^p with Ev = Es * void_ratio.
struct SimpParams {
  double p = 3.0;
  double void_ratio = 1e-6;
};

struct SimpEval {
  double E;
  double dE;  // dE/drho
};

SimpEval simp_modulus(double rho_bar, double E_solid, const SimpParams& simp);

// Projection controlling the nonlinear/linear energy blend per element.
struct GammaParams {
  double beta1 = 500.0;
  double eta0 = 0.01;
};

struct GammaEval {
  double gamma;
  double dgamma;  // dgamma/drho_bar
};

// gamma(rho_bar) evaluated through rho_bar^p; gamma(0)=0, gamma(1)=1.
GammaEval gamma_factor(double rho_bar, double p, const GammaParams& gp);

// Plane kinematics from a 2x2 displacement gradient, F_33 = 1.
struct Kinematics {
  Matrix2d F;
  Matrix2d C;
  double J;     // det F
  double I1C;   // tr C (3x3) = tr C_2x2 + 1
  bool inverted;  // J below the inversion guard

  static Kinematics from_disp_grad(const Matrix2d& grad_u);
};

// Determinant floor below which an element is flagged inverted instead of
// evaluating ln J.
inline constexpr double kInversionFloor = 1e-8;

// Compressible neo-Hookean at unit modulus:
//   W = G/2 (I1C - 3) - G ln J + kappa/2 (J - 1)^2,
// the potential whose exact derivative is pk2_stress below (stress-free at
// the reference state).
double strain_energy(const Kinematics& kin, const MaterialParams& mat);

// Second Piola-Kirchhoff stress S = G(I - C^-1) + kappa (J-1) J C^-1,
// in-plane block as Voigt (S11, S22, S12).
Vector3d pk2_stress(const Kinematics& kin, const MaterialParams& mat);

// Voigt material tangent C_SE = 2 dS/dC for strain vector (E11, E22, 2E12).
Matrix3d material_tangent(const Kinematics& kin, const MaterialParams& mat);

// Small-strain tangent from (G, kappa): the C = I limit of material_tangent.
Matrix3d linear_tangent(const MaterialParams& mat);

// Small-strain energy and stress at unit modulus for a displacement gradient.
struct LinearEval {
  double W;
  Vector3d stress;  // (s11, s22, s12)
  Vector3d strain;  // (e11, e22, e12_eng)
};
LinearEval linear_energy_stress(const Matrix2d& grad_u, const MaterialParams& mat);

// Element-level evaluation for one bilinear quad of a regular grid.
// Holds shape-function derivative tables at the 2x2 Gauss points and the
// element center, plus the constant unit-modulus, unit-thickness linear
// stiffness. All elements of a structured mesh share one kernel.
//
// Node order is counter-clockwise: (0,0), (1,0), (1,1), (0,1) in local
// element coordinates; dof order interleaves (ux, uy) per node.
class QuadKernel {
 public:
  QuadKernel(double dx, double dy, const MaterialParams& unit_mat);

  struct NlEval {
    double W = 0.0;
    Vector8d f = Vector8d::Zero();
    Matrix8d k = Matrix8d::Zero();
    bool inverted = false;
  };

  // Unit-modulus total-Lagrangian evaluation at nodal displacements v.
  NlEval eval_nonlinear(const Vector8d& v, bool need_stiffness) const;

  struct ElemEval {
    double W = 0.0;
    Vector8d f = Vector8d::Zero();
    Matrix8d k = Matrix8d::Zero();
    bool inverted = false;
  };

  // Interpolated energy E_e [ W(gamma u) - W_L(gamma u) + W_L(u) ] with the
  // exact force/stiffness derivatives; thickness scales the integral.
  ElemEval eval(const Vector8d& u, double gamma, double E_e, double thickness,
                bool need_stiffness) const;

  // d(force)/dgamma at unit modulus, thickness included. Used by the adjoint
  // sensitivity path; returns the inverted flag through the bool.
  bool dforce_dgamma(const Vector8d& u, double gamma, double thickness,
                     Vector8d& out) const;

  // Green-Lagrange strain at the element center, Voigt (E11, E22, 2E12).
  Vector3d center_strain(const Vector8d& u) const;

  // Exact derivative of center_strain w.r.t. the 8 nodal displacements;
  // equals the total-Lagrangian B matrix at the center.
  Matrix38d center_strain_derivative(const Vector8d& u) const;

  const Matrix8d& linear_stiffness() const { return k_lin_; }
  double area() const { return area_; }
  const MaterialParams& unit_material() const { return mat_; }

  // Shape-function derivative table at Gauss point g (4 nodes x 2 dims).
  const Eigen::Matrix<double, 4, 2>& dNdX(int g) const { return dNdX_[g]; }
  const Eigen::Matrix<double, 4, 2>& dNdX_center() const { return dNdX_c_; }
  double gauss_weight(int g) const { return wdetJ_[g]; }

 private:
  Matrix2d disp_grad(const Vector8d& v, const Eigen::Matrix<double, 4, 2>& dN) const;
  static Matrix38d b_matrix(const Matrix2d& F, const Eigen::Matrix<double, 4, 2>& dN);

  std::array<Eigen::Matrix<double, 4, 2>, 4> dNdX_;
  std::array<double, 4> wdetJ_;
  Eigen::Matrix<double, 4, 2> dNdX_c_;
  Matrix8d k_lin_;  // unit modulus, unit thickness
  Matrix3d d_lin_;
  MaterialParams mat_;
  double area_;
};

}  // namespace strainmech
