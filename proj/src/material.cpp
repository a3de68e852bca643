#include "strainmech/material.hpp"

#include <algorithm>

namespace strainmech {

SimpEval simp_modulus(double rho_bar, double E_solid, const SimpParams& simp) {
  if (rho_bar < -1e-12 || rho_bar > 1.0 + 1e-12)
    throw ConfigError("simp_modulus: density outside [0,1]: " + std::to_string(rho_bar));
  const double rho = std::clamp(rho_bar, 0.0, 1.0);
  const double E_void = E_solid * simp.void_ratio;
  const double rp = std::pow(rho, simp.p);
  SimpEval out;
  out.E = E_void + (E_solid - E_void) * rp;
  out.dE = rho > 0.0 ? simp.p * (E_solid - E_void) * std::pow(rho, simp.p - 1.0)
                     : (simp.p == 1.0 ? (E_solid - E_void) : 0.0);
  return out;
}

GammaEval gamma_factor(double rho_bar, double p, const GammaParams& gp) {
  const double rho = std::clamp(rho_bar, 0.0, 1.0);
  const double rp = std::pow(rho, p);
  const double denom = std::tanh(gp.beta1 * gp.eta0) + std::tanh(gp.beta1 * (1.0 - gp.eta0));
  const double th = std::tanh(gp.beta1 * (rp - gp.eta0));
  GammaEval out;
  out.gamma = (std::tanh(gp.beta1 * gp.eta0) + th) / denom;
  const double sech2 = 1.0 - th * th;
  const double drp = rho > 0.0 ? p * std::pow(rho, p - 1.0) : (p == 1.0 ? 1.0 : 0.0);
  out.dgamma = gp.beta1 * sech2 / denom * drp;
  return out;
}

Kinematics Kinematics::from_disp_grad(const Matrix2d& grad_u) {
  Kinematics kin;
  kin.F = Matrix2d::Identity() + grad_u;
  kin.C = kin.F.transpose() * kin.F;
  kin.J = kin.F.determinant();
  kin.I1C = kin.C.trace() + 1.0;  // F_33 = 1
  kin.inverted = !(kin.J > kInversionFloor);
  return kin;
}

double strain_energy(const Kinematics& kin, const MaterialParams& mat) {
  const double G = mat.shear_modulus();
  const double kap = mat.kappa();
  return 0.5 * G * (kin.I1C - 3.0) - G * std::log(kin.J) +
         0.5 * kap * (kin.J - 1.0) * (kin.J - 1.0);
}

Vector3d pk2_stress(const Kinematics& kin, const MaterialParams& mat) {
  const double G = mat.shear_modulus();
  const double kap = mat.kappa();
  const Matrix2d Cinv = kin.C.inverse();
  const double coef = kap * (kin.J - 1.0) * kin.J - G;
  Vector3d s;
  s(0) = G + coef * Cinv(0, 0);
  s(1) = G + coef * Cinv(1, 1);
  s(2) = coef * Cinv(0, 1);
  return s;
}

Matrix3d material_tangent(const Kinematics& kin, const MaterialParams& mat) {
  const double G = mat.shear_modulus();
  const double kap = mat.kappa();
  const Matrix2d Ci = kin.C.inverse();
  const double J = kin.J;
  const double a = kap * (2.0 * J - 1.0) * J;        // C^-1 (x) C^-1 coefficient
  const double b = G - kap * (J - 1.0) * J;          // (C^-1 . C^-1) coefficient
  const double c00 = Ci(0, 0), c11 = Ci(1, 1), c01 = Ci(0, 1);
  Matrix3d D;
  D(0, 0) = a * c00 * c00 + b * 2.0 * c00 * c00;
  D(1, 1) = a * c11 * c11 + b * 2.0 * c11 * c11;
  D(0, 1) = a * c00 * c11 + b * 2.0 * c01 * c01;
  D(0, 2) = a * c00 * c01 + b * 2.0 * c00 * c01;
  D(1, 2) = a * c11 * c01 + b * 2.0 * c11 * c01;
  D(2, 2) = a * c01 * c01 + b * (c00 * c11 + c01 * c01);
  D(1, 0) = D(0, 1);
  D(2, 0) = D(0, 2);
  D(2, 1) = D(1, 2);
  return D;
}

Matrix3d linear_tangent(const MaterialParams& mat) {
  const double G = mat.shear_modulus();
  const double kap = mat.kappa();
  Matrix3d D = Matrix3d::Zero();
  D(0, 0) = kap + 2.0 * G;
  D(1, 1) = kap + 2.0 * G;
  D(0, 1) = D(1, 0) = kap;
  D(2, 2) = G;
  return D;
}

LinearEval linear_energy_stress(const Matrix2d& grad_u, const MaterialParams& mat) {
  LinearEval out;
  out.strain(0) = grad_u(0, 0);
  out.strain(1) = grad_u(1, 1);
  out.strain(2) = grad_u(0, 1) + grad_u(1, 0);
  out.stress = linear_tangent(mat) * out.strain;
  out.W = 0.5 * out.strain.dot(out.stress);
  return out;
}

QuadKernel::QuadKernel(double dx, double dy, const MaterialParams& unit_mat)
    : mat_(unit_mat.at_unit_modulus()), area_(dx * dy) {
  // Shape functions on [-1,1]^2, node order (-,-), (+,-), (+,+), (-,+).
  const double g = 1.0 / std::sqrt(3.0);
  const double xi[4] = {-g, g, g, -g};
  const double et[4] = {-g, -g, g, g};
  const double detJ = 0.25 * dx * dy;
  auto table = [&](double s, double t) {
    Eigen::Matrix<double, 4, 2> dN;
    const double sx = 2.0 / dx, sy = 2.0 / dy;
    dN(0, 0) = -0.25 * (1 - t) * sx;  dN(0, 1) = -0.25 * (1 - s) * sy;
    dN(1, 0) =  0.25 * (1 - t) * sx;  dN(1, 1) = -0.25 * (1 + s) * sy;
    dN(2, 0) =  0.25 * (1 + t) * sx;  dN(2, 1) =  0.25 * (1 + s) * sy;
    dN(3, 0) = -0.25 * (1 + t) * sx;  dN(3, 1) =  0.25 * (1 - s) * sy;
    return dN;
  };
  for (int q = 0; q < 4; ++q) {
    dNdX_[q] = table(xi[q], et[q]);
    wdetJ_[q] = detJ;
  }
  dNdX_c_ = table(0.0, 0.0);

  d_lin_ = linear_tangent(mat_);
  k_lin_.setZero();
  for (int q = 0; q < 4; ++q) {
    const Matrix38d B = b_matrix(Matrix2d::Identity(), dNdX_[q]);
    k_lin_ += wdetJ_[q] * B.transpose() * d_lin_ * B;
  }
}

Matrix2d QuadKernel::disp_grad(const Vector8d& v, const Eigen::Matrix<double, 4, 2>& dN) const {
  Matrix2d g = Matrix2d::Zero();
  for (int a = 0; a < 4; ++a) {
    g(0, 0) += v(2 * a) * dN(a, 0);
    g(0, 1) += v(2 * a) * dN(a, 1);
    g(1, 0) += v(2 * a + 1) * dN(a, 0);
    g(1, 1) += v(2 * a + 1) * dN(a, 1);
  }
  return g;
}

Matrix38d QuadKernel::b_matrix(const Matrix2d& F, const Eigen::Matrix<double, 4, 2>& dN) {
  Matrix38d B;
  for (int a = 0; a < 4; ++a) {
    const double dN1 = dN(a, 0), dN2 = dN(a, 1);
    B(0, 2 * a)     = F(0, 0) * dN1;
    B(0, 2 * a + 1) = F(1, 0) * dN1;
    B(1, 2 * a)     = F(0, 1) * dN2;
    B(1, 2 * a + 1) = F(1, 1) * dN2;
    B(2, 2 * a)     = F(0, 0) * dN2 + F(0, 1) * dN1;
    B(2, 2 * a + 1) = F(1, 0) * dN2 + F(1, 1) * dN1;
  }
  return B;
}

QuadKernel::NlEval QuadKernel::eval_nonlinear(const Vector8d& v, bool need_stiffness) const {
  NlEval out;
  for (int q = 0; q < 4; ++q) {
    const Kinematics kin = Kinematics::from_disp_grad(disp_grad(v, dNdX_[q]));
    if (kin.inverted) {
      out.inverted = true;
      return out;
    }
    const double w = wdetJ_[q];
    out.W += w * strain_energy(kin, mat_);
    const Vector3d S = pk2_stress(kin, mat_);
    const Matrix38d B = b_matrix(kin.F, dNdX_[q]);
    out.f += w * B.transpose() * S;
    if (need_stiffness) {
      const Matrix3d D = material_tangent(kin, mat_);
      out.k += w * B.transpose() * D * B;
      // Geometric part: S contracted with shape gradients, same for both dofs
      // of a node pair.
      const auto& dN = dNdX_[q];
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          const double gab = dN(a, 0) * (S(0) * dN(b, 0) + S(2) * dN(b, 1)) +
                             dN(a, 1) * (S(2) * dN(b, 0) + S(1) * dN(b, 1));
          out.k(2 * a, 2 * b) += w * gab;
          out.k(2 * a + 1, 2 * b + 1) += w * gab;
        }
      }
    }
  }
  return out;
}

QuadKernel::ElemEval QuadKernel::eval(const Vector8d& u, double gamma, double E_e,
                                      double thickness, bool need_stiffness) const {
  ElemEval out;
  const double Et = E_e * thickness;
  const double lin_coef = 1.0 - gamma * gamma;
  if (gamma > 1e-12) {
    const NlEval nl = eval_nonlinear(gamma * u, need_stiffness);
    if (nl.inverted) {
      out.inverted = true;
      return out;
    }
    out.W = Et * nl.W;
    out.f = Et * gamma * nl.f;
    if (need_stiffness) out.k = Et * gamma * gamma * nl.k;
  }
  const Vector8d klu = k_lin_ * u;
  out.W += Et * 0.5 * lin_coef * u.dot(klu);
  out.f += Et * lin_coef * klu;
  if (need_stiffness) out.k += Et * lin_coef * k_lin_;
  return out;
}

bool QuadKernel::dforce_dgamma(const Vector8d& u, double gamma, double thickness,
                               Vector8d& out) const {
  // d/dgamma of [gamma f_nl(gamma u) + (1 - gamma^2) k_lin u] at unit modulus.
  const NlEval nl = eval_nonlinear(gamma * u, true);
  if (nl.inverted) return false;
  out = thickness * (nl.f + gamma * (nl.k * u) - 2.0 * gamma * (k_lin_ * u));
  return true;
}

Vector3d QuadKernel::center_strain(const Vector8d& u) const {
  const Matrix2d g = disp_grad(u, dNdX_c_);
  const Matrix2d F = Matrix2d::Identity() + g;
  const Matrix2d E = 0.5 * (F.transpose() * F - Matrix2d::Identity());
  return Vector3d(E(0, 0), E(1, 1), 2.0 * E(0, 1));
}

Matrix38d QuadKernel::center_strain_derivative(const Vector8d& u) const {
  const Matrix2d F = Matrix2d::Identity() + disp_grad(u, dNdX_c_);
  return b_matrix(F, dNdX_c_);
}

}  // namespace strainmech
