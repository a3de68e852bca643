#include <cmath>
#include <random>

#include "doctest.h"
#include "strainmech/material.hpp"

using namespace strainmech;

namespace {

MaterialParams plane_strain_nu45() {
  MaterialParams m;
  m.nu = 0.45;
  m.plane = PlaneMode::Strain;
  return m;
}

// Independent scalar evaluation of the energy as a function of C entries.
double energy_of_C(double c00, double c11, double c01, double c10, const MaterialParams& mat) {
  const double I1 = c00 + c11 + 1.0;
  const double J = std::sqrt(c00 * c11 - c01 * c10);
  const double G = mat.shear_modulus(), kap = mat.kappa();
  return 0.5 * G * (I1 - 3.0) - G * std::log(J) + 0.5 * kap * (J - 1.0) * (J - 1.0);
}

Matrix2d random_admissible_F(std::mt19937& rng, double spread) {
  std::uniform_real_distribution<double> d(-spread, spread);
  for (;;) {
    Matrix2d g;
    g << d(rng), d(rng), d(rng), d(rng);
    const Matrix2d F = Matrix2d::Identity() + g;
    if (F.determinant() > 0.35) return F;
  }
}

}  // namespace

TEST_CASE("simp modulus endpoints and derivative") {
  SimpParams simp;  // p = 3, void ratio 1e-6
  CHECK(simp_modulus(1.0, 25.0, simp).E == doctest::Approx(25.0).epsilon(1e-14));
  CHECK(simp_modulus(0.0, 25.0, simp).E == doctest::Approx(25.0e-6).epsilon(1e-14));
  // Direct evaluation: Ev + (Es - Ev) * 0.5^3 at Es = 25.
  CHECK(simp_modulus(0.5, 25.0, simp).E == doctest::Approx(3.125021875).epsilon(1e-12));

  const double h = 1e-7;
  for (double rho : {0.2, 0.5, 0.9}) {
    const double fd =
        (simp_modulus(rho + h, 25.0, simp).E - simp_modulus(rho - h, 25.0, simp).E) / (2 * h);
    CHECK(simp_modulus(rho, 25.0, simp).dE == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK_THROWS_AS(simp_modulus(1.2, 25.0, simp), ConfigError);
}

TEST_CASE("gamma factor endpoints, value, monotonicity") {
  GammaParams gp;  // beta1 = 500, eta0 = 0.01
  CHECK(gamma_factor(0.0, 3.0, gp).gamma == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(gamma_factor(1.0, 3.0, gp).gamma == doctest::Approx(1.0).epsilon(1e-15));
  // rho^p = 0.125 >> eta0, so gamma saturates at 1.
  CHECK(gamma_factor(0.5, 3.0, gp).gamma == doctest::Approx(1.0).epsilon(1e-10));

  double prev = -1.0;
  for (int i = 0; i <= 200; ++i) {
    const double g = gamma_factor(i / 200.0, 3.0, gp).gamma;
    CHECK(g >= prev - 1e-14);
    prev = g;
  }
  const double h = 1e-8;
  for (double rho : {0.18, 0.215, 0.26}) {  // transition region
    const double fd = (gamma_factor(rho + h, 3.0, gp).gamma -
                       gamma_factor(rho - h, 3.0, gp).gamma) / (2 * h);
    CHECK(gamma_factor(rho, 3.0, gp).dgamma == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("strain energy: reference state, positivity, closed form") {
  const MaterialParams mat = plane_strain_nu45();
  const Kinematics id = Kinematics::from_disp_grad(Matrix2d::Zero());
  CHECK(strain_energy(id, mat) == doctest::Approx(0.0).epsilon(1e-14));

  std::mt19937 rng(42);
  for (int i = 0; i < 200; ++i) {
    const Matrix2d F = random_admissible_F(rng, 0.2);
    const Kinematics kin = Kinematics::from_disp_grad(F - Matrix2d::Identity());
    CHECK(strain_energy(kin, mat) >= -1e-13);
  }

  // Uniaxial stretch F = diag(1.2, 1): independent evaluation of the formula.
  Matrix2d g = Matrix2d::Zero();
  g(0, 0) = 0.2;
  const Kinematics kin = Kinematics::from_disp_grad(g);
  const double I1 = 1.2 * 1.2 + 1.0 + 1.0;
  const double J = 1.2;
  const double expected = 0.5 * mat.shear_modulus() * (I1 - 3.0) -
                          mat.shear_modulus() * std::log(J) +
                          0.5 * mat.kappa() * (J - 1.0) * (J - 1.0);
  CHECK(strain_energy(kin, mat) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("objectivity: W(QF) = W(F) for random rotations") {
  const MaterialParams mat = plane_strain_nu45();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const Matrix2d F = random_admissible_F(rng, 0.25);
    const double th = ang(rng);
    Matrix2d Q;
    Q << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    const double w1 = strain_energy(Kinematics::from_disp_grad(F - Matrix2d::Identity()), mat);
    const double w2 =
        strain_energy(Kinematics::from_disp_grad(Q * F - Matrix2d::Identity()), mat);
    CHECK(std::abs(w1 - w2) < 1e-12 * std::max(1.0, std::abs(w1)));
  }
}

TEST_CASE("pk2 stress: zero at identity, FD consistency, volumetric isotropy") {
  const MaterialParams mat = plane_strain_nu45();
  const Kinematics id = Kinematics::from_disp_grad(Matrix2d::Zero());
  CHECK(pk2_stress(id, mat).norm() == doctest::Approx(0.0).epsilon(1e-14));

  std::mt19937 rng(7);
  const double h = 1e-6;
  for (int i = 0; i < 120; ++i) {
    const Matrix2d F = random_admissible_F(rng, 0.3);
    const Kinematics kin = Kinematics::from_disp_grad(F - Matrix2d::Identity());
    const Vector3d S = pk2_stress(kin, mat);
    const double c00 = kin.C(0, 0), c11 = kin.C(1, 1), c01 = kin.C(0, 1);
    const Vector3d S_fd(
        (energy_of_C(c00 + h, c11, c01, c01, mat) - energy_of_C(c00 - h, c11, c01, c01, mat)) / h,
        (energy_of_C(c00, c11 + h, c01, c01, mat) - energy_of_C(c00, c11 - h, c01, c01, mat)) / h,
        (energy_of_C(c00, c11, c01 + h, c01, mat) - energy_of_C(c00, c11, c01 - h, c01, mat)) / h);
    CHECK((S - S_fd).norm() < 1e-6 * std::max(1.0, S_fd.norm()));
  }

  Matrix2d g = Matrix2d::Zero();
  g(0, 0) = g(1, 1) = 0.1;  // C = 1.21 I
  const Vector3d Sv = pk2_stress(Kinematics::from_disp_grad(g), mat);
  CHECK(Sv(0) == doctest::Approx(Sv(1)).epsilon(1e-13));
  CHECK(std::abs(Sv(2)) < 1e-14);
}

TEST_CASE("material tangent: FD consistency, small-strain limit, symmetry") {
  const MaterialParams mat = plane_strain_nu45();
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const double h = 1e-6;
  for (int i = 0; i < 120; ++i) {
    const Matrix2d F = random_admissible_F(rng, 0.3);
    const Kinematics kin = Kinematics::from_disp_grad(F - Matrix2d::Identity());
    const Matrix3d D = material_tangent(kin, mat);
    CHECK((D - D.transpose()).lpNorm<Eigen::Infinity>() < 1e-12 * D.lpNorm<Eigen::Infinity>());
    const double a = d(rng), b = d(rng), c = d(rng);
    Matrix2d dC;
    dC << a, c, c, b;
    auto stress_at = [&](double t) {
      Kinematics k2 = kin;
      k2.C = kin.C + t * dC;
      k2.J = std::sqrt(k2.C.determinant());
      return pk2_stress(k2, mat);
    };
    const Vector3d dS_fd = (stress_at(h) - stress_at(-h)) / (2.0 * h);
    const Vector3d dS = 0.5 * D * Vector3d(a, b, 2.0 * c);  // dE = dC/2
    CHECK((dS - dS_fd).norm() < 1e-6 * std::max(1.0, dS_fd.norm()));
  }

  const Kinematics id = Kinematics::from_disp_grad(Matrix2d::Zero());
  CHECK((material_tangent(id, mat) - linear_tangent(mat)).norm() < 1e-12);
}

TEST_CASE("linear model: zero displacement, rotation sensitivity, Taylor consistency") {
  const MaterialParams mat = plane_strain_nu45();
  CHECK(linear_energy_stress(Matrix2d::Zero(), mat).W == 0.0);

  // 10-degree rigid rotation strains the linear model but not the nonlinear.
  const double th = 10.0 * M_PI / 180.0;
  Matrix2d Q;
  Q << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  const Matrix2d g = Q - Matrix2d::Identity();
  CHECK(linear_energy_stress(g, mat).W > 1e-4);
  CHECK(std::abs(strain_energy(Kinematics::from_disp_grad(g), mat)) < 1e-12);

  std::mt19937 rng(5);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    Matrix2d gg;
    gg << d(rng), d(rng), d(rng), d(rng);
    gg *= 1e-6;
    const double wl = linear_energy_stress(gg, mat).W;
    const double w = strain_energy(Kinematics::from_disp_grad(gg), mat);
    CHECK(std::abs(w - wl) < 1e-4 * std::max(wl, 1e-30));
  }
}

TEST_CASE("interpolated element energy: limits and exact derivatives") {
  const MaterialParams mat = plane_strain_nu45();
  const QuadKernel kernel(0.7, 1.3, mat);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> d(-0.06, 0.06);
  Vector8d u;
  for (int i = 0; i < 8; ++i) u(i) = d(rng);
  const double E = 3.3, t = 2.0;

  // gamma = 1: fully nonlinear; gamma = 0: fully linear.
  const auto full = kernel.eval(u, 1.0, E, t, false);
  const auto nl = kernel.eval_nonlinear(u, false);
  CHECK(full.W == doctest::Approx(E * t * nl.W).epsilon(1e-13));
  const auto lin = kernel.eval(u, 0.0, E, t, false);
  const Vector8d klu = kernel.linear_stiffness() * u;
  CHECK(lin.W == doctest::Approx(E * t * 0.5 * u.dot(klu)).epsilon(1e-13));

  for (double gamma : {0.0, 0.3, 0.5, 1.0}) {
    const auto ev = kernel.eval(u, gamma, E, t, true);
    const double h = 1e-7;
    for (int i = 0; i < 8; ++i) {
      Vector8d up = u, um = u;
      up(i) += h;
      um(i) -= h;
      const double fd =
          (kernel.eval(up, gamma, E, t, false).W - kernel.eval(um, gamma, E, t, false).W) /
          (2 * h);
      CHECK(ev.f(i) == doctest::Approx(fd).epsilon(2e-6));
      const Vector8d kfd = (kernel.eval(up, gamma, E, t, false).f -
                            kernel.eval(um, gamma, E, t, false).f) / (2 * h);
      CHECK((ev.k.col(i) - kfd).norm() < 1e-5 * std::max(1.0, kfd.norm()));
    }
    // dforce/dgamma against FD in gamma.
    if (gamma > 0.05 && gamma < 0.95) {
      Vector8d dfdg;
      REQUIRE(kernel.dforce_dgamma(u, gamma, t, dfdg));
      const double hg = 1e-7;
      const Vector8d fd_g = (kernel.eval(u, gamma + hg, 1.0, t, false).f -
                             kernel.eval(u, gamma - hg, 1.0, t, false).f) / (2 * hg);
      CHECK((dfdg - fd_g).norm() < 1e-6 * std::max(1.0, fd_g.norm()));
    }
  }
}
