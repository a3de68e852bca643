#include "strainmech/verify.hpp"

#include <cmath>
#include <functional>
#include <iomanip>
#include <random>

#include "strainmech/driver.hpp"

namespace strainmech {

namespace {

struct Battery {
  std::ostream& out;
  bool all_ok = true;

  void check(const std::string& name, double err, double tol) {
    const bool ok = err < tol;
    all_ok = all_ok && ok;
    out << (ok ? "[PASS] " : "[FAIL] ") << name << "  (err " << std::scientific
        << std::setprecision(2) << err << ", tol " << tol << ")\n";
  }
};

// W as an explicit scalar function of the (possibly asymmetric) C entries,
// for unambiguous dW/dC differencing.
double energy_of_C(double c00, double c11, double c01, double c10, const MaterialParams& mat) {
  const double I1 = c00 + c11 + 1.0;
  const double detC = c00 * c11 - c01 * c10;
  const double J = std::sqrt(detC);
  const double G = mat.shear_modulus(), kap = mat.kappa();
  return 0.5 * G * (I1 - 3.0) - G * std::log(J) + 0.5 * kap * (J - 1.0) * (J - 1.0);
}

Matrix2d random_admissible_F(std::mt19937& rng, double spread) {
  std::uniform_real_distribution<double> d(-spread, spread);
  Matrix2d g;
  for (;;) {
    g << d(rng), d(rng), d(rng), d(rng);
    const Matrix2d F = Matrix2d::Identity() + g;
    if (F.determinant() > 0.35) return F;
  }
}

double stress_fd_error(std::mt19937& rng, const MaterialParams& mat, int n_states) {
  double worst = 0.0;
  const double h = 1e-6;
  for (int s = 0; s < n_states; ++s) {
    const Matrix2d F = random_admissible_F(rng, 0.3);
    Kinematics kin = Kinematics::from_disp_grad(F - Matrix2d::Identity());
    const Vector3d S = pk2_stress(kin, mat);
    const double c00 = kin.C(0, 0), c11 = kin.C(1, 1), c01 = kin.C(0, 1);
    // S_IJ = 2 dW/dC_IJ with independent entries.
    const double s00 =
        (energy_of_C(c00 + h, c11, c01, c01, mat) - energy_of_C(c00 - h, c11, c01, c01, mat)) / h;
    const double s11 =
        (energy_of_C(c00, c11 + h, c01, c01, mat) - energy_of_C(c00, c11 - h, c01, c01, mat)) / h;
    const double s01 =
        (energy_of_C(c00, c11, c01 + h, c01, mat) - energy_of_C(c00, c11, c01 - h, c01, mat)) / h;
    const Vector3d S_fd(s00, s11, s01);
    worst = std::max(worst, (S - S_fd).norm() / std::max(1e-12, S_fd.norm()));
  }
  return worst;
}

double tangent_fd_error(std::mt19937& rng, const MaterialParams& mat, int n_states) {
  double worst = 0.0;
  const double h = 1e-6;
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int s = 0; s < n_states; ++s) {
    const Matrix2d F = random_admissible_F(rng, 0.3);
    const Kinematics kin = Kinematics::from_disp_grad(F - Matrix2d::Identity());
    const Matrix3d D = material_tangent(kin, mat);
    Matrix2d dC;
    const double a = d(rng), b = d(rng), c = d(rng);
    dC << a, c, c, b;
    auto stress_at = [&](double t) {
      Kinematics k2 = kin;
      k2.C = kin.C + t * dC;
      k2.J = std::sqrt(k2.C.determinant());
      return pk2_stress(k2, mat);
    };
    const Vector3d dS_fd = (stress_at(h) - stress_at(-h)) / (2.0 * h);
    const Vector3d dS = 0.5 * D * Vector3d(a, b, 2.0 * c);  // dE = dC/2
    worst = std::max(worst, (dS - dS_fd).norm() / std::max(1e-12, dS_fd.norm()));
  }
  return worst;
}

double element_force_fd_error(std::mt19937& rng) {
  MaterialParams mat;
  mat.nu = 0.45;
  const QuadKernel kernel(0.8, 1.1, mat);
  std::uniform_real_distribution<double> d(-0.08, 0.08);
  Vector8d u;
  for (int i = 0; i < 8; ++i) u(i) = d(rng);
  const double gamma = 0.5, E = 2.5, t = 1.7, h = 1e-7;
  const auto ev = kernel.eval(u, gamma, E, t, false);
  double worst = 0.0;
  for (int i = 0; i < 8; ++i) {
    Vector8d up = u, um = u;
    up(i) += h;
    um(i) -= h;
    const double fd =
        (kernel.eval(up, gamma, E, t, false).W - kernel.eval(um, gamma, E, t, false).W) / (2 * h);
    worst = std::max(worst, std::abs(ev.f(i) - fd) / std::max(1e-10, std::abs(fd)));
  }
  return worst;
}

// Small strain-targeting problem shared by assembly and adjoint checks.
RunConfig toy_config() {
  RunConfig cfg;
  cfg.name = "verify_toy";
  cfg.grid = {6, 4, 6.0, 4.0, 1.0};
  cfg.design_E = 25.0;
  cfg.design_nu = 0.45;
  RegionBox tissue;
  tissue.role = Role::Tissue;
  tissue.x0 = 2.0;
  tissue.y0 = 1.0;
  tissue.x1 = 4.0;
  tissue.y1 = 3.0;
  tissue.E = 0.1;
  tissue.window_inset = {0, 0, 0, 0};
  cfg.regions.push_back(tissue);
  BcSpec right;
  right.edge = Edge::Right;
  right.fix_x = right.fix_y = true;
  cfg.bcs.push_back(right);
  BcSpec bottom;
  bottom.edge = Edge::Bottom;
  bottom.fix_y = true;
  cfg.bcs.push_back(bottom);
  ActuationSpec act;
  act.x = 0.0;
  act.y = 2.0;
  act.dir = 0;
  act.force = -0.4;
  act.spring = 5.0;
  cfg.actuations.push_back(act);
  cfg.target.exx = 0.05;
  cfg.target.w = Vector3d(1.0, 0.0, 0.0);
  cfg.filter.radius_elements = 1.5;
  cfg.schedule.beta_init = 2.0;
  cfg.schedule.delta_eta = 0.05;
  cfg.newton.tol_rel = 1e-12;
  cfg.newton.tol_abs = 1e-13;
  cfg.optim.max_iters = 1;
  return cfg;
}

VectorXd toy_design(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(0.08, 0.55);
  VectorXd x(n);
  for (int i = 0; i < n; ++i) x(i) = d(rng);
  return x;
}

double assembly_fd_error() {
  const RunConfig cfg = toy_config();
  const Problem p = build_problem(cfg);
  CaseContext ctx(p.mesh, p.canonical(), p.dofs, cfg.unit_material());
  const VectorXd x = toy_design(static_cast<int>(p.canonical().design_elems.size()), 11u);
  ProjectionParams proj{cfg.schedule.beta_init, 0.5, 0.05};
  const DesignField field = robust_fields(x, p.canonical(), p.kernel, proj);
  const ElementFields ef =
      make_element_fields(field.rho_bar[kIntermediate], p.canonical(), cfg.simp, cfg.gamma);

  VectorXd u = VectorXd::Zero(p.mesh.n_dofs());
  std::mt19937 rng(3u);
  std::uniform_real_distribution<double> d(-0.02, 0.02);
  for (int k = 0; k < p.dofs.n_free; ++k) u(p.dofs.free_dofs[k]) = d(rng);

  VectorXd r_int;
  if (!ctx.internal_force(u, ef, r_int)) return 1e9;
  const double h = 1e-7;
  double worst = 0.0;
  for (int k = 0; k < p.dofs.n_free; ++k) {
    VectorXd up = u, um = u;
    up(p.dofs.free_dofs[k]) += h;
    um(p.dofs.free_dofs[k]) -= h;
    const double fd = (ctx.total_energy(up, ef) - ctx.total_energy(um, ef)) / (2 * h);
    worst = std::max(worst, std::abs(r_int(k) - fd) / std::max(1e-9, std::abs(fd)));
  }
  return worst;
}

double adjoint_fd_error() {
  const RunConfig cfg = toy_config();
  const Problem p = build_problem(cfg);
  CaseContext ctx(p.mesh, p.canonical(), p.dofs, cfg.unit_material());
  const int n = static_cast<int>(p.canonical().design_elems.size());
  const VectorXd x0 = toy_design(n, 29u);
  const ProjectionParams proj{cfg.schedule.beta_init, 0.5, 0.05};

  auto objective_at = [&](const VectorXd& x, VectorXd* grad) {
    const DesignField field = robust_fields(x, p.canonical(), p.kernel, proj);
    const ElementFields ef =
        make_element_fields(field.rho_bar[kIntermediate], p.canonical(), cfg.simp, cfg.gamma);
    VectorXd u = VectorXd::Zero(p.mesh.n_dofs());
    const SolveReport rep = ctx.newton_solve(ef, cfg.newton, u);
    if (!rep.converged) throw SolverError("verify toy: no convergence");
    const ObjectiveValue obj = strain_objective(window_strains(ctx, u), cfg.target);
    if (grad) {
      const VectorXd dfdu = objective_displacement_gradient(ctx, u, cfg.target);
      const VectorXd lambda = ctx.adjoint_solve(dfdu);
      const VectorXd dL = design_sensitivity(ctx, u, lambda, ef, true);
      *grad = chain_rule_backprop(dL, field, kIntermediate, p.canonical(), p.kernel);
    }
    return obj.f;
  };

  VectorXd grad;
  objective_at(x0, &grad);
  const double h = 1e-6;
  double worst = 0.0;
  for (int i = 0; i < n; i += 3) {  // spot-check a third of the variables
    VectorXd xp = x0, xm = x0;
    xp(i) += h;
    xm(i) -= h;
    const double fd = (objective_at(xp, nullptr) - objective_at(xm, nullptr)) / (2 * h);
    if (std::abs(fd) < 1e-10) continue;
    worst = std::max(worst, std::abs(grad(i) - fd) / std::abs(fd));
  }
  return worst;
}

}  // namespace

bool run_verify(std::ostream& out) {
  Battery b{out};
  std::mt19937 rng(7u);
  MaterialParams mat;
  mat.nu = 0.45;
  b.check("pk2_stress = 2 dW/dC (FD, 100 states)", stress_fd_error(rng, mat, 100), 1e-6);
  b.check("material_tangent = 2 dS/dC (FD, 100 states)", tangent_fd_error(rng, mat, 100), 1e-6);
  b.check("interpolated element force = dW/du (FD, gamma 0.5)", element_force_fd_error(rng), 1e-6);
  b.check("global F_int = d(total energy)/du (FD, 6x4)", assembly_fd_error(), 1e-6);
  b.check("adjoint df/drho vs end-to-end FD (6x4)", adjoint_fd_error(), 1e-4);
  out << (b.all_ok ? "verify: all checks passed\n" : "verify: FAILURES present\n");
  return b.all_ok;
}

}  // namespace strainmech
