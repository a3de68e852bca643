// Acceptance suite: one self-contained check per numbered criterion, each
// printing a PASS/FAIL line. Run with --criteria 1,2,... or no argument for
// all. Long optimization runs live in criteria 6-10 and read the shipped
// configs.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "strainmech/driver.hpp"
#include "strainmech/io.hpp"
#include "strainmech/mma.hpp"

using namespace strainmech;

namespace {

#ifndef CONFIGS_DIR
#define CONFIGS_DIR "configs"
#endif

struct Reporter {
  bool all_ok = true;
  void report(int id, bool ok, const std::string& what, const std::string& detail) {
    all_ok = all_ok && ok;
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << "criterion " << id << ": " << what;
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << std::endl;
  }
};

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

// --- criterion 1: constitutive oracles -----------------------------------
void criterion1(Reporter& rep) {
  MaterialParams mat;
  mat.nu = 0.45;
  std::mt19937 rng(101);
  const double h = 1e-6;
  double worst_s = 0.0, worst_d = 0.0;
  std::uniform_real_distribution<double> dd(-1.0, 1.0);
  for (int s = 0; s < 120; ++s) {
    const Matrix2d F = random_admissible_F(rng, 0.3);
    const Kinematics kin = Kinematics::from_disp_grad(F - Matrix2d::Identity());
    const Vector3d S = pk2_stress(kin, mat);
    const double c00 = kin.C(0, 0), c11 = kin.C(1, 1), c01 = kin.C(0, 1);
    const Vector3d S_fd(
        (energy_of_C(c00 + h, c11, c01, c01, mat) - energy_of_C(c00 - h, c11, c01, c01, mat)) / h,
        (energy_of_C(c00, c11 + h, c01, c01, mat) - energy_of_C(c00, c11 - h, c01, c01, mat)) / h,
        (energy_of_C(c00, c11, c01 + h, c01, mat) - energy_of_C(c00, c11, c01 - h, c01, mat)) / h);
    worst_s = std::max(worst_s, (S - S_fd).norm() / std::max(1.0, S_fd.norm()));

    const Matrix3d D = material_tangent(kin, mat);
    Matrix2d dC;
    const double a = dd(rng), b = dd(rng), c = dd(rng);
    dC << a, c, c, b;
    auto stress_at = [&](double t) {
      Kinematics k2 = kin;
      k2.C = kin.C + t * dC;
      k2.J = std::sqrt(k2.C.determinant());
      return pk2_stress(k2, mat);
    };
    const Vector3d dS_fd = (stress_at(h) - stress_at(-h)) / (2.0 * h);
    const Vector3d dS = 0.5 * D * Vector3d(a, b, 2.0 * c);
    worst_d = std::max(worst_d, (dS - dS_fd).norm() / std::max(1.0, dS_fd.norm()));
  }
  const Kinematics id = Kinematics::from_disp_grad(Matrix2d::Zero());
  const bool rest_ok =
      std::abs(strain_energy(id, mat)) <= 1e-14 && pk2_stress(id, mat).norm() <= 1e-14;
  std::ostringstream det;
  det << "stress FD err " << worst_s << ", tangent FD err " << worst_d;
  rep.report(1, worst_s < 1e-6 && worst_d < 1e-6 && rest_ok,
             "constitutive stress/tangent FD oracles, stress-free reference", det.str());
}

// --- criterion 2: assembly oracles ----------------------------------------
void criterion2(Reporter& rep) {
  MaterialParams unit;
  unit.nu = 0.45;
  double worst_f = 0.0, worst_k = 0.0;
  for (int nx : {2, 3}) {
    const Mesh mesh = Mesh::build({nx, nx, 1.0 * nx, 1.1 * nx, 1.3});
    const RegionMap region = tag_regions(mesh, {}, 1, 2.0, 1.3);
    std::vector<BcSpec> bcs;
    BcSpec left;
    left.edge = Edge::Left;
    left.fix_x = left.fix_y = true;
    bcs.push_back(left);
    ActuationSpec act;
    act.x = nx;
    act.y = nx * 1.1;
    act.dir = 0;
    act.force = 0.1;
    act.spring = 2.0;
    const DofMap dofs = apply_boundary_conditions(mesh, bcs, {act});
    CaseContext ctx(mesh, region, dofs, unit);

    std::mt19937 rng(7 + nx);
    std::uniform_real_distribution<double> d(-0.02, 0.02);
    VectorXd u = VectorXd::Zero(mesh.n_dofs());
    for (int k = 0; k < dofs.n_free; ++k) u(dofs.free_dofs[k]) = d(rng);

    for (double gamma : {0.0, 0.5, 1.0}) {
      ElementFields ef;
      ef.E = VectorXd::Constant(mesh.n_elems(), 2.0);
      ef.dE = VectorXd::Zero(mesh.n_elems());
      ef.gamma = VectorXd::Constant(mesh.n_elems(), gamma);
      ef.dgamma = VectorXd::Zero(mesh.n_elems());

      VectorXd r;
      if (!ctx.assemble(u, ef, r, nullptr)) continue;
      const Eigen::MatrixXd K = Eigen::MatrixXd(ctx.tangent());
      const double h = 1e-7;
      for (int k = 0; k < dofs.n_free; ++k) {
        VectorXd up = u, um = u;
        up(dofs.free_dofs[k]) += h;
        um(dofs.free_dofs[k]) -= h;
        const double fd = (ctx.total_energy(up, ef) - ctx.total_energy(um, ef)) / (2 * h);
        worst_f = std::max(worst_f, std::abs(r(k) - fd) / std::max(1.0, std::abs(fd)));
        VectorXd rp, rm;
        ctx.internal_force(up, ef, rp);
        ctx.internal_force(um, ef, rm);
        const VectorXd col = (rp - rm) / (2 * h);
        worst_k = std::max(worst_k, (K.col(k) - col).norm() / std::max(1.0, col.norm()));
      }
    }
  }
  std::ostringstream det;
  det << "force FD err " << worst_f << ", tangent FD err " << worst_k;
  rep.report(2, worst_f < 1e-5 && worst_k < 1e-5,
             "global force/tangent are exact energy derivatives (3x3, gamma 0/0.5/1)",
             det.str());
}

// --- criterion 3: end-to-end adjoint battery ------------------------------
RunConfig adjoint_battery_config() {
  RunConfig cfg;
  cfg.name = "adjoint_battery";
  cfg.grid = {10, 6, 10.0, 6.0, 1.0};
  cfg.design_E = 25.0;
  cfg.design_nu = 0.45;
  RegionBox tissue;
  tissue.role = Role::Tissue;
  tissue.x0 = 4.0;
  tissue.y0 = 2.0;
  tissue.x1 = 6.0;
  tissue.y1 = 4.0;
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
  act.y = 3.0;
  act.dir = 0;
  act.force = -0.6;
  act.spring = 5.0;
  cfg.actuations.push_back(act);
  cfg.target.exx = 0.05;
  cfg.target.w = Vector3d(1, 0, 0);
  cfg.filter.radius_elements = 1.6;
  cfg.schedule.beta_init = 2.0;
  cfg.newton.tol_rel = 1e-12;
  cfg.newton.tol_abs = 1e-14;
  cfg.newton.max_iters = 80;
  return cfg;
}

void criterion3(Reporter& rep) {
  const RunConfig cfg = adjoint_battery_config();
  const Problem p = build_problem(cfg);
  CaseContext ctx(p.mesh, p.canonical(), p.dofs, cfg.unit_material());
  const int n = static_cast<int>(p.canonical().design_elems.size());
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> d(0.08, 0.55);
  VectorXd x0(n);
  for (int i = 0; i < n; ++i) x0(i) = d(rng);
  const ProjectionParams proj{2.0, 0.5, 0.05};

  auto objective_at = [&](const VectorXd& x, bool gamma_path, VectorXd* grad) {
    const DesignField field = robust_fields(x, p.canonical(), p.kernel, proj);
    const ElementFields ef =
        make_element_fields(field.rho_bar[kIntermediate], p.canonical(), cfg.simp, cfg.gamma);
    VectorXd u;
    if (!ctx.newton_solve(ef, cfg.newton, u).converged)
      throw SolverError("battery: no convergence");
    const double f = strain_objective(window_strains(ctx, u), cfg.target).f;
    if (grad) {
      const VectorXd dfdu = objective_displacement_gradient(ctx, u, cfg.target);
      const VectorXd lambda = ctx.adjoint_solve(dfdu);
      const VectorXd dL = design_sensitivity(ctx, u, lambda, ef, gamma_path);
      *grad = chain_rule_backprop(dL, field, kIntermediate, p.canonical(), p.kernel);
    }
    return f;
  };

  VectorXd g_full, g_ablated;
  objective_at(x0, true, &g_full);
  objective_at(x0, false, &g_ablated);
  const double h = 1e-6;
  double worst = 0.0, worst_ablated = 0.0;
  int checked = 0;
  for (int i = 0; i < n; ++i) {
    VectorXd xp = x0, xm = x0;
    xp(i) += h;
    xm(i) -= h;
    const double fd =
        (objective_at(xp, true, nullptr) - objective_at(xm, true, nullptr)) / (2 * h);
    if (std::abs(fd) <= 1e-10) continue;
    ++checked;
    worst = std::max(worst, std::abs(g_full(i) - fd) / std::abs(fd));
    worst_ablated = std::max(worst_ablated, std::abs(g_ablated(i) - fd) / std::abs(fd));
  }
  std::ostringstream det;
  det << "components " << checked << "/" << n << ", adjoint err " << worst
      << ", gamma-ablated err " << worst_ablated;
  rep.report(3, worst < 1e-4 && worst_ablated > 1e-4 && checked > n / 2,
             "end-to-end adjoint gradient matches FD; gamma path is live", det.str());
}

// --- criterion 4: filter/projection properties ----------------------------
void criterion4(Reporter& rep) {
  const Mesh mesh = Mesh::build({14, 9, 14.0, 9.0, 1.0});
  const RegionMap region = tag_regions(mesh, {}, 1, 1.0, 1.0);
  const FilterKernel kernel = FilterKernel::build(mesh, 2.2);
  bool ok = true;
  std::ostringstream det;

  const VectorXd c = VectorXd::Constant(mesh.n_elems(), 0.613);
  ok = ok && (kernel.apply(c) - c).lpNorm<Eigen::Infinity>() < 1e-12;

  VectorXd rb, dr;
  VectorXd ends(3);
  ends << 0.0, 1.0, 0.5;
  for (double beta : {1.0, 8.0, 64.0}) {
    heaviside_project(ends, beta, 0.5, rb, dr);
    ok = ok && std::abs(rb(0)) < 1e-14 && std::abs(rb(1) - 1.0) < 1e-14 &&
         std::abs(rb(2) - 0.5) < 1e-14;
  }

  std::mt19937 rng(77);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  VectorXd x(mesh.n_elems());
  for (int e = 0; e < mesh.n_elems(); ++e) x(e) = d(rng);
  ProjectionParams proj{4.0, 0.5, 0.05};
  const DesignField f = robust_fields(x, region, kernel, proj);
  for (int e = 0; e < mesh.n_elems(); ++e) {
    ok = ok && f.rho_bar[kEroded](e) <= f.rho_bar[kIntermediate](e) + 1e-14;
    ok = ok && f.rho_bar[kIntermediate](e) <= f.rho_bar[kDilated](e) + 1e-14;
  }

  double worst_fd = 0.0;
  const double h = 1e-6;
  for (double beta : {1.0, 6.0, 24.0}) {
    for (double r : {0.12, 0.47, 0.5, 0.53, 0.91}) {
      VectorXd v(1);
      v(0) = r;
      heaviside_project(v, beta, 0.5, rb, dr);
      const double fd =
          (heaviside_point(r + h, beta, 0.5) - heaviside_point(r - h, beta, 0.5)) / (2 * h);
      worst_fd = std::max(worst_fd, std::abs(dr(0) - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  ok = ok && worst_fd < 1e-8;
  det << "projection derivative FD err " << worst_fd;
  rep.report(4, ok, "filter/projection: constants, endpoints, ordering, derivative",
             det.str());
}

// --- criterion 5: MMA oracles ----------------------------------------------
void criterion5(Reporter& rep) {
  bool ok = true;
  std::ostringstream det;
  {
    const int n = 40;
    MmaSolver mma(n, 1, 0);
    VectorXd x = VectorXd::Constant(n, 0.6);
    int reached = -1;
    double worst_move = 0.0;
    for (int it = 1; it <= 60; ++it) {
      VectorXd f(1);
      f(0) = (x.array() - 0.3).square().sum();
      Eigen::MatrixXd g(1, n);
      g.row(0) = 2.0 * (x.array() - 0.3).matrix().transpose();
      const VectorXd xn = mma.update(x, f, g, VectorXd(0), Eigen::MatrixXd(0, n));
      worst_move = std::max(worst_move, (xn - x).lpNorm<Eigen::Infinity>());
      x = xn;
      if ((x.array() - 0.3).abs().maxCoeff() < 1e-4) {
        reached = it;
        break;
      }
    }
    ok = ok && reached > 0 && worst_move <= 0.1 + 1e-9;
    det << "quadratic converged at iter " << reached << ", max step " << worst_move;
  }
  {
    MmaSolver mma(1, 2, 0);
    VectorXd x(1);
    x(0) = 0.02;
    for (int it = 0; it < 80; ++it) {
      VectorXd f(2);
      f << x(0), 1.0 - x(0);
      Eigen::MatrixXd g(2, 1);
      g << 1.0, -1.0;
      const VectorXd xn = mma.update(x, f, g, VectorXd(0), Eigen::MatrixXd(0, 1));
      if ((xn - x).lpNorm<Eigen::Infinity>() > 0.1 + 1e-9) ok = false;
      x = xn;
    }
    ok = ok && std::abs(x(0) - 0.5) < 1e-3;
    det << ", minmax x = " << x(0);
  }
  rep.report(5, ok, "MMA: quadratic optimum, min/max saddle, move limit", det.str());
}

// --- criteria 6-10: optimization runs --------------------------------------
struct RunSummary {
  IterationRecord last;
  bool aborted = false;
  int n_records = 0;
  double mean_exx = 0.0;
  std::string trace_text;
};

RunSummary run_config(RunConfig cfg, const std::string& out_dir) {
  const Problem p = build_problem(cfg);
  const RunResult res = run_optimization(p);
  if (!out_dir.empty()) write_outputs(p, res, out_dir);
  RunSummary s;
  s.aborted = res.aborted;
  s.n_records = static_cast<int>(res.trace.size());
  if (!res.trace.empty()) s.last = res.trace.back();
  const int c_int1 = kIntermediate * p.n_bt + 0;
  if (!res.case_obj.empty()) s.mean_exx = res.case_obj[static_cast<size_t>(c_int1)].mean_strain(0);
  s.trace_text = trace_csv_text(p, res.trace);
  return s;
}

std::string strip_wall_ms(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) out << line.substr(0, line.rfind(',')) << '\n';
  return out.str();
}

void criterion6(Reporter& rep) {
  RunConfig cfg = RunConfig::from_json_file(std::string(CONFIGS_DIR) + "/accept_example1.json");
  const RunSummary s = run_config(cfg, "accept_out/example1");
  std::ostringstream det;
  det << "Err_x " << s.last.err(0) << "%, Mnd " << s.last.mnd << "%, |Vf_i-0.25| "
      << std::abs(s.last.vf_i - 0.25);
  const bool ok = !s.aborted && s.n_records == cfg.optim.max_iters && s.last.err(0) <= 25.0 &&
                  s.last.mnd <= 5.0 && std::abs(s.last.vf_i - 0.25) <= 5e-3;
  rep.report(6, ok, "scaled axial-strain benchmark (100x50, 250 iters)", det.str());
}

void criterion7(Reporter& rep) {
  RunConfig cfg = RunConfig::from_json_file(std::string(CONFIGS_DIR) + "/accept_example2.json");
  const RunSummary s = run_config(cfg, "accept_out/example2");
  std::ostringstream det;
  det << "Err (" << s.last.err(0) << ", " << s.last.err(1) << ", " << s.last.err(2) << ")%";
  const bool ok = !s.aborted && s.last.err(0) <= 20.0 && s.last.err(1) <= 20.0 &&
                  s.last.err(2) <= 20.0;
  rep.report(7, ok, "scaled biaxial benchmark (100x50, 250 iters)", det.str());
}

void criterion8(Reporter& rep) {
  RunConfig cfg = RunConfig::from_json_file(std::string(CONFIGS_DIR) + "/accept_cbm1.json");
  const RunSummary s = run_config(cfg, "accept_out/cbm1");
  std::ostringstream det;
  det << "Err_x " << s.last.err(0) << "%, records " << s.n_records << "/"
      << cfg.optim.max_iters << (s.aborted ? ", ABORTED" : "");
  const bool ok = !s.aborted && s.n_records == cfg.optim.max_iters && s.last.err(0) <= 20.0;
  rep.report(8, ok, "scaled flexible-poles benchmark, 6 cases converge every iteration",
             det.str());
}

void criterion9(Reporter& rep) {
  const double targets[4] = {0.05, 0.10, 0.15, 0.20};
  double means[4];
  bool ok = true;
  std::ostringstream det;
  for (int k = 0; k < 4; ++k) {
    RunConfig cfg = RunConfig::from_json_file(std::string(CONFIGS_DIR) + "/accept_cbm1.json");
    cfg.name = "cbm_trend_" + std::to_string(k + 1);
    cfg.target.exx = targets[k];
    cfg.scale_mesh(0.5);  // 60 x 88 desk-scale mesh
    for (auto& b : cfg.regions)
      if (b.role == Role::Tissue) b.window_inset = {0, 5, 0, 0};  // element counts at the coarser mesh
    cfg.optim.max_iters = 120;
    cfg.schedule.double_every = 12;
    const RunSummary s = run_config(cfg, "accept_out/cbm_trend" + std::to_string(k + 1));
    means[k] = s.mean_exx;
    ok = ok && !s.aborted;
    det << (k ? ", " : "") << "target " << targets[k] << " -> mean " << means[k];
  }
  for (int k = 0; k < 4; ++k)
    ok = ok && std::abs(means[k] - targets[k]) <= 0.30 * targets[k];
  for (int k = 1; k < 4; ++k) ok = ok && means[k] > means[k - 1];
  rep.report(9, ok, "trend across targets 5/10/15/20%: mean window strain within "
             "+/-30% and monotone", det.str());
}

void criterion10(Reporter& rep) {
  RunConfig cfg = RunConfig::from_json_file(std::string(CONFIGS_DIR) + "/accept_example1.json");
  const RunSummary a = run_config(cfg, "");
  const RunSummary b = run_config(cfg, "");
  const bool ok = !a.aborted && strip_wall_ms(a.trace_text) == strip_wall_ms(b.trace_text);
  rep.report(10, ok, "determinism: two identical runs produce identical traces",
             ok ? "byte-identical after dropping wall_ms" : "traces differ");
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criteria") == 0 && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string tok;
      while (std::getline(ss, tok, ',')) selected.push_back(std::stoi(tok));
    }
  }
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

  Reporter rep;
  for (int id : selected) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      switch (id) {
        case 1: criterion1(rep); break;
        case 2: criterion2(rep); break;
        case 3: criterion3(rep); break;
        case 4: criterion4(rep); break;
        case 5: criterion5(rep); break;
        case 6: criterion6(rep); break;
        case 7: criterion7(rep); break;
        case 8: criterion8(rep); break;
        case 9: criterion9(rep); break;
        case 10: criterion10(rep); break;
        default:
          rep.report(id, false, "unknown criterion", "");
      }
    } catch (const std::exception& e) {
      rep.report(id, false, "exception", e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "         criterion " << id << " wall time " << secs << " s" << std::endl;
  }
  return rep.all_ok ? 0 : 1;
}
