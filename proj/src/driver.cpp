#include "strainmech/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "strainmech/io.hpp"

namespace strainmech {

Problem build_problem(const RunConfig& cfg) {
  cfg.validate();
  Problem p;
  p.cfg = cfg;
  p.mesh = Mesh::build(cfg.grid);
  p.n_bt = cfg.n_variants();
  p.kernel = FilterKernel::build(p.mesh, cfg.filter_radius(p.mesh));
  for (int k = 1; k <= p.n_bt; ++k) {
    p.regions.push_back(
        tag_regions(p.mesh, cfg.regions, k, cfg.design_E, cfg.grid.thickness));
    if (p.regions.back().window_elems.empty())
      throw ConfigError("variant " + std::to_string(k) + " has no objective-window elements");
  }
  for (int k = 1; k < p.n_bt; ++k)
    if (p.regions[static_cast<size_t>(k)].design_elems != p.regions[0].design_elems)
      throw ConfigError("tissue variants must not change the design region");
  p.dofs = apply_boundary_conditions(p.mesh, cfg.bcs, cfg.actuations);
  return p;
}

namespace {

struct CaseOutcome {
  bool converged = false;
  int inverted_element = -1;
  double f = 0.0;
  ObjectiveValue obj;
  VectorXd grad;  // df/drho over design variables
  int newton_iters = 0;
};

// Solves one load case to equilibrium and carries the adjoint back to the
// design variables. `u` is the warm start and receives the converged state.
CaseOutcome process_case(CaseContext& ctx, const Problem& p, const DesignField& field, int layer,
                         VectorXd& u) {
  CaseOutcome out;
  const RegionMap& region = ctx.region();
  VectorXd rho_case = field.rho_bar[static_cast<size_t>(layer)];
  for (Eigen::Index e = 0; e < rho_case.size(); ++e)
    if (region.is_passive(static_cast<int>(e)))
      rho_case(e) = region.passive_density(static_cast<int>(e));
  const ElementFields ef = make_element_fields(rho_case, region, p.cfg.simp, p.cfg.gamma);

  const SolveReport rep = ctx.newton_solve(ef, p.cfg.newton, u);
  out.newton_iters = rep.newton_iters;
  out.inverted_element = rep.inverted_element;
  if (!rep.converged) return out;

  out.obj = strain_objective(window_strains(ctx, u), p.cfg.target);
  out.f = out.obj.f;
  const VectorXd dfdu = objective_displacement_gradient(ctx, u, p.cfg.target);
  const VectorXd lambda = ctx.adjoint_solve(dfdu);
  const VectorXd dL_drho_bar = design_sensitivity(ctx, u, lambda, ef, true);
  out.grad = chain_rule_backprop(dL_drho_bar, field, static_cast<Layer>(layer), p.canonical(),
                                 p.kernel);
  out.converged = true;
  return out;
}

VectorXd initial_design(const Problem& p) {
  const double rho0 = p.cfg.init.density >= 0.0 ? p.cfg.init.density : p.cfg.optim.vol_frac;
  const int n = static_cast<int>(p.canonical().design_elems.size());
  VectorXd x = VectorXd::Constant(n, rho0);
  if (p.cfg.init.jitter > 0.0) {
    std::mt19937 rng(p.cfg.init.seed);
    std::uniform_real_distribution<double> dist(-p.cfg.init.jitter, p.cfg.init.jitter);
    for (int i = 0; i < n; ++i) x(i) = std::clamp(x(i) + dist(rng), 0.0, 1.0);
  }
  return x;
}

}  // namespace

RunResult run_optimization(const Problem& p, int threads) {
  RunResult res;
  res.x = initial_design(p);
  res.vd_star = p.cfg.optim.vol_frac;

  ProjectionParams proj{p.cfg.schedule.beta_init, p.cfg.schedule.eta, p.cfg.schedule.delta_eta};
  res.field = robust_fields(res.x, p.canonical(), p.kernel, proj);
  if (p.cfg.optim.max_iters == 0) return res;

  const int n_cases = p.n_cases();
  const int n_workers = std::max(1, std::min(threads, n_cases));

  // Per-worker equilibrium contexts, one per variant, reused across
  // iterations so the tangent pattern is built once.
  std::vector<std::vector<std::unique_ptr<CaseContext>>> ctx(static_cast<size_t>(n_workers));
  const MaterialParams unit = p.cfg.unit_material();
  for (int w = 0; w < n_workers; ++w) {
    ctx[static_cast<size_t>(w)].resize(static_cast<size_t>(p.n_bt));
    for (int k = 0; k < p.n_bt; ++k) {
      // Built lazily: a worker may never touch some variant.
      ctx[static_cast<size_t>(w)][static_cast<size_t>(k)] = nullptr;
    }
  }
  auto context_for = [&](int worker, int variant) -> CaseContext& {
    auto& slot = ctx[static_cast<size_t>(worker)][static_cast<size_t>(variant)];
    if (!slot)
      slot = std::make_unique<CaseContext>(p.mesh, p.regions[static_cast<size_t>(variant)],
                                           p.dofs, unit);
    return *slot;
  };

  res.case_u.assign(static_cast<size_t>(n_cases), VectorXd::Zero(p.mesh.n_dofs()));
  res.case_obj.assign(static_cast<size_t>(n_cases), ObjectiveValue{});
  std::vector<CaseOutcome> outcomes(static_cast<size_t>(n_cases));

  MmaOptions mma_opts;
  mma_opts.move = p.cfg.optim.move_limit;
  mma_opts.c_penalty = p.cfg.optim.mma_c;
  MmaSolver mma(static_cast<int>(res.x.size()), n_cases, 1, mma_opts);
  double obj_scale = -1.0;

  for (int t = 1; t <= p.cfg.optim.max_iters; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    proj.beta = p.cfg.schedule.beta_at(t);
    res.field = robust_fields(res.x, p.canonical(), p.kernel, proj);
    if (t % p.cfg.optim.vdstar_update_every == 0)
      res.vd_star = update_dilated_volume_bound(res.field, p.canonical(), p.cfg.optim.vol_frac);

    auto run_worker = [&](int w) {
      for (int c = w; c < n_cases; c += n_workers) {
        try {
          outcomes[static_cast<size_t>(c)] =
              process_case(context_for(w, p.case_variant(c)), p, res.field, p.case_layer(c),
                           res.case_u[static_cast<size_t>(c)]);
        } catch (const std::exception&) {
          outcomes[static_cast<size_t>(c)] = CaseOutcome{};
        }
      }
    };
    if (n_workers == 1) {
      run_worker(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<size_t>(n_workers));
      for (int w = 0; w < n_workers; ++w) pool.emplace_back(run_worker, w);
      for (auto& th : pool) th.join();
    }

    IterationRecord rec;
    rec.iter = t;
    rec.beta = proj.beta;
    rec.vd_star = res.vd_star;
    rec.vf_d = volume_fraction(res.field.rho_bar[kDilated], p.canonical());
    rec.vf_i = volume_fraction(res.field.rho_bar[kIntermediate], p.canonical());
    rec.vf_e = volume_fraction(res.field.rho_bar[kEroded], p.canonical());
    rec.mnd = gray_indicator(res.field.rho_bar[kIntermediate], p.canonical());

    bool all_ok = true;
    rec.f.resize(static_cast<size_t>(n_cases));
    for (int c = 0; c < n_cases; ++c) {
      const auto& oc = outcomes[static_cast<size_t>(c)];
      all_ok = all_ok && oc.converged;
      rec.f[static_cast<size_t>(c)] = oc.f;
      rec.newton_iters += oc.newton_iters;
      res.case_obj[static_cast<size_t>(c)] = oc.obj;
      if (p.case_layer(c) == kIntermediate && p.case_variant(c) == 0)
        rec.err = rms_errors(oc.obj, p.cfg.target);
    }
    rec.worst_case = static_cast<int>(std::max_element(rec.f.begin(), rec.f.end()) -
                                      rec.f.begin());
    rec.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    res.trace.push_back(rec);

    if (p.cfg.output.dump_every > 0 && t % p.cfg.output.dump_every == 0) {
      ensure_dir(p.cfg.output.dir);
      write_pgm(p.cfg.output.dir + "/snap_intermediate_" + std::to_string(t) + ".pgm",
                p.cfg.grid.nx, p.cfg.grid.ny, res.field.rho_bar[kIntermediate]);
    }

    if (!all_ok) {
      res.aborted = true;
      std::ostringstream msg;
      msg << "equilibrium solve failed at iteration " << t << " (cases:";
      for (int c = 0; c < n_cases; ++c)
        if (!outcomes[static_cast<size_t>(c)].converged) {
          msg << ' ' << c;
          if (outcomes[static_cast<size_t>(c)].inverted_element >= 0)
            msg << "[inverted elem " << outcomes[static_cast<size_t>(c)].inverted_element << ']';
        }
      msg << ")";
      res.abort_reason = msg.str();
      return res;
    }

    if (t == p.cfg.optim.max_iters) break;  // final analysis is not updated away

    if (obj_scale < 0.0) {
      const double worst = rec.f[static_cast<size_t>(rec.worst_case)];
      obj_scale = worst > 1e-12 ? 1.0 / worst : 1.0;
    }
    VectorXd branch_vals(n_cases);
    Eigen::MatrixXd branch_grads(n_cases, res.x.size());
    for (int c = 0; c < n_cases; ++c) {
      branch_vals(c) = obj_scale * rec.f[static_cast<size_t>(c)];
      branch_grads.row(c) = obj_scale * outcomes[static_cast<size_t>(c)].grad.transpose();
    }
    VectorXd constr_vals(1);
    constr_vals(0) = rec.vf_d / res.vd_star - 1.0;
    Eigen::MatrixXd constr_grads(1, res.x.size());
    constr_grads.row(0) =
        (volume_sensitivity(res.field, p.canonical(), p.kernel) / res.vd_star).transpose();

    res.x = mma.update(res.x, branch_vals, branch_grads, constr_vals, constr_grads);
  }
  return res;
}

std::string trace_csv_text(const Problem& p, const std::vector<IterationRecord>& trace) {
  std::ostringstream out;
  out << "iter";
  for (int l = 0; l < 3; ++l) {
    const char tag = "die"[static_cast<size_t>(l)];
    for (int k = 1; k <= p.n_bt; ++k) out << ",f_" << tag << k;
  }
  out << ",worst,Vf_d,Vf_i,Vf_e,Vd_star,beta,Mnd,Err_x,Err_y,Err_xy,newton_iters,wall_ms\n";
  out << std::setprecision(17);
  for (const auto& r : trace) {
    out << r.iter;
    for (double f : r.f) out << ',' << f;
    out << ',' << r.worst_case << ',' << r.vf_d << ',' << r.vf_i << ',' << r.vf_e << ','
        << r.vd_star << ',' << r.beta << ',' << r.mnd << ',' << r.err(0) << ',' << r.err(1)
        << ',' << r.err(2) << ',' << r.newton_iters << ',' << r.wall_ms << '\n';
  }
  return out.str();
}

void write_outputs(const Problem& p, const RunResult& res, const std::string& out_dir) {
  ensure_dir(out_dir);
  const auto path = [&](const std::string& f) { return out_dir + "/" + f; };

  {
    nlohmann::json manifest;
    manifest["config"] = nlohmann::json::parse(p.cfg.to_json_text());
    manifest["version"] = kVersion;
    manifest["n_cases"] = p.n_cases();
    manifest["n_design_elements"] = p.canonical().design_elems.size();
    manifest["aborted"] = res.aborted;
    if (res.aborted) manifest["abort_reason"] = res.abort_reason;
    manifest["vd_star"] = res.vd_star;
    std::ofstream mf(path("manifest.json"));
    if (!mf) throw IoError("cannot write manifest");
    mf << manifest.dump(2) << '\n';
  }

  {
    std::ofstream tf(path("trace.csv"));
    if (!tf) throw IoError("cannot write trace");
    tf << trace_csv_text(p, res.trace);
  }

  const auto& region = p.canonical();
  VectorXd design_flag(p.mesh.n_elems()), window_flag(p.mesh.n_elems());
  for (int e = 0; e < p.mesh.n_elems(); ++e) {
    design_flag(e) = region.is_design(e) ? 1.0 : 0.0;
    window_flag(e) = region.window[e] ? 1.0 : 0.0;
  }

  for (int l = 0; l < 3; ++l) {
    const std::string name = kLayerNames[static_cast<size_t>(l)];
    write_element_csv(path("density_" + name + ".csv"), p.mesh,
                      {{"rho", res.field.rho_bar[static_cast<size_t>(l)]},
                       {"design", design_flag}});
    write_pgm(path("density_" + name + ".pgm"), p.cfg.grid.nx, p.cfg.grid.ny,
              res.field.rho_bar[static_cast<size_t>(l)]);
    if (p.cfg.symmetry.enabled) {
      const VectorXd full = mirror_half_to_full(res.field.rho_bar[static_cast<size_t>(l)],
                                                p.cfg.grid.nx, p.cfg.grid.ny,
                                                p.cfg.symmetry.edge);
      const bool about_y =
          p.cfg.symmetry.edge == Edge::Top || p.cfg.symmetry.edge == Edge::Bottom;
      write_pgm(path("density_" + name + "_full.pgm"),
                about_y ? p.cfg.grid.nx : 2 * p.cfg.grid.nx,
                about_y ? 2 * p.cfg.grid.ny : p.cfg.grid.ny, full);
    }
  }

  if (res.case_u.empty()) return;
  const QuadKernel kernel(p.mesh.dx(), p.mesh.dy(), p.cfg.unit_material());
  for (int k = 0; k < p.n_bt; ++k) {
    const int c = kIntermediate * p.n_bt + k;
    const VectorXd& u = res.case_u[static_cast<size_t>(c)];
    const RegionMap& rk = p.regions[static_cast<size_t>(k)];
    VectorXd exx(p.mesh.n_elems()), eyy(p.mesh.n_elems()), exy(p.mesh.n_elems()),
        wflag(p.mesh.n_elems());
    for (int e = 0; e < p.mesh.n_elems(); ++e) {
      Vector8d ue;
      const auto ed = p.mesh.elem_dofs(e);
      for (int a = 0; a < 8; ++a) ue(a) = u(ed[a]);
      const Vector3d eps = kernel.center_strain(ue);
      exx(e) = eps(0);
      eyy(e) = eps(1);
      exy(e) = eps(2);
      wflag(e) = rk.window[e] ? 1.0 : 0.0;
    }
    const std::string tag = "bt" + std::to_string(k + 1);
    write_element_csv(path("strains_" + tag + ".csv"), p.mesh,
                      {{"exx", exx}, {"eyy", eyy}, {"exy", exy}, {"window", wflag}});

    std::vector<Eigen::Vector2d> ref(static_cast<size_t>(p.mesh.n_nodes()));
    std::vector<Eigen::Vector2d> def(static_cast<size_t>(p.mesh.n_nodes()));
    for (int n = 0; n < p.mesh.n_nodes(); ++n) {
      ref[static_cast<size_t>(n)] = p.mesh.node_coord(n);
      def[static_cast<size_t>(n)] =
          p.mesh.node_coord(n) + Eigen::Vector2d(u(2 * n), u(2 * n + 1));
    }
    const std::vector<std::pair<std::string, VectorXd>> cell_data = {
        {"rho", res.field.rho_bar[kIntermediate]},
        {"exx", exx},
        {"eyy", eyy},
        {"exy", exy},
        {"window", wflag}};
    write_vtk(path("state_" + tag + "_ref.vtk"), p.mesh, ref, cell_data);
    write_vtk(path("state_" + tag + "_def.vtk"), p.mesh, def, cell_data);
  }
}

Metrics recompute_metrics(const std::string& out_dir) {
  std::ifstream mf(out_dir + "/manifest.json");
  if (!mf) throw IoError("cannot read manifest in " + out_dir);
  nlohmann::json manifest;
  mf >> manifest;
  StrainTarget target;
  const auto& t = manifest.at("config").at("targets");
  target.exx = t.at("exx");
  target.eyy = t.at("eyy");
  target.exy = t.at("exy");
  target.w = Vector3d(t.at("weights").at(0), t.at("weights").at(1), t.at("weights").at(2));

  Metrics m;
  const auto dens = read_csv_columns(out_dir + "/density_intermediate.csv");
  const VectorXd& rho = dens.at("rho");
  const VectorXd& design = dens.at("design");
  double sum = 0.0, vol = 0.0;
  int nd = 0;
  for (Eigen::Index e = 0; e < rho.size(); ++e) {
    if (design(e) > 0.5) {
      sum += 4.0 * rho(e) * (1.0 - rho(e));
      vol += rho(e);
      ++nd;
    }
  }
  m.mnd = nd > 0 ? 100.0 * sum / nd : 0.0;
  m.vf = nd > 0 ? vol / nd : 0.0;

  const auto strains = read_csv_columns(out_dir + "/strains_bt1.csv");
  const VectorXd& exx = strains.at("exx");
  const VectorXd& eyy = strains.at("eyy");
  const VectorXd& exy = strains.at("exy");
  const VectorXd& window = strains.at("window");
  std::vector<Vector3d> samples;
  for (Eigen::Index e = 0; e < exx.size(); ++e)
    if (window(e) > 0.5) samples.emplace_back(exx(e), eyy(e), exy(e));
  const ObjectiveValue obj = strain_objective(samples, target);
  m.f = obj.f;
  m.err = rms_errors(obj, target);
  return m;
}

}  // namespace strainmech
