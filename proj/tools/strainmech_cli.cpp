// Command-line front end: optimize runs a config to completion, verify runs
// the finite-difference oracle battery, metrics recomputes M_nd and the RMS
// strain errors from a finished run directory.
#include <cstdlib>
#include <iostream>
#include <random>
#include <string>

#include "CLI11.hpp"
#include "strainmech/driver.hpp"
#include "strainmech/io.hpp"
#include "strainmech/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

int run_optimize(const std::string& config_path, const std::string& out_override, int iters,
                 double mesh_scale, int threads, int dump_every) {
  using namespace strainmech;
  RunConfig cfg = RunConfig::from_json_file(config_path);
  if (iters >= 0) cfg.optim.max_iters = iters;
  if (mesh_scale > 0.0 && mesh_scale != 1.0) cfg.scale_mesh(mesh_scale);
  if (dump_every >= 0) cfg.output.dump_every = dump_every;
  std::string out_dir = cfg.output.dir;
  if (!out_override.empty()) out_dir = out_override;
  if (const char* env = std::getenv("STRAINMECH_OUT")) out_dir = env;
  if (const char* env = std::getenv("STRAINMECH_THREADS")) threads = std::atoi(env);
  cfg.output.dir = out_dir;

  ensure_dir(out_dir);  // preflight before the long run
  const Problem problem = build_problem(cfg);
  std::cout << "problem: " << cfg.name << "  mesh " << cfg.grid.nx << "x" << cfg.grid.ny
            << ", " << problem.canonical().design_elems.size() << " design elements, "
            << problem.n_cases() << " load cases\n";
  const RunResult result = run_optimization(problem, threads);
  write_outputs(problem, result, out_dir);
  if (!result.trace.empty()) {
    const auto& last = result.trace.back();
    std::cout << "iterations: " << last.iter << "  worst f: "
              << last.f[static_cast<size_t>(last.worst_case)] << "  Vf_i: " << last.vf_i
              << "  Mnd: " << last.mnd << "%  Err: (" << last.err(0) << ", " << last.err(1)
              << ", " << last.err(2) << ")%\n";
  }
  std::cout << "outputs written to " << out_dir << "\n";
  if (result.aborted) {
    std::cerr << "run aborted: " << result.abort_reason << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

int run_metrics(const std::string& dir) {
  const auto m = strainmech::recompute_metrics(dir);
  std::cout << "f          = " << m.f << "\n";
  std::cout << "Err_x      = " << m.err(0) << " %\n";
  std::cout << "Err_y      = " << m.err(1) << " %\n";
  std::cout << "Err_xy     = " << m.err(2) << " %\n";
  std::cout << "M_nd       = " << m.mnd << " %\n";
  std::cout << "Vf(design) = " << m.vf << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"strainmech: large-deformation compliant mechanisms for prescribed tissue strain"};
  app.require_subcommand(1);

  std::string config_path, out_dir, metrics_dir;
  int iters = -1, threads = 1, dump_every = -1;
  double mesh_scale = 1.0;

  auto* opt = app.add_subcommand("optimize", "run a topology optimization config");
  opt->add_option("config", config_path, "JSON config file")->required();
  opt->add_option("--out", out_dir, "output directory override");
  opt->add_option("--iters", iters, "iteration count override");
  opt->add_option("--mesh-scale", mesh_scale, "scale element counts by this factor");
  opt->add_option("--threads", threads, "worker threads for the load cases");
  opt->add_option("--dump-every", dump_every, "density snapshot period (iterations)");

  auto* ver = app.add_subcommand("verify", "run the finite-difference oracle battery");

  auto* met = app.add_subcommand("metrics", "recompute M_nd and strain errors from a run dir");
  met->add_option("dir", metrics_dir, "run output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (opt->parsed())
      return run_optimize(config_path, out_dir, iters, mesh_scale, threads, dump_every);
    if (ver->parsed()) return strainmech::run_verify(std::cout) ? kExitOk : kExitSolver;
    if (met->parsed()) return run_metrics(metrics_dir);
  } catch (const strainmech::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const strainmech::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const strainmech::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}
