#include "strainmech/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace strainmech {

using nlohmann::json;

double ScheduleSpec::beta_at(int iter_one_based) const {
  const int doublings = (iter_one_based - 1) / std::max(1, double_every);
  const double beta = beta_init * std::pow(2.0, doublings);
  return std::min(beta, beta_max);
}

int RunConfig::n_variants() const {
  int n = 1;
  for (const auto& b : regions)
    if (b.role == Role::Tissue) n = std::max(n, b.variant == 0 ? 1 : b.variant);
  return n;
}

double RunConfig::filter_radius(const Mesh& mesh) const {
  if (filter.radius_elements > 0.0)
    return filter.radius_elements * std::max(mesh.dx(), mesh.dy());
  if (filter.radius_mm > 0.0) return filter.radius_mm;
  throw ConfigError("filter: set radius_elements or radius_mm");
}

void RunConfig::scale_mesh(double s) {
  if (!(s > 0.0)) throw ConfigError("mesh scale must be positive");
  grid.nx = static_cast<int>(std::lround(grid.nx * s));
  grid.ny = static_cast<int>(std::lround(grid.ny * s));
  if (grid.nx < 1 || grid.ny < 1) throw ConfigError("mesh scale collapses the grid");
}

void RunConfig::validate() const {
  if (optim.max_iters < 0) throw ConfigError("optimizer: max_iters must be >= 0");
  if (optim.vdstar_update_every < 1) throw ConfigError("optimizer: update period must be >= 1");
  if (schedule.double_every < 1) throw ConfigError("projection: double_every must be >= 1");
  if (!(optim.vol_frac > 0.0 && optim.vol_frac < 1.0))
    throw ConfigError("optimizer: vol_frac must lie in (0,1)");
  target.validate();
  ProjectionParams pp{schedule.beta_init, schedule.eta, schedule.delta_eta};
  pp.validate();
  for (const auto& b : regions)
    if (b.variant < 0) throw ConfigError("region variant must be nonnegative");
}

namespace {

Edge parse_edge(const std::string& s) {
  if (s == "left") return Edge::Left;
  if (s == "right") return Edge::Right;
  if (s == "bottom") return Edge::Bottom;
  if (s == "top") return Edge::Top;
  throw ConfigError("unknown edge: " + s);
}

Role parse_role(const std::string& s) {
  if (s == "tissue") return Role::Tissue;
  if (s == "solid") return Role::PassiveSolid;
  if (s == "void") return Role::PassiveVoid;
  if (s == "design") return Role::Design;
  throw ConfigError("unknown region role: " + s);
}

const char* edge_name(Edge e) {
  switch (e) {
    case Edge::Left: return "left";
    case Edge::Right: return "right";
    case Edge::Bottom: return "bottom";
    default: return "top";
  }
}

const char* role_name(Role r) {
  switch (r) {
    case Role::Tissue: return "tissue";
    case Role::PassiveSolid: return "solid";
    case Role::PassiveVoid: return "void";
    default: return "design";
  }
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  try {
    RunConfig c;
    c.name = j.value("name", std::string("run"));
    const auto& g = j.at("grid");
    c.grid.nx = g.at("nx");
    c.grid.ny = g.at("ny");
    c.grid.lx = g.at("lx");
    c.grid.ly = g.at("ly");
    c.grid.thickness = g.value("thickness", 1.0);

    if (j.contains("symmetry")) {
      c.symmetry.enabled = true;
      c.symmetry.edge = parse_edge(j.at("symmetry").at("edge"));
    }

    const auto& d = j.at("design");
    c.design_E = d.at("E");
    c.design_nu = d.value("nu", 0.45);
    const std::string plane = d.value("plane", std::string("strain"));
    if (plane == "strain")
      c.plane = PlaneMode::Strain;
    else if (plane == "stress")
      c.plane = PlaneMode::Stress;
    else
      throw ConfigError("design.plane must be 'strain' or 'stress'");
    c.simp.p = d.value("simp_p", 3.0);
    c.simp.void_ratio = d.value("void_ratio", 1e-6);
    c.gamma.beta1 = d.value("gamma_beta1", 500.0);
    c.gamma.eta0 = d.value("gamma_eta0", 0.01);

    for (const auto& rb : j.value("regions", json::array())) {
      RegionBox b;
      b.role = parse_role(rb.at("role"));
      const auto& box = rb.at("box");
      b.x0 = box.at(0);
      b.y0 = box.at(1);
      b.x1 = box.at(2);
      b.y1 = box.at(3);
      b.variant = rb.value("variant", 0);
      b.E = rb.value("E", 0.0);
      b.thickness = rb.value("thickness", 0.0);
      if (rb.contains("window_inset")) {
        const auto& wi = rb.at("window_inset");
        for (int k = 0; k < 4; ++k) b.window_inset[static_cast<size_t>(k)] = wi.at(k);
      }
      c.regions.push_back(b);
    }

    for (const auto& bj : j.value("bcs", json::array())) {
      BcSpec bc;
      bc.edge = parse_edge(bj.at("edge"));
      const std::string fix = bj.value("fix", std::string(""));
      bc.fix_x = fix.find('x') != std::string::npos;
      bc.fix_y = fix.find('y') != std::string::npos;
      if (bj.contains("range")) {
        bc.has_range = true;
        bc.range_lo = bj.at("range").at(0);
        bc.range_hi = bj.at("range").at(1);
      }
      if (bj.contains("ux")) {
        bc.prescribe_x = true;
        bc.value_x = bj.at("ux");
      }
      if (bj.contains("uy")) {
        bc.prescribe_y = true;
        bc.value_y = bj.at("uy");
      }
      c.bcs.push_back(bc);
    }

    for (const auto& aj : j.value("actuation", json::array())) {
      ActuationSpec a;
      a.x = aj.at("at").at(0);
      a.y = aj.at("at").at(1);
      const std::string dir = aj.value("dir", std::string("x"));
      a.dir = dir == "y" ? 1 : 0;
      a.force = aj.value("force", 0.0);
      a.spring = aj.value("spring", 0.0);
      c.actuations.push_back(a);
    }

    if (j.contains("targets")) {
      const auto& t = j.at("targets");
      c.target.exx = t.value("exx", 0.0);
      c.target.eyy = t.value("eyy", 0.0);
      c.target.exy = t.value("exy", 0.0);
      if (t.contains("weights")) {
        c.target.w(0) = t.at("weights").at(0);
        c.target.w(1) = t.at("weights").at(1);
        c.target.w(2) = t.at("weights").at(2);
      }
    }

    if (j.contains("filter")) {
      c.filter.radius_mm = j.at("filter").value("radius_mm", 0.0);
      c.filter.radius_elements = j.at("filter").value("radius_elements", 0.0);
    }

    if (j.contains("projection")) {
      const auto& p = j.at("projection");
      c.schedule.beta_init = p.value("beta_init", 1.0);
      c.schedule.beta_max = p.value("beta_max", 32.0);
      c.schedule.double_every = p.value("double_every", 60);
      c.schedule.eta = p.value("eta", 0.5);
      c.schedule.delta_eta = p.value("delta_eta", 0.05);
    }

    if (j.contains("optimizer")) {
      const auto& o = j.at("optimizer");
      c.optim.max_iters = o.value("max_iters", 100);
      c.optim.move_limit = o.value("move_limit", 0.1);
      c.optim.vol_frac = o.value("vol_frac", 0.25);
      c.optim.vdstar_update_every = o.value("vdstar_update_every", 25);
      c.optim.mma_c = o.value("mma_c", 1000.0);
    }

    if (j.contains("newton")) {
      const auto& nw = j.at("newton");
      c.newton.tol_rel = nw.value("tol_rel", 1e-6);
      c.newton.tol_abs = nw.value("tol_abs", 1e-10);
      c.newton.max_iters = nw.value("max_iters", 50);
      c.newton.max_cutbacks = nw.value("max_cutbacks", 6);
    }

    if (j.contains("init")) {
      const auto& in = j.at("init");
      c.init.density = in.value("density", -1.0);
      c.init.jitter = in.value("jitter", 0.0);
      c.init.seed = in.value("seed", 0u);
    }

    if (j.contains("output")) {
      c.output.dir = j.at("output").value("dir", std::string("out"));
      c.output.dump_every = j.at("output").value("dump_every", 0);
    }

    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string RunConfig::to_json_text() const {
  json j;
  j["name"] = name;
  j["version"] = kVersion;
  j["grid"] = {{"nx", grid.nx}, {"ny", grid.ny}, {"lx", grid.lx}, {"ly", grid.ly},
               {"thickness", grid.thickness}};
  if (symmetry.enabled) j["symmetry"] = {{"edge", edge_name(symmetry.edge)}};
  j["design"] = {{"E", design_E},       {"nu", design_nu},
                 {"plane", plane == PlaneMode::Strain ? "strain" : "stress"},
                 {"simp_p", simp.p},    {"void_ratio", simp.void_ratio},
                 {"gamma_beta1", gamma.beta1}, {"gamma_eta0", gamma.eta0}};
  j["regions"] = json::array();
  for (const auto& b : regions) {
    json rb = {{"role", role_name(b.role)},
               {"box", {b.x0, b.y0, b.x1, b.y1}},
               {"variant", b.variant},
               {"E", b.E},
               {"thickness", b.thickness}};
    if (b.role == Role::Tissue)
      rb["window_inset"] = {b.window_inset[0], b.window_inset[1], b.window_inset[2],
                            b.window_inset[3]};
    j["regions"].push_back(rb);
  }
  j["bcs"] = json::array();
  for (const auto& bc : bcs) {
    json bj = {{"edge", edge_name(bc.edge)}};
    std::string fix;
    if (bc.fix_x) fix += 'x';
    if (bc.fix_y) fix += 'y';
    if (!fix.empty()) bj["fix"] = fix;
    if (bc.has_range) bj["range"] = {bc.range_lo, bc.range_hi};
    if (bc.prescribe_x) bj["ux"] = bc.value_x;
    if (bc.prescribe_y) bj["uy"] = bc.value_y;
    j["bcs"].push_back(bj);
  }
  j["actuation"] = json::array();
  for (const auto& a : actuations)
    j["actuation"].push_back({{"at", {a.x, a.y}},
                              {"dir", a.dir == 1 ? "y" : "x"},
                              {"force", a.force},
                              {"spring", a.spring}});
  j["targets"] = {{"exx", target.exx}, {"eyy", target.eyy}, {"exy", target.exy},
                  {"weights", {target.w(0), target.w(1), target.w(2)}}};
  j["filter"] = {{"radius_mm", filter.radius_mm}, {"radius_elements", filter.radius_elements}};
  j["projection"] = {{"beta_init", schedule.beta_init}, {"beta_max", schedule.beta_max},
                     {"double_every", schedule.double_every}, {"eta", schedule.eta},
                     {"delta_eta", schedule.delta_eta}};
  j["optimizer"] = {{"max_iters", optim.max_iters}, {"move_limit", optim.move_limit},
                    {"vol_frac", optim.vol_frac},
                    {"vdstar_update_every", optim.vdstar_update_every}, {"mma_c", optim.mma_c}};
  j["newton"] = {{"tol_rel", newton.tol_rel}, {"tol_abs", newton.tol_abs},
                 {"max_iters", newton.max_iters}, {"max_cutbacks", newton.max_cutbacks}};
  j["init"] = {{"density", init.density}, {"jitter", init.jitter}, {"seed", init.seed}};
  j["output"] = {{"dir", output.dir}, {"dump_every", output.dump_every}};
  return j.dump(2);
}

}  // namespace strainmech
