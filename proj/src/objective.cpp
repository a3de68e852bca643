#include "strainmech/objective.hpp"

#include <cmath>

namespace strainmech {

ObjectiveValue strain_objective(const std::vector<Vector3d>& window_strains,
                                const StrainTarget& target) {
  target.validate();
  if (window_strains.empty()) throw ConfigError("strain_objective: empty window");
  ObjectiveValue out;
  out.n_window = static_cast<int>(window_strains.size());
  const Vector3d tv = target.values();
  for (const auto& eps : window_strains) {
    const Vector3d dev = eps - tv;
    out.mean_sq_dev += dev.cwiseProduct(dev);
    out.mean_strain += eps;
  }
  out.mean_sq_dev /= out.n_window;
  out.mean_strain /= out.n_window;
  out.f = target.w.dot(out.mean_sq_dev) / target.denom();
  return out;
}

Vector3d rms_errors(const ObjectiveValue& obj, const StrainTarget& target) {
  const Vector3d tv = target.values();
  Vector3d err;
  for (int d = 0; d < 3; ++d) {
    double denom = tv(d) * tv(d);
    if (denom < 1e-30) denom = target.denom();
    err(d) = 100.0 * std::sqrt(obj.mean_sq_dev(d) / denom);
  }
  return err;
}

std::vector<Vector3d> window_strains(const CaseContext& ctx, const VectorXd& u) {
  std::vector<Vector3d> out;
  out.reserve(ctx.region().window_elems.size());
  for (int e : ctx.region().window_elems) out.push_back(ctx.center_strain(u, e));
  return out;
}

VectorXd objective_displacement_gradient(const CaseContext& ctx, const VectorXd& u,
                                         const StrainTarget& target) {
  target.validate();
  const auto& window = ctx.region().window_elems;
  if (window.empty()) throw ConfigError("objective gradient: empty window");
  VectorXd g = VectorXd::Zero(ctx.mesh().n_dofs());
  const double coef = 2.0 / (static_cast<double>(window.size()) * target.denom());
  const Vector3d tv = target.values();
  for (int e : window) {
    const Vector3d eps = ctx.center_strain(u, e);
    const Vector3d r = target.w.cwiseProduct(eps - tv);
    const Vector8d ge = coef * ctx.center_strain_derivative(u, e).transpose() * r;
    const auto ed = ctx.mesh().elem_dofs(e);
    for (int a = 0; a < 8; ++a) g(ed[a]) += ge(a);
  }
  return g;
}

VectorXd design_sensitivity(const CaseContext& ctx, const VectorXd& u, const VectorXd& lambda,
                            const ElementFields& fields, bool include_gamma_path) {
  const auto& region = ctx.region();
  const auto& kernel = ctx.kernel();
  VectorXd dL = VectorXd::Zero(ctx.mesh().n_elems());
  for (int e : region.design_elems) {
    const Vector8d ue = ctx.gather(u, e);
    const Vector8d le = ctx.gather(lambda, e);
    const double g = fields.gamma(e);
    const double t = region.thickness[e];
    const bool need_gamma = include_gamma_path && std::abs(fields.dgamma(e)) > 1e-14;
    const auto nl = kernel.eval_nonlinear(g * ue, need_gamma);
    if (nl.inverted)
      throw SolverError("design_sensitivity: inverted element at converged state");
    const Vector8d klu = kernel.linear_stiffness() * ue;
    const Vector8d f_unit = t * (g * nl.f + (1.0 - g * g) * klu);
    double s = fields.dE(e) * le.dot(f_unit);
    if (need_gamma) {
      const Vector8d dfdg = t * (nl.f + g * (nl.k * ue) - 2.0 * g * klu);
      s += fields.E(e) * fields.dgamma(e) * le.dot(dfdg);
    }
    dL(e) = s;
  }
  return dL;
}

VectorXd volume_sensitivity(const DesignField& field, const RegionMap& region,
                            const FilterKernel& kernel) {
  VectorXd g_bar = VectorXd::Zero(region.role.size());
  const double w = 1.0 / static_cast<double>(region.design_elems.size());
  for (int e : region.design_elems) g_bar(e) = w;
  return chain_rule_backprop(g_bar, field, kDilated, region, kernel);
}

}  // namespace strainmech
