#include "strainmech/filters.hpp"

#include <cmath>
#include <vector>

namespace strainmech {

FilterKernel FilterKernel::build(const Mesh& mesh, double r_min) {
  if (!(r_min > 0.0)) throw ConfigError("filter radius must be positive");
  FilterKernel k;
  k.r_min_ = r_min;
  const int ne = mesh.n_elems();
  const int nx = mesh.spec().nx, ny = mesh.spec().ny;
  const double dx = mesh.dx(), dy = mesh.dy();
  const int ri = static_cast<int>(std::ceil(r_min / dx));
  const int rj = static_cast<int>(std::ceil(r_min / dy));

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(ne) * (2 * ri + 1) * (2 * rj + 1) / 2);
  for (int e = 0; e < ne; ++e) {
    const int ei = mesh.elem_ix(e), ej = mesh.elem_iy(e);
    double norm = 0.0;
    const size_t first = trip.size();
    for (int j = std::max(0, ej - rj); j <= std::min(ny - 1, ej + rj); ++j) {
      for (int i = std::max(0, ei - ri); i <= std::min(nx - 1, ei + ri); ++i) {
        const double dist = std::hypot((i - ei) * dx, (j - ej) * dy);
        const double w = r_min - dist;
        if (w <= 0.0) continue;
        trip.emplace_back(e, mesh.elem_id(i, j), w);
        norm += w;
      }
    }
    for (size_t t = first; t < trip.size(); ++t)
      trip[t] = {trip[t].row(), trip[t].col(), trip[t].value() / norm};
  }
  k.W_.resize(ne, ne);
  k.W_.setFromTriplets(trip.begin(), trip.end());
  k.W_.makeCompressed();
  return k;
}

double heaviside_point(double rho_tilde, double beta, double eta) {
  const double denom = std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta));
  return (std::tanh(beta * eta) + std::tanh(beta * (rho_tilde - eta))) / denom;
}

void heaviside_project(const VectorXd& rho_tilde, double beta, double eta, VectorXd& rho_bar,
                       VectorXd& deriv) {
  const double denom = std::tanh(beta * eta) + std::tanh(beta * (1.0 - eta));
  const double tbe = std::tanh(beta * eta);
  rho_bar.resize(rho_tilde.size());
  deriv.resize(rho_tilde.size());
  for (Eigen::Index e = 0; e < rho_tilde.size(); ++e) {
    const double th = std::tanh(beta * (rho_tilde(e) - eta));
    rho_bar(e) = (tbe + th) / denom;
    deriv(e) = beta * (1.0 - th * th) / denom;
  }
}

DesignField robust_fields(const VectorXd& x_design, const RegionMap& region,
                          const FilterKernel& kernel, const ProjectionParams& params) {
  params.validate();
  const int ne = static_cast<int>(region.role.size());
  if (x_design.size() != static_cast<Eigen::Index>(region.design_elems.size()))
    throw ConfigError("robust_fields: design vector size mismatch");

  DesignField f;
  f.rho_full.resize(ne);
  for (int e = 0; e < ne; ++e)
    f.rho_full(e) = region.is_passive(e) ? region.passive_density(e) : 0.0;
  for (size_t k = 0; k < region.design_elems.size(); ++k)
    f.rho_full(region.design_elems[k]) = x_design(static_cast<Eigen::Index>(k));

  f.rho_tilde = kernel.apply(f.rho_full);

  const double thresholds[3] = {params.eta - params.delta_eta, params.eta,
                                params.eta + params.delta_eta};
  for (int l = 0; l < 3; ++l) {
    heaviside_project(f.rho_tilde, params.beta, thresholds[l], f.rho_bar[l], f.proj_deriv[l]);
    for (int e = 0; e < ne; ++e)
      if (region.is_passive(e)) f.rho_bar[l](e) = region.passive_density(e);
  }
  return f;
}

double volume_fraction(const VectorXd& rho_bar, const RegionMap& region) {
  if (region.design_elems.empty()) throw ConfigError("volume_fraction: no design elements");
  double sum = 0.0;
  for (int e : region.design_elems) sum += rho_bar(e);
  return sum / static_cast<double>(region.design_elems.size());
}

double update_dilated_volume_bound(const DesignField& field, const RegionMap& region,
                                   double v_star_intermediate) {
  const double vf_d = volume_fraction(field.rho_bar[kDilated], region);
  const double vf_i = volume_fraction(field.rho_bar[kIntermediate], region);
  if (!(vf_i > 0.0)) throw SolverError("degenerate design: intermediate volume fraction is zero");
  return v_star_intermediate * vf_d / vf_i;
}

double gray_indicator(const VectorXd& rho_bar, const RegionMap& region) {
  if (region.design_elems.empty()) return 0.0;
  double sum = 0.0;
  for (int e : region.design_elems) sum += 4.0 * rho_bar(e) * (1.0 - rho_bar(e));
  return sum / static_cast<double>(region.design_elems.size()) * 100.0;
}

VectorXd chain_rule_backprop(const VectorXd& dL_drho_bar, const DesignField& field, Layer layer,
                             const RegionMap& region, const FilterKernel& kernel) {
  const int ne = static_cast<int>(region.role.size());
  if (dL_drho_bar.size() != ne) throw ConfigError("backprop: gradient size mismatch");
  VectorXd g_tilde(ne);
  for (int e = 0; e < ne; ++e)
    g_tilde(e) = region.is_passive(e) ? 0.0 : dL_drho_bar(e) * field.proj_deriv[layer](e);
  const VectorXd g_full = kernel.apply_transpose(g_tilde);
  VectorXd g(static_cast<Eigen::Index>(region.design_elems.size()));
  for (size_t k = 0; k < region.design_elems.size(); ++k)
    g(static_cast<Eigen::Index>(k)) = g_full(region.design_elems[k]);
  return g;
}

}  // namespace strainmech
