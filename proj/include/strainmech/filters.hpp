#pragma once

#include <Eigen/Sparse>
#include <array>

#include "strainmech/mesh.hpp"
#include "strainmech/types.hpp"

namespace strainmech {

// Linear-decay density filter on element centers:
//   rho_tilde_e = sum_i w_ei v_i rho_i / sum_i w_ei v_i,
//   w_ei = r_min - ||x_i - x_e||  over neighbors within r_min.
// Rows are normalized, so the operator preserves constants. Boundary
// elements use truncated neighborhoods.
class FilterKernel {
 public:
  static FilterKernel build(const Mesh& mesh, double r_min);

  VectorXd apply(const VectorXd& rho_full) const { return W_ * rho_full; }
  VectorXd apply_transpose(const VectorXd& g) const { return W_.transpose() * g; }
  double radius() const { return r_min_; }

 private:
  Eigen::SparseMatrix<double, Eigen::RowMajor> W_;
  double r_min_ = 0.0;
};

struct ProjectionParams {
  double beta = 1.0;
  double eta = 0.5;
  double delta_eta = 0.05;

  void validate() const {
    if (beta < 1.0) throw ConfigError("projection: beta must be >= 1");
    if (!(eta - delta_eta > 0.0) || !(eta + delta_eta < 1.0) || !(delta_eta >= 0.0))
      throw ConfigError("projection: need 0 < eta-delta_eta <= eta+delta_eta < 1");
  }
};

// Smooth Heaviside rho_bar = [tanh(b h) + tanh(b (r - h))]/[tanh(b h) + tanh(b (1 - h))].
void heaviside_project(const VectorXd& rho_tilde, double beta, double eta, VectorXd& rho_bar,
                       VectorXd& deriv);

double heaviside_point(double rho_tilde, double beta, double eta);

enum Layer { kDilated = 0, kIntermediate = 1, kEroded = 2 };
inline constexpr std::array<const char*, 3> kLayerNames = {"dilated", "intermediate", "eroded"};

// The three density layers over all elements. Raw densities on passive
// elements hold their fixed values; projected layers are overridden after
// projection, so eroded <= intermediate <= dilated holds elementwise.
struct DesignField {
  VectorXd rho_full;
  VectorXd rho_tilde;
  std::array<VectorXd, 3> rho_bar;
  std::array<VectorXd, 3> proj_deriv;  // d rho_bar / d rho_tilde before overrides
};

// Scatters the design vector into the full field, filters once, projects at
// thresholds {eta - d, eta, eta + d} -> {dilated, intermediate, eroded} and
// applies passive overrides.
DesignField robust_fields(const VectorXd& x_design, const RegionMap& region,
                          const FilterKernel& kernel, const ProjectionParams& params);

// Area-weighted volume fraction over design elements only.
double volume_fraction(const VectorXd& rho_bar, const RegionMap& region);

// V_d* = V_i* Vf(dilated)/Vf(intermediate).
double update_dilated_volume_bound(const DesignField& field, const RegionMap& region,
                                   double v_star_intermediate);

// Gray-scale indicator sum 4 rho (1-rho) / N over design elements, percent.
double gray_indicator(const VectorXd& rho_bar, const RegionMap& region);

// dL/drho from dL/drho_bar of one layer: diagonal projection derivative,
// passive entries dropped, then the filter transpose; restricted to design
// elements.
VectorXd chain_rule_backprop(const VectorXd& dL_drho_bar, const DesignField& field, Layer layer,
                             const RegionMap& region, const FilterKernel& kernel);

}  // namespace strainmech
