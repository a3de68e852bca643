#pragma once

#include <vector>

#include "strainmech/fea.hpp"
#include "strainmech/filters.hpp"

namespace strainmech {

// Target Green-Lagrange strains (Voigt, engineering shear) with weights.
struct StrainTarget {
  double exx = 0.0, eyy = 0.0, exy = 0.0;
  Vector3d w = Vector3d(1.0, 0.0, 0.0);

  Vector3d values() const { return {exx, eyy, exy}; }
  double denom() const { return w(0) * exx * exx + w(1) * eyy * eyy + w(2) * exy * exy; }
  void validate() const {
    if (!(denom() > 0.0))
      throw ConfigError("strain target: weighted squared-target denominator is zero");
    if (w.minCoeff() < 0.0) throw ConfigError("strain target: weights must be nonnegative");
  }
};

struct ObjectiveValue {
  double f = 0.0;
  Vector3d mean_sq_dev = Vector3d::Zero();  // (1/N) sum (eps_d - eps*_d)^2 per direction
  Vector3d mean_strain = Vector3d::Zero();
  int n_window = 0;
};

// Least-squares objective over the window samples:
//   f = (1/N) sum_e [w1 (exx - exx*)^2 + w2 (...) + w3 (...)] / denom.
ObjectiveValue strain_objective(const std::vector<Vector3d>& window_strains,
                                const StrainTarget& target);

// RMS errors in percent: Err_d = sqrt(f restricted to weight d) * 100. When a
// single-direction target is zero, its denominator falls back to the run's
// full weighted denominator so the metric stays defined.
Vector3d rms_errors(const ObjectiveValue& obj, const StrainTarget& target);

// df/du scattered to the full dof vector (nonzero only on window-element dofs).
VectorXd objective_displacement_gradient(const CaseContext& ctx, const VectorXd& u,
                                         const StrainTarget& target);

// dL/drho_bar per element (full length, design entries only). The gamma path
// carries dF_int/dgamma dgamma/drho_bar; disabling it exists for the
// sensitivity ablation checks.
VectorXd design_sensitivity(const CaseContext& ctx, const VectorXd& u, const VectorXd& lambda,
                            const ElementFields& fields, bool include_gamma_path = true);

// dVf(dilated)/drho over design variables.
VectorXd volume_sensitivity(const DesignField& field, const RegionMap& region,
                            const FilterKernel& kernel);

// Window strains of the converged state, in window-element order.
std::vector<Vector3d> window_strains(const CaseContext& ctx, const VectorXd& u);

}  // namespace strainmech
