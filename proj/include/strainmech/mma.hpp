#pragma once

#include <Eigen/Dense>
#include <vector>

#include "strainmech/types.hpp"

namespace strainmech {

struct MmaOptions {
  double move = 0.1;       // external move limit on [0,1] variables
  double asyinit = 0.5;    // initial asymptote offset, fraction of range
  double asyincr = 1.2;    // expansion on monotone progress
  double asydecr = 0.7;    // contraction on oscillation
  double albefa = 0.1;
  double raa0 = 1e-5;
  double c_penalty = 1000.0;  // elastic-variable cost, keeps y at zero
  double epsimin = 1e-10;
  double x_min = 0.0;
  double x_max = 1.0;
};

struct KktReport {
  double kkt_measure = 0.0;    // projected-gradient norm of the worst branch
  double max_violation = 0.0;  // max positive constraint value
  std::vector<char> active;    // |g_i| <= 1e-3
  int worst_branch = 0;
};

// Method of Moving Asymptotes for min over x of max_j branch_j(x) subject to
// general inequality constraints g_i(x) <= 0 and box bounds. The min/max is
// the bound reformulation: minimize z with branch_j - z <= 0 handled through
// the linear z term of the separable subproblem. The subproblem is solved to
// its KKT point by a primal-dual interior Newton scheme.
class MmaSolver {
 public:
  MmaSolver(int n, int n_branches, int n_constraints, MmaOptions opts = {});

  // branch_grads is (J x n), constr_grads (M x n); values/gradients evaluated
  // at x. Returns the accepted iterate.
  VectorXd update(const VectorXd& x, const VectorXd& branch_values,
                  const Eigen::MatrixXd& branch_grads, const VectorXd& constr_values,
                  const Eigen::MatrixXd& constr_grads);

  KktReport kkt_report(const VectorXd& x, const VectorXd& branch_values,
                       const Eigen::MatrixXd& branch_grads,
                       const VectorXd& constr_values) const;

  double z() const { return z_; }
  int iteration() const { return iter_; }
  // True (unperturbed) KKT residual of the last subproblem solve.
  double last_subproblem_residual() const { return last_residual_; }

 private:
  void subsolv(const Eigen::ArrayXd& alfa, const Eigen::ArrayXd& beta, const Eigen::ArrayXd& p0,
               const Eigen::ArrayXd& q0, const Eigen::MatrixXd& P, const Eigen::MatrixXd& Q,
               const Eigen::VectorXd& a, const Eigen::VectorXd& b, Eigen::ArrayXd& x_out);

  int n_, J_, M_;
  int iter_ = 0;
  MmaOptions o_;
  Eigen::ArrayXd low_, upp_, xold1_, xold2_;
  double z_ = 0.0;
  double last_residual_ = 0.0;
};

}  // namespace strainmech
