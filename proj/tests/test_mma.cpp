#include <cmath>

#include "doctest.h"
#include "strainmech/mma.hpp"

using namespace strainmech;

TEST_CASE("mma: quadratic reaches the analytic optimum within the move limit") {
  const int n = 40;
  MmaSolver mma(n, 1, 0);
  VectorXd x = VectorXd::Constant(n, 0.6);
  const Eigen::MatrixXd no_cg(0, n);
  const VectorXd no_cv(0);

  double worst_move = 0.0;
  int converged_at = -1;
  for (int it = 1; it <= 60; ++it) {
    VectorXd f(1);
    f(0) = (x.array() - 0.3).square().sum();
    Eigen::MatrixXd g(1, n);
    g.row(0) = 2.0 * (x.array() - 0.3).matrix().transpose();
    const VectorXd xnew = mma.update(x, f, g, no_cv, no_cg);
    worst_move = std::max(worst_move, (xnew - x).lpNorm<Eigen::Infinity>());
    x = xnew;
    if ((x.array() - 0.3).abs().maxCoeff() < 1e-4) {
      converged_at = it;
      break;
    }
  }
  REQUIRE(converged_at > 0);
  CHECK(converged_at <= 60);
  CHECK(worst_move <= 0.1 + 1e-9);
  CHECK((x.array() >= 0.0).all());
  CHECK((x.array() <= 1.0).all());

  // KKT report at the analytic optimum.
  const VectorXd xstar = VectorXd::Constant(n, 0.3);
  VectorXd f(1);
  f(0) = 0.0;
  Eigen::MatrixXd g(1, n);
  g.row(0) = 2.0 * (xstar.array() - 0.3).matrix().transpose();
  const KktReport rep = mma.kkt_report(xstar, f, g, no_cv);
  CHECK(rep.kkt_measure < 1e-6);
  CHECK(rep.max_violation == 0.0);
}

TEST_CASE("mma: min/max of {x, 1-x} finds the saddle at 0.5") {
  MmaSolver mma(1, 2, 0);
  VectorXd x(1);
  x(0) = 0.05;
  const Eigen::MatrixXd no_cg(0, 1);
  const VectorXd no_cv(0);
  for (int it = 0; it < 80; ++it) {
    VectorXd f(2);
    f << x(0), 1.0 - x(0);
    Eigen::MatrixXd g(2, 1);
    g << 1.0, -1.0;
    const VectorXd xnew = mma.update(x, f, g, no_cv, no_cg);
    CHECK((xnew - x).lpNorm<Eigen::Infinity>() <= 0.1 + 1e-9);
    x = xnew;
  }
  CHECK(x(0) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(mma.z() == doctest::Approx(0.5).epsilon(1e-2));
}

TEST_CASE("mma: constrained quadratic activates the volume-style constraint") {
  // minimize sum (x - 0.9)^2  s.t.  mean(x) <= 0.5: optimum x = 0.5.
  const int n = 20;
  MmaSolver mma(n, 1, 1);
  VectorXd x = VectorXd::Constant(n, 0.2);
  for (int it = 0; it < 100; ++it) {
    VectorXd f(1);
    f(0) = (x.array() - 0.9).square().sum();
    Eigen::MatrixXd g(1, n);
    g.row(0) = 2.0 * (x.array() - 0.9).matrix().transpose();
    VectorXd cv(1);
    cv(0) = x.mean() / 0.5 - 1.0;
    Eigen::MatrixXd cg = Eigen::MatrixXd::Constant(1, n, 1.0 / (0.5 * n));
    x = mma.update(x, f, g, cv, cg);
  }
  CHECK(x.mean() == doctest::Approx(0.5).epsilon(1e-4));
  for (int i = 0; i < n; ++i) CHECK(x(i) == doctest::Approx(0.5).epsilon(1e-3));

  VectorXd cv(1);
  cv(0) = x.mean() / 0.5 - 1.0;
  VectorXd f(1);
  f(0) = (x.array() - 0.9).square().sum();
  Eigen::MatrixXd g(1, n);
  g.row(0) = 2.0 * (x.array() - 0.9).matrix().transpose();
  const KktReport rep = mma.kkt_report(x, f, g, cv);
  REQUIRE(rep.active.size() == 1);
  CHECK(rep.active[0] == 1);  // |g| < 1e-3 at the solution
  CHECK(rep.max_violation < 1e-3);
}

TEST_CASE("mma: subproblem solved to a tight KKT point") {
  const int n = 30;
  MmaSolver mma(n, 1, 1);
  VectorXd x = VectorXd::Constant(n, 0.4);
  VectorXd f(1);
  f(0) = (x.array() - 0.1).square().sum();
  Eigen::MatrixXd g(1, n);
  g.row(0) = 2.0 * (x.array() - 0.1).matrix().transpose();
  VectorXd cv(1);
  cv(0) = -0.3;
  const Eigen::MatrixXd cg = Eigen::MatrixXd::Constant(1, n, 0.01);
  mma.update(x, f, g, cv, cg);
  CHECK(mma.last_subproblem_residual() < 1e-9);
}

TEST_CASE("mma: zero gradients give a zero KKT measure") {
  const int n = 5;
  MmaSolver mma(n, 1, 0);
  const VectorXd x = VectorXd::Constant(n, 0.5);
  VectorXd f(1);
  f(0) = 1.0;
  const Eigen::MatrixXd g = Eigen::MatrixXd::Zero(1, n);
  const KktReport rep = mma.kkt_report(x, f, g, VectorXd(0));
  CHECK(rep.kkt_measure == 0.0);
  CHECK(rep.max_violation == 0.0);
}

TEST_CASE("mma: rejects non-finite inputs") {
  MmaSolver mma(3, 1, 0);
  VectorXd x = VectorXd::Constant(3, 0.5);
  VectorXd f(1);
  f(0) = std::numeric_limits<double>::quiet_NaN();
  const Eigen::MatrixXd g = Eigen::MatrixXd::Zero(1, 3);
  CHECK_THROWS_AS(mma.update(x, f, g, VectorXd(0), Eigen::MatrixXd(0, 3)), SolverError);
}
