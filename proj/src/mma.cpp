#include "strainmech/mma.hpp"

#include <algorithm>
#include <cmath>

namespace strainmech {

using Eigen::ArrayXd;
using Eigen::MatrixXd;

MmaSolver::MmaSolver(int n, int n_branches, int n_constraints, MmaOptions opts)
    : n_(n), J_(n_branches), M_(n_constraints), o_(opts) {
  if (n_ < 1 || J_ < 1 || M_ < 0) throw ConfigError("mma: need n >= 1 and at least one branch");
  low_ = ArrayXd::Zero(n_);
  upp_ = ArrayXd::Zero(n_);
  xold1_ = ArrayXd::Zero(n_);
  xold2_ = ArrayXd::Zero(n_);
}

VectorXd MmaSolver::update(const VectorXd& x, const VectorXd& branch_values,
                           const MatrixXd& branch_grads, const VectorXd& constr_values,
                           const MatrixXd& constr_grads) {
  if (x.size() != n_ || branch_values.size() != J_ || branch_grads.rows() != J_ ||
      branch_grads.cols() != n_ || constr_values.size() != M_ ||
      (M_ > 0 && (constr_grads.rows() != M_ || constr_grads.cols() != n_)))
    throw ConfigError("mma: inconsistent problem sizes");
  if (!branch_values.allFinite() || !branch_grads.allFinite() || !constr_values.allFinite() ||
      (M_ > 0 && !constr_grads.allFinite()))
    throw SolverError("mma: non-finite objective or constraint data");

  const int m = J_ + M_;
  const ArrayXd xval = x.array();
  const double range = o_.x_max - o_.x_min;
  ++iter_;

  if (iter_ <= 2) {
    low_ = xval - o_.asyinit * range;
    upp_ = xval + o_.asyinit * range;
  } else {
    for (int i = 0; i < n_; ++i) {
      const double zz = (xval(i) - xold1_(i)) * (xold1_(i) - xold2_(i));
      const double factor = zz > 0.0 ? o_.asyincr : (zz < 0.0 ? o_.asydecr : 1.0);
      low_(i) = xval(i) - factor * (xold1_(i) - low_(i));
      upp_(i) = xval(i) + factor * (upp_(i) - xold1_(i));
    }
    low_ = low_.max(xval - 10.0 * range).min(xval - 0.01 * range);
    upp_ = upp_.min(xval + 10.0 * range).max(xval + 0.01 * range);
  }

  const ArrayXd alfa = (low_ + o_.albefa * (xval - low_))
                           .max(xval - o_.move * range)
                           .max(o_.x_min);
  const ArrayXd beta = (upp_ - o_.albefa * (upp_ - xval))
                           .min(xval + o_.move * range)
                           .min(o_.x_max);

  const ArrayXd ux1 = upp_ - xval;
  const ArrayXd xl1 = xval - low_;
  const ArrayXd ux2 = ux1 * ux1;
  const ArrayXd xl2 = xl1 * xl1;
  const double xmamiinv = 1.0 / std::max(range, 1e-5);

  // Objective of the subproblem is the z term only; the branches enter as
  // constraints f_j - z <= 0 via a_j = 1.
  const ArrayXd p0 = ArrayXd::Constant(n_, o_.raa0 * xmamiinv) * ux2;
  const ArrayXd q0 = ArrayXd::Constant(n_, o_.raa0 * xmamiinv) * xl2;

  MatrixXd P(m, n_), Q(m, n_);
  Eigen::VectorXd b(m), a(m);
  for (int i = 0; i < m; ++i) {
    const bool is_branch = i < J_;
    a(i) = is_branch ? 1.0 : 0.0;
    const double fval = is_branch ? branch_values(i) : constr_values(i - J_);
    for (int jv = 0; jv < n_; ++jv) {
      const double g = is_branch ? branch_grads(i, jv) : constr_grads(i - J_, jv);
      const double pij = std::max(g, 0.0);
      const double qij = std::max(-g, 0.0);
      const double pq = 0.001 * (pij + qij) + o_.raa0 * xmamiinv;
      P(i, jv) = (pij + pq) * ux2(jv);
      Q(i, jv) = (qij + pq) * xl2(jv);
    }
    b(i) = (P.row(i).transpose().array() / ux1).sum() +
           (Q.row(i).transpose().array() / xl1).sum() - fval;
  }

  ArrayXd xnew;
  subsolv(alfa, beta, p0, q0, P, Q, a, b, xnew);

  xold2_ = xold1_;
  xold1_ = xval;
  return xnew.matrix();
}

void MmaSolver::subsolv(const ArrayXd& alfa, const ArrayXd& beta, const ArrayXd& p0,
                        const ArrayXd& q0, const MatrixXd& P, const MatrixXd& Q,
                        const Eigen::VectorXd& a, const Eigen::VectorXd& b, ArrayXd& x_out) {
  const int m = static_cast<int>(b.size());
  const double a0 = 1.0;
  const ArrayXd c = ArrayXd::Constant(m, o_.c_penalty);
  const ArrayXd d = ArrayXd::Ones(m);

  double epsi = 1.0;
  ArrayXd x = 0.5 * (alfa + beta);
  ArrayXd y = ArrayXd::Ones(m);
  double z = 1.0;
  ArrayXd lam = ArrayXd::Ones(m);
  ArrayXd xsi = (1.0 / (x - alfa)).max(1.0);
  ArrayXd eta = (1.0 / (beta - x)).max(1.0);
  ArrayXd mu = (0.5 * c).max(1.0);
  double zet = 1.0;
  ArrayXd s = ArrayXd::Ones(m);

  // Full primal-dual residual of the subproblem KKT system.
  ArrayXd ux1(n_), xl1(n_);
  auto compute_residual = [&](const ArrayXd& xx, const ArrayXd& yy, double zz, const ArrayXd& ll,
                              const ArrayXd& xs, const ArrayXd& et, const ArrayXd& mm, double zt,
                              const ArrayXd& ss, double eps, double& norm2, double& rmax) {
    ux1 = upp_ - xx;
    xl1 = xx - low_;
    const ArrayXd plam = p0 + (P.transpose() * ll.matrix()).array();
    const ArrayXd qlam = q0 + (Q.transpose() * ll.matrix()).array();
    const ArrayXd gvec = (P * (1.0 / ux1).matrix()).array() + (Q * (1.0 / xl1).matrix()).array();
    const ArrayXd dpsidx = plam / (ux1 * ux1) - qlam / (xl1 * xl1);

    const ArrayXd rex = dpsidx - xs + et;
    const ArrayXd rey = c + d * yy - mm - ll;
    const double rez = a0 - zt - (a.array() * ll).sum();
    const ArrayXd relam = gvec - a.array() * zz - yy + ss - b.array();
    const ArrayXd rexsi = xs * (xx - alfa) - eps;
    const ArrayXd reeta = et * (beta - xx) - eps;
    const ArrayXd remu = mm * yy - eps;
    const double rezet = zt * zz - eps;
    const ArrayXd res = ll * ss - eps;

    norm2 = rex.square().sum() + rey.square().sum() + rez * rez + relam.square().sum() +
            rexsi.square().sum() + reeta.square().sum() + remu.square().sum() + rezet * rezet +
            res.square().sum();
    norm2 = std::sqrt(norm2);
    rmax = std::max({rex.abs().maxCoeff(), rey.abs().maxCoeff(), std::abs(rez),
                     relam.abs().maxCoeff(), rexsi.abs().maxCoeff(), reeta.abs().maxCoeff(),
                     remu.abs().maxCoeff(), std::abs(rezet), res.abs().maxCoeff()});
  };

  while (epsi > o_.epsimin) {
    double residunorm, residumax;
    compute_residual(x, y, z, lam, xsi, eta, mu, zet, s, epsi, residunorm, residumax);

    int ittt = 0;
    while (residumax > 0.9 * epsi && ittt < 200) {
      ++ittt;
      const ArrayXd ux1v = upp_ - x;
      const ArrayXd xl1v = x - low_;
      const ArrayXd ux2 = ux1v * ux1v;
      const ArrayXd xl2 = xl1v * xl1v;
      const ArrayXd ux3 = ux1v * ux2;
      const ArrayXd xl3 = xl1v * xl2;

      const ArrayXd plam = p0 + (P.transpose() * lam.matrix()).array();
      const ArrayXd qlam = q0 + (Q.transpose() * lam.matrix()).array();
      const ArrayXd gvec = (P * (1.0 / ux1v).matrix()).array() + (Q * (1.0 / xl1v).matrix()).array();
      MatrixXd GG(m, n_);
      for (int i = 0; i < m; ++i)
        GG.row(i) = (P.row(i).transpose().array() / ux2 - Q.row(i).transpose().array() / xl2)
                        .matrix()
                        .transpose();

      const ArrayXd dpsidx = plam / ux2 - qlam / xl2;
      const ArrayXd delx = dpsidx - epsi / (x - alfa) + epsi / (beta - x);
      const ArrayXd dely = c + d * y - lam - epsi / y;
      const double delz = a0 - (a.array() * lam).sum() - epsi / z;
      const ArrayXd dellam = gvec - a.array() * z - y - b.array() + epsi / lam;

      const ArrayXd diagx = 2.0 * (plam / ux3 + qlam / xl3) + xsi / (x - alfa) + eta / (beta - x);
      const ArrayXd diagy = d + mu / y;
      const ArrayXd diaglam = s / lam;
      const ArrayXd diaglamyi = diaglam + 1.0 / diagy;

      // m is small here; solve the (m+1) dense system for (dlam, dz).
      Eigen::VectorXd blam(m);
      for (int i = 0; i < m; ++i)
        blam(i) = dellam(i) + dely(i) / diagy(i) -
                  (GG.row(i).transpose().array() * (delx / diagx)).sum();
      Eigen::VectorXd bb(m + 1);
      bb.head(m) = blam;
      bb(m) = delz;

      MatrixXd Alam = GG * (1.0 / diagx).matrix().asDiagonal() * GG.transpose();
      for (int i = 0; i < m; ++i) Alam(i, i) += diaglamyi(i);
      MatrixXd AA(m + 1, m + 1);
      AA.topLeftCorner(m, m) = Alam;
      AA.topRightCorner(m, 1) = a;
      AA.bottomLeftCorner(1, m) = a.transpose();
      AA(m, m) = -zet / z;

      const Eigen::VectorXd solut = AA.lu().solve(bb);
      const ArrayXd dlam = solut.head(m).array();
      const double dz = solut(m);
      const ArrayXd dx = -delx / diagx - (GG.transpose() * dlam.matrix()).array() / diagx;
      const ArrayXd dy = -dely / diagy + dlam / diagy;
      const ArrayXd dxsi = -xsi + epsi / (x - alfa) - (xsi * dx) / (x - alfa);
      const ArrayXd deta = -eta + epsi / (beta - x) + (eta * dx) / (beta - x);
      const ArrayXd dmu = -mu + epsi / y - (mu * dy) / y;
      const double dzet = -zet + epsi / z - zet * dz / z;
      const ArrayXd ds = -s + epsi / lam - (s * dlam) / lam;

      double stmxx = 0.0;
      auto track = [&stmxx](const ArrayXd& dv, const ArrayXd& v) {
        if (dv.size() > 0) stmxx = std::max(stmxx, (-1.01 * dv / v).maxCoeff());
      };
      track(dy, y);
      stmxx = std::max(stmxx, -1.01 * dz / z);
      track(dlam, lam);
      track(dxsi, xsi);
      track(deta, eta);
      track(dmu, mu);
      stmxx = std::max(stmxx, -1.01 * dzet / zet);
      track(ds, s);
      const double stmalfa = (-1.01 * dx / (x - alfa)).maxCoeff();
      const double stmbeta = (1.01 * dx / (beta - x)).maxCoeff();
      const double stminv = std::max({stmalfa, stmbeta, stmxx, 1.0});
      double steg = 1.0 / stminv;

      const ArrayXd xold = x, yold = y, lamold = lam, xsiold = xsi, etaold = eta, muold = mu,
                    sold = s;
      const double zold = z, zetold = zet;

      double resinew = 2.0 * residunorm;
      int itto = 0;
      while (resinew > residunorm && itto < 50) {
        ++itto;
        x = xold + steg * dx;
        y = yold + steg * dy;
        z = zold + steg * dz;
        lam = lamold + steg * dlam;
        xsi = xsiold + steg * dxsi;
        eta = etaold + steg * deta;
        mu = muold + steg * dmu;
        zet = zetold + steg * dzet;
        s = sold + steg * ds;
        double rmax;
        compute_residual(x, y, z, lam, xsi, eta, mu, zet, s, epsi, resinew, rmax);
        residumax = rmax;
        steg *= 0.5;
      }
      residunorm = resinew;
    }
    epsi *= 0.1;
  }

  double n2, rmax;
  compute_residual(x, y, z, lam, xsi, eta, mu, zet, s, 0.0, n2, rmax);
  last_residual_ = rmax;
  z_ = z;
  x_out = x;
}

KktReport MmaSolver::kkt_report(const VectorXd& x, const VectorXd& branch_values,
                                const MatrixXd& branch_grads,
                                const VectorXd& constr_values) const {
  KktReport rep;
  int worst = 0;
  branch_values.maxCoeff(&worst);
  rep.worst_branch = worst;
  double pg = 0.0;
  for (int i = 0; i < n_; ++i) {
    const double step = std::clamp(x(i) - branch_grads(worst, i), o_.x_min, o_.x_max);
    pg = std::max(pg, std::abs(x(i) - step));
  }
  rep.kkt_measure = pg;
  rep.active.assign(static_cast<size_t>(constr_values.size()), 0);
  for (Eigen::Index i = 0; i < constr_values.size(); ++i) {
    rep.max_violation = std::max(rep.max_violation, constr_values(i));
    rep.active[static_cast<size_t>(i)] = std::abs(constr_values(i)) <= 1e-3;
  }
  rep.max_violation = std::max(rep.max_violation, 0.0);
  return rep;
}

}  // namespace strainmech
