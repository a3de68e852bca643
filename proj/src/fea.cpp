#include "strainmech/fea.hpp"

#include <algorithm>
#include <cmath>

namespace strainmech {

ElementFields make_element_fields(const VectorXd& rho_bar, const RegionMap& region,
                                  const SimpParams& simp, const GammaParams& gp) {
  const int ne = static_cast<int>(region.role.size());
  ElementFields f;
  f.E.resize(ne);
  f.dE.resize(ne);
  f.gamma.resize(ne);
  f.dgamma.resize(ne);
  for (int e = 0; e < ne; ++e) {
    const SimpEval se = simp_modulus(rho_bar(e), region.E_solid[e], simp);
    const GammaEval ge = gamma_factor(rho_bar(e), simp.p, gp);
    f.E(e) = se.E;
    f.dE(e) = se.dE;
    f.gamma(e) = ge.gamma;
    f.dgamma(e) = ge.dgamma;
  }
  return f;
}

CaseContext::CaseContext(const Mesh& mesh, const RegionMap& region, const DofMap& dofs,
                         const MaterialParams& unit_mat)
    : mesh_(mesh), region_(region), dofs_(dofs), kernel_(mesh.dx(), mesh.dy(), unit_mat) {
  const int nf = dofs_.n_free;
  K_.resize(nf, nf);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(mesh_.n_elems()) * 64 + dofs_.loads.size());
  for (int e = 0; e < mesh_.n_elems(); ++e) {
    const auto ed = mesh_.elem_dofs(e);
    for (int a = 0; a < 8; ++a) {
      const int fa = dofs_.free_index[ed[a]];
      if (fa < 0) continue;
      for (int b = 0; b < 8; ++b) {
        const int fb = dofs_.free_index[ed[b]];
        if (fb >= 0) trip.emplace_back(fa, fb, 0.0);
      }
    }
  }
  for (const auto& pl : dofs_.loads) {
    const int fd = dofs_.free_index[pl.dof];
    if (fd >= 0 && pl.spring > 0.0) trip.emplace_back(fd, fd, 0.0);
  }
  K_.setFromTriplets(trip.begin(), trip.end());
  K_.makeCompressed();

  // Element scatter slots into the compressed value array.
  auto value_slot = [&](int row, int col) {
    const int* outer = K_.outerIndexPtr();
    const int* inner = K_.innerIndexPtr();
    const int lo = outer[col], hi = outer[col + 1];
    const int* it = std::lower_bound(inner + lo, inner + hi, row);
    return static_cast<int>(it - inner);
  };
  slots_.resize(mesh_.n_elems());
  for (int e = 0; e < mesh_.n_elems(); ++e) {
    const auto ed = mesh_.elem_dofs(e);
    for (int a = 0; a < 8; ++a) {
      for (int b = 0; b < 8; ++b) {
        const int fa = dofs_.free_index[ed[a]];
        const int fb = dofs_.free_index[ed[b]];
        slots_[e][8 * a + b] = (fa >= 0 && fb >= 0) ? value_slot(fa, fb) : -1;
      }
    }
  }

  f_ext_free_ = VectorXd::Zero(nf);
  for (const auto& pl : dofs_.loads) {
    const int fd = dofs_.free_index[pl.dof];
    if (fd >= 0) f_ext_free_(fd) += pl.force;
  }
  solver_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
}

Vector8d CaseContext::gather(const VectorXd& u, int e) const {
  const auto ed = mesh_.elem_dofs(e);
  Vector8d ue;
  for (int a = 0; a < 8; ++a) ue(a) = u(ed[a]);
  return ue;
}

Vector3d CaseContext::center_strain(const VectorXd& u, int e) const {
  return kernel_.center_strain(gather(u, e));
}

Matrix38d CaseContext::center_strain_derivative(const VectorXd& u, int e) const {
  return kernel_.center_strain_derivative(gather(u, e));
}

double CaseContext::total_energy(const VectorXd& u, const ElementFields& fields) const {
  double W = 0.0;
  for (int e = 0; e < mesh_.n_elems(); ++e) {
    const auto ev = kernel_.eval(gather(u, e), fields.gamma(e), fields.E(e),
                                 region_.thickness[e], false);
    if (ev.inverted) throw SolverError("total_energy: inverted element " + std::to_string(e));
    W += ev.W;
  }
  for (const auto& pl : dofs_.loads) W += 0.5 * pl.spring * u(pl.dof) * u(pl.dof);
  return W;
}

bool CaseContext::internal_force(const VectorXd& u, const ElementFields& fields, VectorXd& r_int,
                                 int* inverted_elem) {
  r_int.setZero(dofs_.n_free);
  for (int e = 0; e < mesh_.n_elems(); ++e) {
    const auto ev = kernel_.eval(gather(u, e), fields.gamma(e), fields.E(e),
                                 region_.thickness[e], false);
    if (ev.inverted) {
      if (inverted_elem) *inverted_elem = e;
      return false;
    }
    const auto ed = mesh_.elem_dofs(e);
    for (int a = 0; a < 8; ++a) {
      const int fa = dofs_.free_index[ed[a]];
      if (fa >= 0) r_int(fa) += ev.f(a);
    }
  }
  for (const auto& pl : dofs_.loads) {
    const int fd = dofs_.free_index[pl.dof];
    if (fd >= 0) r_int(fd) += pl.spring * u(pl.dof);
  }
  return true;
}

bool CaseContext::assemble(const VectorXd& u, const ElementFields& fields, VectorXd& r_int,
                           int* inverted_elem) {
  r_int.setZero(dofs_.n_free);
  double* kv = K_.valuePtr();
  std::fill(kv, kv + K_.nonZeros(), 0.0);
  for (int e = 0; e < mesh_.n_elems(); ++e) {
    const auto ev = kernel_.eval(gather(u, e), fields.gamma(e), fields.E(e),
                                 region_.thickness[e], true);
    if (ev.inverted) {
      if (inverted_elem) *inverted_elem = e;
      return false;
    }
    const auto ed = mesh_.elem_dofs(e);
    const auto& sl = slots_[e];
    for (int a = 0; a < 8; ++a) {
      const int fa = dofs_.free_index[ed[a]];
      if (fa >= 0) r_int(fa) += ev.f(a);
      for (int b = 0; b < 8; ++b) {
        const int s = sl[8 * a + b];
        if (s >= 0) kv[s] += ev.k(a, b);
      }
    }
  }
  for (const auto& pl : dofs_.loads) {
    const int fd = dofs_.free_index[pl.dof];
    if (fd < 0) continue;
    r_int(fd) += pl.spring * u(pl.dof);
    if (pl.spring > 0.0) {
      const int* outer = K_.outerIndexPtr();
      const int* inner = K_.innerIndexPtr();
      const int* it = std::lower_bound(inner + outer[fd], inner + outer[fd + 1], fd);
      kv[it - inner] += pl.spring;
    }
  }
  return true;
}

bool CaseContext::factorize() {
  if (!pattern_analyzed_) {
    solver_->analyzePattern(K_);
    pattern_analyzed_ = true;
  }
  solver_->factorize(K_);
  ++n_factorizations_;
  return solver_->info() == Eigen::Success;
}

void CaseContext::set_prescribed(VectorXd& u, double lam) const {
  for (int d = 0; d < mesh_.n_dofs(); ++d) {
    if (dofs_.status[d] == DofStatus::Prescribed)
      u(d) = lam * dofs_.prescribed[d];
    else if (dofs_.status[d] == DofStatus::Fixed)
      u(d) = 0.0;
  }
}

bool CaseContext::newton_increment(const ElementFields& fields, const NewtonControls& controls,
                                   double lam, VectorXd& u, SolveReport& rep) {
  rep.residual_history.clear();
  double ref = 0.0, first_rn = 0.0;
  VectorXd r_int;
  for (int it = 0; it <= controls.max_iters; ++it) {
    int bad = -1;
    if (!assemble(u, fields, r_int, &bad)) {
      // Only the jumped start of an increment can be inadmissible; accepted
      // line-search states are always valid.
      rep.inverted_element = bad;
      return false;
    }
    const VectorXd r = r_int - lam * f_ext_free_;
    const double rn = r.norm();
    if (!std::isfinite(rn)) return false;
    if (it == 0) {
      ref = std::max(lam * f_ext_free_.norm(), rn);
      first_rn = rn;
    }
    rep.residual_history.push_back(rn);
    rep.residual = rn;
    if (rn <= controls.tol_abs + controls.tol_rel * ref) {
      // Tangent at the converged state, kept for the adjoint.
      return factorize();
    }
    // Monotone damped Newton cannot recover past this point; hand the
    // increment to the cutback logic instead of burning the budget.
    if (it >= 20 && rn > 0.1 * first_rn) return false;
    if (it == controls.max_iters) return false;
    if (!factorize()) return false;
    const VectorXd du = solver_->solve(-r);
    if (!du.allFinite()) return false;
    ++rep.newton_iters;

    // Backtracking line search on the residual norm: reject steps that
    // invert elements or grow the residual.
    double alpha = 1.0;
    bool accepted = false;
    VectorXd u_trial = u;
    for (int t = 0; t < 11; ++t) {
      for (int k = 0; k < dofs_.n_free; ++k)
        u_trial(dofs_.free_dofs[k]) = u(dofs_.free_dofs[k]) + alpha * du(k);
      VectorXd r_try;
      if (internal_force(u_trial, fields, r_try)) {
        const double rn_try = (r_try - lam * f_ext_free_).norm();
        if (std::isfinite(rn_try) &&
            (rn_try < rn * (1.0 - 1e-4 * alpha) || rn_try <= controls.tol_abs)) {
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) return false;
    u = u_trial;
  }
  return false;
}

SolveReport CaseContext::newton_solve(const ElementFields& fields, const NewtonControls& controls,
                                      VectorXd& u) {
  if (u.size() != mesh_.n_dofs()) u = VectorXd::Zero(mesh_.n_dofs());
  SolveReport rep;
  const double step_floor = std::pow(0.5, controls.max_cutbacks);
  const int failure_cap = 5 * controls.max_cutbacks + 10;
  double lam_done = 0.0;
  double step = 1.0;
  double last_step = 0.0;
  int easy_streak = 0;
  bool warm = true;  // a failed warm full-load attempt restarts the ramp from zero
  VectorXd u_snap = VectorXd::Zero(mesh_.n_dofs());
  VectorXd u_snap2 = VectorXd::Zero(mesh_.n_dofs());
  while (lam_done < 1.0 - 1e-12) {
    const double lam = std::min(1.0, lam_done + step);
    // Secant predictor: extrapolate the converged path so the increment does
    // not start from a boundary-layer jump. Falls back to the plain start
    // when the extrapolated state is inadmissible.
    if (last_step > 0.0) {
      const double ratio = (lam - lam_done) / last_step;
      for (int k = 0; k < dofs_.n_free; ++k) {
        const int d = dofs_.free_dofs[k];
        u(d) = u_snap(d) + ratio * (u_snap(d) - u_snap2(d));
      }
      set_prescribed(u, lam);
      VectorXd r_probe;
      if (!internal_force(u, fields, r_probe)) {
        u = u_snap;
        set_prescribed(u, lam);
      }
    } else {
      set_prescribed(u, lam);
    }
    const int iters_before = rep.newton_iters;
    if (newton_increment(fields, controls, lam, u, rep)) {
      warm = false;
      last_step = lam - lam_done;
      lam_done = lam;
      u_snap2 = u_snap;
      u_snap = u;
      ++rep.increments;
      // Regrow the step after consecutive easy increments.
      if (rep.newton_iters - iters_before <= 5 && step < 1.0) {
        if (++easy_streak >= 2) {
          step = std::min(1.0, 2.0 * step);
          easy_streak = 0;
        }
      } else {
        easy_streak = 0;
      }
      continue;
    }
    ++rep.cutbacks;
    step *= 0.5;
    easy_streak = 0;
    if (step < step_floor || rep.cutbacks > failure_cap) {
      rep.converged = false;
      return rep;
    }
    if (warm || lam_done == 0.0) {
      // Abandon the warm start; the ramp itself resumes from the last
      // converged load level after later failures.
      warm = false;
      lam_done = 0.0;
      last_step = 0.0;
      u.setZero();
      u_snap.setZero();
      u_snap2.setZero();
    } else {
      u = u_snap;  // failed iterations polluted u; rewind to the converged state
      last_step = 0.0;
    }
  }
  rep.converged = true;
  return rep;
}

VectorXd CaseContext::adjoint_solve(const VectorXd& dfdu_full) const {
  VectorXd rhs(dofs_.n_free);
  for (int k = 0; k < dofs_.n_free; ++k) rhs(k) = -dfdu_full(dofs_.free_dofs[k]);
  const VectorXd lam_free = solver_->solve(rhs);
  if (solver_->info() != Eigen::Success || !lam_free.allFinite())
    throw SolverError("adjoint solve failed: singular tangent");
  VectorXd lam = VectorXd::Zero(dofs_.status.size());
  for (int k = 0; k < dofs_.n_free; ++k) lam(dofs_.free_dofs[k]) = lam_free(k);
  return lam;
}

}  // namespace strainmech
