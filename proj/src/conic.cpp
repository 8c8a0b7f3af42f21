#include "conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qdisc/errors.hpp"

namespace qdisc::sdp::detail {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kSqrt2 = std::sqrt(2.0);

// Per-block iterate and Nesterov-Todd scaling state.
struct Block {
  int n = 0;
  MatrixXd X, S;          // current iterate
  MatrixXd R, Rinv, W;    // scaling: W = R R^T, R^-1 X R^-T = R^T S R = diag(lam)
  VectorXd lam;
};

MatrixXd smat_col(const MatrixXd& At, int j, int n) {
  return smat(At.col(j).head(svec_dim(n)));
}

// Cholesky with escalating ridge; these matrices are PD by construction but
// can be marginal near convergence.
Eigen::LLT<MatrixXd> robust_llt(MatrixXd m) {
  Eigen::LLT<MatrixXd> llt(m);
  double ridge = 1e-14 * std::max(1.0, m.diagonal().maxCoeff());
  for (int tries = 0; llt.info() != Eigen::Success && tries < 6; ++tries) {
    m.diagonal().array() += ridge;
    ridge *= 100;
    llt.compute(m);
  }
  if (llt.info() != Eigen::Success) {
    throw qdisc::SolverError("interior-point normal matrix is not positive definite");
  }
  return llt;
}

VectorXd refine_solve(const Eigen::LLT<MatrixXd>& llt, const MatrixXd& m,
                      const VectorXd& rhs) {
  VectorXd d = llt.solve(rhs);
  d += llt.solve(rhs - m * d);
  return d;
}

// Largest step a with lam + a*delta (eigen-wise) staying PSD, where delta is
// expressed in the scaled frame and lam is diagonal.
double max_step(const VectorXd& lam, const MatrixXd& delta) {
  const int n = static_cast<int>(lam.size());
  MatrixXd scaled(n, n);
  VectorXd isqrt = lam.array().sqrt().inverse();
  scaled = isqrt.asDiagonal() * delta * isqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (scaled + scaled.transpose()),
                                             Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  return lmin >= 0 ? kInf : -1.0 / lmin;
}

}  // namespace

VectorXd svec(const MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  VectorXd v(svec_dim(n));
  int k = 0;
  for (int j = 0; j < n; ++j) {
    v[k++] = a(j, j);
    for (int i = j + 1; i < n; ++i) v[k++] = kSqrt2 * 0.5 * (a(i, j) + a(j, i));
  }
  return v;
}

MatrixXd smat(const VectorXd& v) {
  const int n = static_cast<int>((std::sqrt(8.0 * v.size() + 1.0) - 1.0) / 2.0 + 0.5);
  MatrixXd a(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j) {
    a(j, j) = v[k++];
    for (int i = j + 1; i < n; ++i) {
      a(i, j) = v[k] / kSqrt2;
      a(j, i) = a(i, j);
      ++k;
    }
  }
  return a;
}

ConicResult solve_conic(const ConicProblem& p, const ConicOptions& opt) {
  const int m = static_cast<int>(p.b.size());
  const int nb = static_cast<int>(p.block_dims.size());

  ConicResult res;
  res.y = VectorXd::Zero(m);
  res.x.resize(nb);
  res.s.resize(nb);

  // Degenerate problem with no free coordinates: only cone membership of c.
  if (m == 0) {
    double worst = 0;
    for (int k = 0; k < nb; ++k) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(smat(p.c[k]), Eigen::EigenvaluesOnly);
      worst = std::min(worst, es.eigenvalues().minCoeff());
      res.s[k] = p.c[k];
      res.x[k] = VectorXd::Zero(p.c[k].size());
    }
    res.status = worst >= -opt.feas_tol ? ConicStatus::optimal : ConicStatus::y_infeasible;
    return res;
  }

  std::vector<Block> blk(nb);
  int nu = 0;
  for (int k = 0; k < nb; ++k) {
    blk[k].n = p.block_dims[k];
    blk[k].X = MatrixXd::Identity(blk[k].n, blk[k].n);
    blk[k].S = MatrixXd::Identity(blk[k].n, blk[k].n);
    nu += blk[k].n;
  }
  VectorXd y = VectorXd::Zero(m);
  double tau = 1.0, kappa = 1.0;

  double normb = 1.0 + p.b.norm();
  double normc2 = 0;
  for (int k = 0; k < nb; ++k) normc2 += p.c[k].squaredNorm();
  double normc = 1.0 + std::sqrt(normc2);

  auto inner = [&](const std::vector<MatrixXd>& a, const std::vector<MatrixXd>& b2) {
    double acc = 0;
    for (int k = 0; k < nb; ++k) acc += (a[k].array() * b2[k].array()).sum();
    return acc;
  };

  int consecutive_small_steps = 0;

  for (int iter = 0; iter < opt.max_iters; ++iter) {
    res.iterations = iter;

    // Residuals of the homogeneous model.
    VectorXd Ax = VectorXd::Zero(m);
    double ctx = 0;
    std::vector<VectorXd> xs(nb), ss(nb);
    for (int k = 0; k < nb; ++k) {
      xs[k] = svec(blk[k].X);
      ss[k] = svec(blk[k].S);
      Ax += p.At[k].transpose() * xs[k];
      ctx += p.c[k].dot(xs[k]);
    }
    double bty = p.b.dot(y);
    VectorXd rP = p.b * tau - Ax;
    std::vector<VectorXd> rD(nb);
    double xdots = 0;
    for (int k = 0; k < nb; ++k) {
      rD[k] = p.c[k] * tau - p.At[k] * y - ss[k];
      xdots += xs[k].dot(ss[k]);
    }
    double rG = kappa + ctx - bty;
    double mu = (xdots + tau * kappa) / (nu + 1);
    res.mu = mu;

    // Scaled (de-homogenized) optimality measures.
    double pobj = bty / tau;
    double dobj = ctx / tau;
    double feas_x = rP.norm() / (tau * normb);
    double rd2 = 0;
    for (int k = 0; k < nb; ++k) rd2 += rD[k].squaredNorm();
    double feas_y = std::sqrt(rd2) / (tau * normc);
    double rel_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));

    res.obj_y = pobj;
    res.obj_x = dobj;
    res.rel_gap = rel_gap;
    res.feas_x = feas_x;
    res.feas_y = feas_y;
    res.tau = tau;
    res.kappa = kappa;

    if (opt.verbose) {
      std::printf("it %3d  gap %.2e  fx %.2e  fy %.2e  mu %.2e  tau %.2e  kap %.2e\n",
                  iter, rel_gap, feas_x, feas_y, mu, tau, kappa);
    }

    if (feas_x <= opt.feas_tol && feas_y <= opt.feas_tol && rel_gap <= opt.gap_tol) {
      res.status = ConicStatus::optimal;
      for (int k = 0; k < nb; ++k) {
        res.x[k] = xs[k] / tau;
        res.s[k] = ss[k] / tau;
      }
      res.y = y / tau;
      return res;
    }

    // Infeasibility: tau collapsing against kappa.
    if (tau < 1e-8 * std::max(1.0, kappa) && mu < 1e-10) {
      if (bty > 1e-12) {
        // y / (b.y) is an improving ray: -At y in cone.
        double worst = 0;
        for (int k = 0; k < nb; ++k) {
          Eigen::SelfAdjointEigenSolver<MatrixXd> es(smat(VectorXd(-p.At[k] * y)),
                                                     Eigen::EigenvaluesOnly);
          worst = std::min(worst, es.eigenvalues().minCoeff() / bty);
        }
        if (worst > -1e-6) {
          res.status = ConicStatus::y_unbounded;
          res.y = y / bty;
          return res;
        }
      }
      if (ctx < -1e-12) {
        res.status = ConicStatus::y_infeasible;
        for (int k = 0; k < nb; ++k) res.x[k] = xs[k] / (-ctx);
        return res;
      }
      res.status = ConicStatus::max_iters;
      return res;
    }

    // Nesterov-Todd scaling per block. Marginal iterates get a small
    // diagonal bump rather than a hard failure.
    auto chol_with_bump = [](MatrixXd& m) {
      Eigen::LLT<MatrixXd> llt(m);
      double ridge = 1e-15 * std::max(1.0, m.diagonal().maxCoeff());
      for (int tries = 0; llt.info() != Eigen::Success && tries < 8; ++tries) {
        m.diagonal().array() += ridge;
        ridge *= 32;
        llt.compute(m);
      }
      if (llt.info() != Eigen::Success) {
        throw qdisc::SolverError("iterate left the cone interior");
      }
      return llt;
    };
    for (int k = 0; k < nb; ++k) {
      Block& B = blk[k];
      auto lx = chol_with_bump(B.X);
      auto ls = chol_with_bump(B.S);
      MatrixXd Lx = lx.matrixL();
      MatrixXd Ls = ls.matrixL();
      Eigen::JacobiSVD<MatrixXd> svd(Ls.transpose() * Lx,
                                     Eigen::ComputeFullU | Eigen::ComputeFullV);
      B.lam = svd.singularValues();
      VectorXd isq = B.lam.array().sqrt().inverse();
      B.R = Lx * svd.matrixV() * isq.asDiagonal();
      B.Rinv = isq.asDiagonal() * svd.matrixU().transpose() * Ls.transpose();
      B.W = B.R * B.R.transpose();
    }

    // Normal matrix M = A Theta A^T with Theta = (W kron_s W).
    MatrixXd M = MatrixXd::Zero(m, m);
    VectorXd AThc = VectorXd::Zero(m);
    double cThc = 0;
    std::vector<VectorXd> Thc(nb);
    for (int k = 0; k < nb; ++k) {
      const Block& B = blk[k];
      const int sd = svec_dim(B.n);
      MatrixXd ThAt(sd, m);
      for (int j = 0; j < m; ++j) {
        ThAt.col(j) = svec(B.W * smat_col(p.At[k], j, B.n) * B.W);
      }
      M.noalias() += p.At[k].transpose() * ThAt;
      Thc[k] = svec(B.W * smat(p.c[k]) * B.W);
      AThc += p.At[k].transpose() * Thc[k];
      cThc += p.c[k].dot(Thc[k]);
    }
    M = 0.5 * (M + M.transpose().eval());
    Eigen::LLT<MatrixXd> Mllt = robust_llt(M);

    VectorXd g2 = refine_solve(Mllt, M, AThc + p.b);

    std::vector<MatrixXd> dX(nb), dS(nb), dXt(nb), dSt(nb);
    std::vector<MatrixXd> corr(nb);
    double dtau = 0, dkappa = 0, corr_tk = 0;
    bool have_corr = false;

    auto compute_direction = [&](double sigma, double eta) {
      // Complementarity right-hand sides in the scaled frame.
      std::vector<VectorXd> dw(nb);
      VectorXd Adw = VectorXd::Zero(m);
      VectorXd ARd = VectorXd::Zero(m);
      double cdw = 0, cThrD = 0;
      for (int k = 0; k < nb; ++k) {
        const Block& B = blk[k];
        // Linv_lam[sigma mu I - Lam^2] is diagonal; the corrector couples
        // off-diagonal entries.
        MatrixXd rhs = MatrixXd::Zero(B.n, B.n);
        rhs.diagonal() = sigma * mu * B.lam.array().inverse() - B.lam.array();
        if (have_corr) {
          MatrixXd full = -corr[k];
          for (int i = 0; i < B.n; ++i)
            for (int j2 = 0; j2 < B.n; ++j2)
              full(i, j2) *= 2.0 / (B.lam[i] + B.lam[j2]);
          rhs += full;
        }
        MatrixXd D = rhs;
        dw[k] = svec(B.R * D * B.R.transpose());
        Adw += p.At[k].transpose() * dw[k];
        cdw += p.c[k].dot(dw[k]);
        VectorXd thrd = svec(B.W * smat(rD[k]) * B.W);
        ARd += p.At[k].transpose() * thrd;
        cThrD += p.c[k].dot(thrd);
      }
      double d_g = sigma * mu - tau * kappa - (have_corr ? corr_tk : 0.0);

      VectorXd g1 = refine_solve(Mllt, M, VectorXd(eta * rP + eta * ARd - Adw));

      double denom = -g2.dot(AThc) + cThc + p.b.dot(g2) + kappa / tau;
      double numer =
          eta * rG + AThc.dot(g1) - eta * cThrD + cdw - p.b.dot(g1) + d_g / tau;
      dtau = numer / denom;
      VectorXd dy = g1 + dtau * g2;
      for (int k = 0; k < nb; ++k) {
        const Block& B = blk[k];
        VectorXd ds = eta * rD[k] - p.At[k] * dy + p.c[k] * dtau;
        dS[k] = smat(ds);
        VectorXd dx = dw[k] - svec(B.W * dS[k] * B.W);
        dX[k] = smat(dx);
        dXt[k] = B.Rinv * dX[k] * B.Rinv.transpose();
        dSt[k] = B.R.transpose() * dS[k] * B.R;
      }
      dkappa = (d_g - kappa * dtau) / tau;
      return dy;
    };

    auto boundary_step = [&]() {
      double a = kInf;
      for (int k = 0; k < nb; ++k) {
        a = std::min(a, max_step(blk[k].lam, dXt[k]));
        a = std::min(a, max_step(blk[k].lam, dSt[k]));
      }
      if (dtau < 0) a = std::min(a, -tau / dtau);
      if (dkappa < 0) a = std::min(a, -kappa / dkappa);
      return a;
    };

    // Predictor (affine) pass.
    have_corr = false;
    compute_direction(0.0, 1.0);
    double a_aff = std::min(1.0, boundary_step());

    double mu_aff = (tau + a_aff * dtau) * (kappa + a_aff * dkappa);
    {
      std::vector<MatrixXd> xa(nb), sa(nb);
      for (int k = 0; k < nb; ++k) {
        xa[k] = MatrixXd(blk[k].lam.asDiagonal()) + a_aff * dXt[k];
        sa[k] = MatrixXd(blk[k].lam.asDiagonal()) + a_aff * dSt[k];
      }
      mu_aff += inner(xa, sa);
    }
    mu_aff /= (nu + 1);
    double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3.0);
    sigma = std::clamp(sigma, 1e-8, 1.0 - 1e-8);

    // Corrector pass.
    for (int k = 0; k < nb; ++k) {
      corr[k] = 0.5 * (dXt[k] * dSt[k] + dSt[k] * dXt[k]);
    }
    corr_tk = dtau * dkappa;
    have_corr = true;
    VectorXd dy = compute_direction(sigma, 1.0 - sigma);

    double a = std::min(1.0, opt.step_frac * boundary_step());
    if (a < 1e-9) {
      if (++consecutive_small_steps >= 3) break;
    } else {
      consecutive_small_steps = 0;
    }

    for (int k = 0; k < nb; ++k) {
      blk[k].X += a * dX[k];
      blk[k].S += a * dS[k];
      blk[k].X = 0.5 * (blk[k].X + blk[k].X.transpose().eval());
      blk[k].S = 0.5 * (blk[k].S + blk[k].S.transpose().eval());
    }
    y += a * dy;
    tau += a * dtau;
    kappa += a * dkappa;
  }

  // Out of iterations: report the de-homogenized best effort.
  for (int k = 0; k < nb; ++k) {
    res.x[k] = svec(blk[k].X) / tau;
    res.s[k] = svec(blk[k].S) / tau;
  }
  res.y = y / tau;
  res.status = ConicStatus::max_iters;
  return res;
}

std::string to_text(const ConicProblem& p) {
  std::ostringstream os;
  os.precision(17);
  const int m = static_cast<int>(p.b.size());
  os << "conic 1\n";
  os << "# maximize b.y subject to s_k = c_k - At_k y in PSD(n_k)\n";
  os << "m " << m << "\nblocks " << p.block_dims.size() << "\n";
  for (size_t k = 0; k < p.block_dims.size(); ++k) {
    os << "block " << k << " dim " << p.block_dims[k] << "\n";
    os << "c";
    for (int i = 0; i < p.c[k].size(); ++i) os << " " << p.c[k][i];
    os << "\n";
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < p.At[k].rows(); ++i) {
        if (p.At[k](i, j) != 0.0) {
          os << "A " << i << " " << j << " " << p.At[k](i, j) << "\n";
        }
      }
    }
  }
  os << "b";
  for (int j = 0; j < m; ++j) os << " " << p.b[j];
  os << "\n";
  return os.str();
}

}  // namespace qdisc::sdp::detail
