#include "vil/qp.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <vector>

namespace vil::qp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInfeasTol = 1e-8;
constexpr double kPolishReg = 1e-9;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
}  // namespace

void Problem::validate() const {
  const int n = static_cast<int>(g.size());
  const int m = static_cast<int>(h.size());
  if (H.rows() != n || H.cols() != n)
    throw std::invalid_argument("qp: H must be n x n");
  if (G.rows() != m || (m > 0 && G.cols() != n))
    throw std::invalid_argument("qp: G must be m x n");
  if (lb.size() != n || ub.size() != n)
    throw std::invalid_argument("qp: box bounds must have length n");
  for (int i = 0; i < n; ++i)
    if (lb[i] > ub[i]) throw std::invalid_argument("qp: crossed box bounds");
}

AdmmSolver::AdmmSolver(SolverSettings settings) : settings_(settings) {}

void AdmmSolver::reset_warm_start() { have_warm_ = false; }

void AdmmSolver::setup(const Eigen::MatrixXd& H, const Eigen::MatrixXd& G) {
  n_ = static_cast<int>(H.rows());
  m_ = static_cast<int>(G.rows());
  H_ = 0.5 * (H + H.transpose());
  A_.resize(m_ + n_, n_);
  if (m_ > 0) A_.topRows(m_) = G;
  A_.bottomRows(n_).setIdentity();
  H0_ = H_;
  A0_ = A_;

  d_scale_ = Eigen::VectorXd::Ones(n_);
  e_scale_ = Eigen::VectorXd::Ones(m_ + n_);
  cost_scale_ = 1.0;
  if (settings_.scale) scale_problem();
  factor(settings_.rho);
  have_warm_ = false;
}

void AdmmSolver::scale_problem() {
  // Modified Ruiz equilibration on the stacked (H, A) data.
  for (int pass = 0; pass < 10; ++pass) {
    Eigen::VectorXd dd(n_), ee(m_ + n_);
    for (int j = 0; j < n_; ++j) {
      double nrm = std::max(H_.col(j).lpNorm<Eigen::Infinity>(),
                            A_.col(j).lpNorm<Eigen::Infinity>());
      dd[j] = (nrm > 1e-12) ? 1.0 / std::sqrt(nrm) : 1.0;
    }
    for (int i = 0; i < m_ + n_; ++i) {
      double nrm = A_.row(i).lpNorm<Eigen::Infinity>();
      ee[i] = (nrm > 1e-12) ? 1.0 / std::sqrt(nrm) : 1.0;
    }
    H_ = dd.asDiagonal() * H_ * dd.asDiagonal();
    A_ = ee.asDiagonal() * A_ * dd.asDiagonal();
    d_scale_ = d_scale_.cwiseProduct(dd);
    e_scale_ = e_scale_.cwiseProduct(ee);

    double mean_col = 0.0;
    for (int j = 0; j < n_; ++j) mean_col += H_.col(j).lpNorm<Eigen::Infinity>();
    mean_col /= n_;
    double gamma = (mean_col > 1e-12) ? 1.0 / mean_col : 1.0;
    gamma = std::clamp(gamma, 1e-6, 1e6);
    H_ *= gamma;
    cost_scale_ *= gamma;

    if ((dd.array() - 1.0).abs().maxCoeff() < 1e-3 &&
        (ee.array() - 1.0).abs().maxCoeff() < 1e-3)
      break;
  }
}

void AdmmSolver::factor(double rho) {
  Eigen::MatrixXd K = H_ + settings_.sigma * Eigen::MatrixXd::Identity(n_, n_) +
                      rho * A_.transpose() * A_;
  llt_.compute(K);
  if (llt_.info() != Eigen::Success)
    throw std::runtime_error("qp: KKT factorization failed (NaN in data?)");
  rho_used_ = rho;
  factored_ = true;
}

double AdmmSolver::kkt_error(const Eigen::VectorXd& g, const Eigen::VectorXd& l,
                             const Eigen::VectorXd& u, const Eigen::VectorXd& x,
                             const Eigen::VectorXd& y, double* rp_out,
                             double* rd_out) const {
  // Residuals in original (unscaled) quantities.
  Eigen::VectorXd ax = A0_ * x;
  double rp = 0.0, comp = 0.0;
  for (int i = 0; i < m_ + n_; ++i) {
    rp = std::max({rp, ax[i] - u[i], l[i] - ax[i]});
    if (y[i] > 0 && std::isfinite(u[i]))
      comp = std::max(comp, y[i] * std::abs(u[i] - ax[i]));
    else if (y[i] < 0 && std::isfinite(l[i]))
      comp = std::max(comp, -y[i] * std::abs(ax[i] - l[i]));
    else
      comp = std::max(comp, std::abs(y[i]) * 1.0);
  }
  rp = std::max(rp, 0.0);
  double rd = (H0_ * x + g + A0_.transpose() * y).lpNorm<Eigen::Infinity>();
  if (rp_out) *rp_out = rp;
  if (rd_out) *rd_out = rd;
  return std::max({rp, rd, comp});
}

bool AdmmSolver::polish(const Eigen::VectorXd& g, const Eigen::VectorXd& l,
                        const Eigen::VectorXd& u, Eigen::VectorXd& x,
                        Eigen::VectorXd& y, double* kkt) const {
  std::vector<int> act;
  std::vector<double> bact;
  for (int i = 0; i < m_ + n_; ++i) {
    if (y[i] > 0 && std::isfinite(u[i])) {
      act.push_back(i);
      bact.push_back(u[i]);
    } else if (y[i] < 0 && std::isfinite(l[i])) {
      act.push_back(i);
      bact.push_back(l[i]);
    }
  }
  const int k = static_cast<int>(act.size());
  const int dim = n_ + k;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(dim, dim);
  K.topLeftCorner(n_, n_) = H0_ + kPolishReg * Eigen::MatrixXd::Identity(n_, n_);
  for (int j = 0; j < k; ++j) {
    K.block(n_ + j, 0, 1, n_) = A0_.row(act[j]);
    K.block(0, n_ + j, n_, 1) = A0_.row(act[j]).transpose();
    K(n_ + j, n_ + j) = -kPolishReg;
  }
  Eigen::VectorXd rhs(dim);
  rhs.head(n_) = -g;
  for (int j = 0; j < k; ++j) rhs[n_ + j] = bact[j];

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
  Eigen::VectorXd sol = lu.solve(rhs);
  // Two steps of iterative refinement against the unregularized system.
  Eigen::MatrixXd K0 = K;
  K0.topLeftCorner(n_, n_) -= kPolishReg * Eigen::MatrixXd::Identity(n_, n_);
  for (int j = 0; j < k; ++j) K0(n_ + j, n_ + j) = 0.0;
  for (int r = 0; r < 2; ++r) sol += lu.solve(rhs - K0 * sol);

  Eigen::VectorXd x_pol = sol.head(n_);
  Eigen::VectorXd y_pol = Eigen::VectorXd::Zero(m_ + n_);
  for (int j = 0; j < k; ++j) y_pol[act[j]] = sol[n_ + j];

  double kkt_pol = kkt_error(g, l, u, x_pol, y_pol);
  if (std::isfinite(kkt_pol) && kkt_pol < *kkt) {
    x = x_pol;
    y = y_pol;
    *kkt = kkt_pol;
    return true;
  }
  return false;
}

Solution AdmmSolver::run(const Eigen::VectorXd& g, const Eigen::VectorXd& l,
                         const Eigen::VectorXd& u) {
  if (!factored_) throw std::runtime_error("qp: solve before setup");
  const int mt = m_ + n_;
  const double alpha = settings_.alpha;
  double rho = rho_used_;

  // Scale inputs.
  Eigen::VectorXd gs = cost_scale_ * d_scale_.cwiseProduct(g);
  Eigen::VectorXd ls(mt), us(mt);
  for (int i = 0; i < mt; ++i) {
    ls[i] = std::isfinite(l[i]) ? e_scale_[i] * l[i] : l[i];
    us[i] = std::isfinite(u[i]) ? e_scale_[i] * u[i] : u[i];
  }

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(mt);
  if (settings_.warm_start && have_warm_) {
    x = d_scale_.cwiseInverse().cwiseProduct(warm_x_);
    y = cost_scale_ * e_scale_.cwiseInverse().cwiseProduct(warm_y_);
  }
  Eigen::VectorXd z = (A_ * x).cwiseMax(ls).cwiseMin(us);

  Solution sol;
  Eigen::VectorXd x_prev(n_), y_prev(mt), dx(n_), dy(mt);
  int infeas_streak = 0;

  int iter = 0;
  for (iter = 1; iter <= settings_.max_iter; ++iter) {
    x_prev = x;
    y_prev = y;

    Eigen::VectorXd rhs =
        settings_.sigma * x - gs + A_.transpose() * (rho * z - y);
    Eigen::VectorXd x_tilde = llt_.solve(rhs);
    Eigen::VectorXd z_tilde = A_ * x_tilde;

    x = alpha * x_tilde + (1.0 - alpha) * x;
    Eigen::VectorXd v = alpha * z_tilde + (1.0 - alpha) * z + y / rho;
    Eigen::VectorXd z_new = v.cwiseMax(ls).cwiseMin(us);
    y = y + rho * (alpha * z_tilde + (1.0 - alpha) * z - z_new);
    z = z_new;

    if (iter % settings_.check_interval != 0 && iter != settings_.max_iter)
      continue;

    // Unscale current iterate and test KKT.
    Eigen::VectorXd x_us = d_scale_.cwiseProduct(x);
    Eigen::VectorXd y_us = e_scale_.cwiseProduct(y) / cost_scale_;
    double rp = 0, rd = 0;
    double kkt = kkt_error(g, l, u, x_us, y_us, &rp, &rd);
    if (kkt <= settings_.tol) {
      sol.status = SolveStatus::optimal;
      sol.kkt_residual = kkt;
      if (settings_.polish) polish(g, l, u, x_us, y_us, &sol.kkt_residual);
      sol.x = x_us;
      sol.lambda = y_us.head(m_);
      sol.box_dual = y_us.tail(n_);
      sol.iterations = iter;
      break;
    }

    // Infeasibility certificates from the iterate differences.
    dx = d_scale_.cwiseProduct(x - x_prev);
    dy = e_scale_.cwiseProduct(y - y_prev) / cost_scale_;
    double ndy = dy.lpNorm<Eigen::Infinity>();
    if (ndy > 1e-12) {
      Eigen::VectorXd A0t_dy = A0_.transpose() * dy;
      bool directions_ok = true;
      double support = 0.0;
      for (int i = 0; i < mt; ++i) {
        double dyp = std::max(dy[i], 0.0), dym = std::min(dy[i], 0.0);
        if (!std::isfinite(u[i]) && dyp > kInfeasTol * ndy) directions_ok = false;
        if (!std::isfinite(l[i]) && dym < -kInfeasTol * ndy) directions_ok = false;
        if (std::isfinite(u[i])) support += u[i] * dyp;
        if (std::isfinite(l[i])) support += l[i] * dym;
      }
      if (directions_ok &&
          A0t_dy.lpNorm<Eigen::Infinity>() <= kInfeasTol * ndy &&
          support <= -kInfeasTol * ndy) {
        if (++infeas_streak >= 2) {
          sol.status = SolveStatus::infeasible;
          sol.x = d_scale_.cwiseProduct(x);
          sol.lambda = dy.head(m_);
          sol.box_dual = dy.tail(n_);
          sol.iterations = iter;
          sol.kkt_residual = kkt;
          return sol;
        }
      } else {
        infeas_streak = 0;
      }
    }

    // Adaptive penalty: balance primal and dual residual decay.
    if (settings_.adaptive_rho && iter != settings_.max_iter) {
      double num = rp / std::max(1e-12, std::max((A_ * x).lpNorm<Eigen::Infinity>(),
                                                 z.lpNorm<Eigen::Infinity>()));
      double den =
          rd / std::max(1e-12, std::max((H_ * x).lpNorm<Eigen::Infinity>(),
                                        (A_.transpose() * y).lpNorm<Eigen::Infinity>()));
      double ratio = std::sqrt(num / std::max(den, 1e-12));
      if (ratio > 5.0 || ratio < 0.2) {
        rho = std::clamp(rho * ratio, kRhoMin, kRhoMax);
        factor(rho);
      }
    }

    if (iter == settings_.max_iter) {
      sol.status = SolveStatus::max_iter;
      sol.kkt_residual = kkt;
      sol.x = x_us;
      sol.lambda = y_us.head(m_);
      sol.box_dual = y_us.tail(n_);
      sol.iterations = iter;
    }
  }
  if (sol.x.size() == 0) {
    // Loop exhausted without a residual check hit (cannot happen with the
    // final-iteration check, kept as a safety net).
    Eigen::VectorXd x_us = d_scale_.cwiseProduct(x);
    Eigen::VectorXd y_us = e_scale_.cwiseProduct(y) / cost_scale_;
    sol.status = SolveStatus::max_iter;
    sol.kkt_residual = kkt_error(g, l, u, x_us, y_us);
    sol.x = x_us;
    sol.lambda = y_us.head(m_);
    sol.box_dual = y_us.tail(n_);
    sol.iterations = iter;
  }

  if (sol.status == SolveStatus::optimal || sol.status == SolveStatus::max_iter) {
    warm_x_ = sol.x;
    warm_y_.resize(mt);
    warm_y_.head(m_) = sol.lambda;
    warm_y_.tail(n_) = sol.box_dual;
    have_warm_ = true;
  }
  return sol;
}

Solution AdmmSolver::solve_bounds(const Eigen::VectorXd& g, const Eigen::VectorXd& h,
                                  const Eigen::VectorXd& lb,
                                  const Eigen::VectorXd& ub) {
  if (g.size() != n_ || h.size() != m_ || lb.size() != n_ || ub.size() != n_)
    throw std::invalid_argument("qp: bound dimensions do not match setup");
  Eigen::VectorXd l(m_ + n_), u(m_ + n_);
  l.head(m_).setConstant(-kInf);
  u.head(m_) = h;
  l.tail(n_) = lb;
  u.tail(n_) = ub;
  Solution sol = run(g, l, u);
  const Eigen::VectorXd& x = sol.x;
  sol.objective = 0.5 * x.dot(H0_ * x) + g.dot(x);
  return sol;
}

Solution AdmmSolver::solve(const Problem& p) {
  p.validate();
  setup(p.H, p.G);
  if (settings_.warm_start && warm_x_.size() == p.num_vars() &&
      warm_y_.size() == p.num_ineq() + p.num_vars())
    have_warm_ = true;
  return solve_bounds(p.g, p.h, p.lb, p.ub);
}

void write_problem(const Problem& p, std::ostream& os) {
  Eigen::IOFormat fmt(Eigen::FullPrecision, Eigen::DontAlignCols, " ", "\n");
  os << "# n " << p.num_vars() << " m " << p.num_ineq() << "\n";
  os << "H\n" << p.H.format(fmt) << "\ng\n" << p.g.transpose().format(fmt) << "\n";
  os << "G\n" << p.G.format(fmt) << "\nh\n" << p.h.transpose().format(fmt) << "\n";
  os << "lb\n" << p.lb.transpose().format(fmt) << "\nub\n"
     << p.ub.transpose().format(fmt) << "\n";
}

void dump_problem(const Problem& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("qp: cannot write " + path);
  write_problem(p, out);
}

}  // namespace vil::qp
