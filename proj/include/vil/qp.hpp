#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <iosfwd>
#include <string>

namespace vil::qp {

// Dense convex quadratic program
//   min 1/2 x'Hx + g'x   s.t.  Gx <= h,  lb <= x <= ub
// H symmetric positive semidefinite. Box bounds may be +-infinity.
struct Problem {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  Eigen::VectorXd lb;
  Eigen::VectorXd ub;

  int num_vars() const { return static_cast<int>(g.size()); }
  int num_ineq() const { return static_cast<int>(h.size()); }
  void validate() const;  // throws std::invalid_argument on dimension mismatch
};

enum class SolveStatus { optimal, max_iter, infeasible };

struct Solution {
  Eigen::VectorXd x;        // primal
  Eigen::VectorXd lambda;   // duals of Gx <= h rows, >= 0 at optimality
  Eigen::VectorXd box_dual; // duals of the box rows (signed: + upper, - lower)
  SolveStatus status = SolveStatus::max_iter;
  double kkt_residual = 0.0;  // max of primal, dual, complementarity residuals
  double objective = 0.0;
  int iterations = 0;
};

struct SolverSettings {
  double tol = 1e-6;     // absolute KKT tolerance
  int max_iter = 4000;
  double rho = 0.1;      // ADMM penalty
  double sigma = 1e-6;   // proximal regularization
  double alpha = 1.6;    // over-relaxation
  bool scale = true;     // Ruiz equilibration
  bool polish = true;    // active-set refinement of the ADMM iterate
  bool adaptive_rho = true;
  bool warm_start = true;
  int check_interval = 25;
};

// Operator-splitting solver for the problem class above. An instance keeps
// its factorization between solves with identical (H, G) so the MPC hot
// path pays only for iterations, and carries warm-start state across
// receding-horizon ticks.
class AdmmSolver {
 public:
  explicit AdmmSolver(SolverSettings settings = {});

  Solution solve(const Problem& p);

  // Fixes the quadratic cost and constraint matrix, factoring once.
  // solve_bounds() then solves for varying g, h and box bounds.
  void setup(const Eigen::MatrixXd& H, const Eigen::MatrixXd& G);
  Solution solve_bounds(const Eigen::VectorXd& g, const Eigen::VectorXd& h,
                        const Eigen::VectorXd& lb, const Eigen::VectorXd& ub);

  void reset_warm_start();
  const SolverSettings& settings() const { return settings_; }
  SolverSettings& settings() { return settings_; }

 private:
  void factor(double rho);
  Solution run(const Eigen::VectorXd& g, const Eigen::VectorXd& l,
               const Eigen::VectorXd& u);
  void scale_problem();
  bool polish(const Eigen::VectorXd& g, const Eigen::VectorXd& l,
              const Eigen::VectorXd& u, Eigen::VectorXd& x, Eigen::VectorXd& y,
              double* kkt) const;
  double kkt_error(const Eigen::VectorXd& g, const Eigen::VectorXd& l,
                   const Eigen::VectorXd& u, const Eigen::VectorXd& x,
                   const Eigen::VectorXd& y, double* rp = nullptr,
                   double* rd = nullptr) const;

  SolverSettings settings_;

  // Problem data in stacked form A = [G; I]; H_/A_ are the scaled working
  // copies, H0_/A0_ the originals used for residuals and polishing.
  Eigen::MatrixXd H_, A_, H0_, A0_;
  int n_ = 0, m_ = 0;  // variables, G rows
  bool factored_ = false;
  double rho_used_ = 0.0;

  // Ruiz scaling: x = D xbar, y = (E/c) ybar.
  Eigen::VectorXd d_scale_, e_scale_;
  double cost_scale_ = 1.0;

  Eigen::LLT<Eigen::MatrixXd> llt_;

  // Warm-start state (unscaled).
  Eigen::VectorXd warm_x_, warm_y_;
  bool have_warm_ = false;
};

// Text dump of a problem for offline reproduction of solver failures.
void write_problem(const Problem& p, std::ostream& os);
void dump_problem(const Problem& p, const std::string& path);

}  // namespace vil::qp
