// Shared numerical optimization kernels: bounded nonlinear least squares
// (Levenberg–Marquardt with box clamping) and a direct single-shooting NLP
// solver used by the predictive controllers.
#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "capsim/geometry.hpp"

namespace capsim::opt {

struct BoundedLsqProblem {
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual;
    Eigen::VectorXd lower, upper, x0;
    int max_iter = 200;
    double step_tol = 1e-10;
};

struct LsqResult {
    Eigen::VectorXd x;
    double residual_norm = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Minimize ‖residual(x)‖ over the box [lower, upper]. Accepted steps are
/// monotone in the residual norm and the result never leaves the box.
/// Throws NonFiniteResidual if the residual is non-finite at x0.
LsqResult least_squares_bounded(const BoundedLsqProblem& p);

/// Direct-shooting program over N force vectors. `evaluate` fills the
/// weighted residual stack (objective = ‖residual‖²) and the predicted
/// states used for the state-box check.
struct ShootingNlp {
    int horizon = 1;                     // N >= 1
    double f_min = 0.0;                  // force annulus, N
    double f_max = 0.5;
    Vec6 x_min = Vec6::Constant(-1e30);  // state box
    Vec6 x_max = Vec6::Constant(1e30);
    std::function<void(const std::vector<Vec3>& forces, Eigen::VectorXd& residual,
                       std::vector<Vec6>& states)>
        evaluate;
    int max_iter = 40;
    double step_tol = 1e-9;
    bool parallel_jacobian = false;  // OpenMP over Jacobian columns
};

struct ShootingResult {
    std::vector<Vec3> forces;
    double objective = 0.0;
    bool converged = false;
    bool feasible = false;          // constraints within 1e-6 post-hoc
    bool infeasible_start = false;  // warm start violated the annulus
    int iterations = 0;
};

ShootingResult solve_shooting_nlp(const ShootingNlp& p, const std::vector<Vec3>& warm_start);

}  // namespace capsim::opt
