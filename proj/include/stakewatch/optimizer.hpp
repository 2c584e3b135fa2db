#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace stakewatch {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct BfgsOptions {
    int max_iter = 500;
    double grad_tol = 1e-5;     // max-norm of the gradient
    double rel_f_tol = 1e-9;    // relative objective change per iteration
    double fd_step_rel = 1e-5;  // central-difference step, relative per coordinate
    std::function<void(int iter, double f, double grad_max)> on_iteration;
};

struct BfgsResult {
    Eigen::VectorXd x;
    double f = 0.0;
    Eigen::VectorXd gradient;
    int iterations = 0;
    int function_evals = 0;
    bool converged = false;
    std::string stop_reason;
};

// Central finite-difference gradient with per-coordinate step
// h_i = step_rel * max(1, |x_i|).
Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x, double step_rel,
                            int* eval_counter = nullptr);

// Dense BFGS minimization with backtracking line search and a damped inverse
// Hessian update; non-finite trial values are treated as rejections.
BfgsResult bfgs_minimize(const Objective& f, const Eigen::VectorXd& x0,
                         const BfgsOptions& options = {});

} // namespace stakewatch
