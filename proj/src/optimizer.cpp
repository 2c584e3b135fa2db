#include "stakewatch/optimizer.hpp"

#include <cmath>
#include <limits>

namespace stakewatch {

Eigen::VectorXd fd_gradient(const Objective& f, const Eigen::VectorXd& x, double step_rel,
                            int* eval_counter) {
    const int n = static_cast<int>(x.size());
    Eigen::VectorXd g(n);
    Eigen::VectorXd xp = x;
    for (int i = 0; i < n; ++i) {
        const double h = step_rel * std::max(1.0, std::abs(x[i]));
        const double xi = x[i];
        xp[i] = xi + h;
        const double fp = f(xp);
        xp[i] = xi - h;
        const double fm = f(xp);
        xp[i] = xi;
        g[i] = (fp - fm) / (2.0 * h);
        if (eval_counter) *eval_counter += 2;
    }
    return g;
}

namespace {

bool finite(double v) { return std::isfinite(v); }

} // namespace

BfgsResult bfgs_minimize(const Objective& f, const Eigen::VectorXd& x0,
                         const BfgsOptions& options) {
    const int n = static_cast<int>(x0.size());
    BfgsResult res;
    res.x = x0;
    res.f = f(res.x);
    res.function_evals = 1;
    if (!finite(res.f)) {
        res.stop_reason = "objective not finite at the starting point";
        return res;
    }
    res.gradient = fd_gradient(f, res.x, options.fd_step_rel, &res.function_evals);

    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
    bool h_scaled = false;

    for (int iter = 0; iter < options.max_iter; ++iter) {
        const double grad_max = res.gradient.cwiseAbs().maxCoeff();
        if (options.on_iteration) options.on_iteration(iter, res.f, grad_max);
        if (grad_max <= options.grad_tol) {
            res.converged = true;
            res.stop_reason = "gradient max-norm below tolerance";
            return res;
        }

        Eigen::VectorXd direction = -(H * res.gradient);
        double slope = direction.dot(res.gradient);
        if (!(slope < 0.0) || !direction.allFinite()) {
            // Curvature information went bad; restart from steepest descent.
            H.setIdentity();
            h_scaled = false;
            direction = -res.gradient;
            slope = direction.dot(res.gradient);
        }

        // Backtracking Armijo line search. The first trial steps a unit step
        // in the quasi-Newton metric.
        constexpr double kArmijo = 1e-4;
        double step = 1.0;
        double f_new = std::numeric_limits<double>::infinity();
        Eigen::VectorXd x_new;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = res.x + step * direction;
            f_new = f(x_new);
            ++res.function_evals;
            if (finite(f_new) && f_new <= res.f + kArmijo * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            res.converged = grad_max <= 1e-3;
            res.stop_reason = "line search failed to find a lower point";
            return res;
        }

        Eigen::VectorXd grad_new = fd_gradient(f, x_new, options.fd_step_rel,
                                               &res.function_evals);
        const Eigen::VectorXd s = x_new - res.x;
        const Eigen::VectorXd y = grad_new - res.gradient;
        const double f_old = res.f;
        res.x = x_new;
        res.f = f_new;
        res.gradient = grad_new;
        res.iterations = iter + 1;

        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (!h_scaled) {
                H *= sy / y.dot(y);
                h_scaled = true;
            }
            // Standard inverse-Hessian update.
            const Eigen::VectorXd Hy = H * y;
            const double yHy = y.dot(Hy);
            const double rho = 1.0 / sy;
            H += ((sy + yHy) * rho * rho) * (s * s.transpose());
            const Eigen::MatrixXd cross = Hy * s.transpose();
            H -= rho * (cross + cross.transpose());
        }

        const double rel_change = std::abs(f_old - f_new) / std::max(1.0, std::abs(f_old));
        if (rel_change <= options.rel_f_tol) {
            res.converged = true;
            res.stop_reason = "relative objective change below tolerance";
            return res;
        }
    }
    res.stop_reason = "iteration limit reached";
    return res;
}

} // namespace stakewatch
