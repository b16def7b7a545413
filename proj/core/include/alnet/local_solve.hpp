#pragma once

#include <Eigen/Dense>

#include "alnet/network.hpp"
#include "alnet/objective.hpp"

namespace alnet {

/// Local subproblem of one node:
///   minimize_y  f_i(y) + v^T y + (rho/2) |y|^2
/// with v = mu_i - rho * xbar_i in the distributed algorithms.
struct ProxProblem {
  const NodeCost& cost;
  double rho = 0.0;
  Eigen::VectorXd linear_term;
};

struct SolverBudget {
  /// Target optimality gap.
  double epsilon = 1e-5;
  int max_iterations = 1'000'000;
  Eigen::VectorXd warm_start;
};

struct ProxSolution {
  Eigen::VectorXd x;
  int iterations = 0;
  int gradient_evaluations = 0;
};

/// Gradient of the prox objective, grad f_i(y) + v + rho y.
Eigen::VectorXd prox_gradient(const ProxProblem& p, const Eigen::VectorXd& y);

/// Iteration count for the constant-momentum accelerated method to certify an
/// optimality gap of `epsilon`:
///   ceil | log(2 eps / (R^2 L)) / log(1 - sqrt(nu / L)) |.
/// Returns 0 when `distance_estimate` is zero.
int accelerated_iteration_count(double epsilon, double distance_estimate, double lipschitz,
                                double strong_convexity);

/// Accelerated gradient method for strongly convex functions, started at
/// budget.warm_start and run for the certified number of steps. The smoothness
/// constant is taken as h_max_i + rho + h_min_i and the modulus as h_min_i + rho;
/// the start-point distance is bounded by |grad(warm_start)| / (h_min_i + rho).
/// Throws ConvergenceError if the count exceeds budget.max_iterations.
ProxSolution prox_local(const ProxProblem& p, const SolverBudget& budget);

/// One gradient step on the augmented Lagrangian in node i's block:
///   (1 - beta rho) x_i + beta rho xbar_i - beta (mu_i + grad f_i(x_i)).
Eigen::VectorXd gradient_step_local(const NodeCost& cost, const Eigen::VectorXd& x_i,
                                    const Eigen::VectorXd& xbar_i, const Eigen::VectorXd& mu_i,
                                    double beta, double rho);

/// L_a(x; mu) = F(x) + mu^T x + (rho/2) x^T (L (x) I) x.
double augmented_lagrangian(const ObjectiveStack& stack, const NetworkModel& net,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& mu, double rho);
/// grad F(x) + mu + rho (L (x) I) x.
Eigen::VectorXd augmented_lagrangian_gradient(const ObjectiveStack& stack, const NetworkModel& net,
                                              const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                                              double rho);

struct AlMinimizerOptions {
  double tolerance = 1e-12;
  int max_iterations = 2'000'000;
};

/// argmin_x L_a(x; mu) over the full stacked variable, computed centrally by
/// accelerated gradient until the stacked gradient norm is <= tolerance.
/// Test oracle only; the distributed algorithms never call it.
Eigen::VectorXd exact_al_minimizer(const ObjectiveStack& stack, const NetworkModel& net,
                                   const Eigen::VectorXd& mu, double rho,
                                   const AlMinimizerOptions& options = {});

/// Direct solve of (blockdiag(A_i) + rho L (x) I) x = -(b + mu) for stacks of
/// QuadraticCost. Throws ConfigError otherwise.
Eigen::VectorXd exact_al_minimizer_quadratic(const ObjectiveStack& stack, const NetworkModel& net,
                                             const Eigen::VectorXd& mu, double rho);

}  // namespace alnet
