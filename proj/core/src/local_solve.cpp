#include "alnet/local_solve.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "alnet/errors.hpp"

namespace alnet {

Eigen::VectorXd prox_gradient(const ProxProblem& p, const Eigen::VectorXd& y) {
  return p.cost.gradient(y) + p.linear_term + p.rho * y;
}

int accelerated_iteration_count(double epsilon, double distance_estimate, double lipschitz,
                                double strong_convexity) {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(strong_convexity > 0.0) || lipschitz < strong_convexity) {
    throw ConfigError("accelerated method needs 0 < strong convexity <= Lipschitz constant");
  }
  if (distance_estimate == 0.0) return 0;
  const double contraction = 1.0 - std::sqrt(strong_convexity / lipschitz);
  if (contraction <= 0.0) return 1;  // nu == L: one gradient step is exact
  const double ratio =
      std::log(2.0 * epsilon / (distance_estimate * distance_estimate * lipschitz)) /
      std::log(contraction);
  const double count = std::ceil(std::abs(ratio));
  if (count > static_cast<double>(std::numeric_limits<int>::max())) {
    return std::numeric_limits<int>::max();
  }
  return static_cast<int>(count);
}

ProxSolution prox_local(const ProxProblem& p, const SolverBudget& budget) {
  const int d = p.cost.dimension();
  if (budget.warm_start.size() != d || p.linear_term.size() != d) {
    throw DimensionError("prox_local: warm start / linear term size mismatch");
  }
  if (p.rho < 0.0) throw ConfigError("prox_local: rho must be non-negative");

  const HessianBounds hb = p.cost.hessian_bounds();
  const double nu = hb.min + p.rho;
  const double lip = hb.max + p.rho + hb.min;

  ProxSolution out;
  out.x = budget.warm_start;
  Eigen::VectorXd g = prox_gradient(p, out.x);
  out.gradient_evaluations = 1;
  const double distance = g.norm() / nu;
  if (distance == 0.0) return out;

  const int steps = accelerated_iteration_count(budget.epsilon, distance, lip, nu);
  if (steps > budget.max_iterations) {
    throw ConvergenceError(fmt::format(
        "prox_local: {} iterations required, cap is {} (check Hessian bounds)", steps,
        budget.max_iterations));
  }

  const double momentum = (std::sqrt(lip) - std::sqrt(nu)) / (std::sqrt(lip) + std::sqrt(nu));
  Eigen::VectorXd x_prev = out.x;
  Eigen::VectorXd y = out.x;
  Eigen::VectorXd x_next(d);
  for (int k = 0; k < steps; ++k) {
    if (k > 0) {
      g = prox_gradient(p, y);
      ++out.gradient_evaluations;
    }
    x_next = y - g / lip;
    y = x_next + momentum * (x_next - x_prev);
    x_prev = x_next;
  }
  out.x = x_prev;
  out.iterations = steps;
  return out;
}

Eigen::VectorXd gradient_step_local(const NodeCost& cost, const Eigen::VectorXd& x_i,
                                    const Eigen::VectorXd& xbar_i, const Eigen::VectorXd& mu_i,
                                    double beta, double rho) {
  if (!(beta > 0.0)) throw ConfigError("gradient step: beta must be positive");
  return (1.0 - beta * rho) * x_i + beta * rho * xbar_i - beta * (mu_i + cost.gradient(x_i));
}

double augmented_lagrangian(const ObjectiveStack& stack, const NetworkModel& net,
                            const Eigen::VectorXd& x, const Eigen::VectorXd& mu, double rho) {
  const int d = stack.dimension();
  return eval_stack(stack, x) + mu.dot(x) + 0.5 * rho * x.dot(net.apply_laplacian(x, d));
}

Eigen::VectorXd augmented_lagrangian_gradient(const ObjectiveStack& stack, const NetworkModel& net,
                                              const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                                              double rho) {
  return grad_stack(stack, x) + mu + rho * net.apply_laplacian(x, stack.dimension());
}

Eigen::VectorXd exact_al_minimizer(const ObjectiveStack& stack, const NetworkModel& net,
                                   const Eigen::VectorXd& mu, double rho,
                                   const AlMinimizerOptions& options) {
  const int n = stack.node_count();
  const int d = stack.dimension();
  if (net.node_count() != n) throw DimensionError("exact_al_minimizer: network/objective size mismatch");
  if (mu.size() != static_cast<Eigen::Index>(n) * d) throw DimensionError("exact_al_minimizer: mu size");
  if (rho < 0.0) throw ConfigError("exact_al_minimizer: rho must be non-negative");

  const double strong = stack.h_min();
  const double lip = stack.h_max() + rho * net.spectrum().lambda_max();
  const double momentum = (std::sqrt(lip) - std::sqrt(strong)) / (std::sqrt(lip) + std::sqrt(strong));

  Eigen::VectorXd x = Eigen::VectorXd::Zero(mu.size());
  Eigen::VectorXd y = x;
  for (int k = 0; k < options.max_iterations; ++k) {
    const Eigen::VectorXd g = augmented_lagrangian_gradient(stack, net, y, mu, rho);
    if (g.norm() <= options.tolerance) return y;
    const Eigen::VectorXd x_next = y - g / lip;
    y = x_next + momentum * (x_next - x);
    x = x_next;
  }
  throw ConvergenceError(fmt::format("exact_al_minimizer: gradient norm above {} after {} iterations",
                                     options.tolerance, options.max_iterations));
}

Eigen::VectorXd exact_al_minimizer_quadratic(const ObjectiveStack& stack, const NetworkModel& net,
                                             const Eigen::VectorXd& mu, double rho) {
  const int n = stack.node_count();
  const int d = stack.dimension();
  if (mu.size() != static_cast<Eigen::Index>(n) * d) throw DimensionError("exact_al_minimizer: mu size");
  const Eigen::Index nd = static_cast<Eigen::Index>(n) * d;
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(nd, nd);
  Eigen::VectorXd rhs = -mu;
  const Eigen::MatrixXd& lap = net.spectrum().laplacian;
  for (int i = 0; i < n; ++i) {
    const auto* q = dynamic_cast<const QuadraticCost*>(&stack.cost(i));
    if (q == nullptr) throw ConfigError("exact_al_minimizer_quadratic: non-quadratic cost");
    system.block(i * d, i * d, d, d) += q->a();
    rhs.segment(i * d, d) -= q->b();
    for (int j = 0; j < n; ++j) {
      if (lap(i, j) != 0.0) {
        system.block(i * d, j * d, d, d).diagonal().array() += rho * lap(i, j);
      }
    }
  }
  return system.ldlt().solve(rhs);
}

}  // namespace alnet
