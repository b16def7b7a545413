#pragma once

#include <iosfwd>
#include <string_view>

#include <Eigen/Dense>

#include "alnet/almethods.hpp"
#include "alnet/network.hpp"
#include "alnet/objective.hpp"

namespace alnet {

/// (rho / (rho + h_min))^tau: per-outer-iteration contraction of tau Jacobi sweeps.
double xi_det_jacobi(double rho, double h_min, int tau);
/// (1 - beta h_min)^tau. Requires 0 < beta h_min < 1.
double xi_det_gradient(double beta, double h_min, int tau);
/// N (1 - sqrt(1 - (1 - delta^2)/N)), delta = rho / (rho + h_min).
double eta_rand_gs(int n, double rho, double h_min);
/// N (1 - sqrt(1 - beta h_min (1 - beta h_min) / N)). Requires 0 < beta h_min < 1.
double eta_rand_gradient(int n, double beta, double h_min);

/// Parameter recipes that make the inner loop accurate enough for a linear rate.
///   penalty_hmax_*: rho = h_max, alpha = h_min + rho (gradient: beta = 1/(2 h_max)).
///   penalty_hmin_*: alpha = rho = h_min (gradient: beta = 1/(rho + h_max)).
enum class TauRecipe {
  penalty_hmax_jacobi,
  penalty_hmax_gradient,
  penalty_hmin_jacobi,
  penalty_hmin_gradient,
  penalty_hmin_rand_gs,
  penalty_hmin_rand_gradient,
};

std::string_view to_string(TauRecipe r);
/// Throws ConfigError on an unknown name.
TauRecipe parse_recipe(std::string_view name);
Variant recipe_variant(TauRecipe r);

/// Ceiling formula of the recipe. If floating-point rounding lands the result
/// exactly on the boundary of the strict inequality xi < lambda2 h_min /
/// (3 (rho + h_max)), the count is raised until the inequality is strict.
int select_tau(TauRecipe recipe, double gamma, double lambda2, int n);

/// Inner-loop contraction xi implied by the recipe's parameters at the given tau,
/// expressed with h_min = 1 and h_max = gamma.
double recipe_xi(TauRecipe recipe, double gamma, int n, int tau);

/// Right-hand side lambda2 h_min / (3 (rho + h_max)) of the strict inexactness
/// condition under the recipe's rho, with h_min = 1 and h_max = gamma.
double recipe_xi_threshold(TauRecipe recipe, double gamma, double lambda2);

/// alpha, rho, beta and tau of the recipe for a concrete problem.
AlgorithmConfig recipe_config(TauRecipe recipe, const ObjectiveStack& stack, const NetworkModel& net);

struct RateCertificate {
  Variant variant = Variant::det_jacobi;
  double alpha = 0.0;
  double rho = 0.0;
  double beta = 0.0;
  int tau = 0;
  int node_count = 0;
  double h_min = 0.0;
  double h_max = 0.0;
  double lambda2 = 0.0;
  /// eta (Gauss-Seidel) or eta' (gradient) for randomized variants; NaN otherwise.
  double eta = 0.0;
  /// Inner-loop contraction.
  double xi = 0.0;
  double xi_threshold = 0.0;
  /// alpha <= h_min + rho.
  bool alpha_ok = false;
  /// xi < lambda2 h_min / (3 (rho + h_max)).
  bool xi_ok = false;
  /// max{1/2 + 3 xi / 2, 1 - alpha lambda2 / (rho + h_max) + 3 alpha xi / h_min}.
  double r = 0.0;
  double d_x = 0.0;
  double d_mu = 0.0;
  /// sqrt(N) max{D_x, 2 D_mu / (sqrt(lambda2) h_min)}.
  double bound_constant = 0.0;

  bool conditions_hold() const { return alpha_ok && xi_ok; }
  /// Throws ConditionsViolated naming the failing condition(s).
  void ensure_conditions() const;
  /// r^k * bound_constant: bound on |x_i(k) - x*| at every node.
  double primal_bound(int k) const;
};

double inexactness(const AlgorithmConfig& cfg, double h_min, int n);

/// D_x = |x_1(0) - x*|, D_mu = (mean_i |grad f_i(x*)|^2)^{1/2}; x1_0 defaults to zero.
RateCertificate certificate(const AlgorithmConfig& cfg, const ObjectiveStack& stack,
                            const NetworkModel& net, const Eigen::VectorXd& x_star,
                            const Eigen::VectorXd& x1_0 = {});

/// Upper bound on (1/N) sum_i (f(x_i(k)) - f*) / (f(0) - f*) from the primal
/// bound: f(x_i) - f* <= (N h_max / 2) |x_i - x*|^2, since f has N costs.
double relative_cost_bound(const RateCertificate& cert, int k, double f0_gap);

void write_certificate_report(const RateCertificate& cert, std::ostream& out);

/// x_bullet = 1 (x) x*, mu_bullet = -grad F(1 (x) x*).
struct SaddlePoint {
  Eigen::VectorXd x_bullet;
  Eigen::VectorXd mu_bullet;
};
SaddlePoint make_saddle_point(const ObjectiveStack& stack, const Eigen::VectorXd& x_star);

struct SaddleResiduals {
  /// |grad F(x) + mu + rho (L (x) I) x|
  double stationarity = 0.0;
  /// |(L (x) I) x|
  double consensus = 0.0;
  /// |(1 (x) I)^T mu|
  double dual_sum = 0.0;
};
SaddleResiduals saddle_residuals(const ObjectiveStack& stack, const NetworkModel& net,
                                 const Eigen::VectorXd& x, const Eigen::VectorXd& mu, double rho);

/// max{|x - x_bullet|, (2/h_min) |(Lambda^{-1/2} Q^T (x) I)(mu - mu_bullet)|}.
double lyapunov_value(const PrimalDualState& state, const LaplacianSpectrum& spec,
                      const SaddlePoint& saddle, double h_min);

}  // namespace alnet
