#include "alnet/theory.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "alnet/errors.hpp"

namespace alnet {

double xi_det_jacobi(double rho, double h_min, int tau) {
  if (rho < 0.0 || !(h_min > 0.0) || tau < 1) throw ConfigError("xi_det_jacobi: invalid arguments");
  return std::pow(rho / (rho + h_min), tau);
}

double xi_det_gradient(double beta, double h_min, int tau) {
  const double bh = beta * h_min;
  if (!(bh > 0.0) || !(bh < 1.0)) {
    throw ConfigError(fmt::format("xi_det_gradient: beta*h_min = {} outside (0, 1)", bh));
  }
  if (tau < 1) throw ConfigError("xi_det_gradient: tau must be at least 1");
  return std::pow(1.0 - bh, tau);
}

double eta_rand_gs(int n, double rho, double h_min) {
  if (n < 1 || rho < 0.0 || !(h_min > 0.0)) throw ConfigError("eta_rand_gs: invalid arguments");
  const double delta = rho / (rho + h_min);
  return n * (1.0 - std::sqrt(1.0 - (1.0 - delta * delta) / n));
}

double eta_rand_gradient(int n, double beta, double h_min) {
  const double bh = beta * h_min;
  if (n < 1 || !(bh > 0.0) || !(bh < 1.0)) {
    throw ConfigError(fmt::format("eta_rand_gradient: beta*h_min = {} outside (0, 1)", bh));
  }
  return n * (1.0 - std::sqrt(1.0 - bh * (1.0 - bh) / n));
}

std::string_view to_string(TauRecipe r) {
  switch (r) {
    case TauRecipe::penalty_hmax_jacobi:
      return "penalty_hmax_jacobi";
    case TauRecipe::penalty_hmax_gradient:
      return "penalty_hmax_gradient";
    case TauRecipe::penalty_hmin_jacobi:
      return "penalty_hmin_jacobi";
    case TauRecipe::penalty_hmin_gradient:
      return "penalty_hmin_gradient";
    case TauRecipe::penalty_hmin_rand_gs:
      return "penalty_hmin_rand_gs";
    case TauRecipe::penalty_hmin_rand_gradient:
      return "penalty_hmin_rand_gradient";
  }
  return "unknown";
}

TauRecipe parse_recipe(std::string_view name) {
  for (TauRecipe r : {TauRecipe::penalty_hmax_jacobi, TauRecipe::penalty_hmax_gradient,
                      TauRecipe::penalty_hmin_jacobi, TauRecipe::penalty_hmin_gradient,
                      TauRecipe::penalty_hmin_rand_gs, TauRecipe::penalty_hmin_rand_gradient}) {
    if (to_string(r) == name) return r;
  }
  throw ConfigError(fmt::format("unknown tau recipe '{}'", name));
}

Variant recipe_variant(TauRecipe r) {
  switch (r) {
    case TauRecipe::penalty_hmax_jacobi:
    case TauRecipe::penalty_hmin_jacobi:
      return Variant::det_jacobi;
    case TauRecipe::penalty_hmax_gradient:
    case TauRecipe::penalty_hmin_gradient:
      return Variant::det_gradient;
    case TauRecipe::penalty_hmin_rand_gs:
      return Variant::rand_gauss_seidel;
    case TauRecipe::penalty_hmin_rand_gradient:
      return Variant::rand_gradient;
  }
  throw ConfigError("unknown recipe");
}

namespace {

struct NormalizedParams {
  double alpha, rho, beta;
};

// Recipe parameters for h_min = 1, h_max = gamma.
NormalizedParams normalized(TauRecipe r, double gamma) {
  switch (r) {
    case TauRecipe::penalty_hmax_jacobi:
      return {1.0 + gamma, gamma, 0.0};
    case TauRecipe::penalty_hmax_gradient:
      return {1.0 + gamma, gamma, 1.0 / (2.0 * gamma)};
    case TauRecipe::penalty_hmin_jacobi:
    case TauRecipe::penalty_hmin_rand_gs:
      return {1.0, 1.0, 0.0};
    case TauRecipe::penalty_hmin_gradient:
    case TauRecipe::penalty_hmin_rand_gradient:
      return {1.0, 1.0, 1.0 / (1.0 + gamma)};
  }
  throw ConfigError("unknown recipe");
}

double recipe_formula(TauRecipe r, double gamma, double lambda2, int n) {
  switch (r) {
    case TauRecipe::penalty_hmax_jacobi:
      return std::log(6.0 * gamma / lambda2) / std::log(1.0 + 1.0 / gamma);
    case TauRecipe::penalty_hmax_gradient:
      return std::log(6.0 * gamma / lambda2) / std::log(1.0 + 1.0 / (2.0 * gamma - 1.0));
    case TauRecipe::penalty_hmin_jacobi:
      return std::log(3.0 * (1.0 + gamma) / lambda2) / std::log(2.0);
    case TauRecipe::penalty_hmin_gradient:
      return std::log(3.0 * (1.0 + gamma) / lambda2) / std::log((gamma + 1.0) / gamma);
    case TauRecipe::penalty_hmin_rand_gs:
      return std::abs(std::log(3.0 * (1.0 + gamma) / lambda2)) /
             (n * (1.0 - std::sqrt(1.0 - 3.0 / (4.0 * n))));
    case TauRecipe::penalty_hmin_rand_gradient:
      return std::abs(std::log(3.0 * (1.0 + gamma) / lambda2)) /
             (n * (1.0 - std::sqrt(1.0 - gamma / (n * (1.0 + gamma) * (1.0 + gamma)))));
  }
  throw ConfigError("unknown recipe");
}

}  // namespace

double recipe_xi(TauRecipe recipe, double gamma, int n, int tau) {
  const NormalizedParams p = normalized(recipe, gamma);
  switch (recipe_variant(recipe)) {
    case Variant::det_jacobi:
      return xi_det_jacobi(p.rho, 1.0, tau);
    case Variant::det_gradient:
      return xi_det_gradient(p.beta, 1.0, tau);
    case Variant::rand_gauss_seidel:
      return std::exp(-eta_rand_gs(n, p.rho, 1.0) * tau);
    case Variant::rand_gradient:
      return std::exp(-eta_rand_gradient(n, p.beta, 1.0) * tau);
  }
  throw ConfigError("unknown variant");
}

double recipe_xi_threshold(TauRecipe recipe, double gamma, double lambda2) {
  const NormalizedParams p = normalized(recipe, gamma);
  return lambda2 / (3.0 * (p.rho + gamma));
}

int select_tau(TauRecipe recipe, double gamma, double lambda2, int n) {
  if (!(gamma >= 1.0)) throw ConfigError(fmt::format("select_tau: gamma = {} < 1", gamma));
  if (!(lambda2 > 0.0) || lambda2 > 1.0) {
    throw ConfigError(fmt::format("select_tau: lambda2 = {} outside (0, 1]", lambda2));
  }
  if (n < 1) throw ConfigError("select_tau: n must be positive");
  const double raw = std::ceil(recipe_formula(recipe, gamma, lambda2, n));
  if (!(raw < static_cast<double>(std::numeric_limits<int>::max()))) {
    throw ConfigError("select_tau: recipe produced an unrepresentable tau");
  }
  int tau = std::max(1, static_cast<int>(raw));
  const double threshold = recipe_xi_threshold(recipe, gamma, lambda2);
  while (!(recipe_xi(recipe, gamma, n, tau) < threshold)) ++tau;
  return tau;
}

AlgorithmConfig recipe_config(TauRecipe recipe, const ObjectiveStack& stack, const NetworkModel& net) {
  const double h_min = stack.h_min();
  const double h_max = stack.h_max();
  AlgorithmConfig cfg;
  cfg.variant = recipe_variant(recipe);
  const bool max_penalty =
      recipe == TauRecipe::penalty_hmax_jacobi || recipe == TauRecipe::penalty_hmax_gradient;
  cfg.rho = max_penalty ? h_max : h_min;
  cfg.alpha = max_penalty ? h_min + cfg.rho : h_min;
  cfg.beta = uses_gradient_steps(cfg.variant) ? 1.0 / (h_max + cfg.rho) : 0.0;
  cfg.tau = select_tau(recipe, stack.gamma(), net.lambda2(), net.node_count());
  return cfg;
}

double inexactness(const AlgorithmConfig& cfg, double h_min, int n) {
  switch (cfg.variant) {
    case Variant::det_jacobi:
      return xi_det_jacobi(cfg.rho, h_min, cfg.tau);
    case Variant::det_gradient:
      return xi_det_gradient(cfg.beta, h_min, cfg.tau);
    case Variant::rand_gauss_seidel:
      return std::exp(-eta_rand_gs(n, cfg.rho, h_min) * cfg.tau);
    case Variant::rand_gradient:
      return std::exp(-eta_rand_gradient(n, cfg.beta, h_min) * cfg.tau);
  }
  throw ConfigError("unknown variant");
}

void RateCertificate::ensure_conditions() const {
  if (conditions_hold()) return;
  std::string failed;
  if (!alpha_ok) failed += fmt::format("alpha = {} > h_min + rho = {}", alpha, h_min + rho);
  if (!xi_ok) {
    if (!failed.empty()) failed += "; ";
    failed += fmt::format("xi = {} >= lambda2 h_min / (3 (rho + h_max)) = {}", xi, xi_threshold);
  }
  throw ConditionsViolated("linear-rate conditions violated: " + failed);
}

double RateCertificate::primal_bound(int k) const { return std::pow(r, k) * bound_constant; }

RateCertificate certificate(const AlgorithmConfig& cfg, const ObjectiveStack& stack,
                            const NetworkModel& net, const Eigen::VectorXd& x_star,
                            const Eigen::VectorXd& x1_0) {
  const int n = stack.node_count();
  const int d = stack.dimension();
  if (x_star.size() != d) throw DimensionError("certificate: x* has wrong length");
  RateCertificate c;
  c.variant = cfg.variant;
  c.alpha = cfg.alpha;
  c.rho = cfg.rho;
  c.beta = cfg.beta;
  c.tau = cfg.tau;
  c.node_count = n;
  c.h_min = stack.h_min();
  c.h_max = stack.h_max();
  c.lambda2 = net.lambda2();
  c.eta = std::numeric_limits<double>::quiet_NaN();
  if (cfg.variant == Variant::rand_gauss_seidel) c.eta = eta_rand_gs(n, cfg.rho, c.h_min);
  if (cfg.variant == Variant::rand_gradient) c.eta = eta_rand_gradient(n, cfg.beta, c.h_min);
  c.xi = inexactness(cfg, c.h_min, n);
  c.xi_threshold = c.lambda2 * c.h_min / (3.0 * (c.rho + c.h_max));
  c.alpha_ok = c.alpha <= c.h_min + c.rho;
  c.xi_ok = c.xi < c.xi_threshold;
  c.r = std::max(0.5 + 1.5 * c.xi, (1.0 - c.alpha * c.lambda2 / (c.rho + c.h_max)) +
                                       3.0 * c.alpha * c.xi / c.h_min);

  const Eigen::VectorXd x0 = x1_0.size() == 0 ? Eigen::VectorXd::Zero(d) : x1_0;
  if (x0.size() != d) throw DimensionError("certificate: x1(0) has wrong length");
  c.d_x = (x0 - x_star).norm();
  double sq = 0.0;
  for (int i = 0; i < n; ++i) sq += stack.cost(i).gradient(x_star).squaredNorm();
  c.d_mu = std::sqrt(sq / n);
  c.bound_constant =
      std::sqrt(static_cast<double>(n)) *
      std::max(c.d_x, 2.0 * c.d_mu / (std::sqrt(c.lambda2) * c.h_min));
  return c;
}

double relative_cost_bound(const RateCertificate& cert, int k, double f0_gap) {
  if (!(f0_gap > 0.0)) throw ConfigError("relative_cost_bound: f(0) - f* must be positive");
  const double e = cert.primal_bound(k);
  return 0.5 * cert.node_count * cert.h_max * e * e / f0_gap;
}

void write_certificate_report(const RateCertificate& c, std::ostream& out) {
  fmt::print(out, "variant = {}\n", to_string(c.variant));
  fmt::print(out, "node_count = {}\n", c.node_count);
  fmt::print(out, "alpha = {:.17g}\n", c.alpha);
  fmt::print(out, "rho = {:.17g}\n", c.rho);
  fmt::print(out, "beta = {:.17g}\n", c.beta);
  fmt::print(out, "tau = {}\n", c.tau);
  fmt::print(out, "h_min = {:.17g}\n", c.h_min);
  fmt::print(out, "h_max = {:.17g}\n", c.h_max);
  fmt::print(out, "gamma = {:.17g}\n", c.h_max / c.h_min);
  fmt::print(out, "lambda2 = {:.17g}\n", c.lambda2);
  fmt::print(out, "eta = {:.17g}\n", c.eta);
  fmt::print(out, "xi = {:.17g}\n", c.xi);
  fmt::print(out, "xi_threshold = {:.17g}\n", c.xi_threshold);
  fmt::print(out, "alpha_ok = {}\n", c.alpha_ok);
  fmt::print(out, "xi_ok = {}\n", c.xi_ok);
  fmt::print(out, "r = {:.17g}\n", c.r);
  fmt::print(out, "D_x = {:.17g}\n", c.d_x);
  fmt::print(out, "D_mu = {:.17g}\n", c.d_mu);
  fmt::print(out, "bound_constant = {:.17g}\n", c.bound_constant);
}

SaddlePoint make_saddle_point(const ObjectiveStack& stack, const Eigen::VectorXd& x_star) {
  SaddlePoint s;
  s.x_bullet = replicate_blocks(x_star, stack.node_count());
  s.mu_bullet = -grad_stack(stack, s.x_bullet);
  return s;
}

SaddleResiduals saddle_residuals(const ObjectiveStack& stack, const NetworkModel& net,
                                 const Eigen::VectorXd& x, const Eigen::VectorXd& mu, double rho) {
  const int d = stack.dimension();
  const Eigen::VectorXd lx = net.apply_laplacian(x, d);
  SaddleResiduals r;
  r.stationarity = (grad_stack(stack, x) + mu + rho * lx).norm();
  r.consensus = lx.norm();
  r.dual_sum = dual_block_sum_norm(mu, stack.node_count());
  return r;
}

double lyapunov_value(const PrimalDualState& state, const LaplacianSpectrum& spec,
                      const SaddlePoint& saddle, double h_min) {
  const Eigen::Index n = spec.laplacian.rows();
  const Eigen::Index d = state.x.size() / n;
  if (state.x.size() != saddle.x_bullet.size() || state.mu.size() != saddle.mu_bullet.size()) {
    throw DimensionError("lyapunov_value: state and saddle point sizes differ");
  }
  const Eigen::VectorXd dmu = state.mu - saddle.mu_bullet;
  Eigen::Map<const Eigen::MatrixXd> blocks(dmu.data(), d, n);
  // (Q^T (x) I) dmu as a d x (N-1) matrix, then column j scaled by lambda_j^{-1/2}.
  Eigen::MatrixXd transformed = blocks * spec.q;
  transformed *= spec.eigvals_reduced.cwiseSqrt().cwiseInverse().asDiagonal();
  const double dual = 2.0 / h_min * transformed.norm();
  return std::max((state.x - saddle.x_bullet).norm(), dual);
}

}  // namespace alnet
