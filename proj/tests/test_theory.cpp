#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "alnet/errors.hpp"
#include "alnet/harness.hpp"
#include "alnet/theory.hpp"
#include "oracles.hpp"

using namespace alnet;

namespace {

constexpr TauRecipe kRecipes[] = {TauRecipe::penalty_hmax_jacobi,        TauRecipe::penalty_hmax_gradient,
                                  TauRecipe::penalty_hmin_jacobi,        TauRecipe::penalty_hmin_gradient,
                                  TauRecipe::penalty_hmin_rand_gs,       TauRecipe::penalty_hmin_rand_gradient};

Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

// Ten-node geometric network and logistic costs used by the replication config.
struct SeededInstance {
  NetworkModel net;
  ObjectiveStack stack;
  ReferenceSolution ref;
  SeededInstance()
      : net([] {
          const Graph g = build_geometric_graph(10, 0.6, 24);
          return NetworkModel(g, scale_weights(metropolis_weights(g), 0.55, 0.45));
        }()),
        stack(generate_logistic_data(10, 15, 1.0, 24)),
        ref(reference_solve(stack)) {}
};

const SeededInstance& seeded() {
  static const SeededInstance inst;
  return inst;
}

}  // namespace

TEST(XiDetJacobi, Examples) {
  for (int tau : {1, 2, 7}) EXPECT_EQ(xi_det_jacobi(0.0, 2.0, tau), 0.0);
  EXPECT_DOUBLE_EQ(xi_det_jacobi(1.5, 1.5, 3), 0.125);
  EXPECT_THROW(xi_det_jacobi(-1, 1, 1), ConfigError);
  EXPECT_THROW(xi_det_jacobi(1, 0, 1), ConfigError);
  EXPECT_THROW(xi_det_jacobi(1, 1, 0), ConfigError);
}

TEST(XiDetJacobi, LogLinearInTau) {
  const double rho = 3.0, h = 0.7;
  const long double slope = std::log(static_cast<long double>(rho) / (rho + h));
  for (int tau = 1; tau <= 200; tau += 13) {
    const double got = xi_det_jacobi(rho, h, tau);
    EXPECT_NEAR(std::log(got), static_cast<double>(slope * tau), 1e-12 * tau);
    EXPECT_LT(xi_det_jacobi(rho, h, tau + 1), got);
  }
}

TEST(XiDetGradient, Examples) {
  EXPECT_DOUBLE_EQ(xi_det_gradient(1.0 / (2 * 3.0), 3.0, 2), 0.25);
  EXPECT_LT(xi_det_gradient((1.0 - 1e-16) / 1.0, 1.0, 1), 1e-15);
  EXPECT_THROW(xi_det_gradient(1.0, 1.0, 1), ConfigError);
  EXPECT_THROW(xi_det_gradient(2.0, 1.0, 1), ConfigError);
  EXPECT_THROW(xi_det_gradient(0.0, 1.0, 1), ConfigError);
}

TEST(XiDetGradient, RecipeOnConcreteNetworkMeetsThreshold) {
  const double gamma = 49.55;
  const double lambda2 = seeded().net.lambda2();
  const int tau = select_tau(TauRecipe::penalty_hmin_gradient, gamma, lambda2, 10);
  const double beta = 1.0 / (1.0 + gamma);
  EXPECT_LT(xi_det_gradient(beta, 1.0, tau), lambda2 / (3 * (1 + gamma)));
}

TEST(EtaRandGs, Examples) {
  for (int n : {1, 4, 10}) EXPECT_NEAR(eta_rand_gs(n, 0.0, 2.0), n * (1 - std::sqrt(1 - 1.0 / n)), 1e-15);
  const long double oracle = 10.0L * (1.0L - std::sqrt(1.0L - 0.075L));
  EXPECT_NEAR(eta_rand_gs(10, 2.0, 2.0), static_cast<double>(oracle), 1e-15);
  EXPECT_NEAR(eta_rand_gs(10, 2.0, 2.0), 0.3823080, 1e-7);
}

TEST(EtaRandGs, LargeNetworkAsymptote) {
  // N (1 - sqrt(1 - c/N)) = c/2 + c^2/(8N) + O(N^-2), c = 3/4.
  for (int n : {1000, 100000, 10000000}) {
    const double series = 0.375 + 0.75 * 0.75 / (8.0 * n);
    EXPECT_NEAR(eta_rand_gs(n, 1.0, 1.0), series, 1e-9 + 1.0 / (1.0 * n) / n);
  }
}

TEST(EtaRandGradient, Examples) {
  const long double oracle = 4.0L * (1.0L - std::sqrt(1.0L - 1.0L / 16.0L));
  EXPECT_NEAR(eta_rand_gradient(4, 0.5, 1.0), static_cast<double>(oracle), 1e-15);
  EXPECT_NEAR(eta_rand_gradient(4, 0.5, 1.0), 0.12701665, 1e-8);
  EXPECT_LT(eta_rand_gradient(4, 1.0 - 1e-12, 1.0), 1e-11);
  EXPECT_THROW(eta_rand_gradient(4, 1.0, 1.0), ConfigError);
}

TEST(EtaRandGradient, RecipeArgumentIdentity) {
  for (double gamma : {1.0, 2.5, 49.55, 100.0}) {
    const double h_min = 1.0, rho = h_min, beta = 1.0 / (rho + gamma);
    const double bh = beta * h_min;
    EXPECT_NEAR(bh * (1 - bh), gamma / ((1 + gamma) * (1 + gamma)), 1e-15);
    const int n = 10;
    EXPECT_NEAR(eta_rand_gradient(n, beta, h_min),
                n * (1 - std::sqrt(1 - gamma / (n * (1 + gamma) * (1 + gamma)))), 1e-14);
  }
}

TEST(SelectTau, JacobiUnitInstance) {
  EXPECT_EQ(select_tau(TauRecipe::penalty_hmin_jacobi, 1.0, 1.0, 10), 3);
}

TEST(SelectTau, HmaxJacobiMatchesExtendedPrecision) {
  const double gamma = 49.55;
  const double lambda2 = seeded().net.lambda2();
  const long double g = gamma, l = lambda2;
  const long double raw = std::log(6.0L * g / l) / std::log(1.0L + 1.0L / g);
  EXPECT_EQ(select_tau(TauRecipe::penalty_hmax_jacobi, gamma, lambda2, 10),
            static_cast<int>(std::ceil(raw)));
}

TEST(SelectTau, EveryRecipeSatisfiesStrictCondition) {
  for (TauRecipe r : kRecipes) {
    for (double gamma : {1.0, 1.5, 3.0, 10.0, 49.55, 100.0}) {
      for (double lambda2 : {0.01, 0.05, 0.1398, 0.5, 1.0}) {
        const int tau = select_tau(r, gamma, lambda2, 10);
        EXPECT_GE(tau, 1);
        EXPECT_LT(recipe_xi(r, gamma, 10, tau), recipe_xi_threshold(r, gamma, lambda2))
            << to_string(r) << " gamma=" << gamma << " lambda2=" << lambda2;
      }
    }
  }
}

TEST(SelectTau, RejectsOutOfRangeInputs) {
  EXPECT_THROW(select_tau(TauRecipe::penalty_hmin_jacobi, 0.5, 0.5, 10), ConfigError);
  EXPECT_THROW(select_tau(TauRecipe::penalty_hmin_jacobi, 2.0, 0.0, 10), ConfigError);
  EXPECT_THROW(select_tau(TauRecipe::penalty_hmin_jacobi, 2.0, 1.5, 10), ConfigError);
  EXPECT_THROW(parse_recipe("section5_jacobi"), ConfigError);
  for (TauRecipe r : kRecipes) EXPECT_EQ(parse_recipe(to_string(r)), r);
}

TEST(RecipeConfig, ParametersPerRecipe) {
  const auto& s = seeded();
  const double h_min = s.stack.h_min(), h_max = s.stack.h_max();
  const AlgorithmConfig hj = recipe_config(TauRecipe::penalty_hmax_jacobi, s.stack, s.net);
  EXPECT_EQ(hj.rho, h_max);
  EXPECT_EQ(hj.alpha, h_min + h_max);
  const AlgorithmConfig g = recipe_config(TauRecipe::penalty_hmin_gradient, s.stack, s.net);
  EXPECT_EQ(g.rho, h_min);
  EXPECT_EQ(g.alpha, h_min);
  EXPECT_EQ(g.beta, 1.0 / (h_max + h_min));
  EXPECT_EQ(g.variant, Variant::det_gradient);
  const AlgorithmConfig rg = recipe_config(TauRecipe::penalty_hmin_rand_gradient, s.stack, s.net);
  EXPECT_EQ(rg.variant, Variant::rand_gradient);
  for (TauRecipe r : kRecipes) {
    const AlgorithmConfig c = recipe_config(r, s.stack, s.net);
    EXPECT_NO_THROW(validate(c, s.stack));
    const RateCertificate cert = certificate(c, s.stack, s.net, s.ref.x_star);
    EXPECT_TRUE(cert.conditions_hold()) << to_string(r);
    EXPECT_LT(cert.r, 1.0) << to_string(r);
  }
}

TEST(Monotonicity, XiJacobiOverGrid) {
  for (double rho : {0.1, 1.0, 10.0})
    for (double h : {0.1, 1.0, 10.0})
      for (int tau : {1, 3, 10}) {
        const double v = xi_det_jacobi(rho, h, tau);
        EXPECT_LT(xi_det_jacobi(rho, h, tau + 1), v);
        EXPECT_LT(xi_det_jacobi(rho, h * 1.1, tau), v);
        EXPECT_GT(xi_det_jacobi(rho * 1.1, h, tau), v);
      }
}

TEST(Monotonicity, EtaDecreasingInPenalty) {
  for (int n : {2, 10, 50})
    for (double h : {0.1, 1.0, 10.0})
      for (double rho : {0.0, 0.1, 1.0, 10.0}) {
        EXPECT_GT(eta_rand_gs(n, rho, h), eta_rand_gs(n, rho * 1.1 + 0.01, h));
      }
}

TEST(Certificate, IdenticalCostsStartingAtOptimum) {
  const Eigen::Vector3d c(0.5, -1.0, 2.0);
  std::vector<std::shared_ptr<const NodeCost>> costs;
  for (int i = 0; i < 4; ++i) {
    costs.push_back(std::make_shared<QuadraticCost>(Eigen::MatrixXd::Identity(3, 3), -c));
  }
  const ObjectiveStack st(costs);
  const NetworkModel net = oracle::chain_model(4);
  AlgorithmConfig cfg;
  cfg.variant = Variant::det_jacobi;
  cfg.alpha = cfg.rho = 1.0;
  cfg.tau = 20;
  const RateCertificate cert = certificate(cfg, st, net, c, c);
  EXPECT_EQ(cert.d_x, 0.0);
  EXPECT_LE(cert.d_mu, 1e-15);
  EXPECT_LE(cert.bound_constant, 1e-14);
}

TEST(Certificate, ExactInnerSolvesGiveBareRate) {
  const auto& s = seeded();
  AlgorithmConfig cfg;
  cfg.variant = Variant::det_jacobi;
  cfg.rho = 0.0;  // a single local solve is then exact
  cfg.alpha = 0.7 * s.stack.h_min();
  cfg.tau = 1;
  const RateCertificate cert = certificate(cfg, s.stack, s.net, s.ref.x_star);
  EXPECT_EQ(cert.xi, 0.0);
  EXPECT_DOUBLE_EQ(cert.r, std::max(0.5, 1 - cfg.alpha * s.net.lambda2() / s.stack.h_max()));
  EXPECT_TRUE(cert.conditions_hold());
}

TEST(Certificate, BoundConstantFromDefinition) {
  const auto& s = seeded();
  const AlgorithmConfig cfg = recipe_config(TauRecipe::penalty_hmin_jacobi, s.stack, s.net);
  const RateCertificate cert = certificate(cfg, s.stack, s.net, s.ref.x_star);
  double sq = 0;
  for (int i = 0; i < 10; ++i) sq += s.stack.cost(i).gradient(s.ref.x_star).squaredNorm();
  const double d_mu = std::sqrt(sq / 10);
  const double d_x = s.ref.x_star.norm();
  EXPECT_NEAR(cert.d_mu, d_mu, 1e-14 * d_mu);
  EXPECT_NEAR(cert.d_x, d_x, 1e-14 * d_x);
  const double expected =
      std::sqrt(10.0) * std::max(d_x, 2 * d_mu / (std::sqrt(s.net.lambda2()) * s.stack.h_min()));
  EXPECT_NEAR(cert.bound_constant, expected, 1e-12 * expected);
  const double r = std::max(0.5 + 1.5 * cert.xi, 1 - cfg.alpha * s.net.lambda2() / (cfg.rho + s.stack.h_max()) +
                                                     3 * cfg.alpha * cert.xi / s.stack.h_min());
  EXPECT_DOUBLE_EQ(cert.r, r);
  EXPECT_DOUBLE_EQ(cert.primal_bound(7), std::pow(r, 7) * cert.bound_constant);
}

TEST(Certificate, ViolationsAreNamed) {
  const auto& s = seeded();
  AlgorithmConfig cfg = recipe_config(TauRecipe::penalty_hmin_jacobi, s.stack, s.net);
  cfg.alpha = 3 * s.stack.h_min();
  cfg.tau = 1;
  const RateCertificate cert = certificate(cfg, s.stack, s.net, s.ref.x_star);
  EXPECT_FALSE(cert.alpha_ok);
  EXPECT_FALSE(cert.xi_ok);
  try {
    cert.ensure_conditions();
    FAIL() << "expected ConditionsViolated";
  } catch (const ConditionsViolated& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("alpha"), std::string::npos);
    EXPECT_NE(msg.find("xi"), std::string::npos);
  }
  cfg.alpha = s.stack.h_min();
  const RateCertificate only_xi = certificate(cfg, s.stack, s.net, s.ref.x_star);
  EXPECT_TRUE(only_xi.alpha_ok);
  EXPECT_THROW(only_xi.ensure_conditions(), ConditionsViolated);
}

TEST(Certificate, PenaltyHmaxRateIsOneMinusOmegaLambda2) {
  const auto& s = seeded();
  const AlgorithmConfig cfg = recipe_config(TauRecipe::penalty_hmax_jacobi, s.stack, s.net);
  const RateCertificate cert = certificate(cfg, s.stack, s.net, s.ref.x_star);
  ASSERT_TRUE(cert.conditions_hold());
  // K from the second branch of the rate with this instance's xi; half the
  // margin keeps the inequality strict.
  const double lambda2 = s.net.lambda2();
  const double margin = std::min(0.5 - 1.5 * cert.xi, cfg.alpha * lambda2 / (cfg.rho + s.stack.h_max()) -
                                                          3 * cfg.alpha * cert.xi / s.stack.h_min());
  ASSERT_GT(margin, 0.0);
  const double k_const = 2 * lambda2 / margin;
  EXPECT_LT(cert.r, 1 - lambda2 / k_const);
}

TEST(Certificate, RelativeCostBoundTranslation) {
  RateCertificate c;
  c.r = 0.5;
  c.bound_constant = 2.0;
  c.node_count = 3;
  c.h_max = 4.0;
  // N h_max / 2 (r^k B)^2 / gap
  EXPECT_DOUBLE_EQ(relative_cost_bound(c, 1, 6.0), 3 * 4.0 / 2 * 1.0 / 6.0);
  EXPECT_THROW(relative_cost_bound(c, 1, 0.0), ConfigError);
}

TEST(SaddleResiduals, VanishAtSaddlePoint) {
  const auto q = oracle::random_quadratics(5, 3, 41);
  const ObjectiveStack st = q.stack();
  const NetworkModel net = oracle::chain_model(5);
  const SaddlePoint sp = make_saddle_point(st, q.x_star());
  const SaddleResiduals r = saddle_residuals(st, net, sp.x_bullet, sp.mu_bullet, 0.8);
  EXPECT_LE(r.stationarity, 1e-12);
  EXPECT_LE(r.consensus, 1e-12);
  EXPECT_LE(r.dual_sum, 1e-12);
}

TEST(SaddleResiduals, MatchDenseOracle) {
  const auto q = oracle::random_quadratics(4, 2, 42);
  const ObjectiveStack st = q.stack();
  const NetworkModel net = oracle::chain_model(4);
  std::mt19937_64 rng(43);
  const Eigen::VectorXd x = random_vector(8, rng);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(8);
  mu(0) = 1.5;
  mu(3) = -2.0;
  const Eigen::MatrixXd lk = oracle::kron_identity(net.spectrum().laplacian, 2);
  const SaddleResiduals r = saddle_residuals(st, net, x, mu, 0.5);
  EXPECT_NEAR(r.consensus, (lk * x).norm(), 1e-13);
  EXPECT_DOUBLE_EQ(r.dual_sum, std::hypot(1.5, -2.0));
  Eigen::VectorXd g(8);
  for (int i = 0; i < 4; ++i) g.segment(i * 2, 2) = q.a[i] * x.segment(i * 2, 2) + q.b[i];
  EXPECT_NEAR(r.stationarity, (g + mu + 0.5 * lk * x).norm(), 1e-12);
}

TEST(Lyapunov, Examples) {
  const auto q = oracle::random_quadratics(5, 3, 44);
  const ObjectiveStack st = q.stack();
  const NetworkModel net = oracle::chain_model(5);
  const SaddlePoint sp = make_saddle_point(st, q.x_star());
  PrimalDualState s;
  s.x = sp.x_bullet;
  s.mu = sp.mu_bullet;
  EXPECT_EQ(lyapunov_value(s, net.spectrum(), sp, st.h_min()), 0.0);
  std::mt19937_64 rng(45);
  s.x = random_vector(15, rng);
  EXPECT_DOUBLE_EQ(lyapunov_value(s, net.spectrum(), sp, st.h_min()), (s.x - sp.x_bullet).norm());
}

TEST(Lyapunov, MatchesPseudoInverseOracle) {
  // |Lambda^{-1/2} Q^T (x) I v|^2 = v^T (L^+ (x) I) v, L^+ = (L + J)^{-1} - J.
  const Graph g = build_geometric_graph(7, 0.7, 46);
  const NetworkModel net(g, scale_weights(metropolis_weights(g), 0.55, 0.45));
  const auto q = oracle::random_quadratics(7, 3, 47);
  const ObjectiveStack st = q.stack();
  const SaddlePoint sp = make_saddle_point(st, q.x_star());
  const Eigen::MatrixXd j = Eigen::MatrixXd::Constant(7, 7, 1.0 / 7);
  const Eigen::MatrixXd lplus = (net.spectrum().laplacian + j).inverse() - j;
  const Eigen::MatrixXd lk = oracle::kron_identity(lplus, 3);
  std::mt19937_64 rng(48);
  for (int t = 0; t < 20; ++t) {
    PrimalDualState s;
    s.x = sp.x_bullet + 1e-3 * random_vector(21, rng);
    s.mu = random_vector(21, rng);
    const Eigen::VectorXd v = s.mu - sp.mu_bullet;
    const double dual = 2.0 / st.h_min() * std::sqrt(v.dot(lk * v));
    const double expected = std::max((s.x - sp.x_bullet).norm(), dual);
    EXPECT_NEAR(lyapunov_value(s, net.spectrum(), sp, st.h_min()), expected, 1e-12 * std::max(1.0, expected));
  }
}

TEST(CertificateReport, ContainsEveryField) {
  const auto& s = seeded();
  const AlgorithmConfig cfg = recipe_config(TauRecipe::penalty_hmin_rand_gs, s.stack, s.net);
  const RateCertificate cert = certificate(cfg, s.stack, s.net, s.ref.x_star);
  EXPECT_TRUE(std::isfinite(cert.eta));
  std::ostringstream out;
  write_certificate_report(cert, out);
  for (const char* key : {"variant = rand_gauss_seidel", "alpha = ", "xi = ", "xi_ok = true", "r = ",
                          "bound_constant = ", "eta = "}) {
    EXPECT_NE(out.str().find(key), std::string::npos) << key;
  }
}
