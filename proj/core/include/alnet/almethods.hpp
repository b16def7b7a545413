#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "alnet/local_solve.hpp"
#include "alnet/network.hpp"
#include "alnet/objective.hpp"

namespace alnet {

enum class Variant { det_jacobi, det_gradient, rand_gauss_seidel, rand_gradient };

std::string_view to_string(Variant v);
/// Throws ConfigError on an unknown name.
Variant parse_variant(std::string_view name);
bool is_randomized(Variant v);
bool uses_gradient_steps(Variant v);

struct AlgorithmConfig {
  Variant variant = Variant::det_jacobi;
  /// Dual step size.
  double alpha = 0.0;
  /// Augmented Lagrangian penalty.
  double rho = 0.0;
  /// Primal step size, gradient variants only.
  double beta = 0.0;
  /// Inner iterations per outer iteration; for randomized variants the
  /// expected number of ticks per node.
  int tau = 1;
  std::uint64_t seed = 0;
  /// Optimality-gap target of the local accelerated solver.
  double epsilon = 1e-5;
  int prox_max_iterations = 1'000'000;
  /// Recompute every neighbor average after each update and compare with the
  /// incrementally maintained ones.
  bool verify_xbar = false;
};

/// Throws ConfigError for alpha <= 0, rho < 0, tau < 1, or, with gradient
/// variants, beta outside (0, 1/(h_max + rho)].
void validate(const AlgorithmConfig& cfg, const ObjectiveStack& stack);

/// Stacked primal x, dual mu and neighbor averages xbar (each N*d long).
struct PrimalDualState {
  Eigen::VectorXd x;
  Eigen::VectorXd mu;
  Eigen::VectorXd xbar;
  int k = 0;
};

/// Every node starts from `x0` (zero when empty) with mu = 0.
PrimalDualState initial_state(const NetworkModel& net, int d, const Eigen::VectorXd& x0 = {});

/// mu_i <- mu_i + alpha (x_i - xbar_i). Requires xbar consistent with x.
PrimalDualState dual_update(const PrimalDualState& state, const NetworkModel& net, double alpha);

/// |sum_i mu_i|.
double dual_block_sum_norm(const Eigen::VectorXd& mu, int n);

/// Ticks of the superposed node clocks during one outer iteration.
struct PoissonSchedule {
  /// Node activated by each tick, in order.
  std::vector<int> nodes;
  int tick_count() const { return static_cast<int>(nodes.size()); }
};

/// For each outer iteration draw tau(k) ~ Poisson(n * tau), then tau(k)
/// independent uniform node labels. Deterministic given `seed`.
std::vector<PoissonSchedule> sample_poisson_schedule(int n, double tau, int k_max, std::uint64_t seed);

struct InnerStats {
  std::int64_t transmissions = 0;
  std::int64_t inner_grad_evals = 0;
  std::int64_t prox_grad_evals = 0;
  int inner_iterations = 0;

  InnerStats& operator+=(const InnerStats& o);
};

/// One synchronized Jacobi sweep: every node solves its local prox problem
/// warm-started at x_i(k,s), then all neighbor averages are refreshed.
InnerStats jacobi_sweep(const ObjectiveStack& stack, const NetworkModel& net,
                        const AlgorithmConfig& cfg, PrimalDualState& state);
/// One synchronized gradient step at every node.
InnerStats gradient_sweep(const ObjectiveStack& stack, const NetworkModel& net,
                          const AlgorithmConfig& cfg, PrimalDualState& state);
/// Node `node` solves its prox problem; only xbar_j for j in O_node change.
InnerStats gauss_seidel_tick(const ObjectiveStack& stack, const NetworkModel& net,
                             const AlgorithmConfig& cfg, PrimalDualState& state, int node);
/// Node `node` takes one gradient step; only xbar_j for j in O_node change.
InnerStats gradient_tick(const ObjectiveStack& stack, const NetworkModel& net,
                         const AlgorithmConfig& cfg, PrimalDualState& state, int node);

struct TraceRow {
  int k = 0;
  int inner_iterations = 0;
  std::int64_t transmissions_total = 0;
  std::int64_t inner_grad_evals_total = 0;
  std::int64_t prox_grad_evals_total = 0;
  double rel_cost_error = 0.0;
  double primal_error_norm = 0.0;
  double dual_sum_norm = 0.0;
  double lyapunov_value = 0.0;
  double wall_seconds = 0.0;

  std::int64_t grad_evals_total() const { return inner_grad_evals_total + prox_grad_evals_total; }
};

struct RunTrace {
  int node_count = 0;
  int dimension = 0;
  /// Row k describes the state after outer iteration k (row 0: initial state).
  std::vector<TraceRow> rows;
  std::vector<Eigen::VectorXd> x;
  std::vector<Eigen::VectorXd> mu;
};

/// Fills the reference-dependent columns of a trace row.
using MetricsFn = std::function<void(const PrimalDualState&, TraceRow&)>;

struct RunHooks {
  /// Start state; defaults to initial_state(net, d).
  std::optional<PrimalDualState> initial;
  MetricsFn metrics;
  bool record_states = true;
};

RunTrace run_det_jacobi(const ObjectiveStack& stack, const NetworkModel& net,
                        const AlgorithmConfig& cfg, int k_max, const RunHooks& hooks = {});
RunTrace run_det_gradient(const ObjectiveStack& stack, const NetworkModel& net,
                          const AlgorithmConfig& cfg, int k_max, const RunHooks& hooks = {});
RunTrace run_rand_gauss_seidel(const ObjectiveStack& stack, const NetworkModel& net,
                               const AlgorithmConfig& cfg, int k_max, const RunHooks& hooks = {});
RunTrace run_rand_gradient(const ObjectiveStack& stack, const NetworkModel& net,
                           const AlgorithmConfig& cfg, int k_max, const RunHooks& hooks = {});

/// Dispatches on cfg.variant.
RunTrace run_variant(const ObjectiveStack& stack, const NetworkModel& net,
                     const AlgorithmConfig& cfg, int k_max, const RunHooks& hooks = {});

struct InnerResult {
  Eigen::VectorXd x;
  InnerStats stats;
};
/// Maps (x(k), mu(k)) to x(k+1).
using InnerPolicy = std::function<InnerResult(const Eigen::VectorXd& x, const Eigen::VectorXd& mu)>;

/// Generic inexact method: x(k+1) = policy(x(k), mu(k)),
/// mu(k+1) = mu(k) + alpha (L (x) I) x(k+1). Only cfg.alpha is read.
RunTrace run_inexact_al(const ObjectiveStack& stack, const NetworkModel& net,
                        const AlgorithmConfig& cfg, const InnerPolicy& inner_policy, int k_max,
                        const RunHooks& hooks = {});

/// cfg.tau Jacobi sweeps from x with freshly computed neighbor averages.
InnerPolicy jacobi_policy(const ObjectiveStack& stack, const NetworkModel& net,
                          const AlgorithmConfig& cfg);
/// Exact augmented Lagrangian minimization (classical method of multipliers).
InnerPolicy exact_policy(const ObjectiveStack& stack, const NetworkModel& net, double rho,
                         double tolerance = 1e-12);

/// Header: k,transmissions_total,grad_evals_total,rel_cost_error,
///         primal_error_norm,dual_sum_norm,lyapunov_value
/// grad_evals_total counts every gradient evaluation, including those spent
/// inside local prox solves.
void write_trace_csv(const RunTrace& trace, std::ostream& out);

inline constexpr std::string_view kTraceCsvHeader =
    "k,transmissions_total,grad_evals_total,rel_cost_error,primal_error_norm,dual_sum_norm,"
    "lyapunov_value";

}  // namespace alnet
