#include "alnet/almethods.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "alnet/errors.hpp"

namespace alnet {

namespace {

int block_dim(const PrimalDualState& s, const NetworkModel& net) {
  const int n = net.node_count();
  if (s.x.size() % n != 0) throw DimensionError("state size is not a multiple of node count");
  return static_cast<int>(s.x.size() / n);
}

void check_xbar(const NetworkModel& net, const PrimalDualState& s, int d) {
  const Eigen::VectorXd full = net.neighbor_average(s.x, d);
  const double scale = std::max(1.0, s.x.cwiseAbs().maxCoeff());
  if ((full - s.xbar).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::logic_error("cached neighbor averages disagree with a full recompute");
  }
}

ProxSolution solve_node(const ObjectiveStack& stack, const AlgorithmConfig& cfg,
                        const PrimalDualState& s, int i, int d) {
  ProxProblem p{stack.cost(i), cfg.rho,
                s.mu.segment(i * d, d) - cfg.rho * s.xbar.segment(i * d, d)};
  SolverBudget budget;
  budget.epsilon = cfg.epsilon;
  budget.max_iterations = cfg.prox_max_iterations;
  budget.warm_start = s.x.segment(i * d, d);
  return prox_local(p, budget);
}

void refresh_neighbors(const NetworkModel& net, PrimalDualState& s, int node, int d) {
  for (int j : net.graph().neighborhood(node)) {
    s.xbar.segment(j * d, d) = net.neighbor_average(j, s.x, d);
  }
}

void record(RunTrace& trace, const PrimalDualState& s, TraceRow row, const RunHooks& hooks, int n) {
  row.k = s.k;
  row.dual_sum_norm = dual_block_sum_norm(s.mu, n);
  row.rel_cost_error = std::nan("");
  row.primal_error_norm = std::nan("");
  row.lyapunov_value = std::nan("");
  if (hooks.metrics) hooks.metrics(s, row);
  trace.rows.push_back(row);
  if (hooks.record_states) {
    trace.x.push_back(s.x);
    trace.mu.push_back(s.mu);
  }
}

using InnerFn = std::function<InnerStats(PrimalDualState&, int k)>;

RunTrace drive(const ObjectiveStack& stack, const NetworkModel& net, const AlgorithmConfig& cfg,
               int k_max, const RunHooks& hooks, const InnerFn& inner) {
  if (net.node_count() != stack.node_count()) {
    throw DimensionError("network and objective have different node counts");
  }
  if (k_max < 0) throw ConfigError("k_max must be non-negative");
  const int n = stack.node_count();
  const int d = stack.dimension();
  PrimalDualState state = hooks.initial ? *hooks.initial : initial_state(net, d);
  if (state.x.size() != static_cast<Eigen::Index>(n) * d) throw DimensionError("initial state size");

  RunTrace trace;
  trace.node_count = n;
  trace.dimension = d;
  trace.rows.reserve(k_max + 1);
  const auto start = std::chrono::steady_clock::now();
  TraceRow totals;
  record(trace, state, totals, hooks, n);
  for (int k = 0; k < k_max; ++k) {
    const InnerStats st = inner(state, k);
    state = dual_update(state, net, cfg.alpha);
    state.k = k + 1;
    totals.inner_iterations = st.inner_iterations;
    totals.transmissions_total += st.transmissions;
    totals.inner_grad_evals_total += st.inner_grad_evals;
    totals.prox_grad_evals_total += st.prox_grad_evals;
    totals.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    record(trace, state, totals, hooks, n);
  }
  return trace;
}

void require_variant(const AlgorithmConfig& cfg, Variant v) {
  if (cfg.variant != v) {
    throw ConfigError(fmt::format("configuration variant is {}, expected {}", to_string(cfg.variant),
                                  to_string(v)));
  }
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::det_jacobi:
      return "det_jacobi";
    case Variant::det_gradient:
      return "det_gradient";
    case Variant::rand_gauss_seidel:
      return "rand_gauss_seidel";
    case Variant::rand_gradient:
      return "rand_gradient";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (Variant v : {Variant::det_jacobi, Variant::det_gradient, Variant::rand_gauss_seidel,
                    Variant::rand_gradient}) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError(fmt::format("unknown algorithm variant '{}'", name));
}

bool is_randomized(Variant v) {
  return v == Variant::rand_gauss_seidel || v == Variant::rand_gradient;
}

bool uses_gradient_steps(Variant v) {
  return v == Variant::det_gradient || v == Variant::rand_gradient;
}

void validate(const AlgorithmConfig& cfg, const ObjectiveStack& stack) {
  if (!(cfg.alpha > 0.0)) throw ConfigError(fmt::format("alpha must be positive, got {}", cfg.alpha));
  if (!(cfg.rho >= 0.0)) throw ConfigError(fmt::format("rho must be non-negative, got {}", cfg.rho));
  if (cfg.tau < 1) throw ConfigError(fmt::format("tau must be at least 1, got {}", cfg.tau));
  if (!(cfg.epsilon > 0.0)) throw ConfigError("prox epsilon must be positive");
  if (uses_gradient_steps(cfg.variant)) {
    const double limit = 1.0 / (stack.h_max() + cfg.rho);
    if (!(cfg.beta > 0.0) || cfg.beta > limit * (1.0 + 1e-12)) {
      throw ConfigError(
          fmt::format("beta = {} outside (0, 1/(h_max + rho)] = (0, {}]", cfg.beta, limit));
    }
  }
}

PrimalDualState initial_state(const NetworkModel& net, int d, const Eigen::VectorXd& x0) {
  const int n = net.node_count();
  PrimalDualState s;
  if (x0.size() == 0) {
    s.x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * d);
  } else {
    if (x0.size() != d) throw DimensionError("initial_state: x0 must have length d");
    s.x = replicate_blocks(x0, n);
  }
  s.mu = Eigen::VectorXd::Zero(s.x.size());
  s.xbar = net.neighbor_average(s.x, d);
  return s;
}

PrimalDualState dual_update(const PrimalDualState& state, const NetworkModel& net, double alpha) {
  block_dim(state, net);
  PrimalDualState next = state;
  next.mu += alpha * (state.x - state.xbar);
  return next;
}

double dual_block_sum_norm(const Eigen::VectorXd& mu, int n) {
  const Eigen::Index d = mu.size() / n;
  Eigen::Map<const Eigen::MatrixXd> blocks(mu.data(), d, n);
  return blocks.rowwise().sum().norm();
}

std::vector<PoissonSchedule> sample_poisson_schedule(int n, double tau, int k_max, std::uint64_t seed) {
  if (n < 1) throw ConfigError("poisson schedule: n must be positive");
  if (!(tau > 0.0)) throw ConfigError("poisson schedule: tau must be positive");
  std::mt19937_64 rng(seed);
  std::poisson_distribution<int> ticks(static_cast<double>(n) * tau);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<PoissonSchedule> out(std::max(k_max, 0));
  for (auto& sched : out) {
    const int count = ticks(rng);
    sched.nodes.resize(count);
    for (int& node : sched.nodes) node = pick(rng);
  }
  return out;
}

InnerStats& InnerStats::operator+=(const InnerStats& o) {
  transmissions += o.transmissions;
  inner_grad_evals += o.inner_grad_evals;
  prox_grad_evals += o.prox_grad_evals;
  inner_iterations += o.inner_iterations;
  return *this;
}

InnerStats jacobi_sweep(const ObjectiveStack& stack, const NetworkModel& net,
                        const AlgorithmConfig& cfg, PrimalDualState& state) {
  const int n = net.node_count();
  const int d = block_dim(state, net);
  InnerStats st;
  Eigen::VectorXd next(state.x.size());
  // Every node reads only the s-indexed state, so the per-node solves are independent.
  for (int i = 0; i < n; ++i) {
    const ProxSolution sol = solve_node(stack, cfg, state, i, d);
    next.segment(i * d, d) = sol.x;
    st.prox_grad_evals += sol.gradient_evaluations;
  }
  state.x = std::move(next);
  state.xbar = net.neighbor_average(state.x, d);
  st.transmissions = n;
  st.inner_iterations = 1;
  return st;
}

InnerStats gradient_sweep(const ObjectiveStack& stack, const NetworkModel& net,
                          const AlgorithmConfig& cfg, PrimalDualState& state) {
  const int n = net.node_count();
  const int d = block_dim(state, net);
  Eigen::VectorXd next(state.x.size());
  for (int i = 0; i < n; ++i) {
    next.segment(i * d, d) =
        gradient_step_local(stack.cost(i), state.x.segment(i * d, d), state.xbar.segment(i * d, d),
                            state.mu.segment(i * d, d), cfg.beta, cfg.rho);
  }
  state.x = std::move(next);
  state.xbar = net.neighbor_average(state.x, d);
  InnerStats st;
  st.transmissions = n;
  st.inner_grad_evals = n;
  st.inner_iterations = 1;
  return st;
}

InnerStats gauss_seidel_tick(const ObjectiveStack& stack, const NetworkModel& net,
                             const AlgorithmConfig& cfg, PrimalDualState& state, int node) {
  const int d = block_dim(state, net);
  const ProxSolution sol = solve_node(stack, cfg, state, node, d);
  state.x.segment(node * d, d) = sol.x;
  refresh_neighbors(net, state, node, d);
  InnerStats st;
  st.transmissions = 1;
  st.prox_grad_evals = sol.gradient_evaluations;
  st.inner_iterations = 1;
  return st;
}

InnerStats gradient_tick(const ObjectiveStack& stack, const NetworkModel& net,
                         const AlgorithmConfig& cfg, PrimalDualState& state, int node) {
  const int d = block_dim(state, net);
  state.x.segment(node * d, d) = gradient_step_local(
      stack.cost(node), state.x.segment(node * d, d), state.xbar.segment(node * d, d),
      state.mu.segment(node * d, d), cfg.beta, cfg.rho);
  refresh_neighbors(net, state, node, d);
  InnerStats st;
  st.transmissions = 1;
  st.inner_grad_evals = 1;
  st.inner_iterations = 1;
  return st;
}

RunTrace run_det_jacobi(const ObjectiveStack& stack, const NetworkModel& net,
                        const AlgorithmConfig& cfg, int k_max, const RunHooks& hooks) {
  require_variant(cfg, Variant::det_jacobi);
  validate(cfg, stack);
  const int d = stack.dimension();
  return drive(stack, net, cfg, k_max, hooks, [&](PrimalDualState& s, int) {
    InnerStats total;
    for (int sweep = 0; sweep < cfg.tau; ++sweep) {
      total += jacobi_sweep(stack, net, cfg, s);
      if (cfg.verify_xbar) check_xbar(net, s, d);
    }
    return total;
  });
}

RunTrace run_det_gradient(const ObjectiveStack& stack, const NetworkModel& net,
                          const AlgorithmConfig& cfg, int k_max, const RunHooks& hooks) {
  require_variant(cfg, Variant::det_gradient);
  validate(cfg, stack);
  const int d = stack.dimension();
  return drive(stack, net, cfg, k_max, hooks, [&](PrimalDualState& s, int) {
    InnerStats total;
    for (int step = 0; step < cfg.tau; ++step) {
      total += gradient_sweep(stack, net, cfg, s);
      if (cfg.verify_xbar) check_xbar(net, s, d);
    }
    return total;
  });
}

namespace {

template <class Tick>
RunTrace run_randomized(const ObjectiveStack& stack, const NetworkModel& net,
                        const AlgorithmConfig& cfg, int k_max, const RunHooks& hooks, Tick tick) {
  validate(cfg, stack);
  const int d = stack.dimension();
  const auto schedules = sample_poisson_schedule(net.node_count(), cfg.tau, k_max, cfg.seed);
  return drive(stack, net, cfg, k_max, hooks, [&](PrimalDualState& s, int k) {
    InnerStats total;
    // An empty schedule leaves x untouched; the dual step still runs.
    for (int node : schedules[k].nodes) {
      total += tick(s, node);
      if (cfg.verify_xbar) check_xbar(net, s, d);
    }
    return total;
  });
}

}  // namespace

RunTrace run_rand_gauss_seidel(const ObjectiveStack& stack, const NetworkModel& net,
                               const AlgorithmConfig& cfg, int k_max, const RunHooks& hooks) {
  require_variant(cfg, Variant::rand_gauss_seidel);
  return run_randomized(stack, net, cfg, k_max, hooks, [&](PrimalDualState& s, int node) {
    return gauss_seidel_tick(stack, net, cfg, s, node);
  });
}

RunTrace run_rand_gradient(const ObjectiveStack& stack, const NetworkModel& net,
                           const AlgorithmConfig& cfg, int k_max, const RunHooks& hooks) {
  require_variant(cfg, Variant::rand_gradient);
  return run_randomized(stack, net, cfg, k_max, hooks, [&](PrimalDualState& s, int node) {
    return gradient_tick(stack, net, cfg, s, node);
  });
}

RunTrace run_variant(const ObjectiveStack& stack, const NetworkModel& net,
                     const AlgorithmConfig& cfg, int k_max, const RunHooks& hooks) {
  switch (cfg.variant) {
    case Variant::det_jacobi:
      return run_det_jacobi(stack, net, cfg, k_max, hooks);
    case Variant::det_gradient:
      return run_det_gradient(stack, net, cfg, k_max, hooks);
    case Variant::rand_gauss_seidel:
      return run_rand_gauss_seidel(stack, net, cfg, k_max, hooks);
    case Variant::rand_gradient:
      return run_rand_gradient(stack, net, cfg, k_max, hooks);
  }
  throw ConfigError("unknown variant");
}

RunTrace run_inexact_al(const ObjectiveStack& stack, const NetworkModel& net,
                        const AlgorithmConfig& cfg, const InnerPolicy& inner_policy, int k_max,
                        const RunHooks& hooks) {
  if (!(cfg.alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!inner_policy) throw ConfigError("run_inexact_al: empty inner policy");
  if (net.node_count() != stack.node_count()) {
    throw DimensionError("network and objective have different node counts");
  }
  const int n = stack.node_count();
  const int d = stack.dimension();
  PrimalDualState state = hooks.initial ? *hooks.initial : initial_state(net, d);

  RunTrace trace;
  trace.node_count = n;
  trace.dimension = d;
  const auto start = std::chrono::steady_clock::now();
  TraceRow totals;
  record(trace, state, totals, hooks, n);
  for (int k = 0; k < k_max; ++k) {
    InnerResult r = inner_policy(state.x, state.mu);
    if (r.x.size() != state.x.size()) throw DimensionError("inner policy returned wrong size");
    state.x = std::move(r.x);
    state.mu += cfg.alpha * net.apply_laplacian(state.x, d);
    state.xbar = net.neighbor_average(state.x, d);
    state.k = k + 1;
    totals.inner_iterations = r.stats.inner_iterations;
    totals.transmissions_total += r.stats.transmissions;
    totals.inner_grad_evals_total += r.stats.inner_grad_evals;
    totals.prox_grad_evals_total += r.stats.prox_grad_evals;
    totals.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    record(trace, state, totals, hooks, n);
  }
  return trace;
}

InnerPolicy jacobi_policy(const ObjectiveStack& stack, const NetworkModel& net,
                          const AlgorithmConfig& cfg) {
  return [&stack, &net, cfg](const Eigen::VectorXd& x, const Eigen::VectorXd& mu) {
    const int d = stack.dimension();
    PrimalDualState s;
    s.x = x;
    s.mu = mu;
    s.xbar = net.neighbor_average(x, d);
    InnerResult r;
    for (int sweep = 0; sweep < cfg.tau; ++sweep) r.stats += jacobi_sweep(stack, net, cfg, s);
    r.x = std::move(s.x);
    return r;
  };
}

InnerPolicy exact_policy(const ObjectiveStack& stack, const NetworkModel& net, double rho,
                         double tolerance) {
  return [&stack, &net, rho, tolerance](const Eigen::VectorXd&, const Eigen::VectorXd& mu) {
    AlMinimizerOptions opts;
    opts.tolerance = tolerance;
    return InnerResult{exact_al_minimizer(stack, net, mu, rho, opts), {}};
  };
}

void write_trace_csv(const RunTrace& trace, std::ostream& out) {
  fmt::print(out, "{}\n", kTraceCsvHeader);
  for (const TraceRow& r : trace.rows) {
    fmt::print(out, "{},{},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.k, r.transmissions_total,
               r.grad_evals_total(), r.rel_cost_error, r.primal_error_norm, r.dual_sum_norm,
               r.lyapunov_value);
  }
}

}  // namespace alnet
