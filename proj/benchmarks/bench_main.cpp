#include <benchmark/benchmark.h>

#include "alnet/harness.hpp"
#include "alnet/local_solve.hpp"

using namespace alnet;

namespace {

NetworkModel network(int n) {
  const Graph g = build_geometric_graph(n, n <= 10 ? 0.6 : 0.35, 24);
  return NetworkModel(g, scale_weights(metropolis_weights(g), 0.55, 0.45));
}

}  // namespace

static void BM_ProxLocalLogistic(benchmark::State& state) {
  const ObjectiveStack stack = generate_logistic_data(10, static_cast<int>(state.range(0)), 1.0, 24);
  const double rho = stack.h_min();
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(stack.dimension(), -1.0, 1.0);
  SolverBudget budget;
  budget.warm_start = Eigen::VectorXd::Zero(stack.dimension());
  for (auto _ : state) {
    const ProxSolution s = prox_local(ProxProblem{stack.cost(0), rho, v}, budget);
    benchmark::DoNotOptimize(s.x.data());
  }
}
BENCHMARK(BM_ProxLocalLogistic)->Arg(15)->Arg(60);

static void BM_JacobiSweep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const NetworkModel net = network(n);
  const ObjectiveStack stack = generate_logistic_data(n, 15, 1.0, 24);
  AlgorithmConfig cfg;
  cfg.variant = Variant::det_jacobi;
  cfg.alpha = cfg.rho = stack.h_min();
  PrimalDualState s = initial_state(net, 15, Eigen::VectorXd::Constant(15, 0.1));
  for (auto _ : state) {
    const InnerStats st = jacobi_sweep(stack, net, cfg, s);
    benchmark::DoNotOptimize(st.prox_grad_evals);
  }
}
BENCHMARK(BM_JacobiSweep)->Arg(10)->Arg(40);

static void BM_GradientSweep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const NetworkModel net = network(n);
  const ObjectiveStack stack = generate_logistic_data(n, 15, 1.0, 24);
  AlgorithmConfig cfg;
  cfg.variant = Variant::det_gradient;
  cfg.alpha = cfg.rho = stack.h_min();
  cfg.beta = 1.0 / (stack.h_max() + cfg.rho);
  PrimalDualState s = initial_state(net, 15);
  for (auto _ : state) {
    gradient_sweep(stack, net, cfg, s);
    benchmark::DoNotOptimize(s.x.data());
  }
}
BENCHMARK(BM_GradientSweep)->Arg(10)->Arg(40);

static void BM_Spectrum(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Graph g = build_geometric_graph(n, n <= 10 ? 0.6 : 0.35, 24);
  const WeightMatrix w = scale_weights(metropolis_weights(g), 0.55, 0.45);
  for (auto _ : state) {
    const LaplacianSpectrum s = spectrum(w);
    benchmark::DoNotOptimize(s.lambda2);
  }
}
BENCHMARK(BM_Spectrum)->Arg(10)->Arg(100);
BENCHMARK_MAIN();
