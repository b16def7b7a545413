// alnet: run, certify and inspect distributed augmented Lagrangian experiments.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "alnet/harness.hpp"
#include "alnet/network.hpp"
#include "alnet/plot.hpp"
#include "alnet/theory.hpp"

namespace {

int fail(const std::string& stage, const std::string& what) {
  // StageError messages already start with the stage name.
  if (what.rfind(stage + ":", 0) == 0) {
    fmt::print(stderr, "alnet: error in {}\n", what);
  } else {
    fmt::print(stderr, "alnet: error in {}: {}\n", stage, what);
  }
  return 1;
}

void print_summary(const alnet::ExperimentResult& result, bool with_runs) {
  fmt::print("output: {}\n", result.output_dir.string());
  fmt::print("f* = {:.12g}  |grad f(x*)| = {:.3e}\n", result.reference.f_star,
             result.reference.grad_norm);
  for (const auto& o : result.outcomes) {
    const auto& c = o.certificate;
    fmt::print("{:<24} {:<18} tau={:<5} alpha={:<10.4g} rho={:<10.4g} r={:.6f} conditions={}",
               o.name, alnet::to_string(o.config.variant), c.tau, c.alpha, c.rho, c.r,
               c.conditions_hold() ? "hold" : "violated");
    if (with_runs && !o.trace.rows.empty()) {
      const auto& last = o.trace.rows.back();
      fmt::print("  final rel error={:.3e} transmissions={}", last.rel_cost_error,
                 last.transmissions_total);
    }
    fmt::print("\n");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed augmented Lagrangian methods over networks"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run every algorithm in a config and write traces");
  run->add_option("config", config_path, "Experiment config file")->required();

  auto* cert = app.add_subcommand("certify", "Write rate certificates without running");
  cert->add_option("config", config_path, "Experiment config file")->required();

  std::string graph_path;
  auto* spec = app.add_subcommand("spectrum", "Print the Laplacian spectrum of a network file");
  spec->add_option("graph", graph_path, "Network file")->required()->check(CLI::ExistingFile);

  std::string plot_dir;
  auto* plot = app.add_subcommand("plot", "Redraw the plots of an output directory from its CSVs");
  plot->add_option("dir", plot_dir, "Output directory")->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  if (*run || *cert) {
    alnet::ExperimentConfig cfg;
    try {
      cfg = alnet::load_config(config_path);
    } catch (const std::exception& e) {
      return fail("config", e.what());
    }
    try {
      if (*run) {
        print_summary(alnet::run_experiment(cfg), true);
      } else {
        print_summary(alnet::certify(cfg), false);
      }
    } catch (const alnet::StageError& e) {
      return fail(e.stage(), e.what());
    } catch (const std::exception& e) {
      return fail("experiment", e.what());
    }
    return 0;
  }

  if (*spec) {
    try {
      const alnet::NetworkFile f = alnet::read_network_file(graph_path);
      const alnet::LaplacianSpectrum s = alnet::spectrum(f.weights);
      fmt::print("nodes = {}\n", f.graph.node_count());
      fmt::print("links = {}\n", f.graph.link_count());
      fmt::print("lambda2 = {:.17g}\n", s.lambda2);
      fmt::print("lambda_max = {:.17g}\n", s.lambda_max());
      fmt::print("min_weight_eigenvalue = {:.17g}\n", f.weights.min_eigenvalue());
      fmt::print("eigenvalues = 0");
      for (Eigen::Index i = 0; i < s.eigvals_reduced.size(); ++i) {
        fmt::print(" {:.17g}", s.eigvals_reduced(i));
      }
      fmt::print("\n");
    } catch (const std::exception& e) {
      return fail("spectrum", e.what());
    }
    return 0;
  }

  if (*plot) {
    try {
      alnet::write_plots(plot_dir);
    } catch (const std::exception& e) {
      return fail("plot", e.what());
    }
  }
  return 0;
}
