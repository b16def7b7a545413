#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "alnet/almethods.hpp"
#include "alnet/errors.hpp"
#include "alnet/network.hpp"
#include "alnet/objective.hpp"
#include "alnet/theory.hpp"

namespace alnet {

/// Failure of one pipeline stage; what() starts with "<stage>: ".
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message);
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct NetworkSpec {
  /// geometric | chain | complete | file
  std::string type = "geometric";
  int n = 10;
  double radius = 0.6;
  std::uint64_t seed = 1;
  int max_attempts = 1000;
  /// W = self_weight I + metropolis_weight W_metropolis.
  double self_weight = 0.55;
  double metropolis_weight = 0.45;
  /// Network file for type = file; its weights are used as given.
  std::string file;
};

struct ObjectiveSpec {
  /// logistic | quadratic
  std::string type = "logistic";
  int d = 15;
  double regularization = 1.0;
  std::uint64_t seed = 1;
  /// Dataset file to load instead of sampling (logistic only).
  std::string data_file;
  /// Eigenvalue range of the random quadratic Hessians.
  double eig_min = 1.0;
  double eig_max = 10.0;
};

struct AlgorithmSpec {
  std::string name;
  std::optional<TauRecipe> recipe;
  std::optional<Variant> variant;
  std::optional<double> alpha;
  std::optional<double> rho;
  std::optional<double> beta;
  std::optional<int> tau;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  NetworkSpec network;
  ObjectiveSpec objective;
  /// In order of first appearance in the file.
  std::vector<AlgorithmSpec> algorithms;
  int k_max = 300;
  std::string output_dir = "alnet-out";
  /// Optimality-gap target of the local accelerated solver.
  double epsilon = 1e-5;
};

/// Reads `key = value` lines; `#` starts a comment. Keys:
///   network.type, network.n, network.radius, network.seed, network.max_attempts,
///   network.self_weight, network.metropolis_weight, network.file
///   objective.type, objective.d, objective.regularization, objective.seed,
///   objective.data_file, objective.eig_min, objective.eig_max
///   run.k_max, run.output_dir, run.epsilon
///   algorithm.<name>.{recipe, variant, alpha, rho, beta, tau, seed}
/// With a recipe, explicitly given alpha/rho/beta/tau override the recipe's values.
/// Throws ConfigError naming the line on any unknown key or malformed value.
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Output directory after applying the ALNET_OUTPUT_DIR override.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);

/// Per-node samples: feature a_i in R^{d-1}, label b_i in {-1, +1}.
struct LogisticDataset {
  Eigen::MatrixXd features;  // N x (d-1)
  Eigen::VectorXd labels;
  /// Generating vector (x1*, x0*); empty when loaded from a file.
  Eigen::VectorXd truth;

  int node_count() const { return static_cast<int>(labels.size()); }
  int dimension() const { return static_cast<int>(features.cols()) + 1; }
};

/// Features and generating vector iid standard normal,
/// labels sign(x1*^T a + x0* + noise) with noise standard deviation 0.001.
LogisticDataset sample_logistic_dataset(int n, int d, std::uint64_t seed);
ObjectiveStack logistic_stack(const LogisticDataset& data, double regularization);
ObjectiveStack generate_logistic_data(int n, int d, double regularization, std::uint64_t seed);

/// One row per node: label followed by the d-1 features.
void write_dataset_file(const std::filesystem::path& path, const LogisticDataset& data);
LogisticDataset read_dataset_file(const std::filesystem::path& path);

/// f_i(x) = 1/2 x^T A_i x + b_i^T x, A_i with uniform eigenvalues in
/// [eig_min, eig_max] and a random orthogonal basis, b_i standard normal.
ObjectiveStack generate_quadratic_stack(int n, int d, double eig_min, double eig_max,
                                        std::uint64_t seed);

struct ReferenceSolution {
  Eigen::VectorXd x_star;
  double f_star = 0.0;
  double grad_norm = 0.0;
};

struct ReferenceOptions {
  /// Stop at |grad f| <= tolerance * max(1, |grad f(0)|).
  double tolerance = 1e-12;
  int max_iterations = 200;
};

/// Centralized damped Newton on f = sum_i f_i from x = 0.
ReferenceSolution reference_solve(const ObjectiveStack& stack, const ReferenceOptions& options = {});

/// (1/N) sum_i (f(x_i) - f*) / (f(0) - f*). Throws ConfigError if f(0) <= f*.
double relative_cost_error(const ObjectiveStack& stack, const ReferenceSolution& ref,
                           const Eigen::VectorXd& x);

/// Fills rel_cost_error, primal_error_norm (|x - 1 (x) x*|) and lyapunov_value.
MetricsFn make_metrics(const ObjectiveStack& stack, const NetworkModel& net,
                       const ReferenceSolution& ref);

/// Builds the network described by `spec`.
NetworkModel build_network(const NetworkSpec& spec);

struct Problem {
  NetworkModel net;
  ObjectiveStack stack;
  /// Present for logistic objectives.
  std::optional<LogisticDataset> dataset;
};
Problem build_problem(const ExperimentConfig& cfg);

/// Recipe values with explicit overrides, or the explicit values alone.
AlgorithmConfig resolve_algorithm(const AlgorithmSpec& spec, const ObjectiveStack& stack,
                                  const NetworkModel& net, double epsilon);

struct AlgorithmOutcome {
  std::string name;
  AlgorithmConfig config;
  RateCertificate certificate;
  RunTrace trace;
};

struct ExperimentResult {
  std::filesystem::path output_dir;
  ReferenceSolution reference;
  std::vector<AlgorithmOutcome> outcomes;
};

/// Writes network.txt, dataset.txt (logistic), reference.txt, and per algorithm
/// <name>.csv and <name>.certificate.txt, then manifest.txt and the two plots.
/// Throws StageError.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Certificates only: writes <name>.certificate.txt. Throws StageError.
ExperimentResult certify(const ExperimentConfig& cfg);

/// Certificate report plus the cost-bound translation for the final iterate.
void write_run_report(const AlgorithmOutcome& outcome, const ObjectiveStack& stack,
                      const ReferenceSolution& ref, std::ostream& out);

}  // namespace alnet
