#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace alnet {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Undirected connected graph on nodes 0..N-1. Every node carries an explicit
/// self-loop, so neighborhood(i) always contains i.
class Graph {
 public:
  /// `links` are unordered pairs {i, j} with i != j; duplicates and either
  /// orientation are accepted. Throws NetworkError if the result is disconnected.
  Graph(int node_count, const std::vector<std::pair<int, int>>& links);

  int node_count() const { return static_cast<int>(neighborhoods_.size()); }

  /// O_i: sorted neighbors of i including i itself.
  const std::vector<int>& neighborhood(int i) const { return neighborhoods_.at(i); }

  /// Number of neighbors excluding the self-loop.
  int degree(int i) const { return static_cast<int>(neighborhoods_.at(i).size()) - 1; }

  bool has_edge(int i, int j) const;

  /// Off-diagonal links as (i, j) with i < j, lexicographically sorted.
  std::vector<std::pair<int, int>> links() const;
  int link_count() const;

  /// Node coordinates for geometric graphs; empty otherwise.
  const std::vector<Point2>& positions() const { return positions_; }
  void set_positions(std::vector<Point2> positions);

  /// Seed that produced the graph and how many samples were drawn (geometric only).
  std::uint64_t seed() const { return seed_; }
  int attempts() const { return attempts_; }
  void set_provenance(std::uint64_t seed, int attempts) {
    seed_ = seed;
    attempts_ = attempts;
  }

 private:
  std::vector<std::vector<int>> neighborhoods_;
  std::vector<Point2> positions_;
  std::uint64_t seed_ = 0;
  int attempts_ = 0;
};

/// Breadth-first connectivity test on an edge list.
bool is_connected(int node_count, const std::vector<std::pair<int, int>>& links);

struct GeometricGraphOptions {
  int max_attempts = 1000;
};

/// N uniform points on the unit square, linked when closer than `radius`.
/// Disconnected samples are redrawn with seed, seed+1, ...; throws NetworkError
/// after `max_attempts` draws. A radius above sqrt(2) is capped.
Graph build_geometric_graph(int n, double radius, std::uint64_t seed,
                            const GeometricGraphOptions& options = {});
Graph build_chain_graph(int n);
Graph build_complete_graph(int n);

/// Symmetric, row-stochastic, entrywise non-negative N x N matrix.
/// Positive definiteness is not required here; NetworkModel enforces it.
class WeightMatrix {
 public:
  explicit WeightMatrix(Eigen::MatrixXd entries);

  const Eigen::MatrixXd& matrix() const { return w_; }
  int size() const { return static_cast<int>(w_.rows()); }
  double operator()(int i, int j) const { return w_(i, j); }

  double min_eigenvalue() const;

 private:
  Eigen::MatrixXd w_;
};

WeightMatrix metropolis_weights(const Graph& g);

/// a*I + b*W. Throws NetworkError if the result is not stochastic or not
/// positive definite.
WeightMatrix scale_weights(const WeightMatrix& w, double a, double b);

/// Eigen-decomposition of the weighted Laplacian L = I - W with the zero
/// eigenpair removed.
struct LaplacianSpectrum {
  Eigen::MatrixXd laplacian;
  double lambda2 = 0.0;
  /// lambda_2 <= ... <= lambda_N, length N-1.
  Eigen::VectorXd eigvals_reduced;
  /// N x (N-1), columns q_2..q_N.
  Eigen::MatrixXd q;

  Eigen::MatrixXd lambda_hat() const { return eigvals_reduced.asDiagonal(); }
  double lambda_max() const { return eigvals_reduced(eigvals_reduced.size() - 1); }
};

/// Throws NetworkError when lambda_2 <= tolerance.
LaplacianSpectrum spectrum(const WeightMatrix& w, double tolerance = 1e-12);

/// Graph, weights and Laplacian spectrum validated together: W's sparsity
/// matches the graph, W is positive definite and lambda_{N-1}(W) < 1.
class NetworkModel {
 public:
  NetworkModel(Graph graph, WeightMatrix weights);

  const Graph& graph() const { return graph_; }
  const WeightMatrix& weights() const { return weights_; }
  const LaplacianSpectrum& spectrum() const { return spectrum_; }
  int node_count() const { return graph_.node_count(); }
  double lambda2() const { return spectrum_.lambda2; }

  /// (L (x) I_d) x for a stacked vector of N blocks of size d.
  Eigen::VectorXd apply_laplacian(const Eigen::VectorXd& x, int d) const;
  /// Stacked neighbor averages xbar_i = sum_{j in O_i} W_ij x_j.
  Eigen::VectorXd neighbor_average(const Eigen::VectorXd& x, int d) const;
  /// xbar_i for a single node, summed over O_i only.
  Eigen::VectorXd neighbor_average(int i, const Eigen::VectorXd& x, int d) const;

 private:
  Graph graph_;
  WeightMatrix weights_;
  LaplacianSpectrum spectrum_;
};

/// Plain-text network file: node count, provenance, optional positions, link
/// list and every non-zero weight written with round-trip precision.
void write_network_file(const std::filesystem::path& path, const Graph& g, const WeightMatrix& w);

struct NetworkFile {
  Graph graph;
  WeightMatrix weights;
};
NetworkFile read_network_file(const std::filesystem::path& path);

}  // namespace alnet
