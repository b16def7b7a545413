#include "alnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "alnet/errors.hpp"

namespace alnet {

namespace {

constexpr double kStochasticTol = 1e-12;

void check_node(int node_count, int i) {
  if (i < 0 || i >= node_count) {
    throw NetworkError(fmt::format("node index {} out of range [0, {})", i, node_count));
  }
}

}  // namespace

bool is_connected(int node_count, const std::vector<std::pair<int, int>>& links) {
  if (node_count <= 0) return false;
  std::vector<std::vector<int>> adj(node_count);
  for (const auto& [i, j] : links) {
    check_node(node_count, i);
    check_node(node_count, j);
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  std::vector<bool> seen(node_count, false);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = true;
  int reached = 1;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == node_count;
}

Graph::Graph(int node_count, const std::vector<std::pair<int, int>>& links) {
  if (node_count < 1) throw NetworkError("graph needs at least one node");
  if (!is_connected(node_count, links)) throw NetworkError("graph is disconnected");
  neighborhoods_.assign(node_count, {});
  for (int i = 0; i < node_count; ++i) neighborhoods_[i].push_back(i);
  for (const auto& [i, j] : links) {
    if (i == j) continue;
    neighborhoods_[i].push_back(j);
    neighborhoods_[j].push_back(i);
  }
  for (auto& nb : neighborhoods_) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }
}

bool Graph::has_edge(int i, int j) const {
  const auto& nb = neighborhoods_.at(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<std::pair<int, int>> Graph::links() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < node_count(); ++i) {
    for (int j : neighborhoods_[i]) {
      if (j > i) out.emplace_back(i, j);
    }
  }
  return out;
}

int Graph::link_count() const {
  int total = 0;
  for (int i = 0; i < node_count(); ++i) total += degree(i);
  return total / 2;
}

void Graph::set_positions(std::vector<Point2> positions) {
  if (!positions.empty() && static_cast<int>(positions.size()) != node_count()) {
    throw DimensionError("position count does not match node count");
  }
  positions_ = std::move(positions);
}

Graph build_geometric_graph(int n, double radius, std::uint64_t seed,
                            const GeometricGraphOptions& options) {
  if (n < 2) throw ConfigError("geometric graph needs n >= 2");
  if (!(radius > 0.0)) throw ConfigError("geometric radius must be positive");
  radius = std::min(radius, std::sqrt(2.0));
  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(attempt - 1);
    std::mt19937_64 rng(s);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Point2> pts(n);
    for (auto& p : pts) {
      p.x = unit(rng);
      p.y = unit(rng);
    }
    std::vector<std::pair<int, int>> links;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y) < radius) links.emplace_back(i, j);
      }
    }
    if (!is_connected(n, links)) continue;
    Graph g(n, links);
    g.set_positions(std::move(pts));
    g.set_provenance(s, attempt);
    return g;
  }
  throw NetworkError(fmt::format(
      "no connected geometric graph with n={} radius={} after {} attempts (radius infeasible)", n,
      radius, options.max_attempts));
}

Graph build_chain_graph(int n) {
  if (n < 2) throw ConfigError("chain graph needs n >= 2");
  std::vector<std::pair<int, int>> links;
  for (int i = 0; i + 1 < n; ++i) links.emplace_back(i, i + 1);
  return Graph(n, links);
}

Graph build_complete_graph(int n) {
  if (n < 2) throw ConfigError("complete graph needs n >= 2");
  std::vector<std::pair<int, int>> links;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) links.emplace_back(i, j);
  return Graph(n, links);
}

WeightMatrix::WeightMatrix(Eigen::MatrixXd entries) : w_(std::move(entries)) {
  if (w_.rows() != w_.cols() || w_.rows() == 0) throw DimensionError("weight matrix must be square");
  if ((w_ - w_.transpose()).cwiseAbs().maxCoeff() > kStochasticTol) {
    throw NetworkError("weight matrix is not symmetric");
  }
  if (w_.minCoeff() < 0.0) throw NetworkError("weight matrix has a negative entry");
  const Eigen::VectorXd rows = w_.rowwise().sum();
  if ((rows.array() - 1.0).abs().maxCoeff() > kStochasticTol) {
    throw NetworkError("weight matrix rows do not sum to one");
  }
}

double WeightMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w_, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

WeightMatrix metropolis_weights(const Graph& g) {
  const int n = g.node_count();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j : g.neighborhood(i)) {
      if (j == i) continue;
      w(i, j) = 1.0 / (1.0 + std::max(g.degree(i), g.degree(j)));
    }
  }
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) off += w(i, j);
    w(i, i) = 1.0 - off;
  }
  return WeightMatrix(std::move(w));
}

WeightMatrix scale_weights(const WeightMatrix& w, double a, double b) {
  if (std::abs(a + b - 1.0) > kStochasticTol) {
    throw NetworkError(fmt::format("scaled weights lose stochasticity: a + b = {}", a + b));
  }
  const int n = w.size();
  Eigen::MatrixXd m = a * Eigen::MatrixXd::Identity(n, n) + b * w.matrix();
  WeightMatrix out(std::move(m));
  const double lmin = out.min_eigenvalue();
  if (!(lmin > 0.0)) {
    throw NetworkError(
        fmt::format("scaled weight matrix is not positive definite (min eigenvalue {})", lmin));
  }
  return out;
}

LaplacianSpectrum spectrum(const WeightMatrix& w, double tolerance) {
  const int n = w.size();
  if (n < 2) throw NetworkError("spectrum needs at least two nodes");
  LaplacianSpectrum s;
  s.laplacian = Eigen::MatrixXd::Identity(n, n) - w.matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.laplacian);
  if (es.info() != Eigen::Success) throw NetworkError("Laplacian eigen-decomposition failed");
  // Eigenvalues are ascending; the first one is analytically zero.
  s.eigvals_reduced = es.eigenvalues().tail(n - 1);
  s.q = es.eigenvectors().rightCols(n - 1);
  s.lambda2 = s.eigvals_reduced(0);
  if (!(s.lambda2 > tolerance)) {
    throw NetworkError(fmt::format(
        "Laplacian spectral gap {} is not positive (graph disconnected or degenerate)", s.lambda2));
  }
  return s;
}

NetworkModel::NetworkModel(Graph graph, WeightMatrix weights)
    : graph_(std::move(graph)), weights_(std::move(weights)) {
  const int n = graph_.node_count();
  if (weights_.size() != n) throw DimensionError("weight matrix size does not match graph");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if ((weights_(i, j) > 0.0) != graph_.has_edge(i, j)) {
        throw NetworkError(fmt::format("weight ({}, {}) disagrees with the graph's links", i, j));
      }
    }
  }
  if (!(weights_.min_eigenvalue() > 0.0)) {
    throw NetworkError("weight matrix is not positive definite");
  }
  spectrum_ = alnet::spectrum(weights_);
}

Eigen::VectorXd NetworkModel::apply_laplacian(const Eigen::VectorXd& x, int d) const {
  const int n = node_count();
  if (x.size() != static_cast<Eigen::Index>(n) * d) throw DimensionError("stacked vector size mismatch");
  Eigen::Map<const Eigen::MatrixXd> blocks(x.data(), d, n);
  Eigen::VectorXd out(x.size());
  Eigen::Map<Eigen::MatrixXd> result(out.data(), d, n);
  result.noalias() = blocks * spectrum_.laplacian;
  return out;
}

Eigen::VectorXd NetworkModel::neighbor_average(const Eigen::VectorXd& x, int d) const {
  const int n = node_count();
  if (x.size() != static_cast<Eigen::Index>(n) * d) throw DimensionError("stacked vector size mismatch");
  Eigen::VectorXd out(x.size());
  for (int i = 0; i < n; ++i) out.segment(i * d, d) = neighbor_average(i, x, d);
  return out;
}

Eigen::VectorXd NetworkModel::neighbor_average(int i, const Eigen::VectorXd& x, int d) const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
  for (int j : graph_.neighborhood(i)) acc += weights_(i, j) * x.segment(j * d, d);
  return acc;
}

void write_network_file(const std::filesystem::path& path, const Graph& g, const WeightMatrix& w) {
  std::ofstream out(path);
  if (!out) throw Error(fmt::format("cannot open {} for writing", path.string()));
  const int n = g.node_count();
  fmt::print(out, "# alnet network file v1\n");
  fmt::print(out, "nodes {}\n", n);
  fmt::print(out, "seed {}\n", g.seed());
  fmt::print(out, "attempts {}\n", g.attempts());
  for (int i = 0; i < static_cast<int>(g.positions().size()); ++i) {
    fmt::print(out, "position {} {:.17g} {:.17g}\n", i, g.positions()[i].x, g.positions()[i].y);
  }
  for (const auto& [i, j] : g.links()) fmt::print(out, "link {} {}\n", i, j);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (w(i, j) != 0.0) fmt::print(out, "weight {} {} {:.17g}\n", i, j, w(i, j));
}

NetworkFile read_network_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open network file {}", path.string()));
  int n = -1;
  std::uint64_t seed = 0;
  int attempts = 0;
  std::vector<std::pair<int, int>> links;
  std::vector<std::pair<int, Point2>> positions;
  std::vector<std::tuple<int, int, double>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    bool ok = true;
    if (key == "nodes") {
      ok = static_cast<bool>(ls >> n);
    } else if (key == "seed") {
      ok = static_cast<bool>(ls >> seed);
    } else if (key == "attempts") {
      ok = static_cast<bool>(ls >> attempts);
    } else if (key == "position") {
      int i;
      Point2 p;
      ok = static_cast<bool>(ls >> i >> p.x >> p.y);
      positions.emplace_back(i, p);
    } else if (key == "link") {
      int i, j;
      ok = static_cast<bool>(ls >> i >> j);
      links.emplace_back(i, j);
    } else if (key == "weight") {
      int i, j;
      double v;
      ok = static_cast<bool>(ls >> i >> j >> v);
      entries.emplace_back(i, j, v);
    } else {
      ok = false;
    }
    if (!ok) throw Error(fmt::format("{}:{}: malformed line '{}'", path.string(), line_no, line));
  }
  if (n < 1) throw Error(fmt::format("{}: missing 'nodes' line", path.string()));
  Graph g(n, links);
  if (!positions.empty()) {
    std::vector<Point2> pts(n);
    for (const auto& [i, p] : positions) {
      check_node(n, i);
      pts[i] = p;
    }
    g.set_positions(std::move(pts));
  }
  g.set_provenance(seed, attempts);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [i, j, v] : entries) {
    check_node(n, i);
    check_node(n, j);
    w(i, j) = v;
  }
  return NetworkFile{std::move(g), WeightMatrix(std::move(w))};
}

}  // namespace alnet
