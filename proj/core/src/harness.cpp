#include "alnet/harness.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "alnet/plot.hpp"

namespace alnet {

StageError::StageError(std::string stage, const std::string& message)
    : Error(stage + ": " + message), stage_(std::move(stage)) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& text, const std::string& where) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError(fmt::format("{}: '{}' is not a valid number", where, text));
  }
  return value;
}

template <typename T>
T run_stage(const std::string& stage, const std::function<T()>& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

void run_stage_void(const std::string& stage, const std::function<void()>& body) {
  run_stage<int>(stage, [&] {
    body();
    return 0;
  });
}

AlgorithmSpec& algorithm_named(ExperimentConfig& cfg, const std::string& name) {
  for (auto& a : cfg.algorithms) {
    if (a.name == name) return a;
  }
  cfg.algorithms.push_back(AlgorithmSpec{});
  cfg.algorithms.back().name = name;
  return cfg.algorithms.back();
}

void set_key(ExperimentConfig& cfg, const std::string& key, const std::string& value,
             const std::string& where) {
  auto as_int = [&] { return parse_number<int>(value, where); };
  auto as_u64 = [&] { return parse_number<std::uint64_t>(value, where); };
  auto as_double = [&] { return parse_number<double>(value, where); };

  if (key == "network.type") {
    if (value != "geometric" && value != "chain" && value != "complete" && value != "file") {
      throw ConfigError(fmt::format("{}: unknown network type '{}'", where, value));
    }
    cfg.network.type = value;
  } else if (key == "network.n") {
    cfg.network.n = as_int();
  } else if (key == "network.radius") {
    cfg.network.radius = as_double();
  } else if (key == "network.seed") {
    cfg.network.seed = as_u64();
  } else if (key == "network.max_attempts") {
    cfg.network.max_attempts = as_int();
  } else if (key == "network.self_weight") {
    cfg.network.self_weight = as_double();
  } else if (key == "network.metropolis_weight") {
    cfg.network.metropolis_weight = as_double();
  } else if (key == "network.file") {
    cfg.network.file = value;
  } else if (key == "objective.type") {
    if (value != "logistic" && value != "quadratic") {
      throw ConfigError(fmt::format("{}: unknown objective type '{}'", where, value));
    }
    cfg.objective.type = value;
  } else if (key == "objective.d") {
    cfg.objective.d = as_int();
  } else if (key == "objective.regularization") {
    cfg.objective.regularization = as_double();
  } else if (key == "objective.seed") {
    cfg.objective.seed = as_u64();
  } else if (key == "objective.data_file") {
    cfg.objective.data_file = value;
  } else if (key == "objective.eig_min") {
    cfg.objective.eig_min = as_double();
  } else if (key == "objective.eig_max") {
    cfg.objective.eig_max = as_double();
  } else if (key == "run.k_max") {
    cfg.k_max = as_int();
  } else if (key == "run.output_dir") {
    cfg.output_dir = value;
  } else if (key == "run.epsilon") {
    cfg.epsilon = as_double();
  } else if (key.rfind("algorithm.", 0) == 0) {
    const std::string rest = key.substr(10);
    const auto dot = rest.rfind('.');
    if (dot == std::string::npos || dot == 0) {
      throw ConfigError(fmt::format("{}: expected algorithm.<name>.<field>", where));
    }
    const std::string name = rest.substr(0, dot);
    const std::string field = rest.substr(dot + 1);
    if (name.find_first_of(" \t/\\") != std::string::npos) {
      throw ConfigError(fmt::format("{}: algorithm name '{}' is not a plain word", where, name));
    }
    AlgorithmSpec& a = algorithm_named(cfg, name);
    try {
      if (field == "recipe") {
        a.recipe = parse_recipe(value);
      } else if (field == "variant") {
        a.variant = parse_variant(value);
      } else if (field == "alpha") {
        a.alpha = as_double();
      } else if (field == "rho") {
        a.rho = as_double();
      } else if (field == "beta") {
        a.beta = as_double();
      } else if (field == "tau") {
        a.tau = as_int();
      } else if (field == "seed") {
        a.seed = as_u64();
      } else {
        throw ConfigError(fmt::format("unknown algorithm field '{}'", field));
      }
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      if (msg.rfind(where, 0) == 0) throw;
      throw ConfigError(fmt::format("{}: {}", where, msg));
    }
  } else {
    throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
  }
}

void check_config(const ExperimentConfig& cfg, const std::string& source) {
  auto fail = [&](const std::string& m) { throw ConfigError(fmt::format("{}: {}", source, m)); };
  if (cfg.network.type != "file" && cfg.network.n < 2) fail("network.n must be at least 2");
  if (cfg.network.type == "file" && cfg.network.file.empty()) fail("network.file is required");
  if (cfg.objective.d < 2 && cfg.objective.type == "logistic") fail("objective.d must be at least 2");
  if (cfg.objective.d < 1) fail("objective.d must be positive");
  if (!(cfg.objective.regularization > 0.0)) fail("objective.regularization must be positive");
  if (!(cfg.objective.eig_min > 0.0) || cfg.objective.eig_max < cfg.objective.eig_min) {
    fail("objective eigenvalue range must satisfy 0 < eig_min <= eig_max");
  }
  if (cfg.k_max < 0) fail("run.k_max must be non-negative");
  if (!(cfg.epsilon > 0.0)) fail("run.epsilon must be positive");
  if (cfg.algorithms.empty()) fail("no algorithm.<name>.* entries");
  for (const auto& a : cfg.algorithms) {
    if (a.recipe) {
      if (a.variant && *a.variant != recipe_variant(*a.recipe)) {
        fail(fmt::format("algorithm '{}': variant {} conflicts with recipe {}", a.name,
                         to_string(*a.variant), to_string(*a.recipe)));
      }
      continue;
    }
    if (!a.variant || !a.alpha || !a.rho || !a.tau) {
      fail(fmt::format("algorithm '{}': needs a recipe or variant, alpha, rho and tau", a.name));
    }
    if (uses_gradient_steps(*a.variant) && !a.beta) {
      fail(fmt::format("algorithm '{}': gradient variants need beta", a.name));
    }
  }
}

}  // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source) {
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = fmt::format("{}:{}", source, line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("{}: expected key = value", where));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError(fmt::format("{}: empty key or value", where));
    }
    set_key(cfg, key, value, where);
  }
  check_config(cfg, source);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config {}", path.string()));
  ExperimentConfig cfg = parse_config(in, path.string());
  // Relative data paths are taken relative to the config file.
  const auto base = path.parent_path();
  if (!cfg.network.file.empty() && std::filesystem::path(cfg.network.file).is_relative()) {
    cfg.network.file = (base / cfg.network.file).string();
  }
  if (!cfg.objective.data_file.empty() &&
      std::filesystem::path(cfg.objective.data_file).is_relative()) {
    cfg.objective.data_file = (base / cfg.objective.data_file).string();
  }
  return cfg;
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("ALNET_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return cfg.output_dir;
}

LogisticDataset sample_logistic_dataset(int n, int d, std::uint64_t seed) {
  if (n < 1 || d < 2) throw ConfigError("logistic data needs n >= 1 and d >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.001);
  LogisticDataset data;
  data.truth.resize(d);
  for (int j = 0; j < d; ++j) data.truth(j) = normal(rng);
  data.features.resize(n, d - 1);
  data.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d - 1; ++j) data.features(i, j) = normal(rng);
    const double margin =
        data.features.row(i).dot(data.truth.head(d - 1)) + data.truth(d - 1) + noise(rng);
    data.labels(i) = margin >= 0.0 ? 1.0 : -1.0;
  }
  return data;
}

ObjectiveStack logistic_stack(const LogisticDataset& data, double regularization) {
  std::vector<std::shared_ptr<const NodeCost>> costs;
  const int n = data.node_count();
  for (int i = 0; i < n; ++i) {
    costs.push_back(std::make_shared<LogisticCost>(data.features.row(i).transpose(),
                                                   data.labels(i), regularization, n));
  }
  return ObjectiveStack(std::move(costs));
}

ObjectiveStack generate_logistic_data(int n, int d, double regularization, std::uint64_t seed) {
  return logistic_stack(sample_logistic_dataset(n, d, seed), regularization);
}

void write_dataset_file(const std::filesystem::path& path, const LogisticDataset& data) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path.string()));
  fmt::print(out, "# alnet dataset v1\n");
  fmt::print(out, "# columns: label feature_1 ... feature_{}\n", data.features.cols());
  fmt::print(out, "nodes {} dimension {}\n", data.node_count(), data.dimension());
  for (int i = 0; i < data.node_count(); ++i) {
    fmt::print(out, "{:.17g}", data.labels(i));
    for (Eigen::Index j = 0; j < data.features.cols(); ++j) {
      fmt::print(out, " {:.17g}", data.features(i, j));
    }
    fmt::print(out, "\n");
  }
}

LogisticDataset read_dataset_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open dataset {}", path.string()));
  std::string line;
  int n = -1, d = -1, line_no = 0;
  LogisticDataset data;
  int row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    if (n < 0) {
      std::string k1, k2;
      if (!(ls >> k1 >> n >> k2 >> d) || k1 != "nodes" || k2 != "dimension" || n < 1 || d < 2) {
        throw ConfigError(fmt::format("{}:{}: expected 'nodes N dimension d'", path.string(), line_no));
      }
      data.features.resize(n, d - 1);
      data.labels.resize(n);
      continue;
    }
    if (row >= n) throw ConfigError(fmt::format("{}:{}: more than {} rows", path.string(), line_no, n));
    double label = 0.0;
    if (!(ls >> label) || (label != 1.0 && label != -1.0)) {
      throw ConfigError(fmt::format("{}:{}: label must be +1 or -1", path.string(), line_no));
    }
    data.labels(row) = label;
    for (int j = 0; j < d - 1; ++j) {
      if (!(ls >> data.features(row, j))) {
        throw ConfigError(fmt::format("{}:{}: expected {} features", path.string(), line_no, d - 1));
      }
    }
    std::string extra;
    if (ls >> extra) {
      throw ConfigError(fmt::format("{}:{}: trailing field '{}'", path.string(), line_no, extra));
    }
    ++row;
  }
  if (n < 0 || row != n) {
    throw ConfigError(fmt::format("{}: expected {} rows, found {}", path.string(), n, row));
  }
  return data;
}

ObjectiveStack generate_quadratic_stack(int n, int d, double eig_min, double eig_max,
                                        std::uint64_t seed) {
  if (n < 1 || d < 1) throw ConfigError("quadratic stack needs n >= 1 and d >= 1");
  if (!(eig_min > 0.0) || eig_max < eig_min) throw ConfigError("need 0 < eig_min <= eig_max");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(eig_min, eig_max);
  std::vector<std::shared_ptr<const NodeCost>> costs;
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd g(d, d);
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r) g(r, c) = normal(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    Eigen::VectorXd eig(d);
    for (int j = 0; j < d; ++j) eig(j) = uniform(rng);
    Eigen::MatrixXd a = q * eig.asDiagonal() * q.transpose();
    a = 0.5 * (a + a.transpose());
    Eigen::VectorXd b(d);
    for (int j = 0; j < d; ++j) b(j) = normal(rng);
    costs.push_back(std::make_shared<QuadraticCost>(a, b));
  }
  return ObjectiveStack(std::move(costs));
}

ReferenceSolution reference_solve(const ObjectiveStack& stack, const ReferenceOptions& options) {
  const int d = stack.dimension();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd g = stack.sum_gradient(x);
  double fx = stack.sum_value(x);
  const double target = options.tolerance * std::max(1.0, g.norm());
  for (int it = 0; it <= options.max_iterations; ++it) {
    if (g.norm() <= target) return {x, fx, g.norm()};
    if (it == options.max_iterations) break;
    const Eigen::VectorXd step = stack.sum_hessian(x).ldlt().solve(-g);
    const double slope = g.dot(step);
    double t = 1.0;
    Eigen::VectorXd trial;
    Eigen::VectorXd g_trial;
    double f_trial = 0.0;
    for (;;) {
      trial = x + t * step;
      f_trial = stack.sum_value(trial);
      g_trial = stack.sum_gradient(trial);
      // Near the optimum f stalls at rounding level; a smaller gradient is progress.
      if (f_trial <= fx + 1e-4 * t * slope || g_trial.norm() < g.norm()) break;
      t *= 0.5;
      if (t < 1e-12) {
        throw ConvergenceError("reference_solve: line search failed");
      }
    }
    x = trial;
    fx = f_trial;
    g = g_trial;
  }
  throw ConvergenceError(fmt::format(
      "reference_solve: gradient norm {:.3e} above {:.3e} after {} Newton steps", g.norm(), target,
      options.max_iterations));
}

double relative_cost_error(const ObjectiveStack& stack, const ReferenceSolution& ref,
                           const Eigen::VectorXd& x) {
  const int n = stack.node_count();
  const int d = stack.dimension();
  if (x.size() != static_cast<Eigen::Index>(n) * d) {
    throw DimensionError("relative_cost_error: x has wrong length");
  }
  const double gap = stack.sum_value(Eigen::VectorXd::Zero(d)) - ref.f_star;
  if (!(gap > 0.0)) throw ConfigError("relative_cost_error: f(0) - f* is not positive");
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += stack.sum_value(x.segment(i * d, d)) - ref.f_star;
  return total / (n * gap);
}

MetricsFn make_metrics(const ObjectiveStack& stack, const NetworkModel& net,
                       const ReferenceSolution& ref) {
  auto saddle = std::make_shared<SaddlePoint>(make_saddle_point(stack, ref.x_star));
  const double h_min = stack.h_min();
  return [&stack, &net, ref, saddle, h_min](const PrimalDualState& s, TraceRow& row) {
    row.rel_cost_error = relative_cost_error(stack, ref, s.x);
    row.primal_error_norm = (s.x - saddle->x_bullet).norm();
    row.lyapunov_value = lyapunov_value(s, net.spectrum(), *saddle, h_min);
  };
}

NetworkModel build_network(const NetworkSpec& spec) {
  if (spec.type == "file") {
    NetworkFile f = read_network_file(spec.file);
    return NetworkModel(std::move(f.graph), std::move(f.weights));
  }
  Graph g = [&] {
    if (spec.type == "geometric") {
      return build_geometric_graph(spec.n, spec.radius, spec.seed,
                                   GeometricGraphOptions{spec.max_attempts});
    }
    if (spec.type == "chain") return build_chain_graph(spec.n);
    if (spec.type == "complete") return build_complete_graph(spec.n);
    throw ConfigError(fmt::format("unknown network type '{}'", spec.type));
  }();
  WeightMatrix w = scale_weights(metropolis_weights(g), spec.self_weight, spec.metropolis_weight);
  return NetworkModel(std::move(g), std::move(w));
}

Problem build_problem(const ExperimentConfig& cfg) {
  NetworkModel net = run_stage<NetworkModel>("network", [&] { return build_network(cfg.network); });
  const int n = net.node_count();
  std::optional<LogisticDataset> dataset;
  ObjectiveStack stack = run_stage<ObjectiveStack>("objective", [&] {
    const auto& o = cfg.objective;
    if (o.type == "quadratic") return generate_quadratic_stack(n, o.d, o.eig_min, o.eig_max, o.seed);
    dataset = o.data_file.empty() ? sample_logistic_dataset(n, o.d, o.seed)
                                  : read_dataset_file(o.data_file);
    if (dataset->node_count() != n) {
      throw ConfigError(fmt::format("dataset has {} rows, network has {} nodes",
                                    dataset->node_count(), n));
    }
    return logistic_stack(*dataset, o.regularization);
  });
  return Problem{std::move(net), std::move(stack), std::move(dataset)};
}

AlgorithmConfig resolve_algorithm(const AlgorithmSpec& spec, const ObjectiveStack& stack,
                                  const NetworkModel& net, double epsilon) {
  AlgorithmConfig cfg;
  if (spec.recipe) {
    cfg = recipe_config(*spec.recipe, stack, net);
  } else {
    if (!spec.variant) throw ConfigError(fmt::format("algorithm '{}': no variant", spec.name));
    cfg.variant = *spec.variant;
  }
  if (spec.alpha) cfg.alpha = *spec.alpha;
  if (spec.rho) cfg.rho = *spec.rho;
  if (spec.beta) cfg.beta = *spec.beta;
  if (spec.tau) cfg.tau = *spec.tau;
  cfg.seed = spec.seed;
  cfg.epsilon = epsilon;
  validate(cfg, stack);
  return cfg;
}

void write_run_report(const AlgorithmOutcome& outcome, const ObjectiveStack& stack,
                      const ReferenceSolution& ref, std::ostream& out) {
  const int d = stack.dimension();
  const double f0_gap = stack.sum_value(Eigen::VectorXd::Zero(d)) - ref.f_star;
  fmt::print(out, "# alnet certificate v1\n");
  fmt::print(out, "algorithm = {}\n", outcome.name);
  fmt::print(out, "seed = {}\n", outcome.config.seed);
  fmt::print(out, "epsilon = {:.17g}\n", outcome.config.epsilon);
  write_certificate_report(outcome.certificate, out);
  fmt::print(out, "f_star = {:.17g}\n", ref.f_star);
  fmt::print(out, "f0_gap = {:.17g}\n", f0_gap);
  fmt::print(out,
             "# cost bound: f(x_i) - f* <= (N h_max / 2) |x_i - x*|^2 and "
             "|x_i(k) - x*| <= r^k bound_constant, so\n"
             "# rel_cost_error(k) <= N h_max (r^k bound_constant)^2 / (2 (f(0) - f*))\n");
  if (!outcome.trace.rows.empty()) {
    const TraceRow& last = outcome.trace.rows.back();
    fmt::print(out, "final_k = {}\n", last.k);
    fmt::print(out, "final_rel_cost_error = {:.17g}\n", last.rel_cost_error);
    fmt::print(out, "final_rel_cost_bound = {:.17g}\n",
               relative_cost_bound(outcome.certificate, last.k, f0_gap));
  }
}

namespace {

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path.string()));
  return out;
}

ExperimentResult prepare(const ExperimentConfig& cfg, Problem& problem, bool runs) {
  ExperimentResult result;
  result.output_dir = resolve_output_dir(cfg);
  run_stage_void("output", [&] { ensure_directory(result.output_dir); });
  if (runs) {
    run_stage_void("output", [&] {
      write_network_file(result.output_dir / "network.txt", problem.net.graph(),
                         problem.net.weights());
      if (problem.dataset) write_dataset_file(result.output_dir / "dataset.txt", *problem.dataset);
    });
  }
  result.reference = run_stage<ReferenceSolution>("reference", [&] {
    return reference_solve(problem.stack);
  });
  if (runs) {
    run_stage_void("output", [&] {
      auto out = open_output(result.output_dir / "reference.txt");
      fmt::print(out, "f_star = {:.17g}\n", result.reference.f_star);
      fmt::print(out, "grad_norm = {:.17g}\n", result.reference.grad_norm);
      for (Eigen::Index j = 0; j < result.reference.x_star.size(); ++j) {
        fmt::print(out, "x_star {} = {:.17g}\n", j, result.reference.x_star(j));
      }
    });
  }
  for (const auto& spec : cfg.algorithms) {
    AlgorithmOutcome o;
    o.name = spec.name;
    o.config = run_stage<AlgorithmConfig>("configure " + spec.name, [&] {
      return resolve_algorithm(spec, problem.stack, problem.net, cfg.epsilon);
    });
    o.certificate = run_stage<RateCertificate>("certificate " + spec.name, [&] {
      return certificate(o.config, problem.stack, problem.net, result.reference.x_star);
    });
    result.outcomes.push_back(std::move(o));
  }
  return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  Problem problem = build_problem(cfg);
  ExperimentResult result = prepare(cfg, problem, true);
  const MetricsFn metrics = make_metrics(problem.stack, problem.net, result.reference);
  std::vector<ManifestEntry> manifest;
  for (auto& o : result.outcomes) {
    o.trace = run_stage<RunTrace>("run " + o.name, [&] {
      RunHooks hooks;
      hooks.metrics = metrics;
      hooks.record_states = false;
      return run_variant(problem.stack, problem.net, o.config, cfg.k_max, hooks);
    });
    run_stage_void("output", [&] {
      const std::string csv = o.name + ".csv";
      auto out = open_output(result.output_dir / csv);
      write_trace_csv(o.trace, out);
      auto rep = open_output(result.output_dir / (o.name + ".certificate.txt"));
      write_run_report(o, problem.stack, result.reference, rep);
      manifest.push_back({o.name, csv});
    });
  }
  run_stage_void("plot", [&] {
    write_manifest(result.output_dir, manifest);
    write_plots(result.output_dir);
  });
  return result;
}

ExperimentResult certify(const ExperimentConfig& cfg) {
  Problem problem = build_problem(cfg);
  ExperimentResult result = prepare(cfg, problem, false);
  for (const auto& o : result.outcomes) {
    run_stage_void("output", [&] {
      auto rep = open_output(result.output_dir / (o.name + ".certificate.txt"));
      write_run_report(o, problem.stack, result.reference, rep);
    });
  }
  return result;
}

}  // namespace alnet
