#include "alnet/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "alnet/errors.hpp"

namespace alnet {

namespace {

// Stable sigma(-z) = 1 / (1 + e^z).
double logistic_tail(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

void check_size(const Eigen::VectorXd& x, Eigen::Index expected, const char* what) {
  if (x.size() != expected) {
    throw DimensionError(fmt::format("{}: expected size {}, got {}", what, expected, x.size()));
  }
}

}  // namespace

QuadraticCost::QuadraticCost(Eigen::MatrixXd a, Eigen::VectorXd b, double c)
    : a_(std::move(a)), b_(std::move(b)), c_(c) {
  if (a_.rows() != a_.cols() || a_.rows() != b_.size() || b_.size() == 0) {
    throw DimensionError("quadratic cost: A must be d x d and b of length d");
  }
  if ((a_ - a_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, a_.cwiseAbs().maxCoeff())) {
    throw ConfigError("quadratic cost: A is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a_, Eigen::EigenvaluesOnly);
  bounds_ = {es.eigenvalues()(0), es.eigenvalues()(es.eigenvalues().size() - 1)};
  if (!(bounds_.min > 0.0)) throw ConfigError("quadratic cost: A is not positive definite");
}

double QuadraticCost::value(const Eigen::VectorXd& x) const {
  check_size(x, b_.size(), "quadratic cost");
  return 0.5 * x.dot(a_ * x) + b_.dot(x) + c_;
}

Eigen::VectorXd QuadraticCost::gradient(const Eigen::VectorXd& x) const {
  check_size(x, b_.size(), "quadratic cost");
  return a_ * x + b_;
}

Eigen::VectorXd QuadraticCost::minimizer() const { return -a_.ldlt().solve(b_); }

LogisticCost::LogisticCost(Eigen::VectorXd feature, double label, double regularization,
                           int node_count)
    : feature_(std::move(feature)),
      label_(label),
      regularization_(regularization),
      node_count_(node_count) {
  if (label_ != 1.0 && label_ != -1.0) throw ConfigError("logistic label must be +1 or -1");
  if (!(regularization_ > 0.0)) throw ConfigError("logistic regularization must be positive");
  if (node_count_ < 1) throw ConfigError("logistic node count must be positive");
  c_.resize(feature_.size() + 1);
  c_.head(feature_.size()) = label_ * feature_;
  c_(feature_.size()) = label_;
}

double LogisticCost::value(const Eigen::VectorXd& x) const {
  check_size(x, c_.size(), "logistic cost");
  const double z = c_.dot(x);
  const double loss = std::log1p(std::exp(-std::abs(z))) + std::max(0.0, -z);
  return loss + regularization_ / (2.0 * node_count_) * x.squaredNorm();
}

Eigen::VectorXd LogisticCost::gradient(const Eigen::VectorXd& x) const {
  check_size(x, c_.size(), "logistic cost");
  const double z = c_.dot(x);
  return -logistic_tail(z) * c_ + (regularization_ / node_count_) * x;
}

Eigen::MatrixXd LogisticCost::hessian(const Eigen::VectorXd& x) const {
  check_size(x, c_.size(), "logistic cost");
  const double s = logistic_tail(c_.dot(x));
  const auto d = c_.size();
  Eigen::MatrixXd h = (regularization_ / node_count_) * Eigen::MatrixXd::Identity(d, d);
  h.noalias() += s * (1.0 - s) * c_ * c_.transpose();
  return h;
}

HessianBounds LogisticCost::hessian_bounds() const { return logistic_hessian_bounds(*this); }

HessianBounds logistic_hessian_bounds(const LogisticCost& cost) {
  const double base = cost.regularization() / cost.node_count();
  // |c c^T| (spectral) = |c|^2.
  return {base, base + 0.25 * cost.stacked_direction().squaredNorm()};
}

ObjectiveStack::ObjectiveStack(std::vector<std::shared_ptr<const NodeCost>> costs)
    : costs_(std::move(costs)) {
  if (costs_.empty()) throw ConfigError("objective stack needs at least one cost");
  dimension_ = costs_.front()->dimension();
  h_min_ = std::numeric_limits<double>::infinity();
  h_max_ = 0.0;
  for (const auto& c : costs_) {
    if (!c) throw ConfigError("objective stack: null cost");
    if (c->dimension() != dimension_) throw DimensionError("objective stack: mixed dimensions");
    const HessianBounds hb = c->hessian_bounds();
    if (!(hb.min > 0.0) || hb.max < hb.min) throw ConfigError("objective stack: invalid Hessian bounds");
    h_min_ = std::min(h_min_, hb.min);
    h_max_ = std::max(h_max_, hb.max);
  }
}

double ObjectiveStack::sum_value(const Eigen::VectorXd& x) const {
  double total = 0.0;
  for (const auto& c : costs_) total += c->value(x);
  return total;
}

Eigen::VectorXd ObjectiveStack::sum_gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dimension_);
  for (const auto& c : costs_) g += c->gradient(x);
  return g;
}

Eigen::MatrixXd ObjectiveStack::sum_hessian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dimension_, dimension_);
  for (const auto& c : costs_) h += c->hessian(x);
  return h;
}

bool ObjectiveStack::all_quadratic() const {
  return std::all_of(costs_.begin(), costs_.end(), [](const auto& c) {
    return dynamic_cast<const QuadraticCost*>(c.get()) != nullptr;
  });
}

double eval_stack(const ObjectiveStack& stack, const Eigen::VectorXd& x) {
  const int n = stack.node_count();
  const int d = stack.dimension();
  check_size(x, static_cast<Eigen::Index>(n) * d, "eval_stack");
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += stack.cost(i).value(x.segment(i * d, d));
  return total;
}

Eigen::VectorXd grad_stack(const ObjectiveStack& stack, const Eigen::VectorXd& x) {
  const int n = stack.node_count();
  const int d = stack.dimension();
  check_size(x, static_cast<Eigen::Index>(n) * d, "grad_stack");
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < n; ++i) g.segment(i * d, d) = stack.cost(i).gradient(x.segment(i * d, d));
  return g;
}

double condition_number(const ObjectiveStack& stack) { return stack.gamma(); }

Eigen::VectorXd replicate_blocks(const Eigen::VectorXd& v, int n) { return v.replicate(n, 1); }

}  // namespace alnet
