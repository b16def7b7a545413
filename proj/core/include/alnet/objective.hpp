#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace alnet {

struct HessianBounds {
  double min = 0.0;
  double max = 0.0;
};

/// Smooth strongly convex cost f_i: R^d -> R held by one node.
/// Implementations are immutable and safe to evaluate concurrently.
class NodeCost {
 public:
  virtual ~NodeCost() = default;

  virtual int dimension() const = 0;
  virtual double value(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const = 0;
  /// h_min_i I <= Hessian <= h_max_i I everywhere.
  virtual HessianBounds hessian_bounds() const = 0;
};

/// f(x) = 1/2 x^T A x + b^T x + c with A symmetric positive definite.
class QuadraticCost final : public NodeCost {
 public:
  QuadraticCost(Eigen::MatrixXd a, Eigen::VectorXd b, double c = 0.0);

  int dimension() const override { return static_cast<int>(b_.size()); }
  double value(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd&) const override { return a_; }
  HessianBounds hessian_bounds() const override { return bounds_; }

  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::VectorXd& b() const { return b_; }
  double c() const { return c_; }

  /// Unconstrained minimizer -A^{-1} b.
  Eigen::VectorXd minimizer() const;

 private:
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  double c_;
  HessianBounds bounds_;
};

/// One sample of l2-regularized logistic regression:
///   f(x) = log(1 + exp(-c^T x)) + P/(2N) |x|^2,   c = (label * feature, label).
/// The last coordinate of x is the intercept.
class LogisticCost final : public NodeCost {
 public:
  LogisticCost(Eigen::VectorXd feature, double label, double regularization, int node_count);

  int dimension() const override { return static_cast<int>(c_.size()); }
  double value(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const override;
  HessianBounds hessian_bounds() const override;

  const Eigen::VectorXd& feature() const { return feature_; }
  double label() const { return label_; }
  double regularization() const { return regularization_; }
  int node_count() const { return node_count_; }
  const Eigen::VectorXd& stacked_direction() const { return c_; }

 private:
  Eigen::VectorXd feature_;
  double label_;
  double regularization_;
  int node_count_;
  Eigen::VectorXd c_;
};

/// (P/N, P/N + |c_i|^2 / 4); the logistic curvature e^{-z}/(1+e^{-z})^2 never exceeds 1/4.
HessianBounds logistic_hessian_bounds(const LogisticCost& cost);

/// N node costs of a common dimension d.
///   F(x_1..x_N) = sum_i f_i(x_i)   (stacked, separable)
///   f(x)        = sum_i f_i(x)     (the network objective)
class ObjectiveStack {
 public:
  explicit ObjectiveStack(std::vector<std::shared_ptr<const NodeCost>> costs);

  int node_count() const { return static_cast<int>(costs_.size()); }
  int dimension() const { return dimension_; }
  const NodeCost& cost(int i) const { return *costs_.at(i); }
  const std::vector<std::shared_ptr<const NodeCost>>& costs() const { return costs_; }

  double h_min() const { return h_min_; }
  double h_max() const { return h_max_; }
  double gamma() const { return h_max_ / h_min_; }

  /// f(x) and its derivatives for x in R^d.
  double sum_value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd sum_gradient(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd sum_hessian(const Eigen::VectorXd& x) const;

  /// True when every cost is a QuadraticCost.
  bool all_quadratic() const;

 private:
  std::vector<std::shared_ptr<const NodeCost>> costs_;
  int dimension_ = 0;
  double h_min_ = 0.0;
  double h_max_ = 0.0;
};

/// F(x) for stacked x in R^{Nd}. Throws DimensionError on size mismatch.
double eval_stack(const ObjectiveStack& stack, const Eigen::VectorXd& x);
/// (grad f_1(x_1), ..., grad f_N(x_N)).
Eigen::VectorXd grad_stack(const ObjectiveStack& stack, const Eigen::VectorXd& x);
double condition_number(const ObjectiveStack& stack);

/// Repeats a d-vector N times: 1 (x) v.
Eigen::VectorXd replicate_blocks(const Eigen::VectorXd& v, int n);

}  // namespace alnet
