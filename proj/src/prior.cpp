#include "splinesde/prior.hpp"

#include "splinesde/errors.hpp"

#include <string>

namespace splinesde {

PriorSpec PriorSpec::build(const SplineBasis& basis_u, const SplineBasis& basis_h,
                           std::map<int, double> lambda_theta, std::map<int, double> lambda_xi,
                           Eigen::VectorXd edge_theta, Eigen::VectorXd edge_xi) {
  if (edge_theta.size() != basis_u.size() || edge_xi.size() != basis_h.size())
    throw ArgumentError("prior: edge shrinkage length does not match basis size");
  if ((edge_theta.array() < 0.0).any() || (edge_xi.array() < 0.0).any())
    throw ArgumentError("prior: edge shrinkage must be non-negative");

  PriorSpec spec;
  spec.precision_theta = edge_theta.asDiagonal();
  spec.precision_xi = edge_xi.asDiagonal();
  for (const auto& [k, lambda] : lambda_theta) {
    if (lambda < 0.0 || k < 1)
      throw ArgumentError("prior: invalid theta penalty (k = " + std::to_string(k) + ")");
    if (lambda == 0.0) continue;
    auto omega = penalty_matrix(basis_u, k);
    spec.precision_theta += lambda * omega.entries;
    spec.omega_theta.emplace(k, std::move(omega));
  }
  for (const auto& [k, lambda] : lambda_xi) {
    if (lambda < 0.0 || k < 1)
      throw ArgumentError("prior: invalid xi penalty (k = " + std::to_string(k) + ")");
    if (lambda == 0.0) continue;
    auto omega = penalty_matrix(basis_h, k);
    spec.precision_xi += lambda * omega.entries;
    spec.omega_xi.emplace(k, std::move(omega));
  }
  spec.lambda_theta = std::move(lambda_theta);
  spec.lambda_xi = std::move(lambda_xi);
  spec.edge_theta = std::move(edge_theta);
  spec.edge_xi = std::move(edge_xi);
  return spec;
}

PriorSpec PriorSpec::flat(int n_theta, int n_xi) {
  PriorSpec spec;
  spec.edge_theta = Eigen::VectorXd::Zero(n_theta);
  spec.edge_xi = Eigen::VectorXd::Zero(n_xi);
  spec.precision_theta = Eigen::MatrixXd::Zero(n_theta, n_theta);
  spec.precision_xi = Eigen::MatrixXd::Zero(n_xi, n_xi);
  return spec;
}

Eigen::VectorXd edge_shrinkage(int n, int count, double value) {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n && i < count; ++i) {
    d(i) = value;
    d(n - 1 - i) = value;
  }
  return d;
}

namespace {

void check_dims(const PriorSpec& spec, const Eigen::VectorXd& theta, const Eigen::VectorXd& xi) {
  if (theta.size() != spec.precision_theta.rows() || xi.size() != spec.precision_xi.rows())
    throw ArgumentError("prior: parameter dimensions do not match the prior");
}

}  // namespace

double log_prior(const PriorSpec& spec, const Eigen::VectorXd& theta, const Eigen::VectorXd& xi) {
  check_dims(spec, theta, xi);
  const Eigen::VectorXd w = xi.array().exp().matrix();
  return -0.5 * theta.dot(spec.precision_theta * theta) - 0.5 * w.dot(spec.precision_xi * w);
}

PriorGradient grad_log_prior(const PriorSpec& spec, const Eigen::VectorXd& theta,
                             const Eigen::VectorXd& xi) {
  check_dims(spec, theta, xi);
  const Eigen::VectorXd w = xi.array().exp().matrix();
  PriorGradient g;
  g.theta = -(spec.precision_theta * theta);
  g.xi = -(w.array() * (spec.precision_xi * w).array()).matrix();
  return g;
}

}  // namespace splinesde
