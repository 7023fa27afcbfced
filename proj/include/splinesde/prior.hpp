#pragma once

#include "splinesde/spline_basis.hpp"

#include <Eigen/Core>

#include <map>

namespace splinesde {

/// Gaussian smoothness prior on (θ, e^ξ):
///   log π = −½ θᵀ(P + Σ_k λ_{1,k} Ω_k) θ − ½ (e^ξ)ᵀ(P̃ + Σ_k λ_{2,k} Ω̃_k) e^ξ
/// with Ω_k, Ω̃_k the integrated squared k-th derivative penalties of the two
/// bases and P, P̃ diagonal edge shrinkage. Possibly improper; no
/// normalising constant is included.
struct PriorSpec {
  std::map<int, double> lambda_theta;
  std::map<int, double> lambda_xi;
  Eigen::VectorXd edge_theta;
  Eigen::VectorXd edge_xi;
  std::map<int, PenaltyMatrix> omega_theta;
  std::map<int, PenaltyMatrix> omega_xi;
  Eigen::MatrixXd precision_theta;
  Eigen::MatrixXd precision_xi;

  /// Builds the penalty matrices for every k with a non-zero λ and the two
  /// combined precisions. Throws ArgumentError for negative weights or edge
  /// vectors of the wrong length.
  static PriorSpec build(const SplineBasis& basis_u, const SplineBasis& basis_h,
                         std::map<int, double> lambda_theta, std::map<int, double> lambda_xi,
                         Eigen::VectorXd edge_theta, Eigen::VectorXd edge_xi);

  /// Prior with all penalties zero.
  static PriorSpec flat(int n_theta, int n_xi);
};

/// `value` on the first and last `count` entries of a length-n vector, 0 elsewhere.
Eigen::VectorXd edge_shrinkage(int n, int count, double value);

double log_prior(const PriorSpec& spec, const Eigen::VectorXd& theta, const Eigen::VectorXd& xi);

struct PriorGradient {
  Eigen::VectorXd theta;
  Eigen::VectorXd xi;
};

/// ∂/∂θ = −Q_θ θ and ∂/∂ξ_i = −e^{ξ_i} (Q_ξ e^ξ)_i.
PriorGradient grad_log_prior(const PriorSpec& spec, const Eigen::VectorXd& theta,
                             const Eigen::VectorXd& xi);

}  // namespace splinesde
