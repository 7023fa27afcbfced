#pragma once

#include "splinesde/errors.hpp"
#include "splinesde/polynomial.hpp"
#include "splinesde/spline_basis.hpp"

#include <Eigen/Core>

#include <memory>
#include <utility>
#include <vector>

namespace splinesde {

/// Coefficients of the transformed diffusion: the drift potential
/// A(x) = θᵀu(x) in a B-spline basis u, and the Lamperti map
/// η(v) = Σ e^{ξ_i}(h_i(v) − h_i(v̄)) in an I-spline basis h.
struct ModelParams {
  Eigen::VectorXd theta;
  Eigen::VectorXd xi;
  double v_bar = 0.0;
  std::shared_ptr<const SplineBasis> basis_u;
  std::shared_ptr<const SplineBasis> basis_h;

  /// Throws ArgumentError on dimension mismatch, wrong basis kinds, non-finite
  /// coefficients or an anchor outside the h-domain.
  void validate() const;
};

/// Extrema of G on one knot interval of the potential basis.
struct IntervalExtrema {
  int knot_index = 0;
  double lower = 0.0;
  double upper = 0.0;
  double argmin = 0.0;
  double argmax = 0.0;
};

/// Global bounds r ≤ G ≤ r + r_plus.
struct GBounds {
  double r = 0.0;
  double r_plus = 0.0;
  std::vector<IntervalExtrema> per_interval;
  /// True when root finding failed and the crude basis-norm bound was used.
  bool crude_fallback = false;
  double upper() const noexcept { return r + r_plus; }
};

/// θ-dependent part: A, α = A', α', and G = ½(α² + α').
class DriftPotential {
 public:
  DriftPotential(std::shared_ptr<const SplineBasis> basis, Eigen::VectorXd theta);

  const SplineBasis& basis() const noexcept { return *basis_; }
  const Eigen::VectorXd& theta() const noexcept { return theta_; }
  double lower() const noexcept { return basis_->lower(); }
  double upper() const noexcept { return basis_->upper(); }

  /// A and its derivatives (deriv = 1 gives α, deriv = 2 gives α').
  double potential(double x, int deriv = 0) const;
  double alpha(double x) const { return potential(x, 1); }
  double phase(double x) const;
  /// dG/dx = α α' + ½ α''.
  double phase_derivative(double x) const;

  /// Tight bounds from per-interval extrema of the polynomial G.
  GBounds bounds() const;
  /// Display-style crude bounds from sup-norms of u' and u''.
  std::pair<double, double> crude_bounds() const;

  /// Bounds for θ + step·e_k, recomputing only intervals where u_k lives.
  GBounds perturbed_bounds(int k, double step) const;

 private:
  struct Piece {
    double left;
    double width;
    Polynomial a;
    Polynomial g;
  };
  const Piece& piece_for(double x) const;
  static Piece make_piece(const SplineBasis& basis, std::span<const double> theta, int j);
  GBounds assemble(std::vector<IntervalExtrema> extrema, bool any_root_finding,
                   bool failed) const;

  std::shared_ptr<const SplineBasis> basis_;
  Eigen::VectorXd theta_;
  std::vector<Piece> pieces_;
  std::vector<double> breaks_;
  std::vector<IntervalExtrema> extrema_;
  std::vector<char> root_finding_;
  bool extrema_ok_ = true;
};

/// ξ-dependent part: the monotone map η and its inverse.
class LampertiMap {
 public:
  LampertiMap(std::shared_ptr<const SplineBasis> basis, const Eigen::VectorXd& xi,
              double v_bar);

  const SplineBasis& basis() const noexcept { return *basis_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  double v_bar() const noexcept { return v_bar_; }
  double lower() const noexcept { return basis_->lower(); }
  double upper() const noexcept { return basis_->upper(); }

  double operator()(double v) const { return value(v, 0); }
  /// η (deriv 0), η' = Σ e^{ξ_i} M_i (deriv 1), η'' (deriv 2).
  double value(double v, int deriv) const;
  /// Bracketed bisection to width 1e-6 then Newton polish.
  double inverse(double x) const;
  double image_lower() const noexcept { return knot_values_.front(); }
  double image_upper() const noexcept { return knot_values_.back(); }

 private:
  struct Piece {
    double left;
    double width;
    Polynomial eta;
  };
  const Piece& piece_for(double v) const;

  std::shared_ptr<const SplineBasis> basis_;
  Eigen::VectorXd weights_;
  double v_bar_;
  std::vector<Piece> pieces_;
  std::vector<double> breaks_;
  std::vector<double> knot_values_;  // η at breaks_ and at the upper end
};

struct OriginalCoefficients {
  double drift;
  double volatility;
};

/// The semi-parametric diffusion for one parameter value.
class Model {
 public:
  explicit Model(ModelParams params);

  const ModelParams& params() const noexcept { return params_; }
  const DriftPotential& drift() const noexcept { return drift_; }
  const LampertiMap& lamperti_map() const noexcept { return lamperti_; }

  double potential(double x, int deriv = 0) const { return drift_.potential(x, deriv); }
  double lamperti(double v, int deriv = 0) const { return lamperti_.value(v, deriv); }
  double lamperti_inverse(double x) const { return lamperti_.inverse(x); }
  double phase(double x) const { return drift_.phase(x); }
  GBounds g_bounds() const { return drift_.bounds(); }

  /// σ = 1/η'(v), b = α(η(v))/η'(v) − ½ η''(v)/η'(v)³.
  OriginalCoefficients original_coefficients(double v) const;

 private:
  ModelParams params_;
  DriftPotential drift_;
  LampertiMap lamperti_;
};

}  // namespace splinesde
