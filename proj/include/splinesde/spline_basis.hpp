#pragma once

#include "splinesde/polynomial.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace splinesde {

/// Non-decreasing knot sequence together with the spline order.
///
/// `order` follows the M-spline recurrence convention: order 0 splines are
/// piecewise constant, order k splines are piecewise polynomials of degree k.
/// A knot may be repeated at most order + 1 times; clamped end knots carry
/// exactly that multiplicity.
class KnotVector {
 public:
  KnotVector(std::vector<double> knots, int order);

  /// `count` equidistant knots spanning [lo, hi] (ends included), with each
  /// end knot repeated `end_multiplicity` times in total.
  static KnotVector uniform(int count, double lo, double hi,
                            int end_multiplicity, int order);

  std::span<const double> knots() const noexcept { return knots_; }
  double operator[](std::size_t i) const noexcept { return knots_[i]; }
  std::size_t size() const noexcept { return knots_.size(); }
  int order() const noexcept { return order_; }
  double front() const noexcept { return knots_.front(); }
  double back() const noexcept { return knots_.back(); }

  /// Number of consecutive copies of knots[i] (counting knots[i] itself).
  int multiplicity(std::size_t i) const noexcept;

 private:
  std::vector<double> knots_;
  int order_;
};

enum class SplineKind { M, B, I };

/// M-, B- or I-spline basis on a knot vector.
///
/// Every basis function is stored, per non-degenerate knot interval
/// [t_j, t_{j+1}), as a polynomial in the local variable s = x − t_j, so
/// values and derivatives of any order are Horner evaluations. M-splines come
/// from the unit-mass recurrence
///
///   M_i(x|0) = 1[t_i, t_{i+1})(x) / (t_{i+1} − t_i)
///   M_i(x|k) = (k+1)[(x − t_i) M_i(x|k−1) + (t_{i+k+1} − x) M_{i+1}(x|k−1)]
///              / (k (t_{i+k+1} − t_i))
///
/// with zero-denominator terms set to 0; B_i = (t_{i+k+1} − t_i) M_i / (k+1).
/// I-splines use the closed-form sum I_i(x|k) = Σ_{m ≥ i} B_m(x|k+1) where the
/// order k+1 B-splines live on the knot vector extended at the right end so
/// that the last knot has multiplicity k+2. This sum telescopes to ∫ M_i.
///
/// The basis has n = #knots − order − 1 functions and is defined on
/// [knots.front(), knots.back()]; the right end belongs to the last interval.
/// Evaluation outside that range throws DomainExceeded. Immutable once built.
class SplineBasis {
 public:
  SplineBasis(KnotVector knots, SplineKind kind);

  SplineKind kind() const noexcept { return kind_; }
  const KnotVector& knot_vector() const noexcept { return knots_; }
  int order() const noexcept { return knots_.order(); }
  int size() const noexcept { return n_basis_; }
  double lower() const noexcept { return knots_.front(); }
  double upper() const noexcept { return knots_.back(); }
  bool contains(double x) const noexcept { return x >= lower() && x <= upper(); }

  /// Highest derivative order accepted by evaluation routines.
  int max_derivative() const noexcept;

  /// deriv-th derivative of basis function i at x.
  double eval(int i, double x, int deriv = 0) const;

  /// Dense evaluation of all basis functions (or a derivative) at x.
  void eval_all(double x, int deriv, std::span<double> out) const;
  Eigen::VectorXd eval_all(double x, int deriv = 0) const;

  /// Index j of the knot interval [t_j, t_{j+1}) containing x.
  int locate(double x) const;

  /// Knot indices j of all non-degenerate intervals, in increasing order.
  const std::vector<int>& intervals() const noexcept { return interval_knots_; }

  /// Σ_i coeffs_i · basis_i restricted to [t_j, t_{j+1}), as a polynomial in
  /// s = x − t_j. Throws ArgumentError for a zero-width interval.
  Polynomial local_polynomial(std::span<const double> coeffs, int j) const;

  /// Basis indices whose local polynomial is stored on interval j (I-splines
  /// are additionally identically 1 for every index below `first`).
  struct Support {
    int first;
    int last;
  };
  Support support_on(int j) const;

  /// Local polynomial of basis function i on interval j (zero off support,
  /// constant 1 for I-splines already fully integrated).
  Polynomial piece(int i, int j) const;

 private:
  struct Piece {
    int knot_index;
    double left;
    double right;
    int first;
    std::vector<Polynomial> polys;  // indices first .. first + polys.size() − 1
  };

  const Piece& piece_for(double x) const;
  const Piece& piece_at_knot(int j) const;
  void build();

  KnotVector knots_;
  SplineKind kind_;
  int n_basis_;
  std::vector<int> interval_knots_;
  std::vector<double> breaks_;  // left ends of non-degenerate intervals
  std::vector<Piece> pieces_;
};

/// ∫ basis_i^(k) basis_j^(k) over the knot span.
struct PenaltyMatrix {
  int derivative_order = 0;
  Eigen::MatrixXd entries;
};

/// Gauss–Legendre per knot interval with ⌈(2·order + 1)/2⌉ + 1 nodes, exact
/// for the piecewise-polynomial integrand. Orders above the polynomial degree
/// give the zero matrix.
PenaltyMatrix penalty_matrix(const SplineBasis& basis, int k);

/// Log-weights ξ_i = log((t_{i+k+1} − t_i)/(k+1)) that turn an M/I basis
/// into B-spline scaling, i.e. Σ e^{ξ_i} M_i ≡ 1 on clamped knots.
Eigen::VectorXd identity_log_weights(const SplineBasis& basis);

}  // namespace splinesde
