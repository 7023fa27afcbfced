#pragma once

#include <initializer_list>
#include <optional>
#include <vector>

namespace splinesde {

/// Dense polynomial in ascending powers of a local variable s.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coefficients);
  Polynomial(std::initializer_list<double> coefficients);

  static Polynomial constant(double c) { return Polynomial({c}); }

  /// Degree of the stored coefficient vector (zero polynomial has degree 0).
  int degree() const noexcept;
  const std::vector<double>& coefficients() const noexcept { return c_; }
  double coefficient(int power) const noexcept;

  double operator()(double s) const noexcept;
  /// d-th derivative at s; zero once d exceeds the degree.
  double eval(double s, int deriv) const noexcept;

  Polynomial derivative(int order = 1) const;
  /// Antiderivative vanishing at s = 0.
  Polynomial antiderivative() const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator*=(double scale);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  /// a·p + (s + shift)·q style helper: multiplies by (s + shift).
  Polynomial times_linear(double shift, double slope = 1.0) const;

  /// Drop leading coefficients that are negligible relative to the largest.
  Polynomial trimmed(double relative_tol = 1e-14) const;

 private:
  std::vector<double> c_{0.0};
};

/// Real roots from the eigenvalues of the companion matrix. Roots whose
/// imaginary part exceeds `imag_tol` are discarded. Returns nullopt when the
/// eigen-solver fails to converge.
std::optional<std::vector<double>> real_roots(const Polynomial& p,
                                              double imag_tol = 1e-8);

}  // namespace splinesde
