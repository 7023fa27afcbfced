#include "splinesde/polynomial.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace splinesde {

Polynomial::Polynomial(std::vector<double> coefficients)
    : c_(std::move(coefficients)) {
  if (c_.empty()) c_.push_back(0.0);
}

Polynomial::Polynomial(std::initializer_list<double> coefficients)
    : Polynomial(std::vector<double>(coefficients)) {}

int Polynomial::degree() const noexcept {
  return static_cast<int>(c_.size()) - 1;
}

double Polynomial::coefficient(int power) const noexcept {
  if (power < 0 || power >= static_cast<int>(c_.size())) return 0.0;
  return c_[static_cast<std::size_t>(power)];
}

double Polynomial::operator()(double s) const noexcept {
  double acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * s + *it;
  return acc;
}

double Polynomial::eval(double s, int deriv) const noexcept {
  if (deriv == 0) return (*this)(s);
  const int n = degree();
  if (deriv > n) return 0.0;
  double acc = 0.0;
  for (int p = n; p >= deriv; --p) {
    double falling = 1.0;
    for (int q = 0; q < deriv; ++q) falling *= static_cast<double>(p - q);
    acc = acc * s + falling * c_[static_cast<std::size_t>(p)];
  }
  return acc;
}

Polynomial Polynomial::derivative(int order) const {
  std::vector<double> c = c_;
  for (int d = 0; d < order; ++d) {
    if (c.size() <= 1) return Polynomial::constant(0.0);
    std::vector<double> next(c.size() - 1);
    for (std::size_t p = 1; p < c.size(); ++p)
      next[p - 1] = static_cast<double>(p) * c[p];
    c = std::move(next);
  }
  return Polynomial(std::move(c));
}

Polynomial Polynomial::antiderivative() const {
  std::vector<double> c(c_.size() + 1, 0.0);
  for (std::size_t p = 0; p < c_.size(); ++p)
    c[p + 1] = c_[p] / static_cast<double>(p + 1);
  return Polynomial(std::move(c));
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (other.c_.size() > c_.size()) c_.resize(other.c_.size(), 0.0);
  for (std::size_t p = 0; p < other.c_.size(); ++p) c_[p] += other.c_[p];
  return *this;
}

Polynomial& Polynomial::operator*=(double scale) {
  for (double& v : c_) v *= scale;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.c_.size(); ++i)
    for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
  return Polynomial(std::move(c));
}

Polynomial Polynomial::times_linear(double shift, double slope) const {
  // (slope·s + shift)·p(s)
  std::vector<double> c(c_.size() + 1, 0.0);
  for (std::size_t p = 0; p < c_.size(); ++p) {
    c[p] += shift * c_[p];
    c[p + 1] += slope * c_[p];
  }
  return Polynomial(std::move(c));
}

Polynomial Polynomial::trimmed(double relative_tol) const {
  double scale = 0.0;
  for (double v : c_) scale = std::max(scale, std::abs(v));
  std::vector<double> c = c_;
  while (c.size() > 1 && std::abs(c.back()) <= relative_tol * scale) c.pop_back();
  return Polynomial(std::move(c));
}

std::optional<std::vector<double>> real_roots(const Polynomial& p,
                                              double imag_tol) {
  const Polynomial q = p.trimmed();
  const int n = q.degree();
  std::vector<double> roots;
  if (n <= 0) return roots;
  const auto& c = q.coefficients();
  if (n == 1) {
    roots.push_back(-c[0] / c[1]);
    return roots;
  }
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i)
    companion(i, n - 1) = -c[static_cast<std::size_t>(i)] / c[static_cast<std::size_t>(n)];
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) return std::nullopt;
  for (const auto& z : solver.eigenvalues()) {
    if (std::abs(z.imag()) <= imag_tol * std::max(1.0, std::abs(z.real())))
      roots.push_back(z.real());
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace splinesde
