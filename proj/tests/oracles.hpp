#pragma once

// Reference computations used only by the tests. Nothing here calls into the
// library's spline, quadrature or sampling code.

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

// 64-point Gauss–Legendre on [a, b].
template <class F>
double integrate(F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss<double, 64>::integrate(f, a, b);
}

// Piecewise integration over consecutive distinct break points.
template <class F>
double integrate_pieces(F&& f, const std::vector<double>& breaks) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    if (breaks[i + 1] > breaks[i]) total += integrate(f, breaks[i], breaks[i + 1]);
  return total;
}

inline std::vector<double> distinct(const std::vector<double>& knots) {
  std::vector<double> out = knots;
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Cox–de Boor recursion for the normalised B-spline of the given degree. At
// the last knot the final non-degenerate interval is treated as closed.
inline double bspline(const std::vector<double>& t, int i, int degree, double x) {
  if (degree == 0) {
    const double lo = t[i];
    const double hi = t[i + 1];
    if (lo == hi) return 0.0;
    if (x >= lo && x < hi) return 1.0;
    // right end of the whole knot span
    if (x == t.back() && hi == t.back()) return 1.0;
    return 0.0;
  }
  double v = 0.0;
  const double d1 = t[i + degree] - t[i];
  const double d2 = t[i + degree + 1] - t[i + 1];
  if (d1 > 0.0) v += (x - t[i]) / d1 * bspline(t, i, degree - 1, x);
  if (d2 > 0.0) v += (t[i + degree + 1] - x) / d2 * bspline(t, i + 1, degree - 1, x);
  return v;
}

// deriv-th derivative via the standard B-spline derivative recurrence.
inline double bspline_deriv(const std::vector<double>& t, int i, int degree, double x,
                            int deriv) {
  if (deriv == 0) return bspline(t, i, degree, x);
  if (degree == 0) return 0.0;
  double v = 0.0;
  const double d1 = t[i + degree] - t[i];
  const double d2 = t[i + degree + 1] - t[i + 1];
  if (d1 > 0.0) v += degree / d1 * bspline_deriv(t, i, degree - 1, x, deriv - 1);
  if (d2 > 0.0) v -= degree / d2 * bspline_deriv(t, i + 1, degree - 1, x, deriv - 1);
  return v;
}

inline double mspline(const std::vector<double>& t, int i, int degree, double x) {
  const double w = t[i + degree + 1] - t[i];
  return w > 0.0 ? (degree + 1) / w * bspline(t, i, degree, x) : 0.0;
}

// Central difference with step h.
template <class F>
double central_difference(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Kolmogorov survival function Q(λ) = 2 Σ (−1)^{k−1} exp(−2 k² λ²).
inline double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Asymptotic two-sample KS p-value with the usual small-sample correction.
inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double ne = na * nb / (na + nb);
  const double sq = std::sqrt(ne);
  return kolmogorov_q((sq + 0.12 + 0.11 / sq) * d);
}

// One-sample KS p-value against a continuous cdf.
template <class Cdf>
double ks_one_sample_pvalue(std::vector<double> a, Cdf&& cdf) {
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  const double sq = std::sqrt(n);
  return kolmogorov_q((sq + 0.12 + 0.11 / sq) * d);
}

inline double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  std::size_t n = 0;
  double se_mean() const { return std::sqrt(var / static_cast<double>(n)); }
};

inline Moments moments(const std::vector<double>& xs) {
  Moments m;
  m.n = xs.size();
  m.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(m.n);
  double s = 0.0;
  for (double x : xs) s += (x - m.mean) * (x - m.mean);
  m.var = s / static_cast<double>(m.n - 1);
  return m;
}

// Standard error of the sample variance, from the fourth central moment.
inline double se_variance(const std::vector<double>& xs) {
  const Moments m = moments(xs);
  double m4 = 0.0;
  for (double x : xs) m4 += std::pow(x - m.mean, 4);
  m4 /= static_cast<double>(m.n);
  return std::sqrt(std::max(0.0, m4 - m.var * m.var) / static_cast<double>(m.n));
}

// Clamped knot vector: ends repeated degree + 1 times, sorted random interior.
inline std::vector<double> random_clamped_knots(std::mt19937_64& rng, int degree, int interior,
                                                double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> inner(static_cast<std::size_t>(interior));
  for (auto& k : inner) k = u(rng);
  std::sort(inner.begin(), inner.end());
  std::vector<double> t(static_cast<std::size_t>(degree + 1), lo);
  t.insert(t.end(), inner.begin(), inner.end());
  t.insert(t.end(), static_cast<std::size_t>(degree + 1), hi);
  return t;
}

}  // namespace oracle
