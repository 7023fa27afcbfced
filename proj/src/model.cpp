#include "splinesde/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace splinesde {

void ModelParams::validate() const {
  if (!basis_u || !basis_h) throw ArgumentError("model params: missing basis");
  if (basis_u->kind() != SplineKind::B)
    throw ArgumentError("model params: drift potential basis must be a B-spline basis");
  if (basis_h->kind() != SplineKind::I)
    throw ArgumentError("model params: Lamperti basis must be an I-spline basis");
  if (theta.size() != basis_u->size())
    throw ArgumentError("model params: theta has length " + std::to_string(theta.size()) +
                        ", basis has " + std::to_string(basis_u->size()) + " functions");
  if (xi.size() != basis_h->size())
    throw ArgumentError("model params: xi has length " + std::to_string(xi.size()) +
                        ", basis has " + std::to_string(basis_h->size()) + " functions");
  if (!theta.allFinite() || !xi.allFinite())
    throw ArgumentError("model params: non-finite coefficients");
  if (!basis_h->contains(v_bar))
    throw ArgumentError("model params: anchor v_bar lies outside the Lamperti domain");
}

namespace {

constexpr double kRootImagTol = 1e-8;

double polish_root(const Polynomial& p, const Polynomial& dp, double s) {
  for (int it = 0; it < 3; ++it) {
    const double d = dp(s);
    if (d == 0.0) break;
    const double next = s - p(s) / d;
    if (!std::isfinite(next)) break;
    s = next;
  }
  return s;
}

// Extrema of p over [0, width]; `ok` turns false if the eigen-solver fails.
IntervalExtrema polynomial_extrema(const Polynomial& p, double width,
                                   bool& root_finding, bool& ok) {
  IntervalExtrema e;
  std::vector<double> candidates{0.0, width};
  const Polynomial dp = p.derivative().trimmed();
  if (dp.degree() >= 1) {
    root_finding = true;
    auto roots = real_roots(dp, kRootImagTol);
    if (!roots) {
      ok = false;
    } else {
      const Polynomial ddp = dp.derivative();
      for (double s : *roots) {
        s = polish_root(dp, ddp, s);
        if (s > 0.0 && s < width) candidates.push_back(s);
      }
    }
  }
  e.lower = std::numeric_limits<double>::infinity();
  e.upper = -std::numeric_limits<double>::infinity();
  for (double s : candidates) {
    const double v = p(s);
    if (v < e.lower) {
      e.lower = v;
      e.argmin = s;
    }
    if (v > e.upper) {
      e.upper = v;
      e.argmax = s;
    }
  }
  return e;
}

double sup_abs(const Polynomial& p, double width) {
  bool rf = false;
  bool ok = true;
  const IntervalExtrema e = polynomial_extrema(p, width, rf, ok);
  if (!ok) {
    // Coefficient bound on |p| over [0, width].
    double acc = 0.0;
    double w = 1.0;
    for (double c : p.coefficients()) {
      acc += std::abs(c) * w;
      w *= width;
    }
    return acc;
  }
  return std::max(std::abs(e.lower), std::abs(e.upper));
}

}  // namespace

DriftPotential::DriftPotential(std::shared_ptr<const SplineBasis> basis,
                               Eigen::VectorXd theta)
    : basis_(std::move(basis)), theta_(std::move(theta)) {
  if (!basis_) throw ArgumentError("drift potential: missing basis");
  if (theta_.size() != basis_->size())
    throw ArgumentError("drift potential: theta length does not match basis");
  const std::span<const double> th(theta_.data(), static_cast<std::size_t>(theta_.size()));
  for (int j : basis_->intervals()) {
    pieces_.push_back(make_piece(*basis_, th, j));
    const Piece& p = pieces_.back();
    breaks_.push_back(p.left);
    bool rf = false;
    IntervalExtrema e = polynomial_extrema(p.g, p.width, rf, extrema_ok_);
    e.knot_index = j;
    e.argmin += p.left;
    e.argmax += p.left;
    extrema_.push_back(e);
    root_finding_.push_back(rf ? 1 : 0);
  }
}

DriftPotential::Piece DriftPotential::make_piece(const SplineBasis& basis,
                                                 std::span<const double> theta, int j) {
  const auto t = basis.knot_vector().knots();
  Piece p;
  p.left = t[static_cast<std::size_t>(j)];
  p.width = t[static_cast<std::size_t>(j + 1)] - p.left;
  p.a = basis.local_polynomial(theta, j);
  const Polynomial alpha = p.a.derivative();
  p.g = (alpha * alpha + alpha.derivative()) * 0.5;
  return p;
}

const DriftPotential::Piece& DriftPotential::piece_for(double x) const {
  if (!(x >= lower() && x <= upper()))
    throw DomainExceeded(x, lower(), upper(), DomainKind::Potential);
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
  std::size_t idx = static_cast<std::size_t>(it - breaks_.begin());
  return pieces_[idx == 0 ? 0 : idx - 1];
}

double DriftPotential::potential(double x, int deriv) const {
  const Piece& p = piece_for(x);
  return p.a.eval(x - p.left, deriv);
}

double DriftPotential::phase(double x) const {
  const Piece& p = piece_for(x);
  return p.g(x - p.left);
}

double DriftPotential::phase_derivative(double x) const {
  const Piece& p = piece_for(x);
  return p.g.eval(x - p.left, 1);
}

GBounds DriftPotential::assemble(std::vector<IntervalExtrema> extrema,
                                 bool any_root_finding, bool failed) const {
  GBounds b;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& e : extrema) {
    lo = std::min(lo, e.lower);
    hi = std::max(hi, e.upper);
  }
  b.per_interval = std::move(extrema);
  if (failed) {
    const auto [clo, chi] = crude_bounds();
    b.r = clo;
    b.r_plus = chi - clo;
    b.crude_fallback = true;
    return b;
  }
  b.r = lo;
  b.r_plus = hi - lo;
  if (any_root_finding) {
    // Safety margin for root-finding error; constant G is bounded exactly.
    const double margin = 1e-9 * (1.0 + std::abs(b.r) + std::abs(b.r_plus));
    b.r -= margin;
    b.r_plus += 2.0 * margin;
  }
  return b;
}

GBounds DriftPotential::bounds() const {
  const bool root_finding =
      std::any_of(root_finding_.begin(), root_finding_.end(), [](char c) { return c != 0; });
  return assemble(extrema_, root_finding, !extrema_ok_);
}

GBounds DriftPotential::perturbed_bounds(int k, double step) const {
  if (k < 0 || k >= theta_.size())
    throw ArgumentError("perturbed_bounds: coefficient index out of range");
  Eigen::VectorXd theta = theta_;
  theta(k) += step;
  const std::span<const double> th(theta.data(), static_cast<std::size_t>(theta.size()));
  std::vector<IntervalExtrema> extrema;
  extrema.reserve(pieces_.size());
  bool root_finding = false;
  bool ok = true;
  for (std::size_t q = 0; q < pieces_.size(); ++q) {
    const int j = basis_->intervals()[q];
    const auto support = basis_->support_on(j);
    if (k < support.first || k > support.last) {
      extrema.push_back(extrema_[q]);
      root_finding = root_finding || root_finding_[q] != 0;
      continue;
    }
    const Piece piece = make_piece(*basis_, th, j);
    IntervalExtrema e = polynomial_extrema(piece.g, piece.width, root_finding, ok);
    e.knot_index = j;
    e.argmin += piece.left;
    e.argmax += piece.left;
    extrema.push_back(e);
  }
  ok = ok && extrema_ok_;
  return assemble(std::move(extrema), root_finding, !ok);
}

std::pair<double, double> DriftPotential::crude_bounds() const {
  const int n = basis_->size();
  std::vector<double> norm1(static_cast<std::size_t>(n), 0.0);
  std::vector<double> norm2(static_cast<std::size_t>(n), 0.0);
  const auto t = basis_->knot_vector().knots();
  for (int j : basis_->intervals()) {
    const double width = t[static_cast<std::size_t>(j + 1)] - t[static_cast<std::size_t>(j)];
    const auto support = basis_->support_on(j);
    for (int i = support.first; i <= support.last; ++i) {
      const Polynomial p = basis_->piece(i, j);
      auto& n1 = norm1[static_cast<std::size_t>(i)];
      auto& n2 = norm2[static_cast<std::size_t>(i)];
      n1 = std::max(n1, sup_abs(p.derivative(1), width));
      n2 = std::max(n2, sup_abs(p.derivative(2), width));
    }
  }
  double s1 = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    s1 += std::abs(theta_(i)) * norm1[static_cast<std::size_t>(i)];
    s2 += std::abs(theta_(i)) * norm2[static_cast<std::size_t>(i)];
  }
  return {-0.5 * s2, 0.5 * s1 * s1 + 0.5 * s2};
}

LampertiMap::LampertiMap(std::shared_ptr<const SplineBasis> basis,
                         const Eigen::VectorXd& xi, double v_bar)
    : basis_(std::move(basis)), v_bar_(v_bar) {
  if (!basis_) throw ArgumentError("Lamperti map: missing basis");
  if (xi.size() != basis_->size())
    throw ArgumentError("Lamperti map: xi length does not match basis");
  if (!basis_->contains(v_bar))
    throw DomainExceeded(v_bar, basis_->lower(), basis_->upper(), DomainKind::Lamperti);
  weights_ = xi.array().exp().matrix();
  const std::span<const double> w(weights_.data(), static_cast<std::size_t>(weights_.size()));
  const auto t = basis_->knot_vector().knots();
  for (int j : basis_->intervals()) {
    const double left = t[static_cast<std::size_t>(j)];
    pieces_.push_back({left, t[static_cast<std::size_t>(j + 1)] - left,
                       basis_->local_polynomial(w, j)});
    breaks_.push_back(left);
  }
  const Piece& anchor = piece_for(v_bar);
  const double offset = anchor.eta(v_bar - anchor.left);
  for (auto& p : pieces_) p.eta += Polynomial::constant(-offset);
  for (const auto& p : pieces_) knot_values_.push_back(p.eta(0.0));
  knot_values_.push_back(pieces_.back().eta(pieces_.back().width));
}

const LampertiMap::Piece& LampertiMap::piece_for(double v) const {
  if (!(v >= lower() && v <= upper()))
    throw DomainExceeded(v, lower(), upper(), DomainKind::Lamperti);
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), v);
  std::size_t idx = static_cast<std::size_t>(it - breaks_.begin());
  return pieces_[idx == 0 ? 0 : idx - 1];
}

double LampertiMap::value(double v, int deriv) const {
  const Piece& p = piece_for(v);
  return p.eta.eval(v - p.left, deriv);
}

double LampertiMap::inverse(double x) const {
  if (!(x >= image_lower() && x <= image_upper()))
    throw DomainExceeded(x, image_lower(), image_upper(), DomainKind::Lamperti);
  auto it = std::upper_bound(knot_values_.begin(), knot_values_.end() - 1, x);
  std::size_t idx = static_cast<std::size_t>(it - knot_values_.begin());
  idx = std::min(idx == 0 ? 0 : idx - 1, pieces_.size() - 1);
  const Piece& p = pieces_[idx];

  double lo = 0.0;
  double hi = p.width;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    if (p.eta(mid) < x) lo = mid;
    else hi = mid;
  }
  double s = 0.5 * (lo + hi);
  const double tol = 1e-13 * (1.0 + std::abs(x));
  for (int it_newton = 0; it_newton < 50; ++it_newton) {
    const double f = p.eta(s) - x;
    if (std::abs(f) <= tol) break;
    const double d = p.eta.eval(s, 1);
    double next = s - f / d;
    if (!(next >= 0.0 && next <= p.width)) next = std::clamp(next, 0.0, p.width);
    if (next == s) break;
    s = next;
  }
  return p.left + s;
}

Model::Model(ModelParams params)
    : params_((params.validate(), std::move(params))),
      drift_(params_.basis_u, params_.theta),
      lamperti_(params_.basis_h, params_.xi, params_.v_bar) {}

OriginalCoefficients Model::original_coefficients(double v) const {
  const double x = lamperti_.value(v, 0);
  const double d1 = lamperti_.value(v, 1);
  const double d2 = lamperti_.value(v, 2);
  const double alpha = drift_.alpha(x);
  return {alpha / d1 - 0.5 * d2 / (d1 * d1 * d1), 1.0 / d1};
}

}  // namespace splinesde
