#include "splinesde/spline_basis.hpp"

#include "splinesde/errors.hpp"
#include "splinesde/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace splinesde {

KnotVector::KnotVector(std::vector<double> knots, int order)
    : knots_(std::move(knots)), order_(order) {
  if (order_ < 0) throw ArgumentError("knot vector: order must be >= 0");
  if (knots_.size() < static_cast<std::size_t>(order_) + 2)
    throw ArgumentError("knot vector: need at least order + 2 knots, got " +
                        std::to_string(knots_.size()));
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i]))
      throw ArgumentError("knot vector: non-finite knot at index " + std::to_string(i));
    if (i > 0 && knots_[i] < knots_[i - 1])
      throw ArgumentError("knot vector: knots must be non-decreasing (index " +
                          std::to_string(i) + ")");
  }
  if (!(knots_.front() < knots_.back()))
    throw ArgumentError("knot vector: zero-width span");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (multiplicity(i) > order_ + 1)
      throw ArgumentError("knot vector: knot " + std::to_string(knots_[i]) +
                          " repeated more than order + 1 times");
  }
}

KnotVector KnotVector::uniform(int count, double lo, double hi,
                               int end_multiplicity, int order) {
  if (count < 2) throw ArgumentError("uniform knots: count must be >= 2");
  if (end_multiplicity < 1)
    throw ArgumentError("uniform knots: end multiplicity must be >= 1");
  if (!(lo < hi)) throw ArgumentError("uniform knots: need lo < hi");
  std::vector<double> knots;
  knots.reserve(static_cast<std::size_t>(count + 2 * (end_multiplicity - 1)));
  for (int m = 1; m < end_multiplicity; ++m) knots.push_back(lo);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (int i = 0; i < count; ++i) {
    knots.push_back(i == count - 1 ? hi : lo + step * static_cast<double>(i));
  }
  for (int m = 1; m < end_multiplicity; ++m) knots.push_back(hi);
  return KnotVector(std::move(knots), order);
}

int KnotVector::multiplicity(std::size_t i) const noexcept {
  const double v = knots_[i];
  std::size_t lo = i;
  while (lo > 0 && knots_[lo - 1] == v) --lo;
  std::size_t hi = i;
  while (hi + 1 < knots_.size() && knots_[hi + 1] == v) ++hi;
  return static_cast<int>(hi - lo + 1);
}

namespace {

// Unit-mass M-splines of the given degree that can be non-zero on
// [t_j, t_{j+1}), as polynomials in s = x − t_j. Entry q corresponds to basis
// index j − degree + q; indices without a complete set of knots are zero.
std::vector<Polynomial> local_m_splines(std::span<const double> t, int j,
                                        int degree) {
  const int last_knot = static_cast<int>(t.size()) - 1;
  const double tj = t[static_cast<std::size_t>(j)];
  std::vector<Polynomial> prev{
      Polynomial::constant(1.0 / (t[static_cast<std::size_t>(j + 1)] - tj))};
  for (int d = 1; d <= degree; ++d) {
    std::vector<Polynomial> cur(static_cast<std::size_t>(d + 1));
    const int first = j - d;
    auto previous = [&](int i) -> const Polynomial* {
      const int q = i - (j - d + 1);
      if (q < 0 || q >= d) return nullptr;
      return &prev[static_cast<std::size_t>(q)];
    };
    for (int q = 0; q <= d; ++q) {
      const int i = first + q;
      if (i < 0 || i + d + 1 > last_knot) continue;
      const double ti = t[static_cast<std::size_t>(i)];
      const double tid = t[static_cast<std::size_t>(i + d + 1)];
      const double denom = tid - ti;
      if (denom == 0.0) continue;
      Polynomial acc;
      if (const Polynomial* left = previous(i)) acc += left->times_linear(tj - ti, 1.0);
      if (const Polynomial* right = previous(i + 1))
        acc += right->times_linear(tid - tj, -1.0);
      acc *= static_cast<double>(d + 1) / (static_cast<double>(d) * denom);
      cur[static_cast<std::size_t>(q)] = std::move(acc);
    }
    prev = std::move(cur);
  }
  return prev;
}

}  // namespace

SplineBasis::SplineBasis(KnotVector knots, SplineKind kind)
    : knots_(std::move(knots)), kind_(kind) {
  n_basis_ = static_cast<int>(knots_.size()) - knots_.order() - 1;
  build();
}

int SplineBasis::max_derivative() const noexcept {
  return kind_ == SplineKind::I ? order() + 1 : order();
}

void SplineBasis::build() {
  const auto t = knots_.knots();
  const int k = order();
  const int n_knots = static_cast<int>(t.size());

  std::vector<double> extended;
  if (kind_ == SplineKind::I) {
    extended.assign(t.begin(), t.end());
    const int extra = k + 2 - knots_.multiplicity(t.size() - 1);
    for (int e = 0; e < extra; ++e) extended.push_back(t.back());
  }

  for (int j = 0; j + 1 < n_knots; ++j) {
    const double left = t[static_cast<std::size_t>(j)];
    const double right = t[static_cast<std::size_t>(j + 1)];
    if (!(left < right)) continue;
    Piece piece{j, left, right, std::max(0, j - k), {}};
    const int last = std::min(n_basis_ - 1, j);

    if (kind_ == SplineKind::I) {
      const auto higher = local_m_splines(extended, j, k + 1);
      // B_m(·|k+1) for m = j − k − 1 .. j
      std::vector<Polynomial> b(higher.size());
      for (std::size_t q = 0; q < higher.size(); ++q) {
        const int m = j - (k + 1) + static_cast<int>(q);
        if (m < 0) continue;
        const double width = extended[static_cast<std::size_t>(m + k + 2)] -
                             extended[static_cast<std::size_t>(m)];
        b[q] = higher[q] * (width / static_cast<double>(k + 2));
      }
      for (int i = piece.first; i <= last; ++i) {
        Polynomial sum;
        for (int m = i; m <= j; ++m) sum += b[static_cast<std::size_t>(m - (j - k - 1))];
        piece.polys.push_back(std::move(sum));
      }
    } else {
      const auto m_splines = local_m_splines(t, j, k);
      for (int i = piece.first; i <= last; ++i) {
        Polynomial p = m_splines[static_cast<std::size_t>(i - (j - k))];
        if (kind_ == SplineKind::B) {
          const double width = t[static_cast<std::size_t>(i + k + 1)] -
                               t[static_cast<std::size_t>(i)];
          p *= width / static_cast<double>(k + 1);
        }
        piece.polys.push_back(std::move(p));
      }
    }
    interval_knots_.push_back(j);
    breaks_.push_back(left);
    pieces_.push_back(std::move(piece));
  }
}

int SplineBasis::locate(double x) const { return piece_for(x).knot_index; }

const SplineBasis::Piece& SplineBasis::piece_for(double x) const {
  if (!(x >= lower() && x <= upper())) throw DomainExceeded(x, lower(), upper());
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
  std::size_t idx = static_cast<std::size_t>(it - breaks_.begin());
  idx = idx == 0 ? 0 : idx - 1;
  return pieces_[idx];
}

const SplineBasis::Piece& SplineBasis::piece_at_knot(int j) const {
  auto it = std::lower_bound(interval_knots_.begin(), interval_knots_.end(), j);
  if (it == interval_knots_.end() || *it != j)
    throw ArgumentError("spline basis: knot interval " + std::to_string(j) +
                        " is degenerate or out of range");
  return pieces_[static_cast<std::size_t>(it - interval_knots_.begin())];
}

double SplineBasis::eval(int i, double x, int deriv) const {
  if (i < 0 || i >= n_basis_)
    throw ArgumentError("spline basis: index " + std::to_string(i) + " out of range");
  if (deriv < 0 || deriv > max_derivative())
    throw ArgumentError("spline basis: derivative order " + std::to_string(deriv) +
                        " not supported");
  const Piece& p = piece_for(x);
  if (i < p.first) return (kind_ == SplineKind::I && deriv == 0) ? 1.0 : 0.0;
  const int q = i - p.first;
  if (q >= static_cast<int>(p.polys.size())) return 0.0;
  const double v = p.polys[static_cast<std::size_t>(q)].eval(x - p.left, deriv);
  // I-splines take values in [0, 1]; clamping removes rounding overshoot.
  return (kind_ == SplineKind::I && deriv == 0) ? std::clamp(v, 0.0, 1.0) : v;
}

void SplineBasis::eval_all(double x, int deriv, std::span<double> out) const {
  if (static_cast<int>(out.size()) != n_basis_)
    throw ArgumentError("spline basis: output span has wrong length");
  if (deriv < 0 || deriv > max_derivative())
    throw ArgumentError("spline basis: derivative order " + std::to_string(deriv) +
                        " not supported");
  const Piece& p = piece_for(x);
  const double fill_below = (kind_ == SplineKind::I && deriv == 0) ? 1.0 : 0.0;
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < p.first; ++i) out[static_cast<std::size_t>(i)] = fill_below;
  const double s = x - p.left;
  for (std::size_t q = 0; q < p.polys.size(); ++q)
    out[static_cast<std::size_t>(p.first) + q] = p.polys[q].eval(s, deriv);
  if (kind_ == SplineKind::I && deriv == 0)
    for (double& v : out) v = std::clamp(v, 0.0, 1.0);
}

Eigen::VectorXd SplineBasis::eval_all(double x, int deriv) const {
  Eigen::VectorXd out(n_basis_);
  eval_all(x, deriv, std::span<double>(out.data(), static_cast<std::size_t>(n_basis_)));
  return out;
}

SplineBasis::Support SplineBasis::support_on(int j) const {
  const Piece& p = piece_at_knot(j);
  return {p.first, p.first + static_cast<int>(p.polys.size()) - 1};
}

Polynomial SplineBasis::piece(int i, int j) const {
  const Piece& p = piece_at_knot(j);
  if (i < p.first) return Polynomial::constant(kind_ == SplineKind::I ? 1.0 : 0.0);
  const int q = i - p.first;
  if (q >= static_cast<int>(p.polys.size())) return Polynomial::constant(0.0);
  return p.polys[static_cast<std::size_t>(q)];
}

Polynomial SplineBasis::local_polynomial(std::span<const double> coeffs, int j) const {
  if (static_cast<int>(coeffs.size()) != n_basis_)
    throw ArgumentError("local_polynomial: coefficient vector has length " +
                        std::to_string(coeffs.size()) + ", expected " +
                        std::to_string(n_basis_));
  const Piece& p = piece_at_knot(j);
  Polynomial acc;
  if (kind_ == SplineKind::I) {
    double below = 0.0;
    for (int i = 0; i < p.first; ++i) below += coeffs[static_cast<std::size_t>(i)];
    acc += Polynomial::constant(below);
  }
  for (std::size_t q = 0; q < p.polys.size(); ++q)
    acc += p.polys[q] * coeffs[static_cast<std::size_t>(p.first) + q];
  return acc;
}

PenaltyMatrix penalty_matrix(const SplineBasis& basis, int k) {
  if (k < 0) throw ArgumentError("penalty_matrix: derivative order must be >= 0");
  const int n = basis.size();
  PenaltyMatrix out{k, Eigen::MatrixXd::Zero(n, n)};
  const int nodes = (2 * basis.order() + 2) / 2 + 1;  // ⌈(2·order + 1)/2⌉ + 1
  const QuadratureRule rule = gauss_legendre(nodes);
  const auto t = basis.knot_vector().knots();
  Eigen::VectorXd values(n);
  for (int j : basis.intervals()) {
    const double width = t[static_cast<std::size_t>(j + 1)] - t[static_cast<std::size_t>(j)];
    const auto support = basis.support_on(j);
    std::vector<Polynomial> derivs;
    for (int i = support.first; i <= support.last; ++i)
      derivs.push_back(basis.piece(i, j).derivative(k));
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double s = 0.5 * width * (rule.nodes[q] + 1.0);
      const double w = 0.5 * width * rule.weights[q];
      for (std::size_t a = 0; a < derivs.size(); ++a) {
        const double va = derivs[a](s);
        if (va == 0.0) continue;
        for (std::size_t b = a; b < derivs.size(); ++b) {
          out.entries(support.first + static_cast<int>(a),
                      support.first + static_cast<int>(b)) += w * va * derivs[b](s);
        }
      }
    }
  }
  out.entries.triangularView<Eigen::StrictlyLower>() = out.entries.transpose();
  // I-splines below the support are constant 1: only the k = 0 Gram matrix
  // sees them.
  if (basis.kind() == SplineKind::I && k == 0) {
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    for (int j : basis.intervals()) {
      const double width = t[static_cast<std::size_t>(j + 1)] - t[static_cast<std::size_t>(j)];
      for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
        const double x = t[static_cast<std::size_t>(j)] + 0.5 * width * (rule.nodes[q] + 1.0);
        basis.eval_all(x, 0, std::span<double>(values.data(), static_cast<std::size_t>(n)));
        gram.noalias() += 0.5 * width * rule.weights[q] * values * values.transpose();
      }
    }
    out.entries = gram;
  }
  return out;
}

Eigen::VectorXd identity_log_weights(const SplineBasis& basis) {
  const auto t = basis.knot_vector().knots();
  const int k = basis.order();
  Eigen::VectorXd xi(basis.size());
  for (int i = 0; i < basis.size(); ++i) {
    const double width = t[static_cast<std::size_t>(i + k + 1)] - t[static_cast<std::size_t>(i)];
    xi(i) = std::log(width / static_cast<double>(k + 1));
  }
  return xi;
}

}  // namespace splinesde
