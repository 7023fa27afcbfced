#include "splinesde/mcmc.hpp"

#include "splinesde/errors.hpp"
#include "splinesde/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace splinesde {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_normal_density(double d, double var) {
  return -0.5 * d * d / var - 0.5 * std::log(2.0 * std::numbers::pi * var);
}

}  // namespace

JointDensity::JointDensity(ObservationSeries obs, std::shared_ptr<const SplineBasis> basis_h,
                           double v_bar, PriorSpec prior)
    : obs_(std::move(obs)), basis_h_(std::move(basis_h)), v_bar_(v_bar), prior_(std::move(prior)) {
  obs_.validate();
  if (!basis_h_ || basis_h_->kind() != SplineKind::I)
    throw ArgumentError("JointDensity: the Lamperti basis must be an I-spline basis");
  const int m = basis_h_->size();
  const std::size_t n = obs_.intervals();
  const Eigen::VectorXd anchor = basis_h_->eval_all(v_bar_, 0);
  shifted_i_.resize(static_cast<Eigen::Index>(n + 1), m);
  m_design_.resize(static_cast<Eigen::Index>(n), m);
  for (std::size_t i = 0; i <= n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    shifted_i_.row(row) = (basis_h_->eval_all(obs_.values[i], 0) - anchor).transpose();
    if (i > 0) m_design_.row(row - 1) = basis_h_->eval_all(obs_.values[i], 1).transpose();
  }
}

void JointDensity::check(const Model& model, const Skeleton& skeleton) const {
  const ModelParams& p = model.params();
  if (p.basis_h != basis_h_ && (p.basis_h->size() != basis_h_->size()))
    throw ArgumentError("JointDensity: model uses a different Lamperti basis");
  if (p.v_bar != v_bar_) throw ArgumentError("JointDensity: model uses a different anchor");
  if (skeleton.intervals.size() != obs_.intervals())
    throw ArgumentError("JointDensity: skeleton has " + std::to_string(skeleton.intervals.size()) +
                        " intervals, observations have " + std::to_string(obs_.intervals()));
  if (p.theta.size() != prior_.precision_theta.rows() || p.xi.size() != prior_.precision_xi.rows())
    throw ArgumentError("JointDensity: parameter dimensions do not match the prior");
}

DensityEvaluation JointDensity::evaluate(const Model& model, const Skeleton& skeleton,
                                         bool want_theta, bool want_xi) const {
  check(model, skeleton);
  const ModelParams& p = model.params();
  const DriftPotential& drift = model.drift();
  const GBounds bounds = drift.bounds();
  const double upper = bounds.upper();
  const std::size_t n = obs_.intervals();
  const double total_time = obs_.duration();

  const Eigen::VectorXd w = p.xi.array().exp();
  const Eigen::VectorXd x = shifted_i_ * w;
  const Eigen::VectorXd d_eta = m_design_ * w;

  DensityEvaluation out;
  double value = log_prior(prior_, p.theta, p.xi);
  value += drift.potential(x(static_cast<Eigen::Index>(n))) - drift.potential(x(0));
  value -= upper * total_time;
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double delta = obs_.delta(i);
    value += log_normal_density(x(r + 1) - x(r), delta) + std::log(d_eta(r));
    const IntervalSkeleton& s = skeleton.intervals[i];
    for (std::size_t j = 0; j < s.count(); ++j) {
      const double a = s.times[j] / delta;
      const double pos = s.innovations[j] + x(r) + a * (x(r + 1) - x(r));
      const double gap = upper - drift.phase(pos);
      if (!(gap > 0.0)) {
        out.value = kNegInf;
        return out;
      }
      value += std::log(gap);
    }
  }
  out.value = value;
  if (!std::isfinite(value) || (!want_theta && !want_xi)) return out;

  const PriorGradient pg = grad_log_prior(prior_, p.theta, p.xi);

  if (want_theta) {
    const SplineBasis& bu = drift.basis();
    const int m = bu.size();
    Eigen::VectorXd g = pg.theta;
    g += bu.eval_all(x(static_cast<Eigen::Index>(n)), 0) - bu.eval_all(x(0), 0);
    std::vector<double> d1(static_cast<std::size_t>(m));
    std::vector<double> d2(static_cast<std::size_t>(m));
    double inv_gap_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double delta = obs_.delta(i);
      const IntervalSkeleton& s = skeleton.intervals[i];
      for (std::size_t j = 0; j < s.count(); ++j) {
        const double a = s.times[j] / delta;
        const double pos = s.innovations[j] + x(r) + a * (x(r + 1) - x(r));
        const double inv_gap = 1.0 / (upper - drift.phase(pos));
        inv_gap_sum += inv_gap;
        const double alpha = drift.alpha(pos);
        bu.eval_all(pos, 1, d1);
        bu.eval_all(pos, 2, d2);
        for (int k = 0; k < m; ++k)
          g(k) -= (alpha * d1[static_cast<std::size_t>(k)] +
                   0.5 * d2[static_cast<std::size_t>(k)]) * inv_gap;
      }
    }
    // r + r_plus is a max/min over polynomial extrema; differentiate numerically.
    const double weight = inv_gap_sum - total_time;
    for (int k = 0; k < m; ++k) {
      const double h = 1e-6 * (1.0 + std::abs(p.theta(k)));
      const double up = drift.perturbed_bounds(k, h).upper();
      const double down = drift.perturbed_bounds(k, -h).upper();
      g(k) += weight * (up - down) / (2.0 * h);
    }
    out.grad_theta = std::move(g);
  }

  if (want_xi) {
    Eigen::VectorXd gx = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n + 1));
    gx(static_cast<Eigen::Index>(n)) += drift.alpha(x(static_cast<Eigen::Index>(n)));
    gx(0) -= drift.alpha(x(0));
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const double delta = obs_.delta(i);
      const double slope = (x(r + 1) - x(r)) / delta;
      gx(r + 1) -= slope;
      gx(r) += slope;
      const IntervalSkeleton& s = skeleton.intervals[i];
      for (std::size_t j = 0; j < s.count(); ++j) {
        const double a = s.times[j] / delta;
        const double pos = s.innovations[j] + x(r) + a * (x(r + 1) - x(r));
        const double c = -drift.phase_derivative(pos) / (upper - drift.phase(pos));
        gx(r) += c * (1.0 - a);
        gx(r + 1) += c * a;
      }
    }
    const Eigen::VectorXd inv_d = d_eta.cwiseInverse();
    Eigen::VectorXd g = (shifted_i_.transpose() * gx + m_design_.transpose() * inv_d);
    out.grad_xi = w.cwiseProduct(g) + pg.xi;
  }
  return out;
}

double JointDensity::log_density(const Model& model, const Skeleton& skeleton) const {
  return evaluate(model, skeleton, false, false).value;
}

Eigen::VectorXd JointDensity::gradient(const Model& model, const Skeleton& skeleton,
                                       Wrt wrt) const {
  DensityEvaluation e = evaluate(model, skeleton, wrt == Wrt::Theta, wrt == Wrt::Xi);
  if (!std::isfinite(e.value))
    throw GradientUndefined("log joint density is -inf at the requested parameters");
  return wrt == Wrt::Theta ? std::move(e.grad_theta) : std::move(e.grad_xi);
}

double log_joint_density(const Model& model, const Skeleton& skeleton,
                         const ObservationSeries& obs, const PriorSpec& prior) {
  return JointDensity(obs, model.params().basis_h, model.params().v_bar, prior)
      .log_density(model, skeleton);
}

Eigen::VectorXd grad_log_joint(const Model& model, const Skeleton& skeleton,
                               const ObservationSeries& obs, const PriorSpec& prior, Wrt wrt) {
  return JointDensity(obs, model.params().basis_h, model.params().v_bar, prior)
      .gradient(model, skeleton, wrt);
}

namespace {

// Gaussian kernel up to the constant shared by forward and reverse moves.
double log_kernel(const Eigen::VectorXd& y, const Eigen::VectorXd& mean, double sd) {
  return -0.5 * (y - mean).squaredNorm() / (sd * sd);
}

ModelParams with(const ModelParams& base, const Eigen::VectorXd& theta, const Eigen::VectorXd& xi) {
  ModelParams p = base;
  p.theta = theta;
  p.xi = xi;
  return p;
}

struct Completion {
  double log_ratio = kNegInf;
  double proposal_log_joint = kNegInf;
};

// Given the forward half (current value and ξ-gradient, θ-gradient at the
// intermediate point), evaluates the proposal and the reverse kernel.
Completion complete_ratio(const ModelParams& current, double current_value,
                          const Eigen::VectorXd& grad_xi_current,
                          const Eigen::VectorXd& grad_theta_mid, const ModelParams& proposal,
                          const Skeleton& skeleton, const JointDensity& target,
                          const TuningSpec& tuning) {
  Completion out;
  const Model prop(proposal);
  const DensityEvaluation at_prop = target.evaluate(prop, skeleton, false, true);
  if (!std::isfinite(at_prop.value)) return out;
  const Model reverse_mid(with(current, proposal.theta, current.xi));
  const DensityEvaluation at_rmid = target.evaluate(reverse_mid, skeleton, true, false);
  if (!std::isfinite(at_rmid.value)) return out;

  const double forward =
      log_kernel(proposal.xi, current.xi + tuning.delta1 * grad_xi_current, tuning.delta2) +
      log_kernel(proposal.theta, current.theta + tuning.delta3 * grad_theta_mid, tuning.delta4);
  const double reverse =
      log_kernel(current.xi, proposal.xi + tuning.delta1 * at_prop.grad_xi, tuning.delta2) +
      log_kernel(current.theta, proposal.theta + tuning.delta3 * at_rmid.grad_theta,
                 tuning.delta4);
  out.proposal_log_joint = at_prop.value;
  out.log_ratio = at_prop.value - current_value + reverse - forward;
  return out;
}

DensityEvaluation current_evaluation(const Model& current, const Skeleton& skeleton,
                                     const JointDensity& target) {
  DensityEvaluation e = target.evaluate(current, skeleton, false, true);
  if (!std::isfinite(e.value))
    throw GradientUndefined("current state has zero joint density under its own skeleton");
  return e;
}

}  // namespace

double log_acceptance_ratio(const Model& current, const ModelParams& proposal,
                            const Skeleton& skeleton, const JointDensity& target,
                            const TuningSpec& tuning) {
  const ModelParams& p = current.params();
  const DensityEvaluation at_cur = current_evaluation(current, skeleton, target);
  const Model mid(with(p, p.theta, proposal.xi));
  const DensityEvaluation at_mid = target.evaluate(mid, skeleton, true, false);
  if (!std::isfinite(at_mid.value)) return kNegInf;
  return complete_ratio(p, at_cur.value, at_cur.grad_xi, at_mid.grad_theta, proposal, skeleton,
                        target, tuning)
      .log_ratio;
}

ChainState mala_step(const ChainState& state, const JointDensity& target,
                     const TuningSpec& tuning, Engine& rng, StepInfo* info) {
  StepInfo local;
  StepInfo& step = info ? *info : local;
  step = StepInfo{};

  const ModelParams& p = state.params;
  const Model current(p);
  const DensityEvaluation at_cur = current_evaluation(current, state.skeleton, target);

  ChainState out = state;
  out.log_joint = at_cur.value;
  out.bounds = current.g_bounds();

  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd xi_prop = p.xi + tuning.delta1 * at_cur.grad_xi;
  for (Eigen::Index k = 0; k < xi_prop.size(); ++k) xi_prop(k) += tuning.delta2 * normal(rng);
  Eigen::VectorXd theta_noise(p.theta.size());
  for (Eigen::Index k = 0; k < theta_noise.size(); ++k) theta_noise(k) = normal(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);

  const Model mid(with(p, p.theta, xi_prop));
  const DensityEvaluation at_mid = target.evaluate(mid, state.skeleton, true, false);
  if (!std::isfinite(at_mid.value)) {
    step.undefined = true;
    return out;
  }
  const Eigen::VectorXd theta_prop =
      p.theta + tuning.delta3 * at_mid.grad_theta + tuning.delta4 * theta_noise;
  const ModelParams proposal = with(p, theta_prop, xi_prop);
  const Completion c = complete_ratio(p, at_cur.value, at_cur.grad_xi, at_mid.grad_theta,
                                      proposal, state.skeleton, target, tuning);
  if (!std::isfinite(c.proposal_log_joint) || std::isnan(c.log_ratio)) {
    step.undefined = true;
    return out;
  }
  step.acceptance_probability = c.log_ratio >= 0.0 ? 1.0 : std::exp(c.log_ratio);
  if (std::log(u) < c.log_ratio) {
    step.accepted = true;
    out.params = proposal;
    out.log_joint = c.proposal_log_joint;
    out.bounds = Model(proposal).g_bounds();
  }
  return out;
}

ModelParams ModelSetup::initial_params() const {
  ModelParams p;
  p.theta = Eigen::VectorXd::Zero(basis_u->size());
  p.xi = identity_log_weights(*basis_h);
  p.v_bar = v_bar;
  p.basis_u = basis_u;
  p.basis_h = basis_h;
  return p;
}

ModelSetup make_setup(const RunConfig& config, const ObservationSeries& train) {
  config.validate();
  train.validate();
  ModelSetup s;
  s.basis_u = std::make_shared<const SplineBasis>(config.u_knots.build(config.u_order),
                                                  SplineKind::B);
  s.basis_h = std::make_shared<const SplineBasis>(config.h_knots.build(config.h_order),
                                                  SplineKind::I);
  s.v_bar = config.v_bar.value_or(train.mean());
  const SplineBasis& h = *s.basis_h;
  if (!h.contains(s.v_bar))
    throw ConfigError("anchor v_bar = " + format_double(s.v_bar) + " lies outside the h-domain [" +
                      format_double(h.lower()) + ", " + format_double(h.upper()) + "]");
  for (std::size_t i = 0; i < train.size(); ++i)
    if (!h.contains(train.values[i]))
      throw ConfigError("observation " + std::to_string(i) + " (value " +
                        format_double(train.values[i]) + ") lies outside the h-domain [" +
                        format_double(h.lower()) + ", " + format_double(h.upper()) + "]");
  const int nu = s.basis_u->size();
  const int nh = s.basis_h->size();
  s.prior = PriorSpec::build(
      *s.basis_u, *s.basis_h, config.lambda_theta, config.lambda_xi,
      edge_shrinkage(nu, config.edge_theta_count.value_or(config.u_order), config.edge_theta),
      edge_shrinkage(nh, config.edge_xi_count.value_or(config.h_order), config.edge_xi));
  return s;
}

RunConfig expand_domain(const RunConfig& config) {
  RunConfig out = config;
  out.u_knots = config.u_knots.doubled();
  return out;
}

namespace {

std::string where(std::size_t iteration) {
  return "iteration " + std::to_string(iteration) + ": ";
}

ChainOutput run_once(const ObservationSeries& train, const RunConfig& cfg,
                     std::size_t& iteration) {
  ChainOutput out;
  out.setup = make_setup(cfg, train);
  out.v_bar = out.setup.v_bar;
  const JointDensity target(train, out.setup.basis_h, out.setup.v_bar, out.setup.prior);
  const SamplerOptions options{cfg.max_attempts, cfg.effective_threads()};
  const TuningSpec base = cfg.tuning;
  TuningSpec tuning = base;
  const std::size_t m = base.iterations;

  ChainState state;
  state.params = out.setup.initial_params();
  state.seed = cfg.seed;

  auto retain = [&](std::size_t n, bool accepted) {
    if (n < base.burn_in || (n - base.burn_in) % base.thin != 0) return;
    out.draws.push_back({n, state.params.theta, state.params.xi, state.log_joint, accepted});
  };

  double log_scale = 0.0;
  for (std::size_t n = 0; n <= m; ++n) {
    iteration = n;
    state.iteration = n;
    const Model model(state.params);
    state.bounds = model.g_bounds();
    try {
      state.skeleton = sample_skeleton(model, train, state.bounds, cfg.seed, n, options);
    } catch (const RejectionStall& e) {
      throw NumericalFailure(where(n) + e.what());
    }
    if (n == 0) {
      state.log_joint = target.log_density(model, state.skeleton);
      retain(0, false);
      continue;
    }
    Engine rng = make_stream(cfg.seed, n, kParameterStream);
    StepInfo info;
    try {
      state = mala_step(state, target, tuning, rng, &info);
    } catch (const GradientUndefined& e) {
      throw NumericalFailure(where(n) + e.what());
    }
    out.log_joint_trace.push_back(state.log_joint);
    out.kappa_trace.push_back(state.skeleton.total_points());
    out.accepted_trace.push_back(info.accepted ? 1 : 0);
    out.accepted += info.accepted ? 1 : 0;
    out.undefined += info.undefined ? 1 : 0;

    if (base.adapt && n <= base.burn_in) {
      log_scale += (info.acceptance_probability - base.target_acceptance) /
                   std::pow(static_cast<double>(n), 0.6);
      log_scale = std::clamp(log_scale, -20.0, 20.0);
      // Drift scales follow the square of the noise scale; adapting the
      // noise alone lets a fixed drift dominate and acceptance collapse.
      const double s = std::exp(log_scale);
      tuning.delta1 = base.delta1 * s * s;
      tuning.delta2 = base.delta2 * s;
      tuning.delta3 = base.delta3 * s * s;
      tuning.delta4 = base.delta4 * s;
    }
    retain(n, info.accepted);
  }
  out.acceptance_rate = m > 0 ? static_cast<double>(out.accepted) / static_cast<double>(m) : 0.0;
  out.final_tuning = tuning;
  return out;
}

}  // namespace

ChainOutput run_chain(const ObservationSeries& train, const RunConfig& config,
                      const ChainLogger& log) {
  RunConfig cfg = config;
  for (int doublings = 0;; ++doublings) {
    std::size_t iteration = 0;
    try {
      ChainOutput out = run_once(train, cfg, iteration);
      out.config = cfg;
      out.doublings = doublings;
      return out;
    } catch (const DomainExceeded& e) {
      std::ostringstream msg;
      msg << where(iteration) << e.what();
      if (e.kind() == DomainKind::Lamperti) throw ConfigError(msg.str());
      if (!cfg.auto_expand) throw NumericalFailure(msg.str() + " (auto_expand is off)");
      if (doublings >= cfg.max_doublings)
        throw NumericalFailure(msg.str() + "; domain doubling exhausted after " +
                               std::to_string(doublings) + " doublings (R = " +
                               format_double(cfg.u_knots.radius()) + ")");
      const RunConfig next = expand_domain(cfg);
      if (log)
        log(msg.str() + "; doubling R from " + format_double(cfg.u_knots.radius()) + " to " +
            format_double(next.u_knots.radius()) + " and restarting");
      cfg = next;
    }
  }
}

HeldoutEstimate estimate_heldout_loglik(const std::vector<ModelParams>& draws,
                                        const ObservationSeries& test, std::size_t n_skeletons,
                                        std::uint64_t seed, unsigned threads) {
  test.validate();
  if (n_skeletons == 0) throw ArgumentError("estimate_heldout_loglik: need at least one skeleton");
  HeldoutEstimate out;
  const std::size_t n = test.intervals();
  std::vector<double> terms(n);
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const Model model(draws[d]);
    const GBounds bounds = model.g_bounds();
    const TransformedObservations tr = transform_observations(model, test);
    parallel_for(n, threads, [&](std::size_t i) {
      const CenteringLine& line = tr.lines[i];
      const double delta = line.delta;
      double base = log_normal_density(line.x_end - line.x_start, delta) +
                    std::log(model.lamperti(test.values[i + 1], 1)) +
                    model.potential(line.x_end) - model.potential(line.x_start) -
                    bounds.r * delta;
      Engine rng = make_stream(seed, d, i);
      double sum = 0.0;
      for (std::size_t k = 0; k < n_skeletons; ++k)
        sum += thinning_survival_estimate(model.drift(), bounds, line, rng);
      terms[i] = base + std::log(sum / static_cast<double>(n_skeletons));
    });
    double total = 0.0;
    for (double t : terms) total += t;
    out.per_draw.push_back(total);
  }
  if (!out.per_draw.empty()) {
    double s = 0.0;
    for (double v : out.per_draw) s += v;
    out.mean = s / static_cast<double>(out.per_draw.size());
  }
  return out;
}

}  // namespace splinesde
