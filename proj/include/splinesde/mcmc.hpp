#pragma once

#include "splinesde/config.hpp"
#include "splinesde/exact_sampler.hpp"
#include "splinesde/model.hpp"
#include "splinesde/observations.hpp"
#include "splinesde/prior.hpp"
#include "splinesde/random.hpp"
#include "splinesde/tuning.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace splinesde {

enum class Wrt { Theta, Xi };

/// Value and (optionally) gradients of the log joint density of parameters,
/// skeleton and observations.
struct DensityEvaluation {
  double value = 0.0;
  Eigen::VectorXd grad_theta;  // empty unless requested and value is finite
  Eigen::VectorXd grad_xi;
};

/// Log joint density log π(θ, ξ, S | D) up to a parameter-free constant:
///
///   log π(θ, ξ) + A(x_N) − A(x_0) − (r + r_plus) T
///   + Σ_i [log N_Δi(x_{i+1} − x_i) + log η'(v_{i+1})]
///   + Σ_{i,j} log(r + r_plus − G(z_ij + m_i(ψ_ij)))
///
/// where x_i = η(v_i) and m_i are recomputed under the supplied parameters.
/// The last sum is the thinning factor Σ log(1 − (G − r)/r_plus) plus
/// κ_i log r_plus. Any non-positive log argument gives −∞.
///
/// Construction precomputes the ξ-design matrices of the observations, so
/// one instance serves every parameter value sharing the same h-basis and
/// anchor.
class JointDensity {
 public:
  JointDensity(ObservationSeries obs, std::shared_ptr<const SplineBasis> basis_h, double v_bar,
               PriorSpec prior);

  const ObservationSeries& observations() const noexcept { return obs_; }
  const PriorSpec& prior() const noexcept { return prior_; }

  double log_density(const Model& model, const Skeleton& skeleton) const;

  /// Analytic gradient except for ∂(r + r_plus)/∂θ, which uses central
  /// differences with step 1e-6 (1 + |θ_k|). Throws GradientUndefined when
  /// the density is −∞.
  Eigen::VectorXd gradient(const Model& model, const Skeleton& skeleton, Wrt wrt) const;

  /// Value plus whichever gradients are requested; gradients are left empty
  /// when the value is −∞.
  DensityEvaluation evaluate(const Model& model, const Skeleton& skeleton, bool want_theta,
                             bool want_xi) const;

 private:
  void check(const Model& model, const Skeleton& skeleton) const;

  ObservationSeries obs_;
  std::shared_ptr<const SplineBasis> basis_h_;
  double v_bar_;
  PriorSpec prior_;
  Eigen::MatrixXd shifted_i_;  // (N+1) × M_ξ: I_k(v_i) − I_k(v̄)
  Eigen::MatrixXd m_design_;   // N × M_ξ: M_k(v_{i+1})
};

/// Convenience wrappers constructing a JointDensity on the fly.
double log_joint_density(const Model& model, const Skeleton& skeleton,
                         const ObservationSeries& obs, const PriorSpec& prior);
Eigen::VectorXd grad_log_joint(const Model& model, const Skeleton& skeleton,
                               const ObservationSeries& obs, const PriorSpec& prior, Wrt wrt);

struct ChainState {
  std::size_t iteration = 0;
  ModelParams params;
  Skeleton skeleton;
  GBounds bounds;
  double log_joint = 0.0;
  std::uint64_t seed = 0;
};

struct StepInfo {
  bool accepted = false;
  /// The proposal (or an intermediate gradient point) had zero density.
  bool undefined = false;
  /// min(1, acceptance ratio); 0 when undefined.
  double acceptance_probability = 0.0;
};

/// Log of the MH ratio for moving from `current` to `proposal` with the
/// sequential ξ-then-θ Langevin kernel and its mirrored reverse. Returns −∞
/// when the proposal or any gradient point has zero density.
double log_acceptance_ratio(const Model& current, const ModelParams& proposal,
                            const Skeleton& skeleton, const JointDensity& target,
                            const TuningSpec& tuning);

/// One MALA update of (θ, ξ) given the skeleton in `state`. The returned
/// state carries the same skeleton, the new parameters (or the old ones on
/// rejection) and their log joint density. DomainExceeded propagates.
ChainState mala_step(const ChainState& state, const JointDensity& target,
                     const TuningSpec& tuning, Engine& rng, StepInfo* info = nullptr);

/// Bases, anchor and prior implied by a configuration and training data.
struct ModelSetup {
  std::shared_ptr<const SplineBasis> basis_u;
  std::shared_ptr<const SplineBasis> basis_h;
  double v_bar = 0.0;
  PriorSpec prior;

  /// θ = 0 and ξ with η' ≡ 1 on a clamped h-basis.
  ModelParams initial_params() const;
};

ModelSetup make_setup(const RunConfig& config, const ObservationSeries& train);

struct Draw {
  std::size_t iteration = 0;
  Eigen::VectorXd theta;
  Eigen::VectorXd xi;
  double log_joint = 0.0;
  bool accepted = false;
};

struct ChainOutput {
  std::vector<Draw> draws;
  std::vector<double> log_joint_trace;     // one per iteration 1..M
  std::vector<std::size_t> kappa_trace;    // total Poisson points per iteration
  std::vector<char> accepted_trace;
  std::size_t accepted = 0;
  std::size_t undefined = 0;
  double acceptance_rate = 0.0;
  TuningSpec final_tuning;
  /// Configuration after any domain doublings.
  RunConfig config;
  int doublings = 0;
  double v_bar = 0.0;
  ModelSetup setup;
};

using ChainLogger = std::function<void(const std::string&)>;

/// Algorithm driver: M iterations of (skeleton imputation, MALA step),
/// retaining iterations n ≥ burn_in with (n − burn_in) % thin == 0 (only the
/// initial state when M = 0). With auto_expand on, leaving the
/// drift-potential domain doubles it and restarts from scratch.
ChainOutput run_chain(const ObservationSeries& train, const RunConfig& config,
                      const ChainLogger& log = {});

/// Doubles the drift-potential domain [−R, R].
RunConfig expand_domain(const RunConfig& config);

struct HeldoutEstimate {
  double mean = 0.0;               // averaged over draws
  std::vector<double> per_draw;    // Σ_i log p̂_i for each draw
};

/// Held-out log likelihood: per test interval the transition density
/// N_Δ(x_{i+1} − x_i) η'(v_{i+1}) exp(A(x_{i+1}) − A(x_i) − rΔ) times the mean
/// of `n_skeletons` thinning survival products; logs summed over intervals
/// and averaged over the supplied parameter draws.
HeldoutEstimate estimate_heldout_loglik(const std::vector<ModelParams>& draws,
                                        const ObservationSeries& test, std::size_t n_skeletons,
                                        std::uint64_t seed, unsigned threads = 1);

}  // namespace splinesde
