#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "pairpref/model.hpp"

namespace pairpref {

/// Multivariate Gaussian. As a belief over phi the layout is [alpha; gamma],
/// so mean has 2D entries and cov is 2D x 2D with blocks
/// [[S_alpha, S_alpha_gamma], [S_gamma_alpha, S_gamma]].
struct GaussianBelief {
  Vector mean;
  Matrix cov;

  Index size() const { return mean.size(); }
  /// Number of preference dimensions D when this is a belief over phi.
  Index dims() const { return mean.size() / 2; }

  /// Throws on non-square / mismatched / non-finite / asymmetric (> 1e-10).
  void validate() const;
};

/// Zero-mean, identity-covariance belief over phi for D dimensions.
GaussianBelief standard_prior(Index dims);

/// Returns F with F F^T = cov. Uses Cholesky, falling back to a clamped
/// eigen-decomposition when cov is only positive semi-definite.
Matrix covariance_factor(const Matrix& cov);

/// Draws from N(mean, cov) using a precomputed factor.
class MvnSampler {
 public:
  explicit MvnSampler(const GaussianBelief& g);

  Vector draw(Rng& rng) const;
  /// Writes mean + F z into out; z is returned through `standard` so callers
  /// can reuse it (the self-normalized density weights need |z|^2).
  void draw(Rng& rng, Eigen::Ref<Vector> out, Eigen::Ref<Vector> standard) const;

  const Vector& mean() const { return mean_; }
  const Matrix& factor() const { return factor_; }

 private:
  Vector mean_;
  Matrix factor_;
};

/// Log density of N(mean, cov), up to the additive normalizing constant.
class GaussianLogKernel {
 public:
  explicit GaussianLogKernel(const GaussianBelief& g);
  double operator()(const Eigen::Ref<const Vector>& x) const;

 private:
  Vector mean_;
  Eigen::LLT<Matrix> llt_;
};

struct MhConfig {
  // ADF carries each step's Monte-Carlo error forward, so chains are long.
  std::size_t m_samples = 80000;
  std::size_t burn_in = 1000;
  std::size_t thin = 1;
  /// Random-walk proposal covariance is step_scale^2 times the belief cov.
  double step_scale = 1.5;
  /// Added to the diagonal of every moment-matched covariance.
  double jitter = 1e-6;

  void validate() const;
};

struct PosteriorSample {
  /// One retained chain state per row.
  Matrix draws;
  double acceptance_rate = 0.0;
  /// Set when the acceptance rate leaves [kMinHealthyAcceptance,
  /// kMaxHealthyAcceptance]. Non-fatal.
  std::optional<std::string> warning;

  std::size_t size() const { return static_cast<std::size_t>(draws.rows()); }
};

inline constexpr double kMinHealthyAcceptance = 0.1;
inline constexpr double kMaxHealthyAcceptance = 0.6;

struct MhStep {
  double log_target_current;
  double log_target_proposed;
  bool accepted;
};
using MhObserver = std::function<void(const MhStep&)>;
using LogTarget = std::function<double(const Vector&)>;

/// Random-walk Metropolis with Gaussian proposal N(x, F F^T), F =
/// proposal_factor. Runs burn_in + m_samples * thin iterations from start.
PosteriorSample random_walk_metropolis(const LogTarget& log_target,
                                       const Vector& start,
                                       const Matrix& proposal_factor,
                                       const MhConfig& cfg, Rng& rng,
                                       const MhObserver& observer = {});

/// Samples the one-observation ADF target N(phi | prior) p(r | phi, trial).
/// The chain starts at the prior mean.
PosteriorSample mh_sample(const GaussianBelief& prior, const Trial& trial,
                          Response response, const MhConfig& cfg, Rng& rng,
                          const MhObserver& observer = {});

/// Samples the full-history posterior N(phi | initial) prod_l p(r_l | phi).
/// `current` shapes the proposal and gives the starting point. Diagnostic
/// alternative to the sequential ADF target.
PosteriorSample mh_sample_history(const GaussianBelief& initial,
                                  std::span<const Observation> history,
                                  const GaussianBelief& current,
                                  const MhConfig& cfg, Rng& rng);

/// Sample mean and unbiased (M - 1) covariance, plus jitter on the diagonal.
GaussianBelief moment_match(const PosteriorSample& s, double jitter);

/// Leading k x k block (the marginal of the first k coordinates).
GaussianBelief leading_marginal(const GaussianBelief& g, Index k);

GaussianBelief marginal_alpha(const GaussianBelief& b);

/// Gaussian conditional of gamma given alpha:
///   mean = mu_g + S_ga S_a^-1 (alpha - mu_a)
///   cov  = S_g - S_ga S_a^-1 S_ag
GaussianBelief conditional_gamma(const GaussianBelief& b,
                                 const Eigen::Ref<const Vector>& alpha);

/// One ADF step: moment_match(mh_sample(...), cfg.jitter).
GaussianBelief update(const GaussianBelief& b, const Trial& trial,
                      Response response, const MhConfig& cfg, Rng& rng);

}  // namespace pairpref
