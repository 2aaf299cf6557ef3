#include "pairpref/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pairpref/errors.hpp"
#include "pairpref/normal.hpp"

namespace pairpref {

namespace {

// Squared CDF-domain offsets of both proposals from one alpha draw.
struct ProposalOffsets {
  Vector ref;
  Vector alt;
};

void fill_offsets(const Vector& cdf_ref, const Vector& cdf_alt,
                  const Eigen::Ref<const Vector>& alpha, ProposalOffsets& out) {
  for (Index d = 0; d < alpha.size(); ++d) {
    const double c = normal_cdf(alpha[d]);
    out.ref[d] = (cdf_ref[d] - c) * (cdf_ref[d] - c);
    out.alt[d] = (cdf_alt[d] - c) * (cdf_alt[d] - c);
  }
}

// Phi(f(x_alt) - f(x_ref)) for one gamma given precomputed offsets.
inline double probit_at(const ProposalOffsets& off,
                        const Eigen::Ref<const Vector>& gamma) {
  double s_ref = 0.0;
  double s_alt = 0.0;
  for (Index d = 0; d < gamma.size(); ++d) {
    const double w = std::exp(gamma[d]);
    s_ref += w * off.ref[d];
    s_alt += w * off.alt[d];
  }
  return normal_cdf(std::sqrt(s_ref) - std::sqrt(s_alt));
}

}  // namespace

void MiConfig::validate() const {
  if (m_outer < 1 || m_inner < 1 || n_candidates < 1) {
    throw DomainError("MiConfig: all sample counts must be >= 1");
  }
}

double predictive_prob(const Trial& trial, const Eigen::Ref<const Vector>& alpha,
                       const Matrix& gamma_draws) {
  const Index d = alpha.size();
  if (trial.dims() != d || gamma_draws.cols() != d || trial.x_alt.size() != d) {
    throw DimensionMismatch("predictive_prob: inconsistent dimensions");
  }
  if (gamma_draws.rows() < 1) throw InsufficientSamples("predictive_prob: no gamma draws");
  ProposalOffsets off{Vector(d), Vector(d)};
  fill_offsets(detail::cdf(trial.x_ref), detail::cdf(trial.x_alt), alpha, off);
  double sum = 0.0;
  for (Index j = 0; j < gamma_draws.rows(); ++j) {
    sum += probit_at(off, gamma_draws.row(j).transpose());
  }
  return clamp_probability(sum / static_cast<double>(gamma_draws.rows()));
}

MiEstimator::MiEstimator(const GaussianBelief& belief, const MiConfig& cfg)
    : cfg_(cfg), dims_(belief.dims()), alpha_marginal_(marginal_alpha(belief)) {
  cfg_.validate();
  alpha_factor_ = covariance_factor(alpha_marginal_.cov);
  gamma_mean_ = belief.mean.tail(dims_);
  const Matrix s_ga = belief.cov.bottomLeftCorner(dims_, dims_);
  const Eigen::LLT<Matrix> llt(alpha_marginal_.cov);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrix("MiEstimator: alpha covariance block is singular");
  }
  gain_ = llt.solve(s_ga.transpose()).transpose();
  Matrix cond_cov = belief.cov.bottomRightCorner(dims_, dims_) - gain_ * s_ga.transpose();
  cond_cov = 0.5 * (cond_cov + cond_cov.transpose());
  conditional_factor_ = covariance_factor(cond_cov);
}

double MiEstimator::operator()(const Trial& trial, Rng& rng) const {
  if (trial.x_ref.size() != dims_ || trial.x_alt.size() != dims_) {
    throw DimensionMismatch("mutual_information: trial dimension mismatch");
  }
  const Vector cdf_ref = detail::cdf(trial.x_ref);
  const Vector cdf_alt = detail::cdf(trial.x_alt);
  const bool paper = cfg_.weighting == Weighting::kPaperDensity;

  std::normal_distribution<double> normal;
  Vector z_alpha(dims_), alpha(dims_), cond_mean(dims_), z_gamma(dims_), gamma(dims_);
  ProposalOffsets off{Vector(dims_), Vector(dims_)};

  // Accumulators for h(sum_m w_m pbar_m) - sum_m w_m h(pbar_m).
  double outer_weight = 0.0;
  double mixed_weight = 0.0;
  double mixed_prob = 0.0;
  double conditional_entropy = 0.0;

  for (std::size_t m = 0; m < cfg_.m_outer; ++m) {
    for (Index d = 0; d < dims_; ++d) z_alpha[d] = normal(rng);
    alpha.noalias() = alpha_marginal_.mean + alpha_factor_ * z_alpha;
    fill_offsets(cdf_ref, cdf_alt, alpha, off);
    cond_mean.noalias() = gamma_mean_ + gain_ * (alpha - alpha_marginal_.mean);

    double inner_weight = 0.0;
    double inner_prob = 0.0;
    for (std::size_t j = 0; j < cfg_.m_inner; ++j) {
      for (Index d = 0; d < dims_; ++d) z_gamma[d] = normal(rng);
      gamma.noalias() = cond_mean + conditional_factor_ * z_gamma;
      const double w = paper ? std::exp(-0.5 * z_gamma.squaredNorm()) : 1.0;
      inner_weight += w;
      inner_prob += w * probit_at(off, gamma);
    }
    const double pbar = clamp_probability(inner_prob / inner_weight);
    const double wa = paper ? std::exp(-0.5 * z_alpha.squaredNorm()) : 1.0;
    outer_weight += wa;
    conditional_entropy += wa * binary_entropy(pbar);
    // Joint (alpha, gamma) weights for the marginal term; uniform collapses
    // to plain averaging since inner_weight == m_inner for every m.
    mixed_weight += wa * inner_weight;
    mixed_prob += wa * inner_weight * pbar;
  }

  const double marginal = binary_entropy(clamp_probability(mixed_prob / mixed_weight));
  const double mi = marginal - conditional_entropy / outer_weight;
  return std::clamp(mi, 0.0, 1.0);
}

double mutual_information(const Trial& trial, const GaussianBelief& belief,
                          const MiConfig& cfg, Rng& rng) {
  return MiEstimator(belief, cfg)(trial, rng);
}

Vector generate_alternative(const GaussianBelief& belief, Rng& rng) {
  return MvnSampler(marginal_alpha(belief)).draw(rng);
}

Vector next_reference(const Trial& prev, Response r) {
  return r == Response::kAlternative ? prev.x_alt : prev.x_ref;
}

std::uint64_t candidate_stream_seed(std::uint64_t base, std::uint64_t index) {
  return derive_seed(base, index);
}

ScoredTrial design_trial(const GaussianBelief& belief, const Trial& prev,
                         Response r, const MiConfig& cfg, Rng& rng,
                         std::vector<ScoredCandidate>* pool) {
  cfg.validate();
  const MiEstimator estimator(belief, cfg);
  const MvnSampler alternatives(estimator.alpha_marginal());
  const std::uint64_t base = rng();

  ScoredTrial best{Trial{next_reference(prev, r), Vector()}, -1.0};
  if (pool) {
    pool->clear();
    pool->reserve(cfg.n_candidates);
  }
  for (std::size_t i = 0; i < cfg.n_candidates; ++i) {
    const std::uint64_t seed = candidate_stream_seed(base, i);
    Rng stream(seed);
    Trial candidate{best.trial.x_ref, alternatives.draw(stream)};
    const double mi = estimator(candidate, stream);
    if (pool) pool->push_back(ScoredCandidate{candidate.x_alt, mi, seed});
    if (mi > best.mi_bits) {
      best.trial.x_alt = std::move(candidate.x_alt);
      best.mi_bits = mi;
    }
  }
  return best;
}

}  // namespace pairpref
