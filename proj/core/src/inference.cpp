#include "pairpref/inference.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "pairpref/errors.hpp"

namespace pairpref {

namespace {

void check_belief_dims(const GaussianBelief& b) {
  if (b.size() < 2 || b.size() % 2 != 0) {
    throw DimensionMismatch("belief over phi must have an even size >= 2");
  }
}

void check_trial(const GaussianBelief& b, const Trial& t) {
  if (t.x_ref.size() != b.dims() || t.x_alt.size() != b.dims()) {
    throw DimensionMismatch("trial dimension does not match belief");
  }
}

}  // namespace

void GaussianBelief::validate() const {
  if (mean.size() < 1) throw DimensionMismatch("belief: empty mean");
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw DimensionMismatch("belief: covariance shape does not match mean");
  }
  if (!mean.allFinite() || !cov.allFinite()) {
    throw DomainError("belief: non-finite entries");
  }
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw DomainError("belief: covariance is not symmetric");
  }
}

GaussianBelief standard_prior(Index dims) {
  if (dims < 1) throw DomainError("standard_prior: dims must be >= 1");
  return GaussianBelief{Vector::Zero(2 * dims), Matrix::Identity(2 * dims, 2 * dims)};
}

Matrix covariance_factor(const Matrix& cov) {
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw SingularMatrix("covariance_factor: eigen-decomposition failed");
  }
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

MvnSampler::MvnSampler(const GaussianBelief& g)
    : mean_(g.mean), factor_(covariance_factor(g.cov)) {}

Vector MvnSampler::draw(Rng& rng) const {
  Vector out(mean_.size());
  Vector z(mean_.size());
  draw(rng, out, z);
  return out;
}

void MvnSampler::draw(Rng& rng, Eigen::Ref<Vector> out,
                      Eigen::Ref<Vector> standard) const {
  std::normal_distribution<double> normal;
  for (Index i = 0; i < standard.size(); ++i) standard[i] = normal(rng);
  out.noalias() = mean_ + factor_ * standard;
}

GaussianLogKernel::GaussianLogKernel(const GaussianBelief& g)
    : mean_(g.mean), llt_(g.cov) {
  if (llt_.info() != Eigen::Success) {
    throw SingularMatrix("GaussianLogKernel: covariance is not positive definite");
  }
}

double GaussianLogKernel::operator()(const Eigen::Ref<const Vector>& x) const {
  const Vector z = llt_.matrixL().solve(x - mean_);
  return -0.5 * z.squaredNorm();
}

void MhConfig::validate() const {
  if (m_samples < 2) throw DomainError("MhConfig: m_samples must be >= 2");
  if (thin < 1) throw DomainError("MhConfig: thin must be >= 1");
  if (!(step_scale > 0.0)) throw DomainError("MhConfig: step_scale must be > 0");
  if (!(jitter > 0.0)) throw DomainError("MhConfig: jitter must be > 0");
}

PosteriorSample random_walk_metropolis(const LogTarget& log_target,
                                       const Vector& start,
                                       const Matrix& proposal_factor,
                                       const MhConfig& cfg, Rng& rng,
                                       const MhObserver& observer) {
  cfg.validate();
  const Index p = start.size();
  PosteriorSample out;
  out.draws.resize(static_cast<Index>(cfg.m_samples), p);

  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  Vector current = start;
  double current_log = log_target(current);
  Vector z(p);
  Vector proposal(p);

  const std::size_t total = cfg.burn_in + cfg.m_samples * cfg.thin;
  std::size_t accepted = 0;
  Index kept = 0;
  for (std::size_t it = 0; it < total; ++it) {
    for (Index i = 0; i < p; ++i) z[i] = normal(rng);
    proposal.noalias() = current + proposal_factor * z;
    const double proposal_log = log_target(proposal);
    const double delta = proposal_log - current_log;
    // min(1, g'/g): uphill moves skip the uniform draw entirely.
    const bool accept = delta >= 0.0 || std::log(uniform(rng)) < delta;
    if (observer) observer(MhStep{current_log, proposal_log, accept});
    if (accept) {
      current.swap(proposal);
      current_log = proposal_log;
      ++accepted;
    }
    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.thin == cfg.thin - 1) {
      out.draws.row(kept++) = current.transpose();
    }
  }

  out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(total);
  if (out.acceptance_rate < kMinHealthyAcceptance ||
      out.acceptance_rate > kMaxHealthyAcceptance) {
    std::ostringstream msg;
    msg << "MH acceptance rate " << out.acceptance_rate << " outside ["
        << kMinHealthyAcceptance << ", " << kMaxHealthyAcceptance << "]";
    out.warning = msg.str();
  }
  return out;
}

PosteriorSample mh_sample(const GaussianBelief& prior, const Trial& trial,
                          Response response, const MhConfig& cfg, Rng& rng,
                          const MhObserver& observer) {
  check_belief_dims(prior);
  check_trial(prior, trial);
  const GaussianLogKernel prior_log(prior);
  const Observation obs{trial, response};
  const LogTarget target = [&](const Vector& phi) {
    return prior_log(phi) + log_likelihood(obs, TransformedParams::unpack(phi));
  };
  const Matrix factor = cfg.step_scale * covariance_factor(prior.cov);
  return random_walk_metropolis(target, prior.mean, factor, cfg, rng, observer);
}

PosteriorSample mh_sample_history(const GaussianBelief& initial,
                                  std::span<const Observation> history,
                                  const GaussianBelief& current,
                                  const MhConfig& cfg, Rng& rng) {
  check_belief_dims(initial);
  for (const auto& obs : history) check_trial(initial, obs.trial);
  const GaussianLogKernel prior_log(initial);
  const LogTarget target = [&](const Vector& phi) {
    return prior_log(phi) + log_likelihood(history, TransformedParams::unpack(phi));
  };
  const Matrix factor = cfg.step_scale * covariance_factor(current.cov);
  return random_walk_metropolis(target, current.mean, factor, cfg, rng);
}

GaussianBelief moment_match(const PosteriorSample& s, double jitter) {
  const Index m = s.draws.rows();
  if (m < 2) {
    throw InsufficientSamples("moment_match needs at least 2 draws, got " +
                              std::to_string(m));
  }
  GaussianBelief out;
  out.mean = s.draws.colwise().mean().transpose();
  const Matrix centered = s.draws.rowwise() - out.mean.transpose();
  out.cov = (centered.transpose() * centered) / static_cast<double>(m - 1);
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  out.cov.diagonal().array() += jitter;
  return out;
}

GaussianBelief leading_marginal(const GaussianBelief& g, Index k) {
  if (k < 1 || k > g.size()) throw DimensionMismatch("leading_marginal: bad block size");
  return GaussianBelief{g.mean.head(k), g.cov.topLeftCorner(k, k)};
}

GaussianBelief marginal_alpha(const GaussianBelief& b) {
  check_belief_dims(b);
  return leading_marginal(b, b.dims());
}

GaussianBelief conditional_gamma(const GaussianBelief& b,
                                 const Eigen::Ref<const Vector>& alpha) {
  check_belief_dims(b);
  const Index d = b.dims();
  if (alpha.size() != d) throw DimensionMismatch("conditional_gamma: alpha size");
  const Matrix s_a = b.cov.topLeftCorner(d, d);
  const Matrix s_ga = b.cov.bottomLeftCorner(d, d);
  const Eigen::LLT<Matrix> llt(s_a);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrix("conditional_gamma: alpha covariance block is singular");
  }
  // gain = S_ga S_a^-1, computed as (S_a^-1 S_ag)^T.
  const Matrix gain = llt.solve(s_ga.transpose()).transpose();
  GaussianBelief out;
  out.mean = b.mean.tail(d) + gain * (alpha - b.mean.head(d));
  out.cov = b.cov.bottomRightCorner(d, d) - gain * s_ga.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

GaussianBelief update(const GaussianBelief& b, const Trial& trial,
                      Response response, const MhConfig& cfg, Rng& rng) {
  return moment_match(mh_sample(b, trial, response, cfg, rng), cfg.jitter);
}

}  // namespace pairpref
