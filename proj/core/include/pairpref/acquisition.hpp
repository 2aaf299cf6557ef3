#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pairpref/inference.hpp"
#include "pairpref/model.hpp"

namespace pairpref {

/// How Monte-Carlo samples are weighted inside the mutual-information sums.
enum class Weighting {
  /// Plain 1/M and 1/M' weights. Consistent, and non-negative by Jensen.
  kUniform,
  /// Each sample additionally weighted by its own Gaussian density and
  /// self-normalized. Kept for comparison; can go slightly negative (clamped).
  kPaperDensity,
};

struct MiConfig {
  std::size_t m_outer = 512;      // alpha draws
  std::size_t m_inner = 32;       // gamma | alpha draws per alpha
  std::size_t n_candidates = 64;  // alternatives scored per design
  Weighting weighting = Weighting::kUniform;

  void validate() const;
};

struct ScoredTrial {
  Trial trial;
  double mi_bits = 0.0;
};

/// A scored alternative from the design pool. Re-seeding an Rng with
/// stream_seed and calling generate_alternative then mutual_information
/// reproduces x_alt and mi_bits exactly.
struct ScoredCandidate {
  Vector x_alt;
  double mi_bits = 0.0;
  std::uint64_t stream_seed = 0;
};

/// Mean over gamma rows of Phi(f(x_alt; alpha, gamma) - f(x_ref; alpha, gamma)),
/// clamped to [kProbabilityFloor, 1 - kProbabilityFloor].
double predictive_prob(const Trial& trial, const Eigen::Ref<const Vector>& alpha,
                       const Matrix& gamma_draws);

/// Mutual information (bits) between the next response and alpha, with gamma
/// integrated out through the Gaussian conditional. Factorizations of the
/// belief are computed once, so scoring many trials against one belief is
/// cheap.
class MiEstimator {
 public:
  MiEstimator(const GaussianBelief& belief, const MiConfig& cfg);

  double operator()(const Trial& trial, Rng& rng) const;

  const GaussianBelief& alpha_marginal() const { return alpha_marginal_; }

 private:
  MiConfig cfg_;
  Index dims_;
  GaussianBelief alpha_marginal_;
  Matrix alpha_factor_;
  Vector gamma_mean_;
  Matrix gain_;
  Matrix conditional_factor_;
};

double mutual_information(const Trial& trial, const GaussianBelief& belief,
                          const MiConfig& cfg, Rng& rng);

/// One draw from the alpha marginal of the belief.
Vector generate_alternative(const GaussianBelief& belief, Rng& rng);

/// The winner of the previous trial becomes the new reference.
Vector next_reference(const Trial& prev, Response r);

/// Per-candidate stream seed, a deterministic function of (base, index).
std::uint64_t candidate_stream_seed(std::uint64_t base, std::uint64_t index);

/// Fixes x_ref = next_reference(prev, r), scores cfg.n_candidates alternatives
/// drawn from the alpha marginal and returns the first maximizer. When pool
/// is non-null it receives every scored candidate in draw order.
ScoredTrial design_trial(const GaussianBelief& belief, const Trial& prev,
                         Response r, const MiConfig& cfg, Rng& rng,
                         std::vector<ScoredCandidate>* pool = nullptr);

}  // namespace pairpref
