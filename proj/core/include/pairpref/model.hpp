#pragma once

#include <cstdint>
#include <random>
#include <span>

#include <Eigen/Dense>

namespace pairpref {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Random engine used throughout. Every stochastic operation takes one
/// explicitly; sharing an instance across threads needs external locking.
using Rng = std::mt19937_64;

/// Deterministic child seed for stream `stream` of a parent seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Ground-truth user parameters in the original domain: preference optimum
/// theta in [0,1]^D and the diagonal of the sensitivity matrix. The
/// sensitivity is the already-scaled one (response noise folded in).
struct UserParams {
  Vector theta;
  Vector lambda;

  Index dims() const { return theta.size(); }
  /// Throws DomainError / DimensionMismatch on invariant violations.
  void validate() const;
};

/// Unconstrained representation phi = (alpha, gamma) with
/// alpha = Phi^-1(theta) and gamma = ln(lambda).
struct TransformedParams {
  Vector alpha;
  Vector gamma;

  Index dims() const { return alpha.size(); }

  /// Packs into [alpha; gamma], the layout used by GaussianBelief.
  Vector packed() const;
  static TransformedParams unpack(const Eigen::Ref<const Vector>& phi);
};

/// A reference/alternative proposal pair, both in the transformed domain.
struct Trial {
  Vector x_ref;
  Vector x_alt;

  Index dims() const { return x_ref.size(); }
  Trial swapped() const { return Trial{x_alt, x_ref}; }
};

/// One bit of feedback. kAlternative means x_alt is preferred or equivalent.
enum class Response : std::uint8_t { kReference = 0, kAlternative = 1 };

inline int to_int(Response r) { return static_cast<int>(r); }
Response response_from_int(int r);

struct Observation {
  Trial trial;
  Response response;
};

TransformedParams to_transformed(const UserParams& u);
UserParams from_transformed(const TransformedParams& phi);

/// f(x; phi) = -sqrt(sum_d exp(gamma_d) (Phi(x_d) - Phi(alpha_d))^2).
double preference_value(const Eigen::Ref<const Vector>& x,
                        const TransformedParams& phi);

/// P(r = 1 | trial, phi) = Phi(f(x_alt; phi) - f(x_ref; phi)).
double response_probability(const Trial& t, const TransformedParams& phi);

Response sample_response(const Trial& t, const TransformedParams& phi, Rng& rng);

/// log p(r | trial, phi) with the probability clamped to
/// [kProbabilityFloor, 1 - kProbabilityFloor].
double log_likelihood(const Observation& obs, const TransformedParams& phi);

double log_likelihood(std::span<const Observation> history,
                      const TransformedParams& phi);

namespace detail {

// Same value as preference_value, taking Phi(x) and Phi(alpha) precomputed.
inline double preference_from_cdfs(const Vector& cdf_x, const Vector& cdf_alpha,
                                   const Vector& gamma) {
  double acc = 0.0;
  for (Index d = 0; d < cdf_x.size(); ++d) {
    const double diff = cdf_x[d] - cdf_alpha[d];
    acc += std::exp(gamma[d]) * diff * diff;
  }
  return -std::sqrt(acc);
}

Vector cdf(const Eigen::Ref<const Vector>& x);

}  // namespace detail

}  // namespace pairpref
