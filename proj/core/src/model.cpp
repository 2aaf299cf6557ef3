#include "pairpref/model.hpp"

#include <cmath>
#include <string>

#include "pairpref/errors.hpp"
#include "pairpref/normal.hpp"

namespace pairpref {

namespace detail {

Vector cdf(const Eigen::Ref<const Vector>& x) {
  Vector out(x.size());
  for (Index d = 0; d < x.size(); ++d) out[d] = normal_cdf(x[d]);
  return out;
}

}  // namespace detail

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream));
}

void UserParams::validate() const {
  if (theta.size() < 1) throw DomainError("UserParams: dimension must be >= 1");
  if (theta.size() != lambda.size()) {
    throw DimensionMismatch("UserParams: theta and lambda differ in size");
  }
  for (Index d = 0; d < theta.size(); ++d) {
    if (!(theta[d] >= 0.0 && theta[d] <= 1.0)) {
      throw DomainError("UserParams: theta[" + std::to_string(d) +
                        "] outside [0, 1]");
    }
    if (!(lambda[d] > 0.0) || !std::isfinite(lambda[d])) {
      throw DomainError("UserParams: lambda[" + std::to_string(d) +
                        "] must be positive and finite");
    }
  }
}

Vector TransformedParams::packed() const {
  Vector phi(alpha.size() + gamma.size());
  phi << alpha, gamma;
  return phi;
}

TransformedParams TransformedParams::unpack(const Eigen::Ref<const Vector>& phi) {
  if (phi.size() % 2 != 0) {
    throw DimensionMismatch("packed parameter vector must have even length");
  }
  const Index d = phi.size() / 2;
  return TransformedParams{phi.head(d), phi.tail(d)};
}

Response response_from_int(int r) {
  if (r == 0) return Response::kReference;
  if (r == 1) return Response::kAlternative;
  throw DomainError("response must be 0 or 1, got " + std::to_string(r));
}

TransformedParams to_transformed(const UserParams& u) {
  u.validate();
  TransformedParams phi{Vector(u.dims()), Vector(u.dims())};
  for (Index d = 0; d < u.dims(); ++d) {
    if (u.theta[d] <= 0.0 || u.theta[d] >= 1.0) {
      throw DomainError("to_transformed: theta[" + std::to_string(d) +
                        "] on the boundary of [0, 1]");
    }
    phi.alpha[d] = normal_quantile(u.theta[d]);
    phi.gamma[d] = std::log(u.lambda[d]);
  }
  return phi;
}

UserParams from_transformed(const TransformedParams& phi) {
  if (phi.alpha.size() != phi.gamma.size()) {
    throw DimensionMismatch("from_transformed: alpha and gamma differ in size");
  }
  return UserParams{detail::cdf(phi.alpha), phi.gamma.array().exp().matrix()};
}

double preference_value(const Eigen::Ref<const Vector>& x,
                        const TransformedParams& phi) {
  if (x.size() != phi.dims()) {
    throw DimensionMismatch("preference_value: x has wrong dimension");
  }
  return detail::preference_from_cdfs(detail::cdf(x), detail::cdf(phi.alpha),
                                      phi.gamma);
}

double response_probability(const Trial& t, const TransformedParams& phi) {
  return normal_cdf(preference_value(t.x_alt, phi) -
                    preference_value(t.x_ref, phi));
}

Response sample_response(const Trial& t, const TransformedParams& phi, Rng& rng) {
  std::bernoulli_distribution draw(response_probability(t, phi));
  return draw(rng) ? Response::kAlternative : Response::kReference;
}

double log_likelihood(const Observation& obs, const TransformedParams& phi) {
  // Phi(-z) is evaluated directly rather than as 1 - Phi(z) to keep the tail.
  const double z = preference_value(obs.trial.x_alt, phi) -
                   preference_value(obs.trial.x_ref, phi);
  const double sign = obs.response == Response::kAlternative ? 1.0 : -1.0;
  return std::log(clamp_probability(normal_cdf(sign * z)));
}

double log_likelihood(std::span<const Observation> history,
                      const TransformedParams& phi) {
  double total = 0.0;
  for (const auto& obs : history) total += log_likelihood(obs, phi);
  return total;
}

}  // namespace pairpref
