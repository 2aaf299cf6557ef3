#include "pairpref/session.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

#include "pairpref/errors.hpp"
#include "pairpref/normal.hpp"

namespace pairpref {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInitialLow = 0.01;
constexpr double kInitialHigh = 0.99;

Vector theta_at(const GaussianBelief& b) {
  return detail::cdf(b.mean.head(b.dims()));
}

bool mi_criterion_met(double latest_mi, std::size_t step, const StoppingRule& stop) {
  const double threshold = stop.guard == StopGuard::kScaled
                               ? static_cast<double>(step) * stop.delta
                               : stop.delta;
  return latest_mi <= threshold;
}

}  // namespace

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::kAwaitingResponse: return "awaiting_response";
    case SessionStatus::kConverged: return "converged";
    case SessionStatus::kMaxStepsReached: return "max_steps_reached";
  }
  return "unknown";
}

SessionStatus session_status_from_string(std::string_view s) {
  if (s == "awaiting_response") return SessionStatus::kAwaitingResponse;
  if (s == "converged") return SessionStatus::kConverged;
  if (s == "max_steps_reached") return SessionStatus::kMaxStepsReached;
  throw DomainError("unknown session status '" + std::string(s) + "'");
}

void StoppingRule::validate() const {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw DomainError("StoppingRule: delta must be finite and >= 0");
  }
  if (max_steps < 1) throw DomainError("StoppingRule: max_steps must be >= 1");
}

void EngineConfig::validate() const {
  prior.validate();
  if (prior.size() < 2 || prior.size() % 2 != 0) {
    throw DimensionMismatch("EngineConfig: prior must be over 2D parameters");
  }
  if (Eigen::LLT<Matrix>(prior.cov).info() != Eigen::Success) {
    throw DomainError("EngineConfig: prior covariance must be positive definite");
  }
  mh.validate();
  mi.validate();
  stop.validate();
}

EngineConfig EngineConfig::for_dims(Index dims) {
  EngineConfig cfg;
  cfg.prior = standard_prior(dims);
  return cfg;
}

SessionState init_session(const GaussianBelief& prior, Rng& rng) {
  prior.validate();
  if (prior.size() < 2 || prior.size() % 2 != 0) {
    throw DimensionMismatch("init_session: prior must be over 2D parameters");
  }
  const Index d = prior.dims();
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  auto draw = [&] {
    Vector x(d);
    for (Index i = 0; i < d; ++i) {
      x[i] = normal_quantile(std::clamp(uniform(rng), kInitialLow, kInitialHigh));
    }
    return x;
  };
  SessionState s;
  s.prior = prior;
  s.belief = prior;
  Vector x_ref = draw();
  Vector x_alt = draw();
  s.current_trial = Trial{std::move(x_ref), std::move(x_alt)};
  s.status = SessionStatus::kAwaitingResponse;
  return s;
}

bool should_stop(double latest_mi, std::size_t step, const StoppingRule& stop) {
  return mi_criterion_met(latest_mi, step, stop) || step >= stop.max_steps;
}

SessionState submit_response(SessionState s, Response r, const EngineConfig& cfg,
                             Rng& rng) {
  if (s.terminal() || !s.current_trial) {
    throw InvalidState("submit_response: no trial is awaiting a response");
  }
  const Trial trial = *s.current_trial;
  s.history.push_back(HistoryEntry{trial, r, s.current_mi, s.current_designed});
  s.step += 1;

  PosteriorSample sample;
  if (cfg.update_mode == UpdateMode::kAdf) {
    sample = mh_sample(s.belief, trial, r, cfg.mh, rng);
  } else {
    std::vector<Observation> observations;
    observations.reserve(s.history.size());
    for (const auto& h : s.history) observations.push_back({h.trial, h.response});
    sample = mh_sample_history(s.prior, observations, s.belief, cfg.mh, rng);
  }
  s.belief = moment_match(sample, cfg.mh.jitter);
  s.last_warning = sample.warning;

  const double latest =
      s.current_designed ? s.current_mi : std::numeric_limits<double>::infinity();
  if (should_stop(latest, s.step, cfg.stop)) {
    s.status = mi_criterion_met(latest, s.step, cfg.stop)
                   ? SessionStatus::kConverged
                   : SessionStatus::kMaxStepsReached;
    s.current_trial.reset();
    s.current_mi = 0.0;
    s.current_designed = false;
    return s;
  }

  ScoredTrial next = design_trial(s.belief, trial, r, cfg.mi, rng);
  s.current_trial = std::move(next.trial);
  s.current_mi = next.mi_bits;
  s.current_designed = true;
  s.rsu_sum += next.mi_bits;
  s.designed_trials += 1;
  return s;
}

UserParams estimate(const SessionState& s) {
  if (s.step < 1) throw InvalidState("estimate: no response has been processed");
  return from_transformed(TransformedParams::unpack(s.belief.mean));
}

double rsu(const SessionState& s) {
  if (s.designed_trials < 1) throw InvalidState("rsu: no trial has been designed");
  return s.rsu_sum / static_cast<double>(s.designed_trials);
}

double rmse(const Eigen::Ref<const Vector>& estimated_theta,
            const Eigen::Ref<const Vector>& true_theta) {
  if (estimated_theta.size() != true_theta.size() || true_theta.size() == 0) {
    throw DimensionMismatch("rmse: vectors must have equal, non-zero size");
  }
  return std::sqrt((estimated_theta - true_theta).squaredNorm() /
                   static_cast<double>(true_theta.size()));
}

RunRecord run_simulation(const UserParams& truth, const EngineConfig& cfg,
                         std::uint64_t seed, const StepCallback& on_step) {
  cfg.validate();
  if (truth.dims() != cfg.dims()) {
    throw DimensionMismatch("run_simulation: truth and prior dimensions differ");
  }
  const TransformedParams phi_true = to_transformed(truth);
  Rng agent(derive_seed(seed, 0));
  Rng user(derive_seed(seed, 1));

  RunRecord record;
  record.dims = cfg.dims();
  record.truth = truth;

  SessionState s = init_session(cfg.prior, agent);
  double designed_sum = 0.0;
  std::size_t designed_count = 0;
  while (!s.terminal()) {
    const auto started = std::chrono::steady_clock::now();
    RunRow row;
    row.trial = *s.current_trial;
    row.mi_bits = s.current_mi;
    row.designed = s.current_designed;
    row.theta_pre = theta_at(s.belief);
    row.response = sample_response(row.trial, phi_true, user);

    s = submit_response(std::move(s), row.response, cfg, agent);

    row.step = s.step;
    row.theta_post = theta_at(s.belief);
    row.mean = s.belief.mean;
    row.sigma_trace = s.belief.cov.trace();
    row.rmse_pre = rmse(row.theta_pre, truth.theta);
    row.rmse_post = rmse(row.theta_post, truth.theta);
    if (row.designed) {
      designed_sum += row.mi_bits;
      ++designed_count;
    }
    row.rsu = designed_count > 0 ? designed_sum / static_cast<double>(designed_count)
                                 : kNaN;
    const double seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - started)
                               .count();
    if (on_step) on_step(row, seconds);
    record.rows.push_back(std::move(row));
  }

  record.status = s.status;
  record.estimate = estimate(s);
  record.final_rsu = s.designed_trials > 0 ? rsu(s) : kNaN;
  return record;
}

UserParams draw_truth(Index dims, Rng& rng) {
  std::uniform_real_distribution<double> location(0.1, 0.9);
  std::uniform_real_distribution<double> log_sensitivity(-1.0, 1.0);
  UserParams u{Vector(dims), Vector(dims)};
  for (Index d = 0; d < dims; ++d) u.theta[d] = location(rng);
  for (Index d = 0; d < dims; ++d) u.lambda[d] = std::exp(log_sensitivity(rng));
  return u;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

BandStats band(std::vector<double> values) {
  // 1-sigma band of a normal: Phi(-1) and Phi(1).
  constexpr double kLower = 0.15865525393145707;
  constexpr double kUpper = 0.8413447460685429;
  return BandStats{quantile(values, 0.5), quantile(values, kLower),
                   quantile(values, kUpper)};
}

BenchmarkResult aggregate(std::vector<UserParams> truths, std::vector<RunRecord> runs) {
  BenchmarkResult out;
  out.truths = std::move(truths);
  out.runs = std::move(runs);
  std::size_t longest = 0;
  for (const auto& run : out.runs) longest = std::max(longest, run.rows.size());
  for (std::size_t step = 1; step <= longest; ++step) {
    std::vector<double> rmse_values, mi_values, rsu_values;
    for (const auto& run : out.runs) {
      if (run.rows.size() < step) continue;
      const RunRow& row = run.rows[step - 1];
      rmse_values.push_back(row.rmse_post);
      if (row.designed) mi_values.push_back(row.mi_bits);
      if (!std::isnan(row.rsu)) rsu_values.push_back(row.rsu);
    }
    BenchmarkRow row;
    row.step = step;
    row.runs = rmse_values.size();
    row.mi_runs = mi_values.size();
    row.rmse = band(std::move(rmse_values));
    row.mi = band(std::move(mi_values));
    row.rsu = band(std::move(rsu_values));
    out.table.push_back(row);
  }
  return out;
}

BenchmarkResult benchmark(std::size_t t_runs, const EngineConfig& cfg,
                          std::uint64_t seed,
                          const std::function<void(std::size_t, const RunRow&, double)>&
                              on_step) {
  if (t_runs < 1) throw DomainError("benchmark: t_runs must be >= 1");
  cfg.validate();
  Rng truth_rng(derive_seed(seed, 0));
  std::vector<UserParams> truths;
  std::vector<RunRecord> runs;
  for (std::size_t i = 0; i < t_runs; ++i) {
    truths.push_back(draw_truth(cfg.dims(), truth_rng));
    StepCallback cb;
    if (on_step) cb = [&, i](const RunRow& row, double secs) { on_step(i, row, secs); };
    runs.push_back(run_simulation(truths.back(), cfg, derive_seed(seed, i + 1), cb));
  }
  return aggregate(std::move(truths), std::move(runs));
}

}  // namespace pairpref
