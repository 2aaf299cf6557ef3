#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pairpref/acquisition.hpp"
#include "pairpref/inference.hpp"
#include "pairpref/model.hpp"

namespace pairpref {

enum class SessionStatus { kAwaitingResponse, kConverged, kMaxStepsReached };

std::string_view to_string(SessionStatus s);
SessionStatus session_status_from_string(std::string_view s);

/// kScaled stops once the latest MI <= step * delta (the literal guard);
/// kPlain once the latest MI <= delta.
enum class StopGuard { kScaled, kPlain };

struct StoppingRule {
  double delta = 0.0;
  std::size_t max_steps = 30;
  StopGuard guard = StopGuard::kScaled;

  void validate() const;
};

/// kAdf conditions each MH run on the newest response only; kFullHistory
/// refits the whole history against the initial prior (diagnostics).
enum class UpdateMode { kAdf, kFullHistory };

struct EngineConfig {
  GaussianBelief prior = standard_prior(2);
  MhConfig mh;
  MiConfig mi;
  StoppingRule stop;
  UpdateMode update_mode = UpdateMode::kAdf;

  Index dims() const { return prior.dims(); }
  void validate() const;

  static EngineConfig for_dims(Index dims);
};

struct HistoryEntry {
  Trial trial;
  Response response;
  /// MI of the trial when it was designed; 0 for the random first trial.
  double mi_bits = 0.0;
  bool designed = false;
};

struct SessionState {
  GaussianBelief prior;
  GaussianBelief belief;
  std::vector<HistoryEntry> history;
  std::optional<Trial> current_trial;
  double current_mi = 0.0;
  bool current_designed = false;
  /// Number of responses folded into the belief so far.
  std::size_t step = 0;
  double rsu_sum = 0.0;
  std::size_t designed_trials = 0;
  SessionStatus status = SessionStatus::kAwaitingResponse;
  /// Latest non-fatal sampler diagnostic, if any.
  std::optional<std::string> last_warning;

  Index dims() const { return belief.dims(); }
  bool terminal() const { return status != SessionStatus::kAwaitingResponse; }
  /// 1-based index of the pending trial (step + 1).
  std::size_t trial_index() const { return step + 1; }
};

/// Draws two proposals uniformly on [0.01, 0.99]^D, maps them through
/// Phi^-1 and presents them as the first (undesigned) trial.
SessionState init_session(const GaussianBelief& prior, Rng& rng);

/// Records r for the pending trial, updates the belief and either designs
/// the next trial or moves to a terminal status. Throws InvalidState when no
/// trial is pending.
SessionState submit_response(SessionState s, Response r, const EngineConfig& cfg,
                             Rng& rng);

/// latest_mi is +inf for an undesigned trial.
bool should_stop(double latest_mi, std::size_t step, const StoppingRule& stop);

/// Point estimate at the belief mean, mapped back to the original domain.
UserParams estimate(const SessionState& s);

/// Mean MI over designed trials.
double rsu(const SessionState& s);

/// sqrt(mean_d (a_d - b_d)^2) in the original theta domain.
double rmse(const Eigen::Ref<const Vector>& estimated_theta,
            const Eigen::Ref<const Vector>& true_theta);

struct RunRow {
  std::size_t step = 0;
  Trial trial;
  Response response = Response::kReference;
  double mi_bits = 0.0;
  bool designed = false;
  Vector theta_pre;   // estimate before this step's update
  Vector theta_post;  // estimate after it
  Vector mean;        // full belief mean over phi after the update
  double sigma_trace = 0.0;
  double rmse_pre = 0.0;   // NaN when no truth is known
  double rmse_post = 0.0;  // NaN when no truth is known
  double rsu = 0.0;        // running RSU, NaN before the first designed trial
};

struct RunRecord {
  Index dims = 0;
  std::optional<UserParams> truth;
  std::vector<RunRow> rows;
  SessionStatus status = SessionStatus::kAwaitingResponse;
  UserParams estimate;
  double final_rsu = 0.0;  // NaN when no trial was designed
};

/// Called after each interaction with the row and its wall time in seconds.
using StepCallback = std::function<void(const RunRow&, double)>;

/// Runs one session against a simulated user with parameters `truth`. Agent
/// and user randomness are independent streams derived from seed.
RunRecord run_simulation(const UserParams& truth, const EngineConfig& cfg,
                         std::uint64_t seed, const StepCallback& on_step = {});

/// theta uniform on [0.1, 0.9]^D, lambda log-uniform on [e^-1, e].
UserParams draw_truth(Index dims, Rng& rng);

struct BandStats {
  double median = 0.0;
  double lo = 0.0;  // 15.87th percentile
  double hi = 0.0;  // 84.13th percentile
};

/// Linear-interpolation quantile; values need not be sorted.
double quantile(std::vector<double> values, double q);
BandStats band(std::vector<double> values);

struct BenchmarkRow {
  std::size_t step = 0;
  std::size_t runs = 0;      // runs that reached this step
  std::size_t mi_runs = 0;   // of those, runs whose trial was designed
  BandStats rmse;
  BandStats mi;
  BandStats rsu;
};

struct BenchmarkResult {
  std::vector<UserParams> truths;
  std::vector<RunRecord> runs;
  std::vector<BenchmarkRow> table;
};

/// T independent simulations with fresh random truths; per-step median and
/// 1-sigma band of RMSE, MI and running RSU.
BenchmarkResult benchmark(std::size_t t_runs, const EngineConfig& cfg,
                          std::uint64_t seed,
                          const std::function<void(std::size_t, const RunRow&, double)>&
                              on_step = {});

BenchmarkResult aggregate(std::vector<UserParams> truths, std::vector<RunRecord> runs);

}  // namespace pairpref
