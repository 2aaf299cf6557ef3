#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pairpref/service/json_codec.hpp"
#include "pairpref/service/session_id.hpp"
#include "pairpref/service/wal.hpp"
#include "pairpref/session.hpp"

namespace pairpref::service {

/// An error with an HTTP status and a short machine-readable code.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status_(status), code_(std::move(code)) {}

  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

struct SessionEnvelope {
  SessionId id;
  std::uint64_t seed = 0;
  EngineConfig config;
  SessionState state;
  /// Agent randomness; advanced only by submit_response, so the session is
  /// fully determined by (config, seed, responses).
  Rng rng;
  std::int64_t created_ms = 0;
  std::int64_t updated_ms = 0;

  /// MI of every designed trial so far, including a pending one.
  std::vector<double> mi_trace() const;
};

// The store and offline replay share these fold steps, which is what makes a
// recovered session identical to the live one.
SessionEnvelope apply_create(const WalRecord& record);
void apply_response(SessionEnvelope& env, const WalRecord& record);
/// Payload of the "trial" record written after create and every response.
json outcome_payload(const SessionEnvelope& env);

json state_document(const SessionEnvelope& env);
/// Throws ServiceError(409) when the session is terminal.
json current_trial_document(const SessionEnvelope& env);

struct ReplayReport {
  std::vector<SessionEnvelope> sessions;
  /// Human-readable description of every mismatch between logged outcomes
  /// and recomputed ones, plus records that could not be applied.
  std::vector<std::string> divergences;
};

ReplayReport replay_records(const std::vector<WalRecord>& records);

/// Reads (and repairs) the log, then folds it into sessions.
std::vector<SessionEnvelope> recover_on_startup(const std::filesystem::path& log);

std::int64_t system_clock_ms();

/// Thread-safe registry of live sessions backed by an optional log.
/// Requests on one session are serialized; different sessions proceed
/// concurrently.
class SessionStore {
 public:
  using Clock = std::function<std::int64_t()>;

  /// With a log path, existing records are recovered before returning.
  explicit SessionStore(std::optional<std::filesystem::path> log_path = std::nullopt,
                        Clock clock = system_clock_ms);

  json create(const json& config_doc);
  json trial(std::string_view id) const;
  json respond(std::string_view id, const json& body);
  json state(std::string_view id) const;
  json list() const;

  std::size_t size() const;
  const std::vector<std::string>& recovery_divergences() const { return divergences_; }
  std::size_t quarantined_lines() const { return quarantined_; }

 private:
  struct Entry {
    mutable std::mutex mu;
    SessionEnvelope env;
  };

  Entry& find(std::string_view id) const;
  void log(const WalRecord& record);

  Clock clock_;
  std::unique_ptr<WriteAheadLog> wal_;
  mutable std::shared_mutex registry_mu_;
  std::map<std::string, std::unique_ptr<Entry>, std::less<>> sessions_;
  std::vector<std::string> divergences_;
  std::size_t quarantined_ = 0;
};

}  // namespace pairpref::service
