#include "pairpref/service/session_store.hpp"

#include <chrono>
#include <random>

#include "pairpref/errors.hpp"

namespace pairpref::service {

namespace {

ServiceError not_found(std::string_view id) {
  return ServiceError(404, "not_found", "no session '" + std::string(id) + "'");
}

ServiceError conflict(const std::string& message) {
  return ServiceError(409, "conflict", message);
}

ServiceError bad_request(const std::string& message) {
  return ServiceError(400, "bad_request", message);
}

json nullable_rsu(const SessionState& s) {
  return s.designed_trials > 0 ? json(rsu(s)) : json(nullptr);
}

// Client-facing step: responses so far, plus one while a trial is pending.
// This is the index a client echoes back when answering.
std::size_t public_step(const SessionState& s) {
  return s.step + (s.current_trial ? 1 : 0);
}

json estimate_or_null(const SessionState& s) {
  if (s.step == 0) return nullptr;
  return vector_to_json(estimate(s).theta);
}

}  // namespace

std::int64_t system_clock_ms() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::vector<double> SessionEnvelope::mi_trace() const {
  std::vector<double> trace;
  for (const auto& h : state.history) {
    if (h.designed) trace.push_back(h.mi_bits);
  }
  if (state.current_trial && state.current_designed) trace.push_back(state.current_mi);
  return trace;
}

SessionEnvelope apply_create(const WalRecord& record) {
  SessionEnvelope env;
  env.id = SessionId::parse(record.sid);
  env.seed = record.payload.at("seed").get<std::uint64_t>();
  env.config = engine_config_from_json(record.payload.at("config"));
  env.rng.seed(env.seed);
  env.state = init_session(env.config.prior, env.rng);
  env.created_ms = record.t;
  env.updated_ms = record.t;
  return env;
}

void apply_response(SessionEnvelope& env, const WalRecord& record) {
  const auto step = record.payload.at("step").get<std::size_t>();
  const Response r = response_from_int(record.payload.at("r").get<int>());
  if (env.state.terminal()) {
    throw conflict("session is " + std::string(to_string(env.state.status)));
  }
  if (step != env.state.trial_index()) {
    throw conflict("stale step " + std::to_string(step) + ", current trial is " +
                   std::to_string(env.state.trial_index()));
  }
  env.state = submit_response(std::move(env.state), r, env.config, env.rng);
  env.updated_ms = record.t;
}

json outcome_payload(const SessionEnvelope& env) {
  const SessionState& s = env.state;
  return json{
      {"step", s.step},
      {"status", std::string(to_string(s.status))},
      {"trial", s.current_trial ? json{{"x_ref", vector_to_json(s.current_trial->x_ref)},
                                       {"x_alt", vector_to_json(s.current_trial->x_alt)}}
                                : json(nullptr)},
      {"mi_bits", s.current_trial && s.current_designed ? json(s.current_mi)
                                                        : json(nullptr)},
      {"mean", vector_to_json(s.belief.mean)},
  };
}

json current_trial_document(const SessionEnvelope& env) {
  const SessionState& s = env.state;
  if (s.terminal() || !s.current_trial) {
    throw conflict("session is " + std::string(to_string(s.status)));
  }
  return trial_document(*s.current_trial, s.trial_index(), s.current_designed,
                        s.current_mi);
}

json state_document(const SessionEnvelope& env) {
  const SessionState& s = env.state;
  const GaussianBelief alpha = marginal_alpha(s.belief);
  json trace = json::array();
  for (double mi : env.mi_trace()) trace.push_back(mi);
  return json{
      {"id", env.id.hex()},
      {"status", std::string(to_string(s.status))},
      {"step", public_step(s)},
      {"responses", s.step},
      {"seed", env.seed},
      {"created_ms", env.created_ms},
      {"updated_ms", env.updated_ms},
      {"theta_estimate", estimate_or_null(s)},
      {"alpha_mean", vector_to_json(alpha.mean)},
      {"alpha_cov", matrix_to_json(alpha.cov)},
      {"rsu", nullable_rsu(s)},
      {"mi_trace", trace},
      {"trial", s.current_trial ? current_trial_document(env) : json(nullptr)},
      {"warning", s.last_warning ? json(*s.last_warning) : json(nullptr)},
  };
}

ReplayReport replay_records(const std::vector<WalRecord>& records) {
  ReplayReport report;
  std::map<std::string, std::size_t> index;
  std::size_t line = 0;
  for (const WalRecord& rec : records) {
    ++line;
    const std::string where = "record " + std::to_string(line) + " (" + rec.sid + "): ";
    try {
      if (rec.event == "create") {
        if (index.count(rec.sid)) {
          report.divergences.push_back(where + "duplicate create");
          continue;
        }
        index[rec.sid] = report.sessions.size();
        report.sessions.push_back(apply_create(rec));
        continue;
      }
      const auto it = index.find(rec.sid);
      if (it == index.end()) {
        report.divergences.push_back(where + rec.event + " for unknown session");
        continue;
      }
      SessionEnvelope& env = report.sessions[it->second];
      if (rec.event == "response") {
        apply_response(env, rec);
      } else if (outcome_payload(env) != rec.payload) {
        report.divergences.push_back(where + "logged outcome differs from recomputed state");
      }
    } catch (const std::exception& e) {
      report.divergences.push_back(where + e.what());
    }
  }
  return report;
}

std::vector<SessionEnvelope> recover_on_startup(const std::filesystem::path& log) {
  return replay_records(read_log(log, /*repair=*/true).records).sessions;
}

SessionStore::SessionStore(std::optional<std::filesystem::path> log_path, Clock clock)
    : clock_(std::move(clock)) {
  if (!log_path) return;
  LogReadResult read = read_log(*log_path, /*repair=*/true);
  quarantined_ = read.quarantined.size();
  ReplayReport report = replay_records(read.records);
  divergences_ = std::move(report.divergences);
  for (auto& env : report.sessions) {
    auto entry = std::make_unique<Entry>();
    const std::string key = env.id.hex();
    entry->env = std::move(env);
    sessions_.emplace(key, std::move(entry));
  }
  wal_ = std::make_unique<WriteAheadLog>(*log_path);
}

void SessionStore::log(const WalRecord& record) {
  if (wal_) wal_->append(record);
}

SessionStore::Entry& SessionStore::find(std::string_view id) const {
  std::shared_lock lock(registry_mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw not_found(id);
  return *it->second;
}

json SessionStore::create(const json& config_doc) {
  EngineConfig cfg;
  std::uint64_t seed = 0;
  try {
    cfg = engine_config_from_json(config_doc);
    if (config_doc.contains("seed")) {
      const json& sj = config_doc.at("seed");
      if (!sj.is_number_integer() || (!sj.is_number_unsigned() && sj.get<std::int64_t>() < 0)) {
        throw ConfigError("'seed' must be a non-negative integer");
      }
      seed = config_doc.at("seed").get<std::uint64_t>();
    } else {
      std::random_device rd;
      seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }
  } catch (const ConfigError& e) {
    throw bad_request(e.what());
  }

  auto entry = std::make_unique<Entry>();
  std::unique_lock registry(registry_mu_);
  SessionId id = SessionId::random();
  while (sessions_.count(id.hex())) id = SessionId::random();

  WalRecord rec{clock_(), id.hex(), "create",
                json{{"config", engine_config_to_json(cfg)}, {"seed", seed}}};
  log(rec);
  entry->env = apply_create(rec);
  log(WalRecord{rec.t, rec.sid, "trial", outcome_payload(entry->env)});

  json reply{{"id", rec.sid},
             {"status", std::string(to_string(entry->env.state.status))},
             {"seed", seed},
             {"trial", current_trial_document(entry->env)}};
  sessions_.emplace(rec.sid, std::move(entry));
  return reply;
}

json SessionStore::trial(std::string_view id) const {
  Entry& e = find(id);
  std::lock_guard lock(e.mu);
  return current_trial_document(e.env);
}

json SessionStore::respond(std::string_view id, const json& body) {
  Entry& e = find(id);
  if (!body.is_object() || !body.contains("r") || !body.at("r").is_number_integer()) {
    throw bad_request("body must be {\"step\": k, \"r\": 0|1}");
  }
  const auto r = body.at("r").get<std::int64_t>();
  if (r != 0 && r != 1) throw bad_request("'r' must be 0 or 1");
  if (!body.contains("step") || !body.at("step").is_number_integer() ||
      body.at("step").get<std::int64_t>() < 0) {
    throw bad_request("'step' must echo the trial index being answered");
  }
  const auto step = body.at("step").get<std::uint64_t>();

  std::lock_guard lock(e.mu);
  SessionEnvelope& env = e.env;
  if (env.state.terminal()) {
    throw conflict("session is " + std::string(to_string(env.state.status)));
  }
  if (step != env.state.trial_index()) {
    throw conflict("stale step " + std::to_string(step) + ", current trial is " +
                   std::to_string(env.state.trial_index()));
  }

  WalRecord rec{clock_(), env.id.hex(), "response", json{{"step", step}, {"r", r}}};
  log(rec);
  apply_response(env, rec);
  log(WalRecord{rec.t, rec.sid, "trial", outcome_payload(env)});

  const SessionState& s = env.state;
  return json{
      {"id", rec.sid},
      {"status", std::string(to_string(s.status))},
      {"step", public_step(s)},
      {"responses", s.step},
      {"trial", s.current_trial ? current_trial_document(env) : json(nullptr)},
      {"theta_estimate", estimate_or_null(s)},
      {"mi_bits", s.current_trial && s.current_designed ? json(s.current_mi)
                                                        : json(nullptr)},
      {"rsu", nullable_rsu(s)},
  };
}

json SessionStore::state(std::string_view id) const {
  Entry& e = find(id);
  std::lock_guard lock(e.mu);
  return state_document(e.env);
}

json SessionStore::list() const {
  std::shared_lock registry(registry_mu_);
  json out = json::array();
  for (const auto& [key, entry] : sessions_) {
    std::lock_guard lock(entry->mu);
    out.push_back(json{{"id", key},
                       {"status", std::string(to_string(entry->env.state.status))},
                       {"step", public_step(entry->env.state)},
                       {"responses", entry->env.state.step}});
  }
  return out;
}

std::size_t SessionStore::size() const {
  std::shared_lock registry(registry_mu_);
  return sessions_.size();
}

}  // namespace pairpref::service
