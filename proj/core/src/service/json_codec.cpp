#include "pairpref/service/json_codec.hpp"

#include <string>

#include "pairpref/errors.hpp"

namespace pairpref::service {

namespace {

constexpr std::int64_t kMaxDims = 32;
constexpr std::uint64_t kMaxCount = 1'000'000;

const json& object_or_empty(const json& doc, const char* key) {
  static const json empty = json::object();
  if (!doc.contains(key)) return empty;
  const json& j = doc.at(key);
  if (!j.is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  return j;
}

std::size_t count_field(const json& obj, const char* key, std::size_t fallback,
                        std::uint64_t minimum) {
  if (!obj.contains(key)) return fallback;
  const json& j = obj.at(key);
  if (!j.is_number_integer()) throw ConfigError(std::string("'") + key + "' must be an integer");
  if (!j.is_number_unsigned() && j.get<std::int64_t>() < 0) {
    throw ConfigError(std::string("'") + key + "' must be non-negative");
  }
  const auto v = j.get<std::uint64_t>();
  if (v < minimum || v > kMaxCount) {
    throw ConfigError(std::string("'") + key + "' out of range");
  }
  return static_cast<std::size_t>(v);
}

double real_field(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& j = obj.at(key);
  if (!j.is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return j.get<double>();
}

}  // namespace

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
  return out;
}

Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw ConfigError("expected an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("expected an array of numbers");
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  return v;
}

EngineConfig engine_config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (!doc.contains("dims") || !doc.at("dims").is_number_integer()) {
    throw ConfigError("'dims' must be an integer");
  }
  const auto dims = doc.at("dims").get<std::int64_t>();
  if (dims < 1 || dims > kMaxDims) throw ConfigError("'dims' must lie in [1, 32]");

  EngineConfig cfg = EngineConfig::for_dims(static_cast<Index>(dims));

  if (doc.contains("prior")) {
    const json& p = object_or_empty(doc, "prior");
    if (p.contains("mean")) cfg.prior.mean = vector_from_json(p.at("mean"));
    if (p.contains("cov")) {
      const json& c = p.at("cov");
      if (!c.is_array()) throw ConfigError("'prior.cov' must be a matrix");
      Matrix m(static_cast<Index>(c.size()), static_cast<Index>(c.size()));
      for (std::size_t r = 0; r < c.size(); ++r) {
        const Vector row = vector_from_json(c[r]);
        if (row.size() != m.cols()) throw ConfigError("'prior.cov' must be square");
        m.row(static_cast<Index>(r)) = row.transpose();
      }
      cfg.prior.cov = m;
    }
    if (cfg.prior.size() != 2 * dims || cfg.prior.cov.rows() != 2 * dims) {
      throw ConfigError("prior must be over 2 * dims parameters");
    }
  }

  const json& mh = object_or_empty(doc, "mh");
  cfg.mh.m_samples = count_field(mh, "m_samples", cfg.mh.m_samples, 2);
  cfg.mh.burn_in = count_field(mh, "burn_in", cfg.mh.burn_in, 0);
  cfg.mh.thin = count_field(mh, "thin", cfg.mh.thin, 1);
  cfg.mh.step_scale = real_field(mh, "step_scale", cfg.mh.step_scale);
  cfg.mh.jitter = real_field(mh, "jitter", cfg.mh.jitter);

  const json& mi = object_or_empty(doc, "mi");
  cfg.mi.m_outer = count_field(mi, "m_outer", cfg.mi.m_outer, 1);
  cfg.mi.m_inner = count_field(mi, "m_inner", cfg.mi.m_inner, 1);
  cfg.mi.n_candidates = count_field(mi, "n_candidates", cfg.mi.n_candidates, 1);
  if (mi.contains("weighting")) {
    const json& w = mi.at("weighting");
    if (w == "uniform") cfg.mi.weighting = Weighting::kUniform;
    else if (w == "paper_density") cfg.mi.weighting = Weighting::kPaperDensity;
    else throw ConfigError("'mi.weighting' must be \"uniform\" or \"paper_density\"");
  }

  const json& stop = object_or_empty(doc, "stop");
  cfg.stop.delta = real_field(stop, "delta", cfg.stop.delta);
  cfg.stop.max_steps = count_field(stop, "max_steps", cfg.stop.max_steps, 1);
  if (stop.contains("guard")) {
    const json& g = stop.at("guard");
    if (g == "scaled") cfg.stop.guard = StopGuard::kScaled;
    else if (g == "plain") cfg.stop.guard = StopGuard::kPlain;
    else throw ConfigError("'stop.guard' must be \"scaled\" or \"plain\"");
  }

  if (doc.contains("update_mode")) {
    const json& u = doc.at("update_mode");
    if (u == "adf") cfg.update_mode = UpdateMode::kAdf;
    else if (u == "full_history") cfg.update_mode = UpdateMode::kFullHistory;
    else throw ConfigError("'update_mode' must be \"adf\" or \"full_history\"");
  }

  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

json engine_config_to_json(const EngineConfig& cfg) {
  return json{
      {"dims", cfg.dims()},
      {"prior", {{"mean", vector_to_json(cfg.prior.mean)},
                 {"cov", matrix_to_json(cfg.prior.cov)}}},
      {"mh", {{"m_samples", cfg.mh.m_samples},
              {"burn_in", cfg.mh.burn_in},
              {"thin", cfg.mh.thin},
              {"step_scale", cfg.mh.step_scale},
              {"jitter", cfg.mh.jitter}}},
      {"mi", {{"m_outer", cfg.mi.m_outer},
              {"m_inner", cfg.mi.m_inner},
              {"n_candidates", cfg.mi.n_candidates},
              {"weighting", cfg.mi.weighting == Weighting::kUniform ? "uniform"
                                                                    : "paper_density"}}},
      {"stop", {{"delta", cfg.stop.delta},
                {"max_steps", cfg.stop.max_steps},
                {"guard", cfg.stop.guard == StopGuard::kScaled ? "scaled" : "plain"}}},
      {"update_mode", cfg.update_mode == UpdateMode::kAdf ? "adf" : "full_history"},
  };
}

json trial_document(const Trial& t, std::size_t trial_index, bool designed,
                    double mi_bits) {
  return json{
      {"step", trial_index},
      {"x_ref", vector_to_json(detail::cdf(t.x_ref))},
      {"x_alt", vector_to_json(detail::cdf(t.x_alt))},
      {"x_ref_transformed", vector_to_json(t.x_ref)},
      {"x_alt_transformed", vector_to_json(t.x_alt)},
      {"designed", designed},
      {"mi_bits", designed ? json(mi_bits) : json(nullptr)},
  };
}

}  // namespace pairpref::service
