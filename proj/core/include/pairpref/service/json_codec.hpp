#pragma once

#include <stdexcept>

#include <json.hpp>

#include "pairpref/session.hpp"

namespace pairpref::service {

using json = nlohmann::json;

/// A client-supplied document failed validation (maps to HTTP 400).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Builds an engine configuration from a create-session document. Missing
/// fields take library defaults. Throws ConfigError on anything invalid.
EngineConfig engine_config_from_json(const json& doc);

/// Fully explicit form of cfg; engine_config_from_json inverts it exactly.
json engine_config_to_json(const EngineConfig& cfg);

json vector_to_json(const Vector& v);
json matrix_to_json(const Matrix& m);
Vector vector_from_json(const json& j);

/// Trial in both the original [0,1]^D domain and the transformed domain.
json trial_document(const Trial& t, std::size_t trial_index, bool designed,
                    double mi_bits);

}  // namespace pairpref::service
