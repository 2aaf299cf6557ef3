#include "pairpref/service/session_id.hpp"

#include <cstdio>
#include <random>
#include <stdexcept>

namespace pairpref::service {

std::string SessionId::hex() const {
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                static_cast<unsigned long long>(words[0]),
                static_cast<unsigned long long>(words[1]));
  return std::string(buf, 32);
}

SessionId SessionId::parse(std::string_view s) {
  if (s.size() != 32) throw std::invalid_argument("session id must be 32 hex digits");
  SessionId id;
  for (std::size_t i = 0; i < 32; ++i) {
    const char c = s[i];
    std::uint64_t nibble;
    if (c >= '0' && c <= '9') nibble = static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') nibble = static_cast<std::uint64_t>(c - 'a' + 10);
    else throw std::invalid_argument("session id must be lowercase hex");
    auto& w = id.words[i / 16];
    w = (w << 4) | nibble;
  }
  return id;
}

SessionId SessionId::random() {
  std::random_device rd;
  SessionId id;
  for (auto& w : id.words) {
    w = (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
  }
  return id;
}

}  // namespace pairpref::service
