#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace pairpref::service {

/// Opaque 128-bit identifier, rendered as 32 lowercase hex digits.
struct SessionId {
  std::array<std::uint64_t, 2> words{};

  std::string hex() const;
  /// Throws std::invalid_argument unless s is exactly 32 hex digits.
  static SessionId parse(std::string_view s);
  static SessionId random();

  auto operator<=>(const SessionId&) const = default;
};

}  // namespace pairpref::service
