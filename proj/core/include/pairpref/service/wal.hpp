#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "pairpref/service/json_codec.hpp"

namespace pairpref::service {

/// One NDJSON line: {"t": ms, "sid": id, "event": ..., "payload": {...}}.
struct WalRecord {
  std::int64_t t = 0;
  std::string sid;
  std::string event;  // "create" | "response" | "trial"
  json payload;

  json to_json() const;
  /// Throws ConfigError when a required key is missing or mistyped.
  static WalRecord from_json(const json& j);
};

/// Append-only log. Each append is written, flushed and fsynced before it
/// returns, so an acknowledged record survives a crash.
class WriteAheadLog {
 public:
  explicit WriteAheadLog(const std::filesystem::path& path);
  ~WriteAheadLog();
  WriteAheadLog(const WriteAheadLog&) = delete;
  WriteAheadLog& operator=(const WriteAheadLog&) = delete;

  void append(const WalRecord& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
  std::mutex mu_;
};

struct LogReadResult {
  std::vector<WalRecord> records;
  /// Unparseable lines, in file order (normally at most a torn last line).
  std::vector<std::string> quarantined;
};

/// Reads every complete record. A missing file reads as empty. With
/// repair = true, bad lines are appended to "<path>.quarantine" and the log
/// is rewritten without them so later appends start on a clean line.
LogReadResult read_log(const std::filesystem::path& path, bool repair);

}  // namespace pairpref::service
