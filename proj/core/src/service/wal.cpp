#include "pairpref/service/wal.hpp"

#include <fstream>
#include <stdexcept>
#include <system_error>

#include <unistd.h>

namespace pairpref::service {

json WalRecord::to_json() const {
  return json{{"t", t}, {"sid", sid}, {"event", event}, {"payload", payload}};
}

WalRecord WalRecord::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("log record must be an object");
  try {
    WalRecord r;
    r.t = j.at("t").get<std::int64_t>();
    r.sid = j.at("sid").get<std::string>();
    r.event = j.at("event").get<std::string>();
    r.payload = j.at("payload");
    if (r.event != "create" && r.event != "response" && r.event != "trial") {
      throw ConfigError("unknown log event '" + r.event + "'");
    }
    return r;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed log record: ") + e.what());
  }
}

WriteAheadLog::WriteAheadLog(const std::filesystem::path& path) : path_(path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  file_ = std::fopen(path.c_str(), "ab");
  if (!file_) {
    throw std::system_error(errno, std::generic_category(),
                            "cannot open log " + path.string());
  }
}

WriteAheadLog::~WriteAheadLog() {
  if (file_) std::fclose(file_);
}

void WriteAheadLog::append(const WalRecord& record) {
  const std::string line = record.to_json().dump() + "\n";
  std::lock_guard lock(mu_);
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() ||
      std::fflush(file_) != 0) {
    throw std::system_error(errno, std::generic_category(), "log append failed");
  }
  ::fsync(::fileno(file_));
}

LogReadResult read_log(const std::filesystem::path& path, bool repair) {
  LogReadResult out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;

  std::vector<std::string> good_lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.records.push_back(WalRecord::from_json(json::parse(line)));
      good_lines.push_back(line);
    } catch (const std::exception&) {
      out.quarantined.push_back(line);
    }
  }
  in.close();

  if (repair && !out.quarantined.empty()) {
    {
      std::ofstream q(path.string() + ".quarantine", std::ios::binary | std::ios::app);
      for (const auto& bad : out.quarantined) q << bad << "\n";
    }
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
      std::ofstream rewritten(tmp, std::ios::binary | std::ios::trunc);
      for (const auto& ok : good_lines) rewritten << ok << "\n";
      if (!rewritten) throw std::runtime_error("cannot rewrite log " + path.string());
    }
    std::filesystem::rename(tmp, path);
  }
  return out;
}

}  // namespace pairpref::service
