#include "tabsynth/lineage.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace tabsynth {

namespace {

constexpr const char* kFormat = "tabsynth-lineage-1";

void append_le64(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_digest(std::string& buf, const Digest& d) {
  buf.append(reinterpret_cast<const char*>(d.data()), d.size());
}

std::string utc_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool known_action(const std::string& action) {
  for (const char* a : kLineageActions) {
    if (action == a) return true;
  }
  return false;
}

struct ParsedLog {
  std::vector<LineageEvent> events;
  VerifyResult status;
};

ParsedLog parse_and_verify(const std::string& path) {
  ParsedLog out;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open lineage log: " + path);

  auto broken = [&out](Index seq, const std::string& reason) {
    out.status.ok = false;
    out.status.broken_seq = seq;
    out.status.reason = reason;
    return out;
  };

  std::string line;
  if (!std::getline(in, line)) {
    // A file with no records at all verifies vacuously.
    out.status.ok = true;
    return out;
  }
  nlohmann::json header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object()) return broken(0, "unreadable header record");
  if (header.value("format", "") != kFormat) return broken(0, "unknown log format");
  if (header.value("hash", "") != "sha256") return broken(0, "unknown hash algorithm");
  if (header.value("genesis", "") != to_hex(lineage_genesis())) return broken(0, "bad genesis value");

  Digest prev_chain = lineage_genesis();
  Index expected_seq = 1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return broken(expected_seq, "unreadable event record");
    LineageEvent e;
    try {
      e.seq = j.at("seq").get<Index>();
      e.ts = j.at("ts").get<std::string>();
      e.action = j.at("action").get<std::string>();
      e.payload_digest = from_hex(j.at("payload_digest").get<std::string>());
      e.prev = from_hex(j.at("prev").get<std::string>());
      e.chain = from_hex(j.at("chain").get<std::string>());
    } catch (const std::exception& ex) {
      return broken(expected_seq, std::string("malformed event: ") + ex.what());
    }
    if (e.seq != expected_seq) {
      return broken(expected_seq, "sequence number is " + std::to_string(e.seq) + ", expected " +
                                      std::to_string(expected_seq));
    }
    if (e.prev != prev_chain) return broken(expected_seq, "prev does not match previous chain value");
    Digest want = lineage_chain_hash(e.prev, e.seq, e.ts, e.action, e.payload_digest);
    if (e.chain != want) return broken(expected_seq, "chain hash mismatch");
    prev_chain = e.chain;
    ++expected_seq;
    out.events.push_back(std::move(e));
  }
  out.status.ok = true;
  return out;
}

}  // namespace

Digest lineage_genesis() {
  Digest d{};
  d.fill(0);
  return d;
}

Digest lineage_chain_hash(const Digest& prev, Index seq, const std::string& ts,
                          const std::string& action, const Digest& payload_digest) {
  std::string buf;
  buf.reserve(32 + 8 + 8 + ts.size() + 8 + action.size() + 32);
  append_digest(buf, prev);
  append_le64(buf, static_cast<std::uint64_t>(seq));
  append_le64(buf, ts.size());
  buf.append(ts);
  append_le64(buf, action.size());
  buf.append(action);
  append_digest(buf, payload_digest);
  return sha256(buf);
}

LineageLog::LineageLog(const std::string& path) : path_(path) {
  last_chain_ = lineage_genesis();
  std::error_code ec;
  bool exists = std::filesystem::exists(path, ec);
  if (exists && std::filesystem::file_size(path, ec) > 0) {
    ParsedLog parsed = parse_and_verify(path);
    if (!parsed.status.ok) {
      throw VerifyError("lineage log " + path + " broken at seq " +
                        std::to_string(parsed.status.broken_seq) + ": " + parsed.status.reason);
    }
    if (!parsed.events.empty()) {
      last_seq_ = parsed.events.back().seq;
      last_chain_ = parsed.events.back().chain;
    }
  } else {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw DataError("cannot create lineage log: " + path);
    nlohmann::ordered_json header;
    header["format"] = kFormat;
    header["hash"] = "sha256";
    header["genesis"] = to_hex(lineage_genesis());
    out << header.dump() << "\n";
    out.flush();
    if (!out) throw DataError("cannot write lineage header: " + path);
  }
}

LineageEvent LineageLog::append(const std::string& action, const std::string& payload) {
  if (!known_action(action)) throw DataError("lineage: unknown action verb '" + action + "'");
  LineageEvent e;
  e.seq = last_seq_ + 1;
  e.ts = utc_now();
  e.action = action;
  e.payload_digest = sha256(payload);
  e.prev = last_chain_;
  e.chain = lineage_chain_hash(e.prev, e.seq, e.ts, e.action, e.payload_digest);

  nlohmann::ordered_json j;
  j["seq"] = e.seq;
  j["ts"] = e.ts;
  j["action"] = e.action;
  j["payload_digest"] = to_hex(e.payload_digest);
  j["prev"] = to_hex(e.prev);
  j["chain"] = to_hex(e.chain);

  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw DataError("cannot open lineage log for append: " + path_);
  out << j.dump() << "\n";
  out.flush();
  if (!out) throw DataError("failed to append lineage event: " + path_);

  last_seq_ = e.seq;
  last_chain_ = e.chain;
  return e;
}

VerifyResult LineageLog::verify(const std::string& path) { return parse_and_verify(path).status; }

std::vector<LineageEvent> LineageLog::read_events(const std::string& path) {
  ParsedLog parsed = parse_and_verify(path);
  if (!parsed.status.ok) {
    throw VerifyError("lineage log " + path + " broken at seq " +
                      std::to_string(parsed.status.broken_seq) + ": " + parsed.status.reason);
  }
  return parsed.events;
}

}  // namespace tabsynth
