#pragma once

#include <string>
#include <vector>

#include "tabsynth/hash.hpp"
#include "tabsynth/types.hpp"

namespace tabsynth {

// One pipeline action in the tamper-evident log. The chain value commits to
// the previous chain, the sequence number, the timestamp, the action verb
// and the payload digest, so editing any stored field breaks verification
// at that record.
struct LineageEvent {
  Index seq = 0;
  std::string ts;      // UTC, ISO-8601
  std::string action;  // one of kLineageActions
  Digest payload_digest{};
  Digest prev{};
  Digest chain{};
};

inline constexpr const char* kLineageActions[] = {"ingest", "skew", "train", "synthesize",
                                                  "evaluate"};

// All-zero digest that seeds the chain.
Digest lineage_genesis();

Digest lineage_chain_hash(const Digest& prev, Index seq, const std::string& ts,
                          const std::string& action, const Digest& payload_digest);

struct VerifyResult {
  bool ok = false;
  Index broken_seq = -1;  // 0 = header record, otherwise the event's seq
  std::string reason;
};

// Append-only JSON-lines file. The first line is a header naming the format,
// the hash algorithm, and the genesis value; every following line is one
// event. Opening an existing file verifies it and resumes the chain.
class LineageLog {
 public:
  explicit LineageLog(const std::string& path);

  // Hashes the payload (canonical metadata for the action), appends the
  // event, and flushes before returning. Unknown verbs are rejected.
  LineageEvent append(const std::string& action, const std::string& payload);

  Index last_seq() const { return last_seq_; }
  const std::string& path() const { return path_; }

  static VerifyResult verify(const std::string& path);
  static std::vector<LineageEvent> read_events(const std::string& path);

 private:
  std::string path_;
  Index last_seq_ = 0;
  Digest last_chain_{};
};

}  // namespace tabsynth
