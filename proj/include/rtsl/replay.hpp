// Replay logs: a header plus the kernel command log, re-executable offline.

#ifndef RTSL_REPLAY_HPP
#define RTSL_REPLAY_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtsl/kernel.hpp"

namespace rtsl {

class ReplayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReplayHeader {
  int version = 1;
  std::string definition_path;
  std::string definition_digest;  // 16 hex digits
  std::string map;
  std::uint64_t seed = 0;
  KernelConfig config;
  std::vector<PlayerSpec> players;
  std::int64_t ticks = 0;
  std::string end_digest;  // 16 hex digits
  std::string result;      // "P1", "P2" or "draw"
};

struct ReplayLog {
  ReplayHeader header;
  std::vector<LogRecord> records;
};

// Hash of the canonical serialization of a parsed definition document.
std::string definition_digest(const DocNode& root);

void write_replay(std::ostream& out, const ReplayLog& log);
std::string write_replay(const ReplayLog& log);
// Throws ReplayError on a malformed header or record.
ReplayLog read_replay(std::istream& in);
ReplayLog read_replay_text(const std::string& text);

// Rebuilds the match from the log. Records must be in tick order.
GameState replay_state(std::shared_ptr<const GameDefinition> def, const ReplayLog& log);

}  // namespace rtsl

#endif  // RTSL_REPLAY_HPP
