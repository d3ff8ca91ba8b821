// Match manager: handshake, command intake, clock and updates.

#ifndef RTSL_MANAGER_HPP
#define RTSL_MANAGER_HPP

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rtsl/kernel.hpp"
#include "rtsl/transport.hpp"

namespace rtsl {

struct Session {
  enum class State { Connected, Ready, Playing, Finished };
  std::string player;
  std::string faction;
  State state = State::Connected;
  std::shared_ptr<Connection> connection;
};

const char* to_string(Session::State s);

struct MatchConfig {
  std::string map_name;  // empty selects the first map
  KernelConfig kernel;
  std::uint64_t seed = 0;
  std::int64_t time_limit_ticks = 6000;
  // Pace ticks at tick_hz wall-clock rate; otherwise run flat out.
  bool realtime = false;
  std::chrono::milliseconds handshake_timeout{5000};
  // Called before each intake pass; the argument is the kernel tick, or -1
  // during the handshake. In-process bots are stepped from here.
  std::function<void(std::int64_t)> pump;
};

struct MatchResult {
  std::optional<std::string> winner;  // player id; empty on a draw
  std::string reason;                 // elimination, time limit, forfeit, HandshakeTimeout
  std::int64_t ticks = 0;
  std::uint64_t digest = 0;
  std::string map_name;
  std::vector<PlayerSpec> players;
  std::vector<LogRecord> log;

  // "GAMEOVER P1" or "GAMEOVER draw".
  std::string gameover_line() const;
};

// Player ids are P1, P2, ... in endpoint order. Throws KernelError when the
// definition cannot start a game (e.g. unknown map).
MatchResult run_match(std::shared_ptr<const GameDefinition> def, std::vector<std::shared_ptr<Connection>> endpoints,
                      const MatchConfig& config);

}  // namespace rtsl

#endif  // RTSL_MANAGER_HPP
