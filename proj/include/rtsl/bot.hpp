// Declarative scripted bots used by headless matches and tests.

#ifndef RTSL_BOT_HPP
#define RTSL_BOT_HPP

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtsl/manager.hpp"
#include "rtsl/transport.hpp"

namespace rtsl {

class BotScriptError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BotScript {
  struct Timed {
    std::int64_t tick = 0;
    std::string command;
  };
  // Fires once per newly seen enemy of the prototype; "$id" is replaced by
  // that enemy's UniqueID.
  struct Reactive {
    std::string proto;
    std::string command_template;
  };
  std::string name;
  std::string faction;
  std::vector<Timed> timed;  // nondecreasing ticks
  std::vector<Reactive> reactive;
  int update_every = 0;  // 0: only when reactive rules exist, then every tick
};

// Line format:
//   name <text>
//   faction <name>
//   at <tick> <command>
//   on-visible <prototype> <command template>
//   update-every <n>
// Blank lines and '#' comments are skipped.
BotScript parse_bot_script(const std::string& text);

class ScriptBot {
 public:
  ScriptBot(BotScript script, std::shared_ptr<Connection> connection);

  // One intake and send pass for the given server tick (-1 before START).
  void step(std::int64_t tick);

  bool started() const { return started_; }
  bool finished() const { return gameover_.has_value(); }
  const std::optional<std::string>& gameover() const { return gameover_; }
  const std::vector<std::string>& received() const { return received_; }
  const std::vector<std::string>& errors() const { return errors_; }
  const BotScript& script() const { return script_; }
  // Tick of the most recent UPDATE block, if any.
  std::optional<std::int64_t> last_update_tick() const { return last_update_tick_; }
  Connection& connection() { return *conn_; }
  // Handles one inbound line read outside step().
  void feed(const std::string& line) { handle(line); }

 private:
  void handle(const std::string& line);
  void handle_update(const std::string& block);

  BotScript script_;
  std::shared_ptr<Connection> conn_;
  bool declared_ = false;
  bool started_ = false;
  std::optional<std::string> gameover_;
  std::size_t next_timed_ = 0;
  std::int64_t last_update_request_ = -1;
  std::optional<std::string> update_buffer_;
  std::optional<std::int64_t> last_update_tick_;
  std::set<std::string> seen_enemies_;
  std::vector<std::string> pending_;
  std::vector<std::string> received_;
  std::vector<std::string> errors_;
};

struct HeadlessOutcome {
  MatchResult result;
  // Lines each bot received, in order.
  std::vector<std::vector<std::string>> transcripts;
};

// Runs scripted bots against each other over in-process channels. The
// config's pump is replaced.
HeadlessOutcome run_headless(std::shared_ptr<const GameDefinition> def, const std::vector<BotScript>& scripts,
                             MatchConfig config);

// Drives a bot over a socket until GAMEOVER or disconnect. The bot's tick is
// the tick of the latest UPDATE block; UPDATE is polled every `poll`.
void run_client_bot(ScriptBot& bot, std::chrono::milliseconds poll = std::chrono::milliseconds(20));

}  // namespace rtsl

#endif  // RTSL_BOT_HPP
