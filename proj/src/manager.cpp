#include "rtsl/manager.hpp"

#include <thread>

#include "rtsl/protocol.hpp"

namespace rtsl {

namespace {

using Clock = std::chrono::steady_clock;
using State = Session::State;

class Match {
 public:
  Match(std::shared_ptr<const GameDefinition> def, std::vector<std::shared_ptr<Connection>> endpoints,
        const MatchConfig& config)
      : def_(std::move(def)), config_(config) {
    for (std::size_t i = 0; i < endpoints.size(); ++i) {
      sessions_.push_back(Session{"P" + std::to_string(i + 1), {}, State::Connected, std::move(endpoints[i])});
    }
  }

  MatchResult run() {
    if (!handshake()) return finish();
    start();
    play();
    return finish();
  }

 private:
  void forfeit(Session& s, const std::string& why) {
    s.connection->send("ERR " + why);
    s.state = State::Finished;
    forfeited_ = true;
  }

  // True when every session declared a faction.
  bool handshake() {
    const auto deadline = Clock::now() + config_.handshake_timeout;
    while (true) {
      if (config_.pump) config_.pump(-1);
      bool busy = false;
      for (auto& s : sessions_) {
        while (s.state == State::Connected || s.state == State::Ready) {
          auto line = s.connection->try_receive();
          if (!line) break;
          busy = true;
          handshake_line(s, *line);
        }
        if (s.state == State::Connected && !s.connection->open()) forfeit(s, "ProtocolViolation disconnected");
      }
      if (forfeited_) {
        result_.reason = "forfeit";
        return false;
      }
      if (std::all_of(sessions_.begin(), sessions_.end(), [](const Session& s) { return s.state == State::Ready; })) {
        return true;
      }
      if (Clock::now() > deadline) {
        for (auto& s : sessions_) {
          if (s.state != State::Ready) forfeit(s, "HandshakeTimeout");
        }
        result_.reason = "HandshakeTimeout";
        return false;
      }
      if (!busy) std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
  }

  void handshake_line(Session& s, const std::string& line) {
    ClientMessage m;
    try {
      m = parse_client_line(line);
    } catch (const BadMessage& e) {
      s.connection->send(std::string("ERR BadMessage ") + e.what());
      return;
    }
    if (m.kind != ClientMessage::Kind::Faction || s.state != State::Connected) {
      forfeit(s, "ProtocolViolation " + line);
      return;
    }
    const FactionDef* f = def_->faction(m.payload);
    if (!f) {
      s.connection->send("ERR UnknownFaction " + m.payload);
      return;
    }
    s.faction = f->name;
    s.state = State::Ready;
    s.connection->send("OK faction " + f->name);
  }

  void start() {
    std::vector<PlayerSpec> players;
    for (const auto& s : sessions_) players.push_back({s.player, s.faction});
    try {
      state_ = new_game(def_, players, config_.seed, config_.kernel, config_.map_name);
    } catch (const KernelError& e) {
      for (auto& s : sessions_) s.connection->send(std::string("ERR ") + e.what());
      throw;
    }
    for (auto& s : sessions_) {
      s.connection->send("MAP " + state_->map_name);
      for (const auto& o : sessions_) {
        if (o.player != s.player) s.connection->send("OPPONENT " + o.faction);
      }
    }
    for (auto& s : sessions_) {
      s.state = State::Playing;
      s.connection->send("START");
    }
  }

  void play_line(Session& s, const std::string& line) {
    GameState& g = *state_;
    ClientMessage m;
    try {
      m = parse_client_line(line);
    } catch (const BadMessage& e) {
      s.connection->send(std::string("ERR BadMessage ") + e.what());
      return;
    }
    switch (m.kind) {
      case ClientMessage::Kind::Faction: forfeit(s, "ProtocolViolation " + line); return;
      case ClientMessage::Kind::Update: s.connection->send(encode_update(visible_update(g, s.player))); return;
      case ClientMessage::Kind::Cmd: break;
    }
    Command c;
    try {
      c = decode_command(m.payload);
    } catch (const CommandError& e) {
      s.connection->send(std::string("ERR ") + e.what());
      return;
    }
    if (std::holds_alternative<cmd::Update>(c)) {
      s.connection->send(encode_update(visible_update(g, s.player)));
      return;
    }
    CommandReceipt r = submit(g, s.player, c);
    s.connection->send((r.accepted ? "OK " : "ERR ") + r.to_string());
  }

  // Players that owned something and now own nothing.
  std::vector<std::string> eliminated() const {
    std::vector<std::string> out;
    for (const auto& [id, p] : state_->players) {
      if (!p.ever_owned) continue;
      bool alive = std::any_of(state_->entities.begin(), state_->entities.end(),
                               [&](const auto& kv) { return kv.second.owner == id; });
      if (!alive) out.push_back(id);
    }
    return out;
  }

  void play() {
    auto next = Clock::now();
    const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / config_.kernel.tick_hz));
    while (true) {
      if (config_.realtime) {
        std::this_thread::sleep_until(next);
        next += period;
      }
      if (config_.pump) config_.pump(state_->tick);
      for (auto& s : sessions_) {
        while (s.state == State::Playing) {
          auto line = s.connection->try_receive();
          if (!line) break;
          play_line(s, *line);
        }
        if (s.state == State::Playing && !s.connection->open()) forfeit(s, "ProtocolViolation disconnected");
      }
      if (forfeited_) {
        result_.reason = "forfeit";
        return;
      }
      tick(*state_);
      auto out = eliminated();
      if (!out.empty()) {
        result_.reason = "elimination";
        if (out.size() < sessions_.size()) {
          for (const auto& s : sessions_) {
            if (std::find(out.begin(), out.end(), s.player) == out.end() && out.size() + 1 == sessions_.size()) {
              result_.winner = s.player;
            }
          }
          if (!result_.winner) continue;  // several players left
        }
        return;
      }
      if (state_->tick >= config_.time_limit_ticks) {
        result_.reason = "time limit";
        return;
      }
    }
  }

  MatchResult finish() {
    if (result_.reason == "forfeit" || result_.reason == "HandshakeTimeout") {
      std::vector<const Session*> left;
      for (const auto& s : sessions_) {
        if (s.state != State::Finished) left.push_back(&s);
      }
      if (left.size() == 1) result_.winner = left.front()->player;
    }
    for (auto& s : sessions_) {
      result_.players.push_back({s.player, s.faction});
      if (s.state != State::Finished) s.connection->send(result_.gameover_line());
      s.state = State::Finished;
    }
    if (state_) {
      result_.ticks = state_->tick;
      result_.digest = state_digest(*state_);
      result_.map_name = state_->map_name;
      result_.log = state_->command_log;
    }
    return result_;
  }

  std::shared_ptr<const GameDefinition> def_;
  MatchConfig config_;
  std::vector<Session> sessions_;
  std::optional<GameState> state_;
  MatchResult result_;
  bool forfeited_ = false;
};

}  // namespace

const char* to_string(Session::State s) {
  switch (s) {
    case State::Connected: return "connected";
    case State::Ready: return "ready";
    case State::Playing: return "playing";
    case State::Finished: return "finished";
  }
  return "?";
}

std::string MatchResult::gameover_line() const { return "GAMEOVER " + (winner ? *winner : std::string("draw")); }

MatchResult run_match(std::shared_ptr<const GameDefinition> def, std::vector<std::shared_ptr<Connection>> endpoints,
                      const MatchConfig& config) {
  if (!def) throw KernelError("no definition");
  if (config.kernel.tick_hz < 1) throw KernelError("tick_hz must be >= 1");
  return Match(std::move(def), std::move(endpoints), config).run();
}

}  // namespace rtsl
