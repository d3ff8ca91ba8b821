#include "rtsl/replay.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "rtsl/protocol.hpp"

namespace rtsl {

namespace {

constexpr const char* kMagic = "# rtsl-replay 1";

std::int64_t to_int(const std::string& s, const std::string& what) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ReplayError("bad " + what + ": '" + s + "'");
  return v;
}

std::uint64_t to_uint(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ReplayError("bad " + what + ": '" + s + "'");
  return v;
}

double to_double(const std::string& s, const std::string& what) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ReplayError("bad " + what + ": '" + s + "'");
  return v;
}

bool to_bool(const std::string& s, const std::string& what) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ReplayError("bad " + what + ": '" + s + "'");
}

}  // namespace

std::string definition_digest(const DocNode& root) { return digest_hex(fnv1a64(serialize_document(root))); }

void write_replay(std::ostream& out, const ReplayLog& log) {
  const ReplayHeader& h = log.header;
  out << kMagic << "\n";
  out << "definition: " << h.definition_path << "\n";
  out << "definition-digest: " << h.definition_digest << "\n";
  out << "map: " << h.map << "\n";
  out << "seed: " << h.seed << "\n";
  out << "tick-hz: " << h.config.tick_hz << "\n";
  out << "gather-rate: " << format_number(h.config.gather_rate) << "\n";
  out << "deposit-range: " << format_number(h.config.deposit_range) << "\n";
  out << "hp-in-enemy-tag: " << (h.config.hp_in_enemy_tag ? "true" : "false") << "\n";
  out << "random-damage: " << (h.config.random_damage ? "true" : "false") << "\n";
  if (h.config.command_budget) out << "command-budget: " << *h.config.command_budget << "\n";
  for (const auto& p : h.players) out << "player: " << p.id << " " << p.faction << "\n";
  out << "ticks: " << h.ticks << "\n";
  out << "end-digest: " << h.end_digest << "\n";
  out << "result: " << h.result << "\n";
  out << "---\n";
  for (const auto& r : log.records) out << r.tick << "|" << r.player << "|" << r.command << "\n";
}

std::string write_replay(const ReplayLog& log) {
  std::ostringstream out;
  write_replay(out, log);
  return out.str();
}

ReplayLog read_replay(std::istream& in) {
  ReplayLog log;
  ReplayHeader& h = log.header;
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw ReplayError("missing replay header");
  std::map<std::string, bool> seen;
  bool body = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line == "---") {
      body = true;
      break;
    }
    auto colon = line.find(": ");
    if (colon == std::string::npos) throw ReplayError("bad header line: '" + line + "'");
    std::string key = line.substr(0, colon);
    std::string value = line.substr(colon + 2);
    seen[key] = true;
    if (key == "definition") {
      h.definition_path = value;
    } else if (key == "definition-digest") {
      h.definition_digest = value;
    } else if (key == "map") {
      h.map = value;
    } else if (key == "seed") {
      h.seed = to_uint(value, key);
    } else if (key == "tick-hz") {
      h.config.tick_hz = static_cast<int>(to_int(value, key));
    } else if (key == "gather-rate") {
      h.config.gather_rate = to_double(value, key);
    } else if (key == "deposit-range") {
      h.config.deposit_range = to_double(value, key);
    } else if (key == "hp-in-enemy-tag") {
      h.config.hp_in_enemy_tag = to_bool(value, key);
    } else if (key == "random-damage") {
      h.config.random_damage = to_bool(value, key);
    } else if (key == "command-budget") {
      h.config.command_budget = static_cast<int>(to_int(value, key));
    } else if (key == "player") {
      auto sp = value.find(' ');
      if (sp == std::string::npos) throw ReplayError("bad player line: '" + line + "'");
      h.players.push_back({value.substr(0, sp), value.substr(sp + 1)});
    } else if (key == "ticks") {
      h.ticks = to_int(value, key);
    } else if (key == "end-digest") {
      h.end_digest = value;
    } else if (key == "result") {
      h.result = value;
    } else {
      throw ReplayError("unknown header key '" + key + "'");
    }
  }
  if (!body) throw ReplayError("missing '---' separator");
  for (const char* k : {"definition-digest", "map", "seed", "tick-hz", "ticks", "end-digest"}) {
    if (!seen.count(k)) throw ReplayError(std::string("missing header key '") + k + "'");
  }
  if (h.players.empty()) throw ReplayError("no players in header");
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto a = line.find('|');
    auto b = a == std::string::npos ? a : line.find('|', a + 1);
    if (b == std::string::npos) throw ReplayError("bad record: '" + line + "'");
    log.records.push_back({to_int(line.substr(0, a), "tick"), line.substr(a + 1, b - a - 1), line.substr(b + 1)});
  }
  return log;
}

ReplayLog read_replay_text(const std::string& text) {
  std::istringstream in(text);
  return read_replay(in);
}

GameState replay_state(std::shared_ptr<const GameDefinition> def, const ReplayLog& log) {
  const ReplayHeader& h = log.header;
  GameState g = new_game(std::move(def), h.players, h.seed, h.config, h.map);
  std::size_t next = 0;
  auto feed = [&] {
    while (next < log.records.size() && log.records[next].tick == g.tick) {
      const LogRecord& r = log.records[next++];
      if (!g.players.count(r.player)) throw ReplayError("record for unknown player " + r.player);
      Command c;
      try {
        c = decode_command(r.command);
      } catch (const CommandError& e) {
        throw ReplayError("undecodable record at tick " + std::to_string(r.tick) + ": " + e.what());
      }
      submit(g, r.player, c);
    }
    if (next < log.records.size() && log.records[next].tick < g.tick) {
      throw ReplayError("record out of order at tick " + std::to_string(log.records[next].tick));
    }
  };
  while (g.tick < h.ticks) {
    feed();
    tick(g);
  }
  // A forfeit can end the match after intake but before the tick ran.
  feed();
  if (next < log.records.size()) {
    throw ReplayError("record beyond the last tick: " + std::to_string(log.records[next].tick));
  }
  return g;
}

}  // namespace rtsl
