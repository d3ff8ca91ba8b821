#include "rtsl/bot.hpp"

#include <charconv>
#include <sstream>

#include "rtsl/doc.hpp"

namespace rtsl {

namespace {

// Splits "word rest" at the first space.
std::pair<std::string, std::string> head(std::string_view s) {
  s = trim(s);
  auto sp = s.find_first_of(" \t");
  if (sp == std::string_view::npos) return {std::string(s), {}};
  return {std::string(s.substr(0, sp)), std::string(trim(s.substr(sp)))};
}

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t p = s.find(from); p != std::string::npos; p = s.find(from, p + to.size())) s.replace(p, from.size(), to);
}

const DocNode* child(const DocNode& n, std::string_view key) {
  for (const auto& c : n.children) {
    if (name_key(c.tag) == key) return &c;
  }
  return nullptr;
}

}  // namespace

BotScript parse_bot_script(const std::string& text) {
  BotScript s;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto [key, rest] = head(t);
    auto fail = [&](const std::string& why) { throw BotScriptError("line " + std::to_string(n) + ": " + why); };
    if (key == "name") {
      s.name = rest;
    } else if (key == "faction") {
      s.faction = rest;
    } else if (key == "at") {
      auto [num, command] = head(rest);
      std::int64_t tick = 0;
      auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), tick);
      if (ec != std::errc() || p != num.data() + num.size() || tick < 0) fail("bad tick '" + num + "'");
      if (command.empty()) fail("missing command");
      if (!s.timed.empty() && tick < s.timed.back().tick) fail("ticks must be nondecreasing");
      s.timed.push_back({tick, command});
    } else if (key == "on-visible") {
      auto [proto, command] = head(rest);
      if (proto.empty() || command.empty()) fail("on-visible needs a prototype and a command");
      s.reactive.push_back({proto, command});
    } else if (key == "update-every") {
      int v = 0;
      auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), v);
      if (ec != std::errc() || p != rest.data() + rest.size() || v < 0) fail("bad update-every '" + rest + "'");
      s.update_every = v;
    } else {
      fail("unknown directive '" + key + "'");
    }
  }
  if (s.faction.empty()) throw BotScriptError("script declares no faction");
  if (s.name.empty()) s.name = s.faction;
  if (s.update_every == 0 && !s.reactive.empty()) s.update_every = 1;
  return s;
}

ScriptBot::ScriptBot(BotScript script, std::shared_ptr<Connection> connection)
    : script_(std::move(script)), conn_(std::move(connection)) {}

void ScriptBot::handle_update(const std::string& block) {
  DocNode root;
  try {
    root = parse_document(block);
  } catch (const std::exception& e) {
    errors_.push_back(std::string("unparseable update: ") + e.what());
    return;
  }
  const DocNode* enemy = child(root, "enemy");
  if (!enemy) return;
  for (const auto& rule : script_.reactive) {
    const DocNode* proto = child(*enemy, name_key(rule.proto));
    if (!proto) continue;
    for (const auto& uid : proto->children) {
      if (name_key(uid.tag) != "uniqueid" || uid.children.empty()) continue;
      const std::string& id = uid.children.front().tag;
      if (!seen_enemies_.insert(rule.proto + "/" + id).second) continue;
      std::string command = rule.command_template;
      replace_all(command, "$id", id);
      pending_.push_back(command);
    }
  }
}

void ScriptBot::handle(const std::string& line) {
  received_.push_back(line);
  if (update_buffer_) {
    if (line == "UPDATE-END") {
      handle_update(*update_buffer_);
      update_buffer_.reset();
    } else {
      *update_buffer_ += line + "\n";
    }
    return;
  }
  auto [verb, rest] = head(line);
  if (verb == "START") {
    started_ = true;
  } else if (verb == "GAMEOVER") {
    gameover_ = rest;
  } else if (verb == "UPDATE-BEGIN") {
    update_buffer_ = std::string();
    std::int64_t t = 0;
    if (std::from_chars(rest.data(), rest.data() + rest.size(), t).ec == std::errc()) last_update_tick_ = t;
  } else if (verb == "ERR") {
    errors_.push_back(rest);
  }
}

void ScriptBot::step(std::int64_t tick) {
  if (!declared_) {
    conn_->send("FACTION " + script_.faction);
    declared_ = true;
  }
  while (auto line = conn_->try_receive()) handle(*line);
  if (!started_ || finished() || tick < 0) return;
  while (next_timed_ < script_.timed.size() && script_.timed[next_timed_].tick <= tick) {
    conn_->send("CMD " + script_.timed[next_timed_++].command);
  }
  for (const auto& c : pending_) conn_->send("CMD " + c);
  pending_.clear();
  if (script_.update_every > 0 && (last_update_request_ < 0 || tick - last_update_request_ >= script_.update_every)) {
    conn_->send("UPDATE");
    last_update_request_ = tick;
  }
}

}  // namespace rtsl

namespace rtsl {

HeadlessOutcome run_headless(std::shared_ptr<const GameDefinition> def, const std::vector<BotScript>& scripts,
                             MatchConfig config) {
  std::vector<std::shared_ptr<Connection>> server_ends;
  std::vector<ScriptBot> bots;
  for (const auto& s : scripts) {
    auto [server, client] = make_channel();
    server_ends.push_back(server);
    bots.emplace_back(s, client);
  }
  config.realtime = false;
  config.pump = [&](std::int64_t tick) {
    for (auto& b : bots) b.step(tick);
  };
  HeadlessOutcome out;
  out.result = run_match(std::move(def), server_ends, config);
  for (auto& b : bots) {
    b.step(out.result.ticks);
    out.transcripts.push_back(b.received());
  }
  return out;
}

}  // namespace rtsl

namespace rtsl {

void run_client_bot(ScriptBot& bot, std::chrono::milliseconds poll) {
  auto next_poll = std::chrono::steady_clock::now();
  while (!bot.finished() && bot.connection().open()) {
    bot.step(bot.started() ? bot.last_update_tick().value_or(0) : -1);
    if (bot.started() && std::chrono::steady_clock::now() >= next_poll) {
      bot.connection().send("UPDATE");
      next_poll += poll;
    }
    if (auto line = bot.connection().receive(std::chrono::milliseconds(5))) bot.feed(*line);
  }
}

}  // namespace rtsl
