// rtsl: validate definitions, run headless matches, verify replays, serve matches.
//
// Exit codes: 0 success, 1 domain failure, 2 environment or I/O failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <thread>

#include "rtsl/bot.hpp"
#include "rtsl/definition.hpp"
#include "rtsl/doc.hpp"
#include "rtsl/fixtures.hpp"
#include "rtsl/manager.hpp"
#include "rtsl/replay.hpp"

namespace fs = std::filesystem;
using namespace rtsl;

namespace {

constexpr int kOk = 0;
constexpr int kDomain = 1;
constexpr int kEnvironment = 2;

// Failure carrying its exit code.
struct Exit {
  int code;
  std::string message;
};

std::string read_or_exit(const std::string& path) {
  try {
    return read_text_file(path);
  } catch (const std::exception& e) {
    throw Exit{kEnvironment, e.what()};
  }
}

struct LoadedDefinition {
  DocNode root;
  std::shared_ptr<const GameDefinition> def;
};

LoadedDefinition load_definition(const std::string& path) {
  std::string text = read_or_exit(path);
  LoadedDefinition out;
  try {
    out.root = parse_document(text);
    out.def = std::make_shared<const GameDefinition>(compile_definition(out.root));
  } catch (const DocError& e) {
    throw Exit{kDomain, path + ": " + e.what()};
  } catch (const CompileError& e) {
    std::string msg = path + ": " + e.what();
    for (const auto& d : e.diagnostics()) msg += "\n  " + format_diagnostic(d);
    throw Exit{kDomain, msg};
  }
  return out;
}

BotScript load_bot(const std::string& path) {
  std::string text = read_or_exit(path);
  try {
    return parse_bot_script(text);
  } catch (const BotScriptError& e) {
    throw Exit{kDomain, path + ": " + e.what()};
  }
}

struct KernelFlags {
  int tick_hz = 10;
  double gather_rate = 10.0;
  bool hp_in_enemy_tag = true;
  bool random_damage = false;
  int command_budget = 0;

  void add_to(CLI::App* app) {
    app->add_option("--tick-hz", tick_hz, "Simulation ticks per second")->envname("RTSL_TICK_HZ")->check(CLI::PositiveNumber);
    app->add_option("--gather-rate", gather_rate, "Resource units gathered per second")
        ->envname("RTSL_GATHER_RATE")
        ->check(CLI::PositiveNumber);
    app->add_option("--hp-in-enemy-tag", hp_in_enemy_tag, "Report enemy health in updates (true/false)")
        ->envname("RTSL_HP_IN_ENEMY_TAG");
    app->add_flag("--random-damage", random_damage, "Roll damage in [min,max] instead of max");
    app->add_option("--command-budget", command_budget, "Commands per player per tick, 0 for unlimited")
        ->check(CLI::NonNegativeNumber);
  }
  KernelConfig config() const {
    KernelConfig k;
    k.tick_hz = tick_hz;
    k.gather_rate = gather_rate;
    k.hp_in_enemy_tag = hp_in_enemy_tag;
    k.random_damage = random_damage;
    if (command_budget > 0) k.command_budget = command_budget;
    return k;
  }
};

void print_result(const MatchResult& r) {
  std::cout << r.gameover_line() << "\n";
  std::cout << "reason: " << r.reason << "\n";
  std::cout << "map: " << r.map_name << "\n";
  std::cout << "ticks: " << r.ticks << "\n";
  std::cout << "commands: " << r.log.size() << "\n";
  std::cout << "digest: " << digest_hex(r.digest) << "\n";
}

void save_replay(const std::string& out_path, const std::string& def_path, const LoadedDefinition& def,
                 const MatchConfig& config, const MatchResult& r) {
  ReplayLog log;
  log.header.definition_path = def_path;
  log.header.definition_digest = definition_digest(def.root);
  log.header.map = r.map_name;
  log.header.seed = config.seed;
  log.header.config = config.kernel;
  log.header.players = r.players;
  log.header.ticks = r.ticks;
  log.header.end_digest = digest_hex(r.digest);
  log.header.result = r.winner.value_or("draw");
  log.records = r.log;
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Exit{kEnvironment, "cannot write " + out_path};
  write_replay(out, log);
  if (!out) throw Exit{kEnvironment, "write failed for " + out_path};
}

int cmd_validate(const std::string& path) {
  std::string text = read_or_exit(path);
  DocNode root;
  try {
    root = parse_document(text);
  } catch (const DocError& e) {
    std::cout << path << ": " << e.what() << "\n";
    return kDomain;
  }
  GameDefinition def;
  CompileOptions opts;
  opts.check_references = false;
  try {
    def = compile_definition(root, opts);
  } catch (const CompileError& e) {
    std::cout << path << ": " << e.what() << "\n";
    return kDomain;
  }
  auto diags = validate_references(def);
  for (const auto& d : diags) std::cout << format_diagnostic(d) << "\n";
  if (!diags.empty()) return kDomain;
  std::cout << path << ": ok (" << def.factions.size() << " factions, " << def.maps.size() << " maps)\n";
  return kOk;
}

struct MatchArgs {
  std::string def;
  std::string map;
  std::string bot1;
  std::string bot2;
  std::uint64_t seed = 0;
  std::int64_t max_ticks = 6000;
  std::string replay;
  KernelFlags kernel;
};

int cmd_match(const MatchArgs& a) {
  LoadedDefinition def = load_definition(a.def);
  std::vector<BotScript> bots{load_bot(a.bot1), load_bot(a.bot2)};
  MatchConfig config;
  config.map_name = a.map;
  config.kernel = a.kernel.config();
  config.seed = a.seed;
  config.time_limit_ticks = a.max_ticks;
  HeadlessOutcome out;
  try {
    out = run_headless(def.def, bots, config);
  } catch (const KernelError& e) {
    throw Exit{kDomain, e.what()};
  }
  print_result(out.result);
  if (!a.replay.empty()) save_replay(a.replay, a.def, def, config, out.result);
  return kOk;
}

int cmd_replay(const std::string& path, const std::string& def_override) {
  std::string text = read_or_exit(path);
  ReplayLog log;
  try {
    log = read_replay_text(text);
  } catch (const ReplayError& e) {
    std::cout << "BadReplay: " << e.what() << "\n";
    return kDomain;
  }
  std::string def_path = def_override.empty() ? log.header.definition_path : def_override;
  if (def_override.empty() && fs::path(def_path).is_relative() && !fs::exists(def_path)) {
    fs::path beside = fs::path(path).parent_path() / def_path;
    if (fs::exists(beside)) def_path = beside.string();
  }
  LoadedDefinition def = load_definition(def_path);
  std::string digest = definition_digest(def.root);
  if (digest != log.header.definition_digest) {
    std::cout << "DefinitionMismatch: replay expects " << log.header.definition_digest << ", " << def_path << " is "
              << digest << "\n";
    return kDomain;
  }
  GameState g;
  try {
    g = replay_state(def.def, log);
  } catch (const ReplayError& e) {
    std::cout << "BadReplay: " << e.what() << "\n";
    return kDomain;
  } catch (const KernelError& e) {
    std::cout << "BadReplay: " << e.what() << "\n";
    return kDomain;
  }
  std::string got = digest_hex(state_digest(g));
  if (got != log.header.end_digest) {
    std::cout << "DigestMismatch: expected " << log.header.end_digest << ", got " << got << "\n";
    return kDomain;
  }
  std::cout << "ok " << got << " after " << g.tick << " ticks\n";
  return kOk;
}

struct ServeArgs {
  std::string def;
  std::string map;
  int port = 7777;
  std::string host = "127.0.0.1";
  std::uint64_t seed = 0;
  std::int64_t max_ticks = 6000;
  int handshake_ms = 10000;
  bool headless = false;
  std::string replay;
  KernelFlags kernel;
};

int cmd_serve(const ServeArgs& a) {
  LoadedDefinition def = load_definition(a.def);
  std::unique_ptr<TcpListener> listener;
  try {
    listener = std::make_unique<TcpListener>(static_cast<std::uint16_t>(a.port), a.host);
  } catch (const TransportError& e) {
    throw Exit{kEnvironment, e.what()};
  }
  std::cout << "listening on " << a.host << ":" << listener->port() << std::endl;
  std::vector<std::shared_ptr<Connection>> sessions;
  while (sessions.size() < 2) {
    if (auto c = listener->accept(std::chrono::milliseconds(1000))) {
      sessions.push_back(c);
      std::cout << "session P" << sessions.size() << " connected" << std::endl;
    }
  }
  MatchConfig config;
  config.map_name = a.map;
  config.kernel = a.kernel.config();
  config.seed = a.seed;
  config.time_limit_ticks = a.max_ticks;
  config.realtime = !a.headless;
  config.handshake_timeout = std::chrono::milliseconds(a.handshake_ms);
  MatchResult r;
  try {
    r = run_match(def.def, sessions, config);
  } catch (const KernelError& e) {
    throw Exit{kDomain, e.what()};
  }
  // Let the GAMEOVER lines drain before the sockets close.
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  print_result(r);
  if (!a.replay.empty() && !r.map_name.empty()) save_replay(a.replay, a.def, def, config, r);
  return kOk;
}

int cmd_bot(const std::string& host, int port, const std::string& script) {
  BotScript s = load_bot(script);
  std::shared_ptr<Connection> conn;
  try {
    conn = tcp_connect(host, static_cast<std::uint16_t>(port));
  } catch (const TransportError& e) {
    throw Exit{kEnvironment, e.what()};
  }
  ScriptBot bot(s, conn);
  run_client_bot(bot);
  std::cout << "GAMEOVER " << bot.gameover().value_or("?") << "\n";
  return bot.finished() ? kOk : kDomain;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RTSL game definitions, matches and replays"};
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Parse, compile and cross-check a definition");
  validate->add_option("file", validate_path, "Definition file")->required();

  MatchArgs m;
  auto* match = app.add_subcommand("match", "Run a headless match between two scripted bots");
  match->add_option("--def", m.def, "Definition file")->required();
  match->add_option("--map", m.map, "Map name (default: first map)");
  match->add_option("--bot1", m.bot1, "Bot script for P1")->required();
  match->add_option("--bot2", m.bot2, "Bot script for P2")->required();
  match->add_option("--seed", m.seed, "RNG seed");
  match->add_option("--max-ticks", m.max_ticks, "Draw after this many ticks")->check(CLI::PositiveNumber);
  match->add_option("--replay", m.replay, "Write the replay log here");
  m.kernel.add_to(match);

  std::string replay_path;
  std::string replay_def;
  auto* replay = app.add_subcommand("replay", "Re-execute a replay and compare digests");
  replay->add_option("file", replay_path, "Replay file")->required();
  replay->add_option("--def", replay_def, "Definition file (default: the one named in the header)");

  ServeArgs s;
  auto* serve = app.add_subcommand("serve", "Serve one match over TCP");
  serve->add_option("--def", s.def, "Definition file")->required();
  serve->add_option("--map", s.map, "Map name (default: first map)");
  serve->add_option("--port", s.port, "TCP port, 0 for any")->check(CLI::Range(0, 65535));
  serve->add_option("--host", s.host, "Bind address");
  serve->add_option("--seed", s.seed, "RNG seed");
  serve->add_option("--max-ticks", s.max_ticks, "Draw after this many ticks")->check(CLI::PositiveNumber);
  serve->add_option("--handshake-timeout-ms", s.handshake_ms, "Time allowed for FACTION declarations");
  serve->add_flag("--headless", s.headless, "Tick as fast as possible instead of at wall-clock rate");
  serve->add_option("--replay", s.replay, "Write the replay log here");
  s.kernel.add_to(serve);

  std::string bot_host = "127.0.0.1";
  int bot_port = 7777;
  std::string bot_script;
  auto* bot = app.add_subcommand("bot", "Connect a scripted bot to a server");
  bot->add_option("--host", bot_host, "Server address");
  bot->add_option("--port", bot_port, "Server port")->check(CLI::Range(1, 65535));
  bot->add_option("--script", bot_script, "Bot script")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kEnvironment;
  }

  try {
    if (*validate) return cmd_validate(validate_path);
    if (*match) return cmd_match(m);
    if (*replay) return cmd_replay(replay_path, replay_def);
    if (*serve) return cmd_serve(s);
    if (*bot) return cmd_bot(bot_host, bot_port, bot_script);
  } catch (const Exit& e) {
    std::cerr << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kEnvironment;
  }
  return kOk;
}
