// Runs the ten acceptance criteria and prints one PASS/FAIL line for each.

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "gen.hpp"
#include "rtsl/bot.hpp"
#include "rtsl/command.hpp"
#include "rtsl/manager.hpp"
#include "rtsl/protocol.hpp"
#include "rtsl/replay.hpp"
#include "support.hpp"

using namespace rtsl;
namespace fs = std::filesystem;

namespace {

// Collects failed expectations for one criterion.
struct Probe {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  template <class A, class B>
  void equal(const A& got, const B& want, const std::string& what) {
    if (!(got == want)) {
      std::ostringstream s;
      s << what << ": got " << got << ", want " << want;
      failures.push_back(s.str());
    }
  }
  void near(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      std::ostringstream s;
      s.precision(17);
      s << what << ": got " << got << ", want " << want;
      failures.push_back(s.str());
    }
  }
};

std::string fixture_path(const std::string& rel) { return fixture_dir() + "/" + rel; }

GameDefinition compile_clean(Probe& p, const std::string& id) {
  GameDefinition d = compile_definition(parse_document(load_fixture(id).framed));
  p.expect(validate_references(d).empty(), id + " has diagnostics");
  return d;
}

const PrototypeDef& proto_of(const GameDefinition& d, const std::string& faction, const std::string& name) {
  const FactionDef* f = d.faction(faction);
  if (!f || !f->prototype(name)) throw std::runtime_error("missing " + faction + "/" + name);
  return *f->prototype(name);
}

Command act(const std::string& name, std::vector<std::string> allies, std::vector<std::string> enemies = {}) {
  return cmd::GameAction{name, std::move(allies), std::move(enemies), {}, {}};
}

// 1
void listing_fixtures(Probe& p) {
  GameDefinition res = compile_clean(p, "factions-resources");
  p.equal(res.starting_resources.at("Wood"), 100.0, "bank Wood");
  p.equal(res.starting_resources.at("Gold"), 100.0, "bank Gold");
  p.equal(res.starting_resources.at("Oil"), 10.0, "bank Oil");
  p.equal(res.starting_resources.at("Food"), 5.0, "bank Food");

  GameDefinition hall_def = compile_clean(p, "town-hall");
  const PrototypeDef& hall = proto_of(hall_def, "Human", "Town Hall");
  p.equal(hall.max_health, 1200.0, "Town Hall HP");
  p.equal(hall.build_time_s, 30.0, "Town Hall build");
  p.equal(hall.vision, 1.0, "Town Hall vision");
  p.expect(hall.require.resources == std::map<std::string, double>{{"Wood", 800}, {"Gold", 1200}}, "Town Hall cost");

  GameDefinition archer_def = compile_clean(p, "elvin-archer");
  const PrototypeDef& archer = proto_of(archer_def, "Human", "Elvin Archer");
  p.equal(archer.max_health, 40.0, "Archer HP");
  p.equal(archer.build_time_s, 15.0, "Archer build");
  p.equal(archer.vision, 5.0, "Archer vision");
  p.equal(archer.speed, 3.0, "Archer speed");
  p.expect(archer.attacks.size() == 1, "Archer has one attack");
  if (!archer.attacks.empty()) {
    p.expect(archer.attacks[0].damage.universal == DamageRange{3, 9}, "Archer damage 3-9");
    p.equal(archer.attacks[0].recharge_s, 2.0, "Archer recharge");
  }
  p.expect(archer.require.resources == std::map<std::string, double>{{"Gold", 500}, {"Wood", 50}, {"Food", 1}},
           "Archer cost");

  GameDefinition hills_def = compile_clean(p, "hills-map");
  const MapDef* hills = hills_def.map("Hills");
  p.expect(hills != nullptr, "Hills map present");
  if (hills) {
    const CellDef& wood = hills->cells.at(Cell{0, 1});
    p.expect(wood.layers.size() == 3 && wood.layers[0].condition && wood.layers[0].condition->amount == 300 &&
                 wood.layers[0].condition->replacement_label == "Ground" && wood.layers[1].label == "Low",
             "Hills (0,1) conditional wood layer");
    p.equal(hills->cells.at(Cell{0, 0}).deposits.at("Gold"), 1000.0, "Hills (0,0) gold");
  }

  GameDefinition lock_def = compile_clean(p, "lockdown");
  const AbilityDef* lock = proto_of(lock_def, "Orc", "Ghost").ability("Lockdown");
  p.expect(lock && lock->time_limit_s == 12, "Lockdown lasts 12 s");

  // The assembled game carries the same values.
  auto game = test::paper_game();
  p.expect(validate_references(*game).empty(), "assembled game has diagnostics");
  p.equal(proto_of(*game, "Human", "Town Hall").max_health, 1200.0, "game Town Hall HP");
  p.equal(proto_of(*game, "Human", "Elvin Archer").max_health, 40.0, "game Archer HP");
}

// 2
void round_trip(Probe& p) {
  int files = 0;
  for (const auto& f : load_all_fixtures()) {
    if (f.expect.parse != "ok") continue;
    ++files;
    DocNode a = parse_document(f.source);
    DocNode b = parse_document(serialize_document(a));
    p.expect(a.structurally_equal(b), "corpus file " + f.id);
  }
  p.expect(files > 0, "corpus is empty");
  test::DocGen gen(1);
  for (int i = 0; i < 1000; ++i) {
    DocNode tree = gen.document();
    DocNode parsed = parse_document(gen.render(tree));
    DocNode again = parse_document(serialize_document(parsed));
    p.expect(parsed.structurally_equal(tree) && again.structurally_equal(parsed),
             "random document " + std::to_string(i));
  }
}

// 3
void damage_table(Probe& p) {
  auto game = test::paper_game();
  const PrototypeDef& archer = proto_of(*game, "Human", "Elvin Archer");
  const AttackDef& arrow = archer.attacks.at(0);

  // Rule table by hand: max damage, terrain percent, then armor, floor at zero.
  const double max = arrow.damage.universal.max;
  const double shield = 4;
  p.near(resolve_damage(arrow, {"Ground"}, archer, {"Ground"}, {}), std::max(0.0, max - shield), 1e-9, "9-4");

  GameDefinition armor_def = compile_definition(parse_document(load_fixture("keyword-armor").framed));
  const PrototypeDef& probe = proto_of(armor_def, "Human", "Probe");
  p.near(resolve_damage(arrow, {"Ground"}, probe, {"Ground"}, {}), max * (100 - 3) / 100, 1e-9, "9*0.97");

  PrototypeDef bare;
  bare.name = "Dummy";
  bare.max_health = 100;
  p.near(resolve_damage(arrow, {"Ground", "Low"}, bare, {"Ground", "High"}, game->terrain_rules),
         max * (100 - 25) / 100, 1e-9, "9*0.75");

  for (double armor : {9.0, 9.5, 50.0}) {
    PrototypeDef tough = bare;
    tough.armor.universal = Mitigation::flat(armor);
    p.near(resolve_damage(arrow, {}, tough, {}, {}), 0, 1e-9, "clamp at armor " + std::to_string(armor));
  }
  p.near(9.0 - 4, 5, 1e-9, "oracle 9-4");
  p.near(9.0 * 0.97, 8.73, 1e-9, "oracle 9*0.97");
  p.near(9.0 * 0.75, 6.75, 1e-9, "oracle 9*0.75");
}

// 4
void terrain_transition(Probe& p) {
  BotScript bot = parse_bot_script(read_text_file(fixture_path("bots/gather.bot")));
  GameState g = new_game(test::paper_game(), {{"P1", bot.faction}, {"P2", "Human"}}, 7, KernelConfig{}, "Hills Arena");
  const Cell cell{0, 1};
  const std::int64_t per_tick_milli = std::llround(g.config.gather_rate / g.config.tick_hz * 1000);
  const std::int64_t needed = 300 * 1000 / per_tick_milli;
  std::int64_t prev = g.cell(cell).deposits.at("Wood").milli();
  std::int64_t extractions = 0;
  std::optional<std::int64_t> predicted, flipped;
  std::size_t next = 0;
  while (g.tick < 20000 && !flipped) {
    while (next < bot.timed.size() && bot.timed[next].tick == g.tick) {
      submit(g, "P1", decode_command(bot.timed[next++].command));
    }
    tick(g);
    auto it = g.cell(cell).deposits.find("Wood");
    std::int64_t now = it == g.cell(cell).deposits.end() ? 0 : it->second.milli();
    p.expect(now >= 0, "deposit negative at tick " + std::to_string(g.tick));
    if (now < prev) {
      p.expect(prev - now == per_tick_milli, "extraction step size at tick " + std::to_string(g.tick));
      if (++extractions == needed) predicted = g.tick;
    }
    prev = now;
    const auto& base = g.cell(cell).layers.at(0);
    if (base.label == "Ground" && !base.condition) flipped = g.tick;
  }
  p.expect(predicted.has_value(), "300 wood never extracted");
  p.expect(flipped.has_value(), "cell never flipped");
  if (predicted && flipped) {
    p.expect(std::llabs(*flipped - *predicted) <= 1, "flip at " + std::to_string(*flipped) + ", predicted " +
                                                         std::to_string(*predicted));
  }
  p.expect(g.cell(cell).layers.size() >= 2 && g.cell(cell).layers[1].label == "Low", "Low layer under the flip");
}

// 5
void vision_filtering(Probe& p) {
  std::regex coord(R"(\(\s*(\d+)\s*,\s*(\d+)\s*\))");
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    GameState g = test::field_game(128, 128);
    Position at{64.5, 64.5};
    if (trial > 0) {
      std::uniform_real_distribution<double> u(0, 128);
      at = {u(rng), u(rng)};
    }
    spawn_entity(g, "P1", "Elvin Archer", at);
    std::string near, far;
    if (trial == 0) {
      near = spawn_entity(g, "P2", "Grunt", {at.x + 4.9, at.y});
      far = spawn_entity(g, "P2", "Grunt", {at.x, at.y - 5.1});
    }

    // Oracle: cells whose center is within 5, plus the cell the archer stands on.
    std::set<std::pair<int, int>> want;
    for (int y = 0; y < 128; ++y) {
      for (int x = 0; x < 128; ++x) {
        if (std::hypot(x + 0.5 - at.x, y + 0.5 - at.y) <= 5 + 1e-9) want.insert({x, y});
      }
    }
    want.insert({static_cast<int>(std::floor(at.x)), static_cast<int>(std::floor(at.y))});

    std::string block = encode_update(visible_update(g, "P1"));
    std::string body = block.substr(block.find('\n') + 1);
    body = body.substr(0, body.rfind("\nUPDATE-END"));
    DocNode doc = parse_document(body);
    std::set<std::pair<int, int>> got;
    std::set<std::string> enemies;
    for (const auto& top : doc.children) {
      if (top.tag == "Map") {
        for (const auto& c : top.children) {
          std::smatch m;
          if (std::regex_match(c.tag, m, coord)) got.insert({std::stoi(m[1]), std::stoi(m[2])});
        }
      }
      if (top.tag == "Enemy") {
        for (const auto& proto : top.children) {
          for (const auto& id : proto.children) {
            for (const auto& w : id.children) {
              if (w.children.empty() && !w.text) enemies.insert(w.tag);
            }
          }
        }
      }
    }
    p.expect(got == want, "cell set differs from the disc in trial " + std::to_string(trial));
    if (trial == 0) {
      p.equal(got.size(), std::size_t{81}, "centered cell count");
      p.expect(128 * 128 - got.size() == 16303, "hidden cell count");
      p.expect(enemies.count(near) == 1, "enemy at 4.9 missing");
      p.expect(enemies.count(far) == 0, "enemy at 5.1 visible");
    }
  }
}

// 6
void lockdown(Probe& p) {
  for (int hz : {10, 20}) {
    const std::string at = " at " + std::to_string(hz) + " Hz";
    KernelConfig cfg;
    cfg.tick_hz = hz;
    GameState g = test::field_game(40, 40, {"Human", "Orc"}, cfg);
    std::string ghost = spawn_entity(g, "P2", "Ghost", {10.5, 10.5});
    std::string gunner = spawn_entity(g, "P1", "Siege Tank", {14.5, 10.5});
    std::string mover = spawn_entity(g, "P1", "Siege Tank", {10.5, 14.5});
    const AttackDef& cannon = prototype_of(g, g.entities.at(gunner)).attacks.at(0);
    const double speed_before = effective_speed(g, g.entities.at(mover));
    const double recharge_before = effective_recharge(g, g.entities.at(gunner), cannon);

    p.expect(submit(g, "P2", act("Lockdown", {ghost}, {gunner, mover})).accepted, "cast" + at);
    p.expect(submit(g, "P1", cmd::Attack{gunner, ghost}).accepted, "attack order" + at);
    p.expect(submit(g, "P1", cmd::Move{mover, 10.5, 35.5}).accepted, "move order" + at);
    const double hp0 = g.entities.at(ghost).hp;
    const Position start = g.entities.at(mover).pos;
    const std::int64_t t = g.tick;
    bool frozen = true;
    for (std::int64_t k = t; k < t + 12 * hz; ++k) {
      frozen = frozen && effective_speed(g, g.entities.at(mover)) == 0 &&
               !attack_ready(g, g.entities.at(gunner), cannon);
      tick(g);
      frozen = frozen && g.entities.at(ghost).hp == hp0 && g.entities.at(mover).pos == start;
    }
    p.expect(frozen, "target moved or fired inside the window" + at);
    tick(g);
    p.equal(effective_speed(g, g.entities.at(mover)), speed_before, "speed after expiry" + at);
    p.equal(effective_recharge(g, g.entities.at(gunner), cannon), recharge_before, "recharge after expiry" + at);
    p.expect(g.entities.at(ghost).hp < hp0, "attack fires after expiry" + at);
    p.expect(g.entities.at(mover).pos.y > start.y, "movement resumes after expiry" + at);
  }

  GameState bio = test::field_game(40, 40);
  std::string ghost = spawn_entity(bio, "P2", "Ghost", {10.5, 10.5});
  std::string peasant = spawn_entity(bio, "P1", "Peasants", {12.5, 10.5});
  p.expect(submit(bio, "P2", act("Lockdown", {ghost}, {peasant})).reason == RejectReason::RequireTraitFailed,
           "Biological target accepted");

  GameState lim = test::field_game(20, 20);
  std::string miner = spawn_entity(lim, "P2", "Ghost", {10.5, 10.5});
  for (int i = 0; i < 4; ++i) {
    p.expect(submit(lim, "P2", act("Mine", {miner})).accepted, "cast " + std::to_string(i + 1));
    tick(lim);
  }
  p.expect(submit(lim, "P2", act("Mine", {miner})).reason == RejectReason::AbilityExhausted, "fifth cast accepted");
}

// 7
void determinism(Probe& p) {
  fs::path dir = fs::temp_directory_path() / ("rtsl-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto match = [&](const fs::path& out) {
    return test::run_cli("match --def " + test::quote(fixture_path("paper-game.rtsl")) +
                         " --map 'Hills Arena' --bot1 " + test::quote(fixture_path("bots/gather.bot")) + " --bot2 " +
                         test::quote(fixture_path("bots/idle.bot")) + " --seed 11 --max-ticks 500 --replay " +
                         test::quote(out.string()));
  };
  auto digest = [](const std::string& out) {
    auto at = out.find("digest: ");
    return at == std::string::npos ? std::string() : out.substr(at + 8, 16);
  };
  auto a = match(dir / "a.replay");
  auto b = match(dir / "b.replay");
  p.expect(a.code == 0 && b.code == 0, "match exit codes");
  p.expect(!digest(a.out).empty() && digest(a.out) == digest(b.out), "digests differ between runs");

  auto ok = test::run_cli("replay " + test::quote((dir / "a.replay").string()));
  p.expect(ok.code == 0 && ok.out.rfind("ok " + digest(a.out), 0) == 0, "replay does not verify: " + ok.out);

  const std::string text = read_text_file((dir / "a.replay").string());
  const std::size_t body = text.find("---\n") + 4;
  int edits = 0;
  for (std::size_t i = body; i < text.size(); ++i) {
    if (text[i] == '\n' || text[i] == ' ') continue;
    std::string e = text;
    e[i] = text[i] == '9' ? '8' : static_cast<char>(text[i] + 1);
    {
      std::ofstream out(dir / "edit.replay", std::ios::binary);
      out << e;
    }
    auto r = test::run_cli("replay " + test::quote((dir / "edit.replay").string()));
    p.expect(r.code == 1, "undetected edit at byte " + std::to_string(i));
    ++edits;
  }
  p.expect(edits > 0, "no command bytes to edit");
  fs::remove_all(dir);
}

// 8
void conservation(Probe& p) {
  auto totals = [](const GameState& g) {
    std::map<std::string, std::int64_t> t;
    for (const auto& [pid, pl] : g.players) {
      for (const auto& [r, q] : pl.bank) t[r] += q.milli();
      for (const auto& [r, q] : pl.spent) t[r] += q.milli();
    }
    for (const auto& [id, e] : g.entities) {
      if (e.carrying) t[e.carrying->resource] += e.carrying->amount.milli();
    }
    for (const auto& c : g.cells) {
      for (const auto& [r, q] : c.deposits) t[r] += q.milli();
    }
    for (auto it = t.begin(); it != t.end();) it = it->second == 0 ? t.erase(it) : std::next(it);
    return t;
  };
  std::int64_t activity = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    GameState start =
        new_game(test::paper_game(), {{"P1", "Human"}, {"P2", "Human"}}, seed, KernelConfig{}, "Valley");
    const auto want = totals(start);
    int broken = 0;
    GameState end = test::random_valley_match(seed, 200, [&](const GameState& g) {
      if (totals(g) != want) ++broken;
    });
    p.expect(broken == 0, "conservation broken in match " + std::to_string(seed));
    for (const auto& [pid, pl] : end.players) {
      for (const auto& [r, q] : pl.spent) activity += q.milli();
    }
  }
  p.expect(activity > 0, "random matches spent nothing");
}

// 9
void simultaneous_lethality(Probe& p) {
  auto unit = [](const std::string& faction) {
    return "<" + faction +
           "><Unit><Duelist><Health Point>10</Health Point><Terrain>Ground</Terrain><Vision>5</Vision>"
           "<Speed>1</Speed><Attack><Blade><Range>2</Range><Damage>10.5</Damage><Recharge>1</Recharge></Blade>"
           "</Attack></Duelist></Unit></" +
           faction + ">";
  };
  auto def = std::make_shared<const GameDefinition>(
      test::compile_text("<Factions>\nRed\nBlue\n</Factions><Resource><Gold>0</Gold></Resource>" + unit("Red") +
                         unit("Blue") + "<Map><Name>Arena</Name><Size>8,8</Size></Map>"));
  GameState g = new_game(def, {{"R", "Red"}, {"B", "Blue"}}, 1, KernelConfig{}, "Arena");
  std::string r = spawn_entity(g, "R", "Duelist", {2.5, 2.5});
  std::string b = spawn_entity(g, "B", "Duelist", {3.5, 2.5});
  p.expect(submit(g, "R", cmd::Attack{r, b}).accepted, "red attack");
  p.expect(submit(g, "B", cmd::Attack{b, r}).accepted, "blue attack");
  tick(g);
  p.expect(g.entities.count(r) == 0, "red survived");
  p.expect(g.entities.count(b) == 0, "blue survived");
}

// Raw client over an in-process channel.
struct Wire {
  std::shared_ptr<Connection> server;
  std::shared_ptr<Connection> client;
  std::multimap<std::int64_t, std::string> plan;
  std::vector<std::string> got;
  Wire() { std::tie(server, client) = make_channel(); }
  void pump(std::int64_t t) {
    while (auto l = client->try_receive()) got.push_back(*l);
    auto [lo, hi] = plan.equal_range(t);
    for (auto it = lo; it != hi; ++it) client->send(it->second);
    plan.erase(lo, hi);
  }
  std::size_t count(const std::string& prefix) const {
    return std::count_if(got.begin(), got.end(), [&](const std::string& l) { return l.rfind(prefix, 0) == 0; });
  }
};

MatchResult wired_match(Wire& a, Wire& b, std::int64_t limit) {
  MatchConfig c;
  c.map_name = "Valley";
  c.time_limit_ticks = limit;
  c.handshake_timeout = std::chrono::milliseconds(2000);
  c.pump = [&](std::int64_t t) {
    a.pump(t);
    b.pump(t);
  };
  MatchResult r = run_match(test::paper_game(), {a.server, b.server}, c);
  a.pump(-2);
  b.pump(-2);
  return r;
}

// 10
void protocol(Probe& p) {
  std::mt19937_64 rng(10);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto name = [&] {
    static const std::string alpha = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
    std::string s;
    do {
      if (!s.empty()) s += ' ';
      for (std::size_t i = 0, n = 1 + pick(8); i < n; ++i) s += alpha[pick(alpha.size())];
    } while (pick(3) == 0);
    return s;
  };
  auto num = [&] { return std::uniform_real_distribution<double>(-300, 300)(rng); };
  for (int i = 0; i < 1000; ++i) {
    Command c;
    switch (pick(7)) {
      case 0: c = cmd::Construct{name(), num(), num()}; break;
      case 1: c = cmd::Move{name(), num(), num()}; break;
      case 2: c = cmd::Train{name(), name()}; break;
      case 3: c = cmd::Gather{name(), num(), num()}; break;
      case 4: c = cmd::Attack{name(), name()}; break;
      case 5: {
        cmd::GameAction a{name(), {}, {}, {}, {}};
        for (std::size_t k = pick(4); k > 0; --k) a.allies.push_back(name());
        for (std::size_t k = pick(4); k > 0; --k) a.enemies.push_back(name());
        for (std::size_t k = pick(4); k > 0; --k) {
          a.xs.push_back(num());
          a.ys.push_back(num());
        }
        c = a;
        break;
      }
      default: c = cmd::Update{};
    }
    std::string text = command_text(c);
    p.expect(decode_command(text) == c && command_text(decode_command(text)) == text, "round trip " + text);
  }

  const std::vector<std::string> bad = {"HELLO", "CMD", "UPDATE x", "CMD Move(", "CMD Jump(A, 1, 2)",
                                        "CMD Move(Peasants1, 1)", "CMD Move(Ghost9, 1, 2)", "", "cmd Update",
                                        "CMD Train(TownHall1, Dragons)"};
  Wire a, b;
  a.plan.insert({-1, "FACTION Human"});
  b.plan.insert({-1, "FACTION Human"});
  for (std::size_t i = 0; i < bad.size(); ++i) a.plan.insert({static_cast<std::int64_t>(1 + i), bad[i]});
  MatchResult r = wired_match(a, b, 30);
  p.equal(r.reason, std::string("time limit"), "malformed lines ended the match");
  p.equal(a.count("ERR "), bad.size(), "ERR replies");
  p.expect(!a.got.empty() && a.got.back() == "GAMEOVER draw", "match loop did not finish normally");

  // Out-of-order messages.
  for (std::string first : {"CMD Update", "UPDATE"}) {
    Wire x, y;
    x.plan.insert({-1, first});
    y.plan.insert({-1, "FACTION Human"});
    MatchResult f = wired_match(x, y, 10);
    p.expect(f.reason == "forfeit" && f.winner == "P2" && x.count("ERR ProtocolViolation") == 1,
             first + " before FACTION accepted");
  }
  Wire x, y;
  x.plan.insert({-1, "FACTION Human"});
  y.plan.insert({-1, "FACTION Human"});
  x.plan.insert({3, "FACTION Orc"});
  MatchResult f = wired_match(x, y, 50);
  p.expect(f.reason == "forfeit" && f.winner == "P2", "FACTION during play accepted");
  Wire u, v;
  u.plan.insert({-1, "FACTION Elves"});
  u.plan.insert({-1, "FACTION Human"});
  v.plan.insert({-1, "FACTION Human"});
  MatchResult ok = wired_match(u, v, 5);
  p.expect(ok.reason == "time limit" && u.count("ERR UnknownFaction") == 1 && u.count("START") == 1,
           "unknown faction retry");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Probe&)>>> criteria = {
      {"listing fixtures compile with the listed values", listing_fixtures},
      {"parse/serialize round trip", round_trip},
      {"damage table", damage_table},
      {"terrain transition on the Hills wood cell", terrain_transition},
      {"vision filtering", vision_filtering},
      {"lockdown and ability limits", lockdown},
      {"determinism and replay", determinism},
      {"resource conservation", conservation},
      {"simultaneous lethality", simultaneous_lethality},
      {"protocol conformance", protocol},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Probe p;
    try {
      criteria[i].second(p);
    } catch (const std::exception& e) {
      p.failures.push_back(std::string("exception: ") + e.what());
    }
    const bool pass = p.failures.empty();
    failed += pass ? 0 : 1;
    std::cout << (pass ? "PASS " : "FAIL ") << i + 1 << " " << criteria[i].first << std::endl;
    for (std::size_t k = 0; k < p.failures.size() && k < 10; ++k) std::cerr << "  " << p.failures[k] << "\n";
  }
  return failed == 0 ? 0 : 1;
}
