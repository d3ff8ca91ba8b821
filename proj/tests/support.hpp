// Helpers shared by the test binaries.

#ifndef RTSL_TEST_SUPPORT_HPP
#define RTSL_TEST_SUPPORT_HPP

#include <sys/wait.h>

#include <cstdio>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "rtsl/definition.hpp"
#include "rtsl/doc.hpp"
#include "rtsl/fixtures.hpp"
#include "rtsl/kernel.hpp"

namespace rtsl::test {

inline GameDefinition compile_text(const std::string& text) { return compile_definition(parse_document(text)); }

// The assembled game definition, compiled once.
inline std::shared_ptr<const GameDefinition> paper_game() {
  static auto def = std::make_shared<const GameDefinition>(compile_text(load_fixture("paper-game").source));
  return def;
}

// The assembled game plus an empty all-Ground map of the given size, named "Field".
inline std::shared_ptr<const GameDefinition> with_field(int width, int height) {
  auto def = std::make_shared<GameDefinition>(*paper_game());
  MapDef m;
  m.name = "Field";
  m.width = width;
  m.height = height;
  def->maps.insert(def->maps.begin(), m);
  return def;
}

inline GameState field_game(int width, int height, std::vector<std::string> factions = {"Human", "Orc"},
                            KernelConfig config = {}, std::uint64_t seed = 1) {
  std::vector<PlayerSpec> players;
  for (std::size_t i = 0; i < factions.size(); ++i) players.push_back({"P" + std::to_string(i + 1), factions[i]});
  return new_game(with_field(width, height), players, seed, config, "Field");
}

inline void run_ticks(GameState& g, int n) {
  for (int i = 0; i < n; ++i) tick(g);
}

inline const Entity& entity(const GameState& g, const std::string& id) { return g.entities.at(id); }


// A few random commands per player, drawn from what each player owns.
inline void random_commands(GameState& g, std::mt19937_64& rng) {
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  for (const auto& pid : g.player_order) {
    if (!coin(0.35)) continue;
    std::vector<std::string> own, units, halls, enemies;
    for (const auto& [id, e] : g.entities) {
      if (e.owner == pid) {
        own.push_back(id);
        const PrototypeDef& p = prototype_of(g, e);
        if (p.kind == ProtoKind::Unit) units.push_back(id);
        if (!p.purpose.build.empty()) halls.push_back(id);
      } else if (visible_to(g, pid, e)) {
        enemies.push_back(id);
      }
    }
    if (own.empty()) continue;
    Command c = cmd::Update{};
    switch (pick(6)) {
      case 0:
        if (!units.empty()) {
          std::vector<Cell> deposits;
          for (int y = 0; y < g.height; ++y) {
            for (int x = 0; x < g.width; ++x) {
              if (!g.cell({x, y}).deposits.empty()) deposits.push_back({x, y});
            }
          }
          if (!deposits.empty()) {
            Cell d = deposits[pick(deposits.size())];
            c = cmd::Gather{units[pick(units.size())], d.x + 0.5, d.y + 0.5};
          }
        }
        break;
      case 1:
        if (!units.empty()) c = cmd::Move{units[pick(units.size())], real(0, g.width), real(0, g.height)};
        break;
      case 2:
        if (!halls.empty()) {
          const Entity& h = g.entities.at(halls[pick(halls.size())]);
          const auto& build = prototype_of(g, h).purpose.build;
          c = cmd::Train{h.id, build[pick(build.size())]};
        }
        break;
      case 3: {
        const Entity& e = g.entities.at(own[pick(own.size())]);
        c = cmd::Construct{coin(0.5) ? "Barracks" : "Town Hall", std::floor(e.pos.x + real(-6, 6)) + 0.0,
                           std::floor(e.pos.y + real(-6, 6)) + 0.0};
        break;
      }
      case 4:
        if (!units.empty() && !enemies.empty()) c = cmd::Attack{units[pick(units.size())], enemies[pick(enemies.size())]};
        break;
      default:
        if (units.size() >= 2) c = cmd::GameAction{"Repair", {units[pick(units.size())], own[pick(own.size())]}, {}, {}, {}};
        break;
    }
    if (!std::holds_alternative<cmd::Update>(c)) submit(g, pid, c);
  }
}

// Valley, two Human players, random commands for `ticks` ticks. `check` runs
// after every tick.
template <class Check>
GameState random_valley_match(std::uint64_t seed, int ticks, Check&& check) {
  GameState g = new_game(paper_game(), {{"P1", "Human"}, {"P2", "Human"}}, seed, KernelConfig{}, "Valley");
  std::mt19937_64 rng(seed * 7919 + 1);
  for (int t = 0; t < ticks; ++t) {
    random_commands(g, rng);
    tick(g);
    check(g);
  }
  return g;
}

struct CliRun {
  int code = -1;
  std::string out;
};

// Runs the rtsl binary with the given shell-quoted arguments, merging stderr.
inline CliRun run_cli(const std::string& args) {
  std::string command = std::string("'") + RTSL_CLI_PATH + "' " + args + " 2>&1";
  CliRun r;
  FILE* p = popen(command.c_str(), "r");
  if (!p) return r;
  char buf[512];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

inline std::string quote(const std::string& s) { return "'" + s + "'"; }

}  // namespace rtsl::test

#endif  // RTSL_TEST_SUPPORT_HPP
