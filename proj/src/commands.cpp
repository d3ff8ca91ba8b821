#include <algorithm>
#include <cmath>

#include "kernel_internal.hpp"

namespace rtsl {

namespace {

using namespace detail;
using R = RejectReason;

CommandReceipt reject(R r, std::string detail = {}) { return CommandReceipt::reject(r, std::move(detail)); }

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

// Looks up an entity the player controls.
std::variant<Entity*, CommandReceipt> own_entity(GameState& s, const std::string& player, const std::string& id) {
  auto it = s.entities.find(id);
  if (it == s.entities.end()) return reject(R::UnknownID, id);
  if (it->second.owner != player) {
    if (!visible_to(s, player, it->second)) return reject(R::UnknownID, id);
    return reject(R::NotYourEntity, id);
  }
  return &it->second;
}

// An enemy the player can currently see.
std::variant<Entity*, CommandReceipt> enemy_entity(GameState& s, const std::string& player, const std::string& id) {
  auto it = s.entities.find(id);
  if (it == s.entities.end() || !visible_to(s, player, it->second)) return reject(R::UnknownID, id);
  if (it->second.owner == player) return reject(R::BadArguments, id + " is not an enemy");
  return &it->second;
}

// Require clauses that depend only on the player (buildings, techs, resources).
std::optional<CommandReceipt> check_owner_require(const GameState& s, const std::string& player, const RequireSpec& req,
                                                  int count = 1) {
  for (const auto& b : req.buildings) {
    if (!owns_complete(s, player, b)) return reject(R::MissingBuilding, b);
  }
  for (const auto& t : req.techs) {
    if (!has_tech(s, player, t)) return reject(R::MissingTech, t);
  }
  auto missing = missing_resources(s, player, req.resources, count);
  if (!missing.empty()) return reject(R::InsufficientResources, join(missing));
  return std::nullopt;
}

bool busy(const Entity& e) {
  return std::holds_alternative<action::Build>(e.action);
}

bool usable(const Entity& e) { return e.complete && !e.container; }

CommandReceipt construct(GameState& s, const std::string& player, const cmd::Construct& c) {
  const PrototypeDef* proto = faction_of(s, player).prototype(c.building);
  if (!proto) return reject(R::UnknownPrototype, c.building);
  if (proto->kind != ProtoKind::Building) return reject(R::NotBuildable, c.building + " is not a building");
  Position at{c.x, c.y};
  if (!s.in_bounds(at)) return reject(R::BadTerrain, "outside the map");

  for (Cell cell : footprint_of(s, *proto, at)) {
    if (!s.in_bounds(cell)) return reject(R::BadTerrain, "footprint leaves the map");
    const CellState& cs = s.cell(cell);
    bool ok = false;
    for (const auto& layer : cs.layers) {
      if (!has_label(proto->occupy_terrain, layer.label)) continue;
      bool blocked = false;
      for (const auto& bid : cs.blockers) {
        if (has_label(prototype_of(s, s.entities.at(bid)).occupy_terrain, layer.label)) blocked = true;
      }
      if (!blocked) ok = true;
    }
    if (!ok) return reject(R::BadTerrain, "cannot place on " + std::to_string(cell.x) + "," + std::to_string(cell.y));
  }

  if (proto->require.distance) {
    std::optional<double> nearest;
    for (const auto& [id, e] : s.entities) {
      if (e.owner != player || !e.complete || prototype_of(s, e).kind != ProtoKind::Building) continue;
      if (!proto->require.buildings.empty() &&
          std::none_of(proto->require.buildings.begin(), proto->require.buildings.end(),
                       [&](const std::string& b) { return name_key(b) == name_key(e.proto); })) {
        continue;
      }
      double d = distance(at, e.pos);
      if (!nearest || d < *nearest) nearest = d;
    }
    if (!nearest || !proto->require.distance->admits(*nearest)) return reject(R::DistanceViolation);
  }
  if (auto r = check_owner_require(s, player, proto->require)) return *r;

  debit(s, player, proto->require.resources);
  Entity& e = place_entity(s, player, *proto, at, false);
  std::int64_t ticks = seconds_to_ticks(proto->build_time_s, s.config.tick_hz);
  if (ticks == 0) {
    e.complete = true;
  } else {
    e.action = action::Build{proto->name, action::Build::Kind::Construction, ticks};
  }
  return CommandReceipt::ok(e.id);
}

CommandReceipt move(GameState& s, const std::string& player, const cmd::Move& c) {
  auto found = own_entity(s, player, c.id);
  if (auto* r = std::get_if<CommandReceipt>(&found)) return *r;
  Entity& e = *std::get<Entity*>(found);
  if (e.container) return reject(R::Contained, e.id);
  if (!e.complete || busy(e)) return reject(R::Busy, e.id);
  const PrototypeDef& proto = prototype_of(s, e);
  if (!proto.mobile()) return reject(R::Immobile, e.id);
  Position dest{c.x, c.y};
  if (!s.in_bounds(dest) || !s.in_bounds(cell_of(dest))) return reject(R::BadTerrain, "outside the map");
  auto path =
      find_path([&](Cell cell) { return passable_cell(s, proto, cell, &e.id); }, s.width, s.height, e.pos, dest);
  if (!path) return reject(R::Unreachable);
  e.action = action::Moving{dest, std::move(*path)};
  return CommandReceipt::ok();
}

CommandReceipt train(GameState& s, const std::string& player, const cmd::Train& c) {
  auto found = own_entity(s, player, c.location);
  if (auto* r = std::get_if<CommandReceipt>(&found)) return *r;
  Entity& e = *std::get<Entity*>(found);
  if (!usable(e)) return reject(R::Busy, e.id);
  if (busy(e)) return reject(R::Busy, e.id);
  const PrototypeDef& proto = prototype_of(s, e);
  const FactionDef& fac = faction_of(s, player);
  const std::string key = name_key(c.product);
  auto listed = [&](const std::vector<std::string>& v) {
    return std::any_of(v.begin(), v.end(), [&](const std::string& x) { return name_key(x) == key; });
  };

  if (listed(proto.upgrades_to)) {
    const PrototypeDef* target = fac.prototype(c.product);
    if (!target) return reject(R::UnknownPrototype, c.product);
    if (auto r = check_owner_require(s, player, target->require)) return *r;
    debit(s, player, target->require.resources);
    std::int64_t ticks = std::max<std::int64_t>(1, seconds_to_ticks(target->build_time_s, s.config.tick_hz));
    e.action = action::Build{target->name, action::Build::Kind::Upgrade, ticks};
    return CommandReceipt::ok();
  }
  if (!listed(proto.purpose.build)) {
    const PrototypeDef* p = fac.prototype(c.product);
    if (p && p->kind == proto.kind) return reject(R::NotAnUpgrade, c.product);
    return reject(R::NotBuildable, c.product);
  }
  if (const TechDef* tech = fac.tech(c.product)) {
    if (s.players.at(player).techs_done.count(name_key(tech->name))) return reject(R::AlreadyResearched, tech->name);
    if (auto r = check_owner_require(s, player, tech->require)) return *r;
    debit(s, player, tech->require.resources);
    std::int64_t ticks = std::max<std::int64_t>(1, seconds_to_ticks(tech->build_time_s, s.config.tick_hz));
    e.action = action::Build{tech->name, action::Build::Kind::Research, ticks};
    return CommandReceipt::ok();
  }
  const PrototypeDef* product = fac.prototype(c.product);
  if (!product) return reject(R::UnknownPrototype, c.product);
  if (product->kind == ProtoKind::Building) return reject(R::NotBuildable, "buildings are placed with Construct");
  if (auto r = check_owner_require(s, player, product->require)) return *r;
  debit(s, player, product->require.resources);
  std::int64_t ticks = std::max<std::int64_t>(1, seconds_to_ticks(product->build_time_s, s.config.tick_hz));
  e.action = action::Build{product->name, action::Build::Kind::Train, ticks};
  return CommandReceipt::ok();
}

CommandReceipt gather(GameState& s, const std::string& player, const cmd::Gather& c) {
  auto found = own_entity(s, player, c.unit);
  if (auto* r = std::get_if<CommandReceipt>(&found)) return *r;
  Entity& e = *std::get<Entity*>(found);
  if (e.container) return reject(R::Contained, e.id);
  if (!e.complete || busy(e)) return reject(R::Busy, e.id);
  const PrototypeDef& proto = prototype_of(s, e);
  if (proto.gather.empty()) return reject(R::BadArguments, e.id + " cannot gather");
  Cell cell = cell_of(Position{c.x, c.y});
  if (!s.in_bounds(cell)) return reject(R::NoDeposit, "outside the map");
  std::optional<std::string> resource;
  for (const auto& [res, amount] : s.cell(cell).deposits) {
    if (amount > Quantity{} && gather_capacity(proto, res)) {
      resource = res;
      break;
    }
  }
  if (!resource) return reject(R::NoDeposit);
  if (!prepare_ok(s, player, *resource, cell)) return reject(R::MissingBuilding, "no Prepare building on the deposit");
  action::Gathering g{cell, *resource, action::Gathering::Phase::Extract, {}};
  if (e.carrying && e.carrying->resource != *resource) g.phase = action::Gathering::Phase::Return;
  e.action = std::move(g);
  return CommandReceipt::ok(*resource);
}

CommandReceipt attack(GameState& s, const std::string& player, const cmd::Attack& c) {
  auto found = own_entity(s, player, c.ally);
  if (auto* r = std::get_if<CommandReceipt>(&found)) return *r;
  Entity& e = *std::get<Entity*>(found);
  auto target_found = enemy_entity(s, player, c.enemy);
  if (auto* r = std::get_if<CommandReceipt>(&target_found)) return *r;
  const Entity& target = *std::get<Entity*>(target_found);
  if (e.container) return reject(R::Contained, e.id);
  if (!e.complete || busy(e)) return reject(R::Busy, e.id);
  const PrototypeDef& proto = prototype_of(s, e);
  if (proto.attacks.empty()) return reject(R::NoAttack, e.id);
  if (std::none_of(proto.attacks.begin(), proto.attacks.end(),
                   [&](const AttackDef& a) { return attack_legal(s, a, target); })) {
    return reject(R::BadTerrain, "no attack reaches " + target.id);
  }
  e.action = action::Attacking{target.id, {}, std::nullopt};
  return CommandReceipt::ok();
}

CommandReceipt repair(GameState& s, const std::string& player, const cmd::GameAction& c) {
  if (c.allies.size() != 2 || !c.enemies.empty()) return reject(R::BadArguments, "Repair takes [repairer, target]");
  auto found = own_entity(s, player, c.allies[0]);
  if (auto* r = std::get_if<CommandReceipt>(&found)) return *r;
  auto target = own_entity(s, player, c.allies[1]);
  if (auto* r = std::get_if<CommandReceipt>(&target)) return *r;
  Entity& e = *std::get<Entity*>(found);
  if (!prototype_of(s, e).repair) return reject(R::BadArguments, e.id + " cannot repair");
  if (e.container) return reject(R::Contained, e.id);
  if (!e.complete || busy(e)) return reject(R::Busy, e.id);
  if (std::get<Entity*>(target)->container) return reject(R::Contained, c.allies[1]);
  e.action = action::Repairing{c.allies[1], {}, std::nullopt};
  return CommandReceipt::ok();
}

double weight_of(const GameState& s, const Entity& e) {
  const auto& w = prototype_of(s, e).weight;
  return w ? *w : 1.0;
}

CommandReceipt load(GameState& s, const std::string& player, const cmd::GameAction& c) {
  if (c.allies.size() < 2 || !c.enemies.empty()) return reject(R::BadArguments, "Load takes [container, unit...]");
  auto found = own_entity(s, player, c.allies[0]);
  if (auto* r = std::get_if<CommandReceipt>(&found)) return *r;
  Entity& box = *std::get<Entity*>(found);
  const PrototypeDef& box_proto = prototype_of(s, box);
  if (!box_proto.contain) return reject(R::BadArguments, box.id + " cannot contain units");
  if (!usable(box)) return reject(R::Busy, box.id);
  double load = 0;
  for (const auto& id : box.contained) load += weight_of(s, s.entities.at(id));
  std::vector<Entity*> units;
  for (std::size_t i = 1; i < c.allies.size(); ++i) {
    auto u = own_entity(s, player, c.allies[i]);
    if (auto* r = std::get_if<CommandReceipt>(&u)) return *r;
    Entity& unit = *std::get<Entity*>(u);
    if (unit.id == box.id || std::find(units.begin(), units.end(), &unit) != units.end()) {
      return reject(R::BadArguments, "duplicate " + unit.id);
    }
    if (unit.container) return reject(R::Contained, unit.id);
    const PrototypeDef& up = prototype_of(s, unit);
    if (up.kind != ProtoKind::Unit || !unit.complete) return reject(R::BadArguments, unit.id + " is not a unit");
    if (body_distance(s, unit.pos, box) > 1.0 + 1e-9) return reject(R::DistanceViolation, unit.id);
    const auto& allowed = box_proto.contain->allowed_armor_classes;
    if (!allowed.empty() && (!up.armor.armor_class || !has_label(allowed, *up.armor.armor_class))) {
      return reject(R::ArmorClassNotAllowed, unit.id);
    }
    load += weight_of(s, unit);
    if (load > box_proto.contain->max_weight + 1e-9) return reject(R::ContainFull, unit.id);
    units.push_back(&unit);
  }
  for (Entity* u : units) {
    u->container = box.id;
    u->action = action::Idle{};
    u->pos = box.pos;
    box.contained.push_back(u->id);
  }
  return CommandReceipt::ok();
}

CommandReceipt unload(GameState& s, const std::string& player, const cmd::GameAction& c) {
  if (c.allies.size() < 2 || !c.enemies.empty()) return reject(R::BadArguments, "Unload takes [container, unit...]");
  if (!c.xs.empty() && c.xs.size() != 1 && c.xs.size() != c.allies.size() - 1) {
    return reject(R::BadArguments, "one position, or one per unit");
  }
  auto found = own_entity(s, player, c.allies[0]);
  if (auto* r = std::get_if<CommandReceipt>(&found)) return *r;
  Entity& box = *std::get<Entity*>(found);
  std::vector<std::pair<Entity*, Position>> plan;
  for (std::size_t i = 1; i < c.allies.size(); ++i) {
    auto u = own_entity(s, player, c.allies[i]);
    if (auto* r = std::get_if<CommandReceipt>(&u)) return *r;
    Entity& unit = *std::get<Entity*>(u);
    if (unit.container != box.id) return reject(R::BadArguments, unit.id + " is not inside " + box.id);
    const PrototypeDef& up = prototype_of(s, unit);
    Position at;
    if (c.xs.empty()) {
      auto spot = spawn_point_near(s, box, up);
      if (!spot) return reject(R::BadTerrain, "no room");
      at = *spot;
    } else {
      std::size_t k = c.xs.size() == 1 ? 0 : i - 1;
      at = Position{c.xs[k], c.ys[k]};
    }
    if (!s.in_bounds(at) || !passable_for(s, up, cell_of(at))) return reject(R::BadTerrain, unit.id);
    plan.emplace_back(&unit, at);
  }
  for (auto& [unit, at] : plan) {
    unit->container.reset();
    unit->pos = at;
    std::erase(box.contained, unit->id);
  }
  return CommandReceipt::ok();
}

CommandReceipt ability(GameState& s, const std::string& player, const cmd::GameAction& c) {
  if (c.allies.empty()) return reject(R::BadArguments, "no caster");
  const std::string key = name_key(c.name);
  std::vector<Entity*> casters;
  const AbilityDef* def = nullptr;
  for (const auto& id : c.allies) {
    auto found = own_entity(s, player, id);
    if (auto* r = std::get_if<CommandReceipt>(&found)) return *r;
    Entity& e = *std::get<Entity*>(found);
    if (!usable(e)) return reject(R::Busy, e.id);
    const AbilityDef* a = prototype_of(s, e).ability(c.name);
    if (!a) return reject(R::UnknownAbility, c.name + " on " + e.id);
    auto uses = e.ability_uses_left.find(key);
    if (uses != e.ability_uses_left.end() && uses->second <= 0) return reject(R::AbilityExhausted, e.id);
    def = a;
    casters.push_back(&e);
  }
  std::vector<Entity*> targets;
  for (const auto& id : c.enemies) {
    auto found = enemy_entity(s, player, id);
    if (auto* r = std::get_if<CommandReceipt>(&found)) return *r;
    targets.push_back(std::get<Entity*>(found));
  }
  for (Entity* t : targets) {
    for (const auto& [trait, want] : def->require.target_traits) {
      auto have = effective_trait(s, *t, trait);
      if (!have || name_key(*have) != name_key(want)) return reject(R::RequireTraitFailed, t->id + " " + trait);
    }
    if (def->require.distance) {
      for (Entity* caster : casters) {
        if (!def->require.distance->admits(body_distance(s, caster->pos, *t))) {
          return reject(R::DistanceViolation, caster->id + " to " + t->id);
        }
      }
    }
  }
  const int count = static_cast<int>(casters.size());
  if (auto r = check_owner_require(s, player, def->require, count)) return *r;

  debit(s, player, def->require.resources, count);
  std::optional<std::int64_t> expires;
  if (def->time_limit_s) expires = s.tick + std::max<std::int64_t>(1, seconds_to_ticks(*def->time_limit_s, s.config.tick_hz));
  for (Entity* caster : casters) {
    auto uses = caster->ability_uses_left.find(key);
    if (uses != caster->ability_uses_left.end()) --uses->second;
    if (!busy(*caster)) caster->action = action::GameSpecific{def->name, 1};
    for (Entity* t : targets) {
      if (def->target_modifiers.empty()) continue;
      s.effects.push_back(ActiveEffect{def->name, caster->id, t->id, def->target_modifiers, s.tick, expires});
    }
  }
  return CommandReceipt::ok();
}

CommandReceipt game_action(GameState& s, const std::string& player, const cmd::GameAction& c) {
  const std::string key = name_key(c.name);
  // Prototype-defined abilities take precedence over the built-in names.
  for (const auto& id : c.allies) {
    auto it = s.entities.find(id);
    if (it != s.entities.end() && it->second.owner == player && prototype_of(s, it->second).ability(c.name)) {
      return ability(s, player, c);
    }
  }
  if (key == "repair") return repair(s, player, c);
  if (key == "load") return load(s, player, c);
  if (key == "unload") return unload(s, player, c);
  return ability(s, player, c);
}

}  // namespace

const char* to_string(RejectReason r) {
  switch (r) {
    case R::UnknownPlayer: return "UnknownPlayer";
    case R::NotYourEntity: return "NotYourEntity";
    case R::UnknownID: return "UnknownID";
    case R::UnknownPrototype: return "UnknownPrototype";
    case R::InsufficientResources: return "InsufficientResources";
    case R::MissingBuilding: return "MissingBuilding";
    case R::MissingTech: return "MissingTech";
    case R::BadTerrain: return "BadTerrain";
    case R::DistanceViolation: return "DistanceViolation";
    case R::ContainFull: return "ContainFull";
    case R::ArmorClassNotAllowed: return "ArmorClassNotAllowed";
    case R::AbilityExhausted: return "AbilityExhausted";
    case R::RequireTraitFailed: return "RequireTraitFailed";
    case R::NotAnUpgrade: return "NotAnUpgrade";
    case R::NotBuildable: return "NotBuildable";
    case R::UnknownAbility: return "UnknownAbility";
    case R::Busy: return "Busy";
    case R::Immobile: return "Immobile";
    case R::Unreachable: return "Unreachable";
    case R::NoDeposit: return "NoDeposit";
    case R::NoAttack: return "NoAttack";
    case R::Contained: return "Contained";
    case R::AlreadyResearched: return "AlreadyResearched";
    case R::BudgetExceeded: return "BudgetExceeded";
    case R::BadArguments: return "BadArguments";
  }
  return "?";
}

std::string CommandReceipt::to_string() const {
  std::string head = accepted ? "accepted" : rtsl::to_string(reason);
  return detail.empty() ? head : head + " " + detail;
}

namespace detail {

void record_command(GameState& state, const std::string& player, const Command& command) {
  state.command_log.push_back(LogRecord{state.tick, player, command_text(command)});
}

}  // namespace detail

CommandReceipt submit(GameState& s, const std::string& player, const Command& command) {
  if (!s.players.count(player)) return reject(R::UnknownPlayer, player);
  if (std::holds_alternative<cmd::Update>(command)) return CommandReceipt::ok();
  if (s.config.command_budget) {
    int& used = s.commands_this_tick[player];
    if (used >= *s.config.command_budget) return reject(R::BudgetExceeded);
    ++used;
  }
  record_command(s, player, command);
  return std::visit(overloaded{
                        [&](const cmd::Construct& c) { return construct(s, player, c); },
                        [&](const cmd::Move& c) { return move(s, player, c); },
                        [&](const cmd::Train& c) { return train(s, player, c); },
                        [&](const cmd::Gather& c) { return gather(s, player, c); },
                        [&](const cmd::Attack& c) { return attack(s, player, c); },
                        [&](const cmd::GameAction& c) { return game_action(s, player, c); },
                        [](const cmd::Update&) { return CommandReceipt::ok(); },
                    },
                    command);
}

}  // namespace rtsl
