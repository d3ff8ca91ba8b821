#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "kernel_internal.hpp"

namespace rtsl {

namespace {

constexpr double kEps = 1e-9;

using namespace detail;

Cell clamp_cell(const GameState& s, Cell c) {
  return Cell{std::clamp(c.x, 0, s.width - 1), std::clamp(c.y, 0, s.height - 1)};
}

void add_blockers(GameState& s, const Entity& e) {
  for (Cell c : e.footprint) {
    if (s.in_bounds(c)) s.cell(c).blockers.push_back(e.id);
  }
}

void remove_blockers(GameState& s, const Entity& e) {
  for (Cell c : e.footprint) {
    if (!s.in_bounds(c)) continue;
    auto& b = s.cell(c).blockers;
    b.erase(std::remove(b.begin(), b.end(), e.id), b.end());
  }
}

std::vector<std::string> entity_ids(const GameState& s) {
  std::vector<std::string> ids;
  ids.reserve(s.entities.size());
  for (const auto& [id, e] : s.entities) ids.push_back(id);
  return ids;
}

Entity* find(GameState& s, const std::string& id) {
  auto it = s.entities.find(id);
  return it == s.entities.end() ? nullptr : &it->second;
}

// Moves e along path by at most budget. Clears the path when the next
// waypoint became impassable.
void step_along(GameState& s, Entity& e, std::vector<Position>& path, double budget) {
  const PrototypeDef& proto = prototype_of(s, e);
  while (budget > kEps && !path.empty()) {
    Position next = path.front();
    Cell nc = clamp_cell(s, cell_of(next));
    if (nc != entity_cell(s, e) && !passable_cell(s, proto, nc, &e.id)) {
      path.clear();
      return;
    }
    double d = distance(e.pos, next);
    if (d <= budget) {
      e.pos = next;
      budget -= d;
      path.erase(path.begin());
    } else {
      e.pos = Position{e.pos.x + (next.x - e.pos.x) / d * budget, e.pos.y + (next.y - e.pos.y) / d * budget};
      budget = 0;
    }
  }
  if (!e.footprint.empty()) {
    remove_blockers(s, e);
    e.footprint = footprint_of(s, proto, e.pos);
    add_blockers(s, e);
  }
}

const AttackDef* best_legal_attack(const GameState& s, const Entity& e, const Entity& target) {
  const AttackDef* best = nullptr;
  for (const auto& a : prototype_of(s, e).attacks) {
    if (!attack_legal(s, a, target)) continue;
    if (!best || effective_range(s, e, a) > effective_range(s, e, *best)) best = &a;
  }
  return best;
}

bool in_attack_range(const GameState& s, const Entity& e, const Entity& target) {
  for (const auto& a : prototype_of(s, e).attacks) {
    if (attack_legal(s, a, target) && body_distance(s, e.pos, target) <= effective_range(s, e, a) + kEps) return true;
  }
  return false;
}

// Phase 1.
void expire_effects(GameState& s) {
  std::erase_if(s.effects, [&](const ActiveEffect& eff) { return eff.expires_at_tick && s.tick > *eff.expires_at_tick; });
}

// Phase 2.
void progress_builds(GameState& s) {
  for (const auto& id : entity_ids(s)) {
    Entity* e = find(s, id);
    if (!e || e->container) continue;
    if (auto* g = std::get_if<action::GameSpecific>(&e->action)) {
      if (--g->remaining_ticks <= 0) e->action = action::Idle{};
      continue;
    }
    auto* b = std::get_if<action::Build>(&e->action);
    if (!b) continue;
    if (--b->remaining_ticks > 0) continue;
    const FactionDef& fac = faction_of(s, e->owner);
    switch (b->kind) {
      case action::Build::Kind::Construction:
        e->complete = true;
        e->action = action::Idle{};
        break;
      case action::Build::Kind::Train: {
        const PrototypeDef* proto = fac.prototype(b->product);
        auto spot = proto ? spawn_point_near(s, *e, *proto) : std::nullopt;
        if (!spot) break;  // retried next tick
        std::string owner = e->owner;
        e->action = action::Idle{};
        place_entity(s, owner, *proto, *spot, true);
        break;
      }
      case action::Build::Kind::Research:
        s.players.at(e->owner).techs_done.insert(name_key(b->product));
        e->action = action::Idle{};
        break;
      case action::Build::Kind::Upgrade: {
        const PrototypeDef* proto = fac.prototype(b->product);
        e->action = action::Idle{};
        if (proto) set_prototype(s, *e, *proto);
        break;
      }
    }
  }
}

// Phase 3.
void move_entities(GameState& s) {
  const double dt = 1.0 / s.config.tick_hz;
  for (const auto& id : entity_ids(s)) {
    Entity* ep = find(s, id);
    if (!ep || ep->container || !ep->complete) continue;
    Entity& e = *ep;
    const PrototypeDef& proto = prototype_of(s, e);
    const double budget = effective_speed(s, e) * dt;

    if (auto* m = std::get_if<action::Moving>(&e.action)) {
      if (m->path.empty() && distance(e.pos, m->dest) > kEps) {
        auto path = find_path([&](Cell c) { return passable_cell(s, proto, c, &e.id); }, s.width, s.height, e.pos,
                              m->dest);
        if (!path) {
          e.action = action::Idle{};
          continue;
        }
        m->path = std::move(*path);
      }
      step_along(s, e, m->path, budget);
      if (m->path.empty() && distance(e.pos, m->dest) <= kEps) e.action = action::Idle{};
    } else if (auto* a = std::get_if<action::Attacking>(&e.action)) {
      const Entity* target = find(s, a->target);
      if (!target || target->container || !visible_to(s, e.owner, *target)) {
        e.action = action::Idle{};
        continue;
      }
      if (in_attack_range(s, e, *target)) {
        a->path.clear();
        continue;
      }
      if (!proto.mobile()) continue;
      Cell tc = entity_cell(s, *target);
      if (a->path.empty() || a->planned_for != tc) {
        const AttackDef* best = best_legal_attack(s, e, *target);
        if (!best) {
          e.action = action::Idle{};
          continue;
        }
        auto path = route_near(s, e, *target, effective_range(s, e, *best));
        a->path = path ? std::move(*path) : std::vector<Position>{};
        a->planned_for = tc;
      }
      step_along(s, e, a->path, budget);
    } else if (auto* g = std::get_if<action::Gathering>(&e.action)) {
      const double reach = s.config.deposit_range;
      if (g->phase == action::Gathering::Phase::Extract) {
        Cell cell = g->cell;
        auto goal = [&](Position p) { return distance_to_cell(p, cell) <= reach + kEps; };
        if (goal(e.pos)) {
          g->path.clear();
          continue;
        }
        if (g->path.empty()) {
          int r = static_cast<int>(std::ceil(reach)) + 1;
          auto path = route_to(s, e, goal, Cell{cell.x - r, cell.y - r}, Cell{cell.x + r, cell.y + r});
          if (!path) {
            e.action = action::Idle{};
            continue;
          }
          g->path = std::move(*path);
        }
        step_along(s, e, g->path, budget);
      } else {
        const std::string res = e.carrying ? e.carrying->resource : g->resource;
        const Entity* b = nearest_process(s, e, res);
        if (!b) {
          e.action = action::Idle{};
          continue;
        }
        if (body_distance(s, e.pos, *b) <= reach + kEps) {
          g->path.clear();
          continue;
        }
        if (g->path.empty()) {
          auto path = route_near(s, e, *b, reach);
          if (!path) {
            e.action = action::Idle{};
            continue;
          }
          g->path = std::move(*path);
        }
        step_along(s, e, g->path, budget);
      }
    } else if (auto* r = std::get_if<action::Repairing>(&e.action)) {
      const Entity* target = find(s, r->target);
      if (!target || target->container || target->owner != e.owner || !proto.repair) {
        e.action = action::Idle{};
        continue;
      }
      double range = proto.repair->for_target(name_key(target->proto)).range;
      if (body_distance(s, e.pos, *target) <= range + kEps) {
        r->path.clear();
        continue;
      }
      if (!proto.mobile()) continue;
      Cell tc = entity_cell(s, *target);
      if (r->path.empty() || r->planned_for != tc) {
        auto path = route_near(s, e, *target, range);
        r->path = path ? std::move(*path) : std::vector<Position>{};
        r->planned_for = tc;
      }
      step_along(s, e, r->path, budget);
    }
  }
}

void deliver(GameState& s, Entity& e) {
  if (!e.carrying) return;
  s.players.at(e.owner).bank[e.carrying->resource] += e.carrying->amount;
  e.carrying.reset();
}

// Phase 4.
void gather_step(GameState& s) {
  const Quantity quantum = Quantity::from_milli(std::llround(s.config.gather_rate * Quantity::kScale / s.config.tick_hz));
  const double reach = s.config.deposit_range;
  for (const auto& id : entity_ids(s)) {
    Entity* ep = find(s, id);
    if (!ep || ep->container) continue;
    Entity& e = *ep;
    auto* g = std::get_if<action::Gathering>(&e.action);
    if (!g) continue;
    const PrototypeDef& proto = prototype_of(s, e);
    CellState& cs = s.cell(g->cell);
    auto remaining = [&] {
      auto it = cs.deposits.find(g->resource);
      return it == cs.deposits.end() ? Quantity{} : it->second;
    };

    if (g->phase == action::Gathering::Phase::Extract) {
      if (distance_to_cell(e.pos, g->cell) > reach + kEps) continue;
      const GatherCapacity* cap = gather_capacity(proto, g->resource);
      if (!cap || !prepare_ok(s, e.owner, g->resource, g->cell)) {
        e.action = action::Idle{};
        continue;
      }
      const Quantity capacity = Quantity::from_real(cap->capacity);
      const Quantity carried = e.carrying ? e.carrying->amount : Quantity{};
      const Quantity avail = remaining();
      if (avail > Quantity{} && carried < capacity) {
        Quantity take = std::min({quantum, capacity - carried, avail});
        cs.deposits[g->resource] -= take;
        e.carrying = Cargo{g->resource, carried + take};
      }
      const Quantity now_carried = e.carrying ? e.carrying->amount : Quantity{};
      if (now_carried >= capacity || remaining() == Quantity{}) {
        if (now_carried == Quantity{}) {
          e.action = action::Idle{};
          continue;
        }
        g->phase = action::Gathering::Phase::Return;
        g->path.clear();
      }
    }

    if (g->phase == action::Gathering::Phase::Return) {
      if (!e.carrying) {
        g->phase = action::Gathering::Phase::Extract;
        continue;
      }
      const Entity* b = nearest_process(s, e, e.carrying->resource);
      if (!b) {
        e.action = action::Idle{};
        continue;
      }
      if (body_distance(s, e.pos, *b) > reach + kEps) continue;
      deliver(s, e);
      if (remaining() > Quantity{}) {
        g->phase = action::Gathering::Phase::Extract;
        g->path.clear();
      } else {
        e.action = action::Idle{};
      }
    }
  }
}

double roll_base(GameState& s, const AttackDef& attack, const PrototypeDef& target) {
  auto it = attack.damage.per_target.find(name_key(target.name));
  const DamageRange& r = it == attack.damage.per_target.end() ? attack.damage.universal : it->second;
  if (!s.config.random_damage) return r.max;
  double u = static_cast<double>(s.rng() >> 11) * 0x1.0p-53;
  ++s.rng_draws;
  return r.min + u * (r.max - r.min);
}

bool covers(const GameState& s, const Entity& e, const std::set<Cell>& cells) {
  if (e.footprint.empty()) return cells.count(entity_cell(s, e)) > 0;
  for (Cell c : e.footprint) {
    if (cells.count(c)) return true;
  }
  return false;
}

// Phase 5.
void attack_step(GameState& s) {
  std::map<std::string, double> incoming;
  for (const auto& id : entity_ids(s)) {
    Entity* ep = find(s, id);
    if (!ep || ep->container || !ep->complete) continue;
    Entity& e = *ep;
    auto* act = std::get_if<action::Attacking>(&e.action);
    if (!act) continue;
    const Entity* target = find(s, act->target);
    if (!target || target->container || !visible_to(s, e.owner, *target)) continue;
    const PrototypeDef& proto = prototype_of(s, e);
    const double dist = body_distance(s, e.pos, *target);

    const AttackDef* chosen = nullptr;
    for (const auto& a : proto.attacks) {
      if (!attack_legal(s, a, *target)) continue;
      if (dist > effective_range(s, e, a) + kEps) continue;
      if (!attack_ready(s, e, a)) continue;
      if (a.require.distance && !a.require.distance->admits(dist)) continue;
      if (!missing_resources(s, e.owner, a.require.resources).empty()) continue;
      bool ok = true;
      for (const auto& b : a.require.buildings) ok = ok && owns_complete(s, e.owner, b);
      for (const auto& t : a.require.techs) ok = ok && has_tech(s, e.owner, t);
      if (!ok) continue;
      chosen = &a;
      break;
    }
    if (!chosen) continue;
    debit(s, e.owner, chosen->require.resources);
    e.last_fired[name_key(chosen->name)] = s.tick;

    std::vector<const Entity*> victims;
    if (std::holds_alternative<shape::Point>(chosen->shape)) {
      victims.push_back(target);
    } else {
      auto cells = cells_in_shape(OrientedShape{chosen->shape, target->pos, heading_between(e.pos, target->pos)});
      for (const auto& [vid, v] : s.entities) {
        if (v.owner == e.owner || v.container || !attack_legal(s, *chosen, v)) continue;
        if (covers(s, v, cells)) victims.push_back(&v);
      }
    }
    const auto from_layers = layers_at(s, entity_cell(s, e));
    for (const Entity* v : victims) {
      const PrototypeDef& vproto = prototype_of(s, *v);
      double base = apply_effects(s, e.id, "damage", roll_base(s, *chosen, vproto));
      incoming[v->id] += resolve_with_base(base, *chosen, from_layers, vproto, layers_at(s, entity_cell(s, *v)),
                                           s.def->terrain_rules);
    }
  }
  for (const auto& [id, dmg] : incoming) s.entities.at(id).hp -= dmg;
}

// Phase 6.
void repair_step(GameState& s) {
  const double dt = 1.0 / s.config.tick_hz;
  for (const auto& id : entity_ids(s)) {
    Entity* ep = find(s, id);
    if (!ep || ep->container || !ep->complete) continue;
    auto* r = std::get_if<action::Repairing>(&ep->action);
    if (!r) continue;
    Entity* target = find(s, r->target);
    const PrototypeDef& proto = prototype_of(s, *ep);
    if (!target || !proto.repair) continue;
    const RepairRate& rate = proto.repair->for_target(name_key(target->proto));
    if (body_distance(s, ep->pos, *target) > rate.range + kEps) continue;
    const double max = prototype_of(s, *target).max_health;
    target->hp = std::min(max, target->hp + rate.rate_hp_per_s * dt);
    if (target->hp >= max) ep->action = action::Idle{};
  }
}

void destroy(GameState& s, const std::string& id) {
  auto it = s.entities.find(id);
  if (it == s.entities.end()) return;
  Entity e = std::move(it->second);
  s.entities.erase(it);
  for (const auto& inner : e.contained) destroy(s, inner);
  if (e.carrying) s.players.at(e.owner).spent[e.carrying->resource] += e.carrying->amount;
  remove_blockers(s, e);
  if (e.container) {
    if (Entity* c = find(s, *e.container)) std::erase(c->contained, e.id);
  }
}

// Phase 7.
void remove_dead(GameState& s) {
  std::vector<std::string> dead;
  for (const auto& [id, e] : s.entities) {
    if (e.hp < 0) dead.push_back(id);
  }
  for (const auto& id : dead) destroy(s, id);
  if (!dead.empty()) {
    std::erase_if(s.effects, [&](const ActiveEffect& eff) { return !s.entities.count(eff.target); });
  }
}

// Phase 8.
void terrain_transitions(GameState& s) {
  for (auto& cs : s.cells) {
    for (auto& layer : cs.layers) {
      if (!layer.condition) continue;
      auto it = cs.deposits.find(layer.condition->resource);
      if (it != cs.deposits.end() && it->second > Quantity{}) continue;
      if (it != cs.deposits.end()) cs.deposits.erase(it);
      layer = TerrainLayer{layer.condition->replacement_label, std::nullopt};
    }
  }
}

}  // namespace

// ---- Quantity -------------------------------------------------------------

Quantity Quantity::from_real(double v) { return Quantity(std::llround(v * kScale)); }

std::string Quantity::to_string() const {
  std::int64_t a = milli_ < 0 ? -milli_ : milli_;
  std::string out = (milli_ < 0 ? "-" : "") + std::to_string(a / kScale);
  if (std::int64_t frac = a % kScale) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%03lld", static_cast<long long>(frac));
    std::string f(buf);
    while (f.back() == '0') f.pop_back();
    out += "." + f;
  }
  return out;
}

const MapDef& GameState::map() const { return *def->map(map_name); }

// ---- helpers ----------------------------------------------------------------

namespace detail {

bool has_label(const std::set<std::string>& labels, const std::string& label) {
  const std::string key = name_key(label);
  return std::any_of(labels.begin(), labels.end(), [&](const std::string& l) { return name_key(l) == key; });
}

bool intersects(const std::set<std::string>& labels, const std::vector<std::string>& layers) {
  return std::any_of(layers.begin(), layers.end(), [&](const std::string& l) { return has_label(labels, l); });
}

const FactionDef& faction_of(const GameState& state, const std::string& player) {
  const FactionDef* f = state.def->faction(state.players.at(player).faction);
  if (!f) throw UnknownFaction("UnknownFaction: " + state.players.at(player).faction);
  return *f;
}

std::string canonical_resource(const GameState& state, const std::string& name) {
  const std::string key = name_key(name);
  for (const auto& [res, amount] : state.def->starting_resources) {
    if (name_key(res) == key) return res;
  }
  return name;
}

const GatherCapacity* gather_capacity(const PrototypeDef& proto, const std::string& resource) {
  const std::string key = name_key(resource);
  for (const auto& [res, cap] : proto.gather) {
    if (name_key(res) == key) return &cap;
  }
  return nullptr;
}

Cell entity_cell(const GameState& state, const Entity& e) { return clamp_cell(state, cell_of(e.pos)); }

std::vector<Cell> footprint_of(const GameState&, const PrototypeDef& proto, Position center) {
  if (proto.kind != ProtoKind::Building) return {};
  auto cells = cells_in_shape(OrientedShape{proto.shape, center, {1.0, 0.0}});
  return {cells.begin(), cells.end()};
}

std::string next_id(GameState& state, const std::string& proto_name) {
  std::string base;
  for (char c : proto_name) {
    if (c != ' ' && c != '\t') base += c;
  }
  return base + std::to_string(++state.id_counters[base]);
}

Entity& place_entity(GameState& state, const std::string& player, const PrototypeDef& proto, Position pos,
                     bool complete) {
  Entity e;
  e.id = next_id(state, proto.name);
  e.owner = player;
  e.proto = proto.name;
  e.pos = pos;
  e.hp = proto.max_health;
  e.complete = complete;
  for (const auto& a : proto.attacks) {
    e.last_fired[name_key(a.name)] = state.tick - std::max<std::int64_t>(1, seconds_to_ticks(a.recharge_s, state.config.tick_hz));
  }
  for (const auto& ab : proto.abilities) {
    if (ab.use_limit) e.ability_uses_left[name_key(ab.name)] = *ab.use_limit;
  }
  e.footprint = footprint_of(state, proto, e.pos);
  add_blockers(state, e);
  state.players.at(player).ever_owned = true;
  std::string id = e.id;
  return state.entities.emplace(id, std::move(e)).first->second;
}

void set_prototype(GameState& state, Entity& e, const PrototypeDef& proto) {
  const PrototypeDef& old = prototype_of(state, e);
  const double frac = old.max_health > 0 ? e.hp / old.max_health : 1.0;
  e.proto = proto.name;
  e.hp = frac * proto.max_health;
  for (const auto& a : proto.attacks) {
    e.last_fired.try_emplace(name_key(a.name),
                             state.tick - std::max<std::int64_t>(1, seconds_to_ticks(a.recharge_s, state.config.tick_hz)));
  }
  for (const auto& ab : proto.abilities) {
    if (ab.use_limit) e.ability_uses_left.try_emplace(name_key(ab.name), *ab.use_limit);
  }
  remove_blockers(state, e);
  e.footprint = footprint_of(state, proto, e.pos);
  add_blockers(state, e);
}

std::optional<Position> spawn_point_near(const GameState& state, const Entity& origin, const PrototypeDef& proto) {
  std::vector<Cell> base = origin.footprint.empty() ? std::vector<Cell>{entity_cell(state, origin)} : origin.footprint;
  int x0 = base.front().x, x1 = x0, y0 = base.front().y, y1 = y0;
  for (Cell c : base) {
    x0 = std::min(x0, c.x);
    x1 = std::max(x1, c.x);
    y0 = std::min(y0, c.y);
    y1 = std::max(y1, c.y);
  }
  const int limit = std::max(state.width, state.height);
  for (int r = 1; r <= limit; ++r) {
    std::optional<Cell> best;
    double best_d = 0;
    for (int y = y0 - r; y <= y1 + r; ++y) {
      for (int x = x0 - r; x <= x1 + r; ++x) {
        bool ring = x == x0 - r || x == x1 + r || y == y0 - r || y == y1 + r;
        Cell c{x, y};
        if (!ring || !passable_cell(state, proto, c, nullptr)) continue;
        double d = distance(cell_center(c), origin.pos);
        if (!best || d < best_d - kEps) {
          best = c;
          best_d = d;
        }
      }
    }
    if (best) return cell_center(*best);
  }
  return std::nullopt;
}

bool owns_complete(const GameState& state, const std::string& player, const std::string& proto_name) {
  const std::string key = name_key(proto_name);
  for (const auto& [id, e] : state.entities) {
    if (e.owner == player && e.complete && name_key(e.proto) == key) return true;
  }
  return false;
}

bool has_tech(const GameState& state, const std::string& player, const std::string& tech) {
  return state.players.at(player).techs_done.count(name_key(tech)) > 0 || owns_complete(state, player, tech);
}

std::vector<std::string> missing_resources(const GameState& state, const std::string& player,
                                           const std::map<std::string, double>& cost, int count) {
  std::vector<std::string> out;
  const auto& bank = state.players.at(player).bank;
  for (const auto& [res, amount] : cost) {
    const std::string canon = canonical_resource(state, res);
    Quantity need = Quantity::from_real(amount * count);
    auto it = bank.find(canon);
    Quantity have = it == bank.end() ? Quantity{} : it->second;
    if (have < need) out.push_back(canon);
  }
  return out;
}

void debit(GameState& state, const std::string& player, const std::map<std::string, double>& cost, int count) {
  auto& p = state.players.at(player);
  for (const auto& [res, amount] : cost) {
    const std::string canon = canonical_resource(state, res);
    Quantity q = Quantity::from_real(amount * count);
    p.bank[canon] -= q;
    p.spent[canon] += q;
  }
}

bool attack_legal(const GameState& state, const AttackDef& attack, const Entity& target) {
  if (attack.target_terrain.empty()) return true;
  return intersects(attack.target_terrain, occupied_layers(state, target));
}

bool numeric_modifier(const PropertyModifier& m) {
  if (m.kind == PropertyModifier::Kind::AddPercent) return true;
  double v = 0;
  const char* b = m.text.data();
  auto [ptr, ec] = std::from_chars(b, b + m.text.size(), v);
  return ec == std::errc() && ptr == b + m.text.size() && !m.text.empty();
}

double apply_effects(const GameState& state, const std::string& entity_id, const std::string& property, double base) {
  double v = base;
  for (const auto& eff : state.effects) {
    if (eff.target != entity_id) continue;
    for (const auto& m : eff.modifiers) {
      if (m.property != property || !numeric_modifier(m)) continue;
      v = m.kind == PropertyModifier::Kind::Set ? m.value : v * (1.0 + m.value / 100.0);
    }
  }
  return std::max(v, 0.0);
}

double effective_range(const GameState& state, const Entity& e, const AttackDef& attack) {
  return apply_effects(state, e.id, "range", attack.range);
}

bool passable_cell(const GameState& state, const PrototypeDef& proto, Cell c, const std::string* self) {
  if (!state.in_bounds(c)) return false;
  const CellState& cs = state.cell(c);
  for (const auto& layer : cs.layers) {
    if (!has_label(proto.moves_over(), layer.label)) continue;
    bool blocked = false;
    for (const auto& bid : cs.blockers) {
      if (self && bid == *self) continue;
      auto it = state.entities.find(bid);
      if (it == state.entities.end()) continue;
      if (has_label(prototype_of(state, it->second).occupy_terrain, layer.label)) {
        blocked = true;
        break;
      }
    }
    if (!blocked) return true;
  }
  return false;
}

std::optional<std::vector<Position>> route_to(const GameState& state, const Entity& e,
                                              const std::function<bool(Position)>& goal, Cell lo, Cell hi) {
  if (goal(e.pos)) return std::vector<Position>{};
  const PrototypeDef& proto = prototype_of(state, e);
  auto pass = [&](Cell c) { return passable_cell(state, proto, c, &e.id); };
  std::vector<Cell> candidates;
  for (int y = std::max(lo.y, 0); y <= std::min(hi.y, state.height - 1); ++y) {
    for (int x = std::max(lo.x, 0); x <= std::min(hi.x, state.width - 1); ++x) {
      Cell c{x, y};
      if (pass(c) && goal(cell_center(c))) candidates.push_back(c);
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](Cell a, Cell b) {
    return distance(e.pos, cell_center(a)) < distance(e.pos, cell_center(b)) - kEps;
  });
  constexpr std::size_t kTries = 12;
  for (std::size_t i = 0; i < candidates.size() && i < kTries; ++i) {
    auto path = find_path(pass, state.width, state.height, e.pos, cell_center(candidates[i]));
    if (path) return path;
  }
  return std::nullopt;
}

std::optional<std::vector<Position>> route_near(const GameState& state, const Entity& e, const Entity& target,
                                                double range) {
  std::vector<Cell> body = target.footprint.empty() ? std::vector<Cell>{entity_cell(state, target)} : target.footprint;
  int x0 = body.front().x, x1 = x0, y0 = body.front().y, y1 = y0;
  for (Cell c : body) {
    x0 = std::min(x0, c.x);
    x1 = std::max(x1, c.x);
    y0 = std::min(y0, c.y);
    y1 = std::max(y1, c.y);
  }
  const int r = static_cast<int>(std::ceil(range)) + 1;
  return route_to(
      state, e, [&](Position p) { return body_distance(state, p, target) <= range + kEps; }, Cell{x0 - r, y0 - r},
      Cell{x1 + r, y1 + r});
}

const Entity* nearest_process(const GameState& state, const Entity& e, const std::string& resource) {
  const std::string key = name_key(resource);
  const Entity* best = nullptr;
  double best_d = 0;
  for (const auto& [id, b] : state.entities) {
    if (b.owner != e.owner || !b.complete || b.container) continue;
    const auto& process = prototype_of(state, b).purpose.process;
    if (std::none_of(process.begin(), process.end(), [&](const std::string& r) { return name_key(r) == key; })) {
      continue;
    }
    double d = body_distance(state, e.pos, b);
    if (!best || d < best_d - kEps) {
      best = &b;
      best_d = d;
    }
  }
  return best;
}

bool prepare_ok(const GameState& state, const std::string& player, const std::string& resource, Cell cell) {
  const std::string key = name_key(resource);
  auto prepares = [&](const PrototypeDef& p) {
    return std::any_of(p.purpose.prepare.begin(), p.purpose.prepare.end(),
                       [&](const std::string& r) { return name_key(r) == key; });
  };
  const FactionDef& fac = faction_of(state, player);
  bool mandated = std::any_of(fac.buildings.begin(), fac.buildings.end(), prepares) ||
                  std::any_of(fac.units.begin(), fac.units.end(), prepares);
  if (!mandated) return true;
  for (const auto& [id, b] : state.entities) {
    if (b.owner != player || !b.complete || !prepares(prototype_of(state, b))) continue;
    if (b.footprint.empty() ? entity_cell(state, b) == cell
                            : std::find(b.footprint.begin(), b.footprint.end(), cell) != b.footprint.end()) {
      return true;
    }
  }
  return false;
}

void recompute_vision(GameState& state) {
  for (auto& [pid, p] : state.players) p.visible_cells.clear();
  for (const auto& [id, e] : state.entities) {
    if (e.container) continue;
    auto& vis = state.players.at(e.owner).visible_cells;
    for (Cell c : cells_in_vision(e.pos, effective_vision(state, e))) {
      if (state.in_bounds(c)) vis.insert(c);
    }
  }
}

}  // namespace detail

// ---- queries --------------------------------------------------------------

std::int64_t seconds_to_ticks(double seconds, int tick_hz) {
  if (seconds <= 0) return 0;
  return static_cast<std::int64_t>(std::ceil(seconds * tick_hz - kEps));
}

const PrototypeDef& prototype_of(const GameState& state, const Entity& e) {
  const PrototypeDef* p = faction_of(state, e.owner).prototype(e.proto);
  if (!p) throw KernelError("entity " + e.id + " has unknown prototype " + e.proto);
  return *p;
}

std::vector<std::string> layers_at(const GameState& state, Cell c) {
  std::vector<std::string> out;
  if (!state.in_bounds(c)) return out;
  for (const auto& l : state.cell(c).layers) out.push_back(l.label);
  return out;
}

std::vector<std::string> occupied_layers(const GameState& state, const Entity& e) {
  const PrototypeDef& proto = prototype_of(state, e);
  std::vector<std::string> out;
  for (const auto& l : layers_at(state, entity_cell(state, e))) {
    if (has_label(proto.occupy_terrain, l) || has_label(proto.moves_over(), l)) out.push_back(l);
  }
  if (out.empty()) out.assign(proto.occupy_terrain.begin(), proto.occupy_terrain.end());
  return out;
}

bool passable_for(const GameState& state, const PrototypeDef& proto, Cell c) {
  return passable_cell(state, proto, c, nullptr);
}

double effective_speed(const GameState& state, const Entity& e) {
  if (e.container) return 0.0;
  double v = prototype_of(state, e).speed;
  for (const auto& l : layers_at(state, entity_cell(state, e))) {
    auto it = state.def->terrain_rules.find(name_key(l));
    if (it != state.def->terrain_rules.end() && it->second.speed_percent) v *= 1.0 + *it->second.speed_percent / 100.0;
  }
  return apply_effects(state, e.id, "speed", v);
}

double effective_vision(const GameState& state, const Entity& e) {
  double v = prototype_of(state, e).vision;
  for (const auto& l : layers_at(state, entity_cell(state, e))) {
    auto it = state.def->terrain_rules.find(name_key(l));
    if (it != state.def->terrain_rules.end() && it->second.vision_percent) {
      v *= 1.0 + *it->second.vision_percent / 100.0;
    }
  }
  return apply_effects(state, e.id, "vision", v);
}

double effective_recharge(const GameState& state, const Entity& e, const AttackDef& attack) {
  return apply_effects(state, e.id, "recharge", attack.recharge_s);
}

std::optional<std::string> effective_trait(const GameState& state, const Entity& e, const std::string& trait_key) {
  std::optional<std::string> v;
  const auto& traits = prototype_of(state, e).traits;
  if (auto it = traits.find(trait_key); it != traits.end()) v = it->second;
  for (const auto& eff : state.effects) {
    if (eff.target != e.id) continue;
    for (const auto& m : eff.modifiers) {
      if (m.property == trait_key && m.kind == PropertyModifier::Kind::Set) v = m.text;
    }
  }
  return v;
}

bool attack_ready(const GameState& state, const Entity& e, const AttackDef& attack) {
  auto it = e.last_fired.find(name_key(attack.name));
  if (it == e.last_fired.end()) return true;
  std::int64_t need = std::max<std::int64_t>(1, seconds_to_ticks(effective_recharge(state, e, attack), state.config.tick_hz));
  return state.tick - it->second >= need;
}

bool visible_to(const GameState& state, const std::string& player, const Entity& e) {
  if (e.owner == player) return true;
  if (e.container) return false;
  for (const auto& [id, o] : state.entities) {
    if (o.owner != player || o.container) continue;
    if (distance(o.pos, e.pos) <= effective_vision(state, o) + kEps) return true;
  }
  return false;
}

double body_distance(const GameState&, Position p, const Entity& e) {
  if (e.footprint.empty()) return distance(p, e.pos);
  double best = std::numeric_limits<double>::infinity();
  for (Cell c : e.footprint) best = std::min(best, distance_to_cell(p, c));
  return best;
}

ResourceBank resource_totals(const GameState& state) {
  ResourceBank out;
  for (const auto& [pid, p] : state.players) {
    for (const auto& [r, q] : p.bank) out[r] += q;
    for (const auto& [r, q] : p.spent) out[r] += q;
  }
  for (const auto& [id, e] : state.entities) {
    if (e.carrying) out[e.carrying->resource] += e.carrying->amount;
  }
  for (const auto& cs : state.cells) {
    for (const auto& [r, q] : cs.deposits) out[r] += q;
  }
  return out;
}

// ---- lifecycle ------------------------------------------------------------

GameState new_game(std::shared_ptr<const GameDefinition> def, const std::vector<PlayerSpec>& players,
                   std::uint64_t seed, const KernelConfig& config, const std::string& map_name) {
  if (!def) throw KernelError("no definition");
  if (config.tick_hz < 1) throw KernelError("tick_hz must be >= 1");
  const MapDef* map = def->map(map_name);
  if (!map) throw KernelError("UnknownMap: " + map_name);

  GameState s;
  s.def = def;
  s.map_name = map->name;
  s.width = map->width;
  s.height = map->height;
  s.config = config;
  s.rng_seed = seed;
  s.rng.seed(seed);

  s.cells.assign(static_cast<std::size_t>(s.width) * s.height, CellState{{TerrainLayer{map->default_layer, {}}}, {}, {}});
  for (const auto& [at, cd] : map->cells) {
    if (!s.in_bounds(at)) continue;
    CellState& cs = s.cell(at);
    if (!cd.layers.empty()) cs.layers = cd.layers;
    for (auto& l : cs.layers) {
      if (l.condition) l.condition->resource = canonical_resource(s, l.condition->resource);
    }
    for (const auto& [res, amount] : cd.deposits) cs.deposits[canonical_resource(s, res)] += Quantity::from_real(amount);
  }

  for (const auto& spec : players) {
    const FactionDef* f = def->faction(spec.faction);
    if (!f) throw UnknownFaction("UnknownFaction: " + spec.faction);
    if (s.players.count(spec.id)) throw KernelError("duplicate player " + spec.id);
    PlayerState p;
    p.id = spec.id;
    p.faction = f->name;
    for (const auto& [res, amount] : def->starting_resources) {
      p.bank[res] = Quantity::from_real(amount);
      p.spent[res] = Quantity{};
    }
    s.players.emplace(spec.id, std::move(p));
    s.player_order.push_back(spec.id);
  }

  for (std::size_t i = 0; i < players.size() && i < map->start.size(); ++i) {
    const FactionDef& f = faction_of(s, players[i].id);
    for (const auto& placement : map->start[i]) {
      const PrototypeDef* proto = f.prototype(placement.prototype);
      if (!proto) {
        throw KernelError("start prototype " + placement.prototype + " is not in faction " + f.name);
      }
      if (!s.in_bounds(placement.position)) throw KernelError("start position outside the map");
      place_entity(s, players[i].id, *proto, placement.position, true);
    }
  }
  recompute_vision(s);
  return s;
}

GameState new_game(std::shared_ptr<const GameDefinition> def, const std::vector<PlayerSpec>& players,
                   std::uint64_t seed, int tick_hz) {
  KernelConfig config;
  config.tick_hz = tick_hz;
  return new_game(std::move(def), players, seed, config);
}

std::string spawn_entity(GameState& state, const std::string& player, const std::string& proto_name, Position pos) {
  if (!state.players.count(player)) throw KernelError("unknown player " + player);
  const PrototypeDef* proto = faction_of(state, player).prototype(proto_name);
  if (!proto) throw KernelError("unknown prototype " + proto_name);
  if (!state.in_bounds(pos)) throw KernelError("position outside the map");
  std::string id = place_entity(state, player, *proto, pos, true).id;
  recompute_vision(state);
  return id;
}

void tick(GameState& s) {
  s.tick += 1;
  s.commands_this_tick.clear();
  expire_effects(s);
  progress_builds(s);
  move_entities(s);
  gather_step(s);
  attack_step(s);
  repair_step(s);
  remove_dead(s);
  terrain_transitions(s);
  recompute_vision(s);
}

}  // namespace rtsl
