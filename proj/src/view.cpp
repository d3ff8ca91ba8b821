#include <bit>
#include <cstdio>

#include "kernel_internal.hpp"

namespace rtsl {

namespace {

using namespace detail;

std::pair<std::string, std::string> describe(const ActionState& a) {
  return std::visit(
      overloaded{
          [](const action::Idle&) { return std::pair<std::string, std::string>{"Idle", ""}; },
          [](const action::Moving& m) {
            return std::pair<std::string, std::string>{"Moving", format_number(m.dest.x) + "," + format_number(m.dest.y)};
          },
          [](const action::Attacking& a) { return std::pair<std::string, std::string>{"Attacking", a.target}; },
          [](const action::Gathering& g) { return std::pair<std::string, std::string>{"Gathering", g.resource}; },
          [](const action::Build& b) { return std::pair<std::string, std::string>{"Build", b.product}; },
          [](const action::Repairing& r) { return std::pair<std::string, std::string>{"Repairing", r.target}; },
          [](const action::GameSpecific& g) { return std::pair<std::string, std::string>{g.name, ""}; },
      },
      a);
}

// FNV-1a over a canonical byte stream.
class Hasher {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= b[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void real(double v) { u64(std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v)); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  void pos(Position p) {
    real(p.x);
    real(p.y);
  }
  void cell(Cell c) {
    i64(c.x);
    i64(c.y);
  }
  void bank(const ResourceBank& b) {
    u64(b.size());
    for (const auto& [r, q] : b) {
      str(r);
      i64(q.milli());
    }
  }
  void path(const std::vector<Position>& p) {
    u64(p.size());
    for (Position x : p) pos(x);
  }
  std::uint64_t value() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

void hash_action(Hasher& h, const ActionState& a) {
  h.u64(a.index());
  std::visit(overloaded{
                 [](const action::Idle&) {},
                 [&](const action::Moving& m) {
                   h.pos(m.dest);
                   h.path(m.path);
                 },
                 [&](const action::Attacking& x) {
                   h.str(x.target);
                   h.path(x.path);
                 },
                 [&](const action::Gathering& g) {
                   h.cell(g.cell);
                   h.str(g.resource);
                   h.u64(static_cast<std::uint64_t>(g.phase));
                   h.path(g.path);
                 },
                 [&](const action::Build& b) {
                   h.str(b.product);
                   h.u64(static_cast<std::uint64_t>(b.kind));
                   h.i64(b.remaining_ticks);
                 },
                 [&](const action::Repairing& r) {
                   h.str(r.target);
                   h.path(r.path);
                 },
                 [&](const action::GameSpecific& g) {
                   h.str(g.name);
                   h.i64(g.remaining_ticks);
                 },
             },
             a);
}

}  // namespace

std::uint64_t state_digest(const GameState& s) {
  Hasher h;
  h.str(s.map_name);
  h.i64(s.tick);
  h.i64(s.config.tick_hz);
  h.u64(s.rng_seed);
  h.u64(s.rng_draws);
  for (const auto& [id, p] : s.players) {
    h.str(id);
    h.str(p.faction);
    h.bank(p.bank);
    h.bank(p.spent);
    h.u64(p.techs_done.size());
    for (const auto& t : p.techs_done) h.str(t);
    h.u64(p.ever_owned);
  }
  for (const auto& [id, e] : s.entities) {
    h.str(id);
    h.str(e.owner);
    h.str(e.proto);
    h.pos(e.pos);
    h.real(e.hp);
    h.u64(e.complete);
    hash_action(h, e.action);
    for (const auto& [a, t] : e.last_fired) {
      h.str(a);
      h.i64(t);
    }
    h.u64(e.carrying.has_value());
    if (e.carrying) {
      h.str(e.carrying->resource);
      h.i64(e.carrying->amount.milli());
    }
    for (const auto& c : e.contained) h.str(c);
    h.str(e.container.value_or(""));
    for (const auto& [a, n] : e.ability_uses_left) {
      h.str(a);
      h.i64(n);
    }
  }
  for (const auto& cs : s.cells) {
    for (const auto& l : cs.layers) h.str(l.label);
    for (const auto& [r, q] : cs.deposits) {
      h.str(r);
      h.i64(q.milli());
    }
  }
  for (const auto& eff : s.effects) {
    h.str(eff.ability);
    h.str(eff.source);
    h.str(eff.target);
    h.i64(eff.created_tick);
    h.i64(eff.expires_at_tick.value_or(-1));
  }
  for (const auto& rec : s.command_log) {
    h.i64(rec.tick);
    h.str(rec.player);
    h.str(rec.command);
  }
  return h.value();
}

std::string digest_hex(std::uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

UpdateView visible_update(const GameState& s, const std::string& player) {
  UpdateView v;
  v.player = player;
  v.tick = s.tick;
  const PlayerState& p = s.players.at(player);
  v.bank = p.bank;
  for (const auto& [id, e] : s.entities) {
    if (e.owner == player) {
      EntityView ev;
      ev.id = id;
      ev.proto = e.proto;
      ev.kind = prototype_of(s, e).kind;
      if (!e.container) ev.pos = e.pos;
      ev.hp = e.hp;
      ev.complete = e.complete;
      std::tie(ev.action, ev.action_value) = describe(e.action);
      ev.carrying = e.carrying;
      if (e.carrying) {
        if (const auto* cap = gather_capacity(prototype_of(s, e), e.carrying->resource)) ev.carry_capacity = cap->capacity;
      }
      ev.contained = e.contained;
      v.own.push_back(std::move(ev));
    } else if (visible_to(s, player, e)) {
      EnemyView en{id, e.proto, e.pos, std::nullopt};
      if (s.config.hp_in_enemy_tag) en.hp = e.hp;
      v.enemies.push_back(std::move(en));
    }
  }
  for (Cell c : p.visible_cells) {
    const CellState& cs = s.cell(c);
    CellView cv;
    cv.at = c;
    cv.layers = cs.layers;
    std::set<std::string> conditional;
    for (auto& l : cv.layers) {
      if (!l.condition) continue;
      auto it = cs.deposits.find(l.condition->resource);
      l.condition->amount = it == cs.deposits.end() ? 0.0 : it->second.real();
      conditional.insert(l.condition->resource);
    }
    for (const auto& [r, q] : cs.deposits) {
      if (!conditional.count(r)) cv.deposits[r] = q;
    }
    v.cells.push_back(std::move(cv));
  }
  return v;
}

}  // namespace rtsl
