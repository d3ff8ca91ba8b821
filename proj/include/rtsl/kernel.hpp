// Fixed-tick simulation of a compiled game definition.

#ifndef RTSL_KERNEL_HPP
#define RTSL_KERNEL_HPP

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rtsl/command.hpp"
#include "rtsl/definition.hpp"
#include "rtsl/geometry.hpp"

namespace rtsl {

// Resource amounts in thousandths, so transfers add up exactly.
class Quantity {
 public:
  static constexpr std::int64_t kScale = 1000;

  constexpr Quantity() = default;
  static constexpr Quantity from_milli(std::int64_t m) { return Quantity(m); }
  static Quantity from_real(double v);

  constexpr std::int64_t milli() const { return milli_; }
  double real() const { return static_cast<double>(milli_) / kScale; }
  std::string to_string() const;

  constexpr auto operator<=>(const Quantity&) const = default;
  constexpr Quantity operator+(Quantity o) const { return Quantity(milli_ + o.milli_); }
  constexpr Quantity operator-(Quantity o) const { return Quantity(milli_ - o.milli_); }
  constexpr Quantity& operator+=(Quantity o) {
    milli_ += o.milli_;
    return *this;
  }
  constexpr Quantity& operator-=(Quantity o) {
    milli_ -= o.milli_;
    return *this;
  }

 private:
  constexpr explicit Quantity(std::int64_t m) : milli_(m) {}
  std::int64_t milli_ = 0;
};

using ResourceBank = std::map<std::string, Quantity>;

struct KernelConfig {
  int tick_hz = 10;
  double gather_rate = 10.0;    // units per second
  double deposit_range = 1.0;   // distance to a Process building
  bool hp_in_enemy_tag = true;
  bool random_damage = false;   // roll uniformly in [min, max] instead of max
  std::optional<int> command_budget;  // per player per tick

  bool operator==(const KernelConfig&) const = default;
};

namespace action {
struct Idle {
  bool operator==(const Idle&) const = default;
};
struct Moving {
  Position dest;
  std::vector<Position> path;
  bool operator==(const Moving&) const = default;
};
struct Attacking {
  std::string target;
  std::vector<Position> path;
  std::optional<Cell> planned_for;
  bool operator==(const Attacking&) const = default;
};
struct Gathering {
  enum class Phase { Extract, Return };
  Cell cell;
  std::string resource;
  Phase phase = Phase::Extract;
  std::vector<Position> path;
  bool operator==(const Gathering&) const = default;
};
struct Build {
  enum class Kind { Construction, Train, Research, Upgrade };
  std::string product;
  Kind kind = Kind::Construction;
  std::int64_t remaining_ticks = 0;
  bool operator==(const Build&) const = default;
};
struct Repairing {
  std::string target;
  std::vector<Position> path;
  std::optional<Cell> planned_for;
  bool operator==(const Repairing&) const = default;
};
struct GameSpecific {
  std::string name;
  std::int64_t remaining_ticks = 0;
  bool operator==(const GameSpecific&) const = default;
};
}  // namespace action

using ActionState = std::variant<action::Idle, action::Moving, action::Attacking, action::Gathering, action::Build,
                                 action::Repairing, action::GameSpecific>;

struct Cargo {
  std::string resource;
  Quantity amount;
  bool operator==(const Cargo&) const = default;
};

struct Entity {
  std::string id;
  std::string owner;
  std::string proto;
  Position pos;
  double hp = 0.0;
  bool complete = true;
  ActionState action = action::Idle{};
  // Tick of the last shot per attack name. Seeded at spawn so a fresh
  // attack is ready on the first tick.
  std::map<std::string, std::int64_t> last_fired;
  std::optional<Cargo> carrying;
  std::vector<std::string> contained;
  std::optional<std::string> container;
  std::map<std::string, int> ability_uses_left;  // keyed by name_key(ability)
  std::vector<Cell> footprint;                   // buildings only

  bool operator==(const Entity&) const = default;
};

struct ActiveEffect {
  std::string ability;
  std::string source;
  std::string target;
  std::vector<PropertyModifier> modifiers;
  std::int64_t created_tick = 0;
  std::optional<std::int64_t> expires_at_tick;  // last tick on which it applies

  bool operator==(const ActiveEffect&) const = default;
};

struct PlayerState {
  std::string id;
  std::string faction;
  ResourceBank bank;
  ResourceBank spent;
  std::set<std::string> techs_done;  // name_key
  std::set<Cell> visible_cells;
  bool ever_owned = false;

  bool operator==(const PlayerState&) const = default;
};

struct CellState {
  std::vector<TerrainLayer> layers;
  std::map<std::string, Quantity> deposits;
  std::vector<std::string> blockers;  // building ids

  bool operator==(const CellState&) const = default;
};

struct LogRecord {
  std::int64_t tick = 0;
  std::string player;
  std::string command;
  bool operator==(const LogRecord&) const = default;
};

struct PlayerSpec {
  std::string id;
  std::string faction;
  bool operator==(const PlayerSpec&) const = default;
};

struct GameState {
  std::shared_ptr<const GameDefinition> def;
  std::string map_name;
  int width = 1;
  int height = 1;
  KernelConfig config;
  std::int64_t tick = 0;
  std::map<std::string, PlayerState> players;
  std::vector<std::string> player_order;
  std::map<std::string, Entity> entities;
  std::vector<CellState> cells;  // row-major
  std::vector<ActiveEffect> effects;
  std::uint64_t rng_seed = 0;
  std::mt19937_64 rng;
  std::uint64_t rng_draws = 0;
  std::vector<LogRecord> command_log;
  std::map<std::string, int> id_counters;
  std::map<std::string, int> commands_this_tick;

  const MapDef& map() const;
  CellState& cell(Cell c) { return cells[static_cast<std::size_t>(c.y) * width + c.x]; }
  const CellState& cell(Cell c) const { return cells[static_cast<std::size_t>(c.y) * width + c.x]; }
  bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  bool in_bounds(Position p) const { return p.x >= 0 && p.y >= 0 && p.x <= width && p.y <= height; }
};

class KernelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownFaction : public KernelError {
 public:
  using KernelError::KernelError;
};

enum class RejectReason {
  UnknownPlayer,
  NotYourEntity,
  UnknownID,
  UnknownPrototype,
  InsufficientResources,
  MissingBuilding,
  MissingTech,
  BadTerrain,
  DistanceViolation,
  ContainFull,
  ArmorClassNotAllowed,
  AbilityExhausted,
  RequireTraitFailed,
  NotAnUpgrade,
  NotBuildable,
  UnknownAbility,
  Busy,
  Immobile,
  Unreachable,
  NoDeposit,
  NoAttack,
  Contained,
  AlreadyResearched,
  BudgetExceeded,
  BadArguments,
};

const char* to_string(RejectReason r);

struct CommandReceipt {
  bool accepted = true;
  RejectReason reason = RejectReason::BadArguments;
  std::string detail;

  static CommandReceipt ok(std::string detail = {}) { return {true, RejectReason::BadArguments, std::move(detail)}; }
  static CommandReceipt reject(RejectReason r, std::string detail = {}) { return {false, r, std::move(detail)}; }
  // "accepted ..." or "<Reason> ..."
  std::string to_string() const;
};

// Starting entities come from the map's Start block, one slot per player in
// the given order.
GameState new_game(std::shared_ptr<const GameDefinition> def, const std::vector<PlayerSpec>& players,
                   std::uint64_t seed, const KernelConfig& config = {}, const std::string& map_name = {});
GameState new_game(std::shared_ptr<const GameDefinition> def, const std::vector<PlayerSpec>& players,
                   std::uint64_t seed, int tick_hz);

// Places a completed entity; returns its id. Throws KernelError when the
// prototype or position is invalid.
std::string spawn_entity(GameState& state, const std::string& player, const std::string& proto, Position pos);

CommandReceipt submit(GameState& state, const std::string& player, const Command& command);

void tick(GameState& state);

std::int64_t seconds_to_ticks(double seconds, int tick_hz);

// Damage dealt by one hit. terrain_rules is keyed by name_key(label).
double resolve_damage(const AttackDef& attack, const std::vector<std::string>& attacker_layers,
                      const PrototypeDef& target, const std::vector<std::string>& target_layers,
                      const std::map<std::string, TerrainRule>& terrain_rules);
double apply_mitigation(const ArmorSpec& armor, const std::string& attack_name, double base);

// Queries used by the protocol and tests.
const PrototypeDef& prototype_of(const GameState& state, const Entity& e);
std::vector<std::string> layers_at(const GameState& state, Cell c);
std::vector<std::string> occupied_layers(const GameState& state, const Entity& e);
bool passable_for(const GameState& state, const PrototypeDef& proto, Cell c);
double effective_speed(const GameState& state, const Entity& e);
double effective_vision(const GameState& state, const Entity& e);
double effective_recharge(const GameState& state, const Entity& e, const AttackDef& attack);
std::optional<std::string> effective_trait(const GameState& state, const Entity& e, const std::string& trait_key);
bool attack_ready(const GameState& state, const Entity& e, const AttackDef& attack);
bool visible_to(const GameState& state, const std::string& player, const Entity& e);
// Distance from p to the entity's body: its footprint for buildings.
double body_distance(const GameState& state, Position p, const Entity& e);

// Per resource: banks + carried + deposits + spent.
ResourceBank resource_totals(const GameState& state);

std::uint64_t state_digest(const GameState& state);
std::string digest_hex(std::uint64_t digest);

struct EntityView {
  std::string id;
  std::string proto;
  ProtoKind kind = ProtoKind::Unit;
  std::optional<Position> pos;
  double hp = 0.0;
  bool complete = true;
  std::string action;        // tag, e.g. "Idle", "Gathering"
  std::string action_value;  // payload, may be empty
  std::optional<Cargo> carrying;
  double carry_capacity = 0.0;
  std::vector<std::string> contained;
};

struct EnemyView {
  std::string id;
  std::string proto;
  Position pos;
  std::optional<double> hp;
};

struct CellView {
  Cell at;
  std::vector<TerrainLayer> layers;  // conditional amounts are current
  std::map<std::string, Quantity> deposits;  // unconditional deposits
};

struct UpdateView {
  std::string player;
  std::int64_t tick = 0;
  ResourceBank bank;
  std::vector<EntityView> own;
  std::vector<EnemyView> enemies;
  std::vector<CellView> cells;
};

UpdateView visible_update(const GameState& state, const std::string& player);

}  // namespace rtsl

#endif  // RTSL_KERNEL_HPP
