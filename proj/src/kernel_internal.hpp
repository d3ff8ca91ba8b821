// Helpers shared by the kernel translation units.

#ifndef RTSL_KERNEL_INTERNAL_HPP
#define RTSL_KERNEL_INTERNAL_HPP

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rtsl/kernel.hpp"

namespace rtsl::detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool has_label(const std::set<std::string>& labels, const std::string& label);
bool intersects(const std::set<std::string>& labels, const std::vector<std::string>& layers);

const FactionDef& faction_of(const GameState& state, const std::string& player);
// Declared spelling of a resource name, falling back to the input.
std::string canonical_resource(const GameState& state, const std::string& name);
const GatherCapacity* gather_capacity(const PrototypeDef& proto, const std::string& resource);

Cell entity_cell(const GameState& state, const Entity& e);
std::vector<Cell> footprint_of(const GameState& state, const PrototypeDef& proto, Position center);

std::string next_id(GameState& state, const std::string& proto_name);
// Creates the entity without placement checks.
Entity& place_entity(GameState& state, const std::string& player, const PrototypeDef& proto, Position pos,
                     bool complete);
void set_prototype(GameState& state, Entity& e, const PrototypeDef& proto);
// Nearest free cell around an entity where `proto` may stand.
std::optional<Position> spawn_point_near(const GameState& state, const Entity& origin, const PrototypeDef& proto);

bool owns_complete(const GameState& state, const std::string& player, const std::string& proto_name);
bool has_tech(const GameState& state, const std::string& player, const std::string& tech);

// Missing resources for `cost` times `count`; empty when affordable.
std::vector<std::string> missing_resources(const GameState& state, const std::string& player,
                                           const std::map<std::string, double>& cost, int count = 1);
void debit(GameState& state, const std::string& player, const std::map<std::string, double>& cost, int count = 1);

// Attack legality against a target's occupied layers.
bool attack_legal(const GameState& state, const AttackDef& attack, const Entity& target);
double effective_range(const GameState& state, const Entity& e, const AttackDef& attack);
double apply_effects(const GameState& state, const std::string& entity_id, const std::string& property, double base);

// Route from e to any passable cell whose center satisfies `goal`. Cells are
// searched inside [lo, hi]. Empty path when e already satisfies it.
std::optional<std::vector<Position>> route_to(const GameState& state, const Entity& e,
                                              const std::function<bool(Position)>& goal, Cell lo, Cell hi);
std::optional<std::vector<Position>> route_near(const GameState& state, const Entity& e, const Entity& target,
                                                double range);

bool passable_cell(const GameState& state, const PrototypeDef& proto, Cell c, const std::string* self);
const Entity* nearest_process(const GameState& state, const Entity& e, const std::string& resource);
// A resource named in any Prepare list needs an owned Prepare building on the cell.
bool prepare_ok(const GameState& state, const std::string& player, const std::string& resource, Cell cell);
bool numeric_modifier(const PropertyModifier& m);
void recompute_vision(GameState& state);

double base_damage(const AttackDef& attack, const PrototypeDef& target);
double resolve_with_base(double base, const AttackDef& attack, const std::vector<std::string>& attacker_layers,
                         const PrototypeDef& target, const std::vector<std::string>& target_layers,
                         const std::map<std::string, TerrainRule>& terrain_rules);

void record_command(GameState& state, const std::string& player, const Command& command);

}  // namespace rtsl::detail

#endif  // RTSL_KERNEL_INTERNAL_HPP
