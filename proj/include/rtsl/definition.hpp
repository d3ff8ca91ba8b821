// Typed game definitions compiled from RTSL documents.

#ifndef RTSL_DEFINITION_HPP
#define RTSL_DEFINITION_HPP

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rtsl/doc.hpp"
#include "rtsl/geometry.hpp"

namespace rtsl {

struct DamageRange {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const DamageRange&) const = default;
};

struct Mitigation {
  enum class Kind { Flat, Percent };
  Kind kind = Kind::Flat;
  double value = 0.0;
  // Name of the armor piece when it came from a named tag (e.g. "Shield").
  std::string label;

  bool operator==(const Mitigation&) const = default;
  static Mitigation flat(double v, std::string label = {}) { return {Kind::Flat, v, std::move(label)}; }
  static Mitigation percent(double v, std::string label = {}) { return {Kind::Percent, v, std::move(label)}; }
};

struct ArmorSpec {
  std::optional<Mitigation> universal;
  std::map<std::string, Mitigation> per_attack;  // keyed by name_key(attack)
  std::optional<std::string> armor_class;

  bool operator==(const ArmorSpec&) const = default;
};

struct DamageSpec {
  DamageRange universal;
  std::map<std::string, DamageRange> per_target;  // keyed by name_key(prototype)

  bool operator==(const DamageSpec&) const = default;
};

struct DistanceSpec {
  std::optional<double> greater;
  std::optional<double> less;

  bool operator==(const DistanceSpec&) const = default;
  bool admits(double d) const { return (!greater || d >= *greater) && (!less || d <= *less); }
};

struct RequireSpec {
  std::map<std::string, double> resources;
  std::vector<std::string> buildings;
  std::vector<std::string> techs;
  std::map<std::string, std::string> target_traits;
  std::optional<DistanceSpec> distance;

  bool operator==(const RequireSpec&) const = default;
  bool empty() const {
    return resources.empty() && buildings.empty() && techs.empty() && target_traits.empty() && !distance;
  }
};

struct AttackDef {
  std::string name;
  double range = 0.0;
  DamageSpec damage;
  double recharge_s = 1.0;
  ShapeSpec shape = shape::Point{};
  std::set<std::string> target_terrain;
  RequireSpec require;

  bool operator==(const AttackDef&) const = default;
};

struct PropertyModifier {
  enum class Kind { Set, AddPercent };
  // name_key of the property, e.g. "speed", "recharge", "biological".
  std::string property;
  Kind kind = Kind::Set;
  double value = 0.0;
  // Raw payload for Set modifiers on non-numeric traits.
  std::string text;

  bool operator==(const PropertyModifier&) const = default;
};

struct AbilityDef {
  std::string name;
  std::vector<PropertyModifier> target_modifiers;
  RequireSpec require;
  std::optional<double> time_limit_s;
  std::optional<int> use_limit;

  bool operator==(const AbilityDef&) const = default;
};

struct PurposeSpec {
  std::vector<std::string> process;
  std::vector<std::string> prepare;
  std::vector<std::string> build;

  bool operator==(const PurposeSpec&) const = default;
};

struct GatherCapacity {
  // The listing's first number: the amount carried in the sample instance.
  double carrying = 0.0;
  double capacity = 0.0;

  bool operator==(const GatherCapacity&) const = default;
};

struct ContainSpec {
  double max_weight = 0.0;
  std::set<std::string> allowed_armor_classes;  // empty admits any

  bool operator==(const ContainSpec&) const = default;
};

struct RepairRate {
  double rate_hp_per_s = 0.0;
  double range = 0.0;
  bool operator==(const RepairRate&) const = default;
};

struct RepairSpec {
  RepairRate universal;
  std::map<std::string, RepairRate> per_target;  // keyed by name_key(prototype)

  bool operator==(const RepairSpec&) const = default;
  const RepairRate& for_target(const std::string& proto_key) const {
    auto it = per_target.find(proto_key);
    return it == per_target.end() ? universal : it->second;
  }
};

// Instance fields that appear in prototype listings (UniqueID, Action,
// Position, Enemy). They describe a sample entity and are not used to spawn.
struct SampleInstance {
  std::optional<std::string> unique_id;
  std::optional<std::string> action;
  std::optional<Position> position;
  bool lists_enemies = false;

  bool operator==(const SampleInstance&) const = default;
};

enum class ProtoKind { Unit, Building };

struct PrototypeDef {
  ProtoKind kind = ProtoKind::Unit;
  std::string name;
  double max_health = 1.0;
  double build_time_s = 0.0;
  ArmorSpec armor;
  ShapeSpec shape = shape::Point{};
  std::set<std::string> occupy_terrain;
  std::optional<std::set<std::string>> movement_terrain;
  double vision = 0.0;
  double speed = 0.0;
  std::vector<AttackDef> attacks;
  RequireSpec require;
  std::vector<std::string> upgrades_to;
  PurposeSpec purpose;
  std::map<std::string, GatherCapacity> gather;
  std::optional<ContainSpec> contain;
  std::optional<RepairSpec> repair;
  std::vector<AbilityDef> abilities;
  std::optional<double> weight;
  std::map<std::string, std::string> traits;  // keyed by name_key(trait)
  SampleInstance sample;

  bool operator==(const PrototypeDef&) const = default;

  const std::set<std::string>& moves_over() const { return movement_terrain ? *movement_terrain : occupy_terrain; }
  bool mobile() const { return speed > 0.0; }
  const AbilityDef* ability(const std::string& name) const;
};

struct TechDef {
  std::string name;
  double build_time_s = 0.0;
  RequireSpec require;

  bool operator==(const TechDef&) const = default;
};

struct FactionDef {
  std::string name;
  std::vector<PrototypeDef> buildings;
  std::vector<PrototypeDef> units;
  std::vector<TechDef> techs;

  bool operator==(const FactionDef&) const = default;
  const PrototypeDef* prototype(const std::string& name) const;
  const TechDef* tech(const std::string& name) const;
};

struct TerrainCondition {
  std::string resource;
  double amount = 0.0;
  std::string replacement_label;

  bool operator==(const TerrainCondition&) const = default;
};

struct TerrainLayer {
  std::string label;
  std::optional<TerrainCondition> condition;

  bool operator==(const TerrainLayer&) const = default;
};

struct CellDef {
  std::vector<TerrainLayer> layers;
  // Includes the amounts held by conditional layers.
  std::map<std::string, double> deposits;

  bool operator==(const CellDef&) const = default;
};

struct StartPlacement {
  std::string prototype;
  Position position;
  bool operator==(const StartPlacement&) const = default;
};

struct MapDef {
  std::string name;
  int width = 1;
  int height = 1;
  // Declared cells only; every other cell is a single default_layer.
  std::map<Cell, CellDef> cells;
  std::string default_layer = "Ground";
  // Starting entities per player slot (index 0 is the first player).
  std::vector<std::vector<StartPlacement>> start;

  bool operator==(const MapDef&) const = default;
};

// Terrain-conditional adjustments keyed by the terrain label they belong to.
struct TerrainRule {
  // Attacks launched from this terrain against targets on the keyed terrain:
  // signed percent applied to damage.
  std::map<std::string, double> attack_damage_percent;
  // Signed percent adjustments for entities standing on this terrain.
  std::optional<double> speed_percent;
  std::optional<double> vision_percent;

  bool operator==(const TerrainRule&) const = default;
};

struct GameDefinition {
  std::vector<FactionDef> factions;
  std::map<std::string, double> starting_resources;
  std::vector<MapDef> maps;
  std::map<std::string, TerrainRule> terrain_rules;  // keyed by name_key(label)

  bool operator==(const GameDefinition&) const = default;
  const FactionDef* faction(const std::string& name) const;
  // Empty name selects the first map.
  const MapDef* map(const std::string& name = {}) const;
  const MapDef& primary_map() const { return maps.front(); }
};

enum class CompileErrorKind { MissingField, BadNumber, DuplicateName, UnexpectedTag, InvalidValue, Reference };

const char* to_string(CompileErrorKind kind);

struct Diagnostic {
  enum class Category {
    UnknownUpgradeTarget,
    UnknownResource,
    UnknownBuilding,
    UnknownTech,
    UnknownBuildProduct,
    UnknownPrototype,
  };
  Category category;
  std::string path;
  std::string name;

  bool operator==(const Diagnostic&) const = default;
};

const char* to_string(Diagnostic::Category category);

// `LEVEL path message` with spaces in the path replaced by underscores.
std::string format_diagnostic(const Diagnostic& d);

class CompileError : public std::runtime_error {
 public:
  CompileError(CompileErrorKind kind, std::string path, const std::string& detail);
  CompileError(std::vector<Diagnostic> diagnostics);

  CompileErrorKind kind() const { return kind_; }
  const std::string& path() const { return path_; }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  CompileErrorKind kind_;
  std::string path_;
  std::vector<Diagnostic> diagnostics_;
};

struct CompileOptions {
  std::string default_layer = "Ground";
  // When false, reference diagnostics are left to validate_references.
  bool check_references = true;
};

GameDefinition compile_definition(const DocNode& root, const CompileOptions& options = {});

std::vector<Diagnostic> validate_references(const GameDefinition& def);

// "3-9", "2 - 5" or a single number. The result satisfies min <= max.
DamageRange parse_range_text(std::string_view text);

// Parses a number; throws CompileError(BadNumber) naming `path`.
double parse_real(std::string_view text, const std::string& path);

}  // namespace rtsl

#endif  // RTSL_DEFINITION_HPP
