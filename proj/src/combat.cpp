#include <algorithm>

#include "kernel_internal.hpp"

namespace rtsl {

namespace detail {

double base_damage(const AttackDef& attack, const PrototypeDef& target) {
  auto it = attack.damage.per_target.find(name_key(target.name));
  return it == attack.damage.per_target.end() ? attack.damage.universal.max : it->second.max;
}

double resolve_with_base(double base, const AttackDef& attack, const std::vector<std::string>& attacker_layers,
                         const PrototypeDef& target, const std::vector<std::string>& target_layers,
                         const std::map<std::string, TerrainRule>& terrain_rules) {
  double dmg = base;
  // Rules belong to the attacker's terrain and name the target's terrain.
  for (const auto& from : attacker_layers) {
    auto rule = terrain_rules.find(name_key(from));
    if (rule == terrain_rules.end()) continue;
    for (const auto& to : target_layers) {
      auto pct = rule->second.attack_damage_percent.find(name_key(to));
      if (pct != rule->second.attack_damage_percent.end()) dmg *= 1.0 + pct->second / 100.0;
    }
  }
  return apply_mitigation(target.armor, attack.name, dmg);
}

}  // namespace detail

double apply_mitigation(const ArmorSpec& armor, const std::string& attack_name, double base) {
  const Mitigation* m = nullptr;
  auto it = armor.per_attack.find(name_key(attack_name));
  if (it != armor.per_attack.end()) {
    m = &it->second;
  } else if (armor.universal) {
    m = &*armor.universal;
  }
  double out = base;
  if (m) out = m->kind == Mitigation::Kind::Flat ? base - m->value : base * (1.0 - m->value / 100.0);
  return std::max(out, 0.0);
}

double resolve_damage(const AttackDef& attack, const std::vector<std::string>& attacker_layers,
                      const PrototypeDef& target, const std::vector<std::string>& target_layers,
                      const std::map<std::string, TerrainRule>& terrain_rules) {
  return detail::resolve_with_base(detail::base_damage(attack, target), attack, attacker_layers, target,
                                   target_layers, terrain_rules);
}

}  // namespace rtsl
