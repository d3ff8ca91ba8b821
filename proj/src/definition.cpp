#include "rtsl/definition.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace rtsl {

namespace {

std::string join(const std::string& path, const std::string& part) { return path.empty() ? part : path + "/" + part; }

[[noreturn]] void fail(CompileErrorKind kind, const std::string& path, const std::string& detail) {
  throw CompileError(kind, path, detail);
}

bool try_real(std::string_view text, double& out) {
  std::string_view s = trim(text);
  std::string buf;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    if (s.front() == '-') buf.push_back('-');
    s = trim(s.substr(1));
  }
  buf.append(s);
  if (buf.empty()) return false;
  auto [ptr, ec] = std::from_chars(buf.data(), buf.data() + buf.size(), out);
  return ec == std::errc() && ptr == buf.data() + buf.size() && std::isfinite(out);
}

// "3%" -> (3, true); "4" -> (4, false).
bool try_amount(std::string_view text, double& out, bool& percent) {
  std::string_view s = trim(text);
  percent = !s.empty() && s.back() == '%';
  if (percent) s.remove_suffix(1);
  return try_real(s, out);
}

bool try_range(std::string_view text, DamageRange& out) {
  try {
    out = parse_range_text(text);
    return true;
  } catch (const CompileError&) {
    return false;
  }
}

// Two numbers separated by '-' or ',' without reordering ("10-5" stays 10, 5).
std::optional<std::pair<double, double>> try_pair(std::string_view text) {
  std::string_view s = trim(text);
  std::size_t sep = s.find_first_of("-,x", 1);
  if (sep == std::string_view::npos) return std::nullopt;
  double a = 0;
  double b = 0;
  if (!try_real(s.substr(0, sep), a) || !try_real(s.substr(sep + 1), b)) return std::nullopt;
  return std::make_pair(a, b);
}

std::string normalize_value(std::string_view text) {
  std::string key = name_key(text);
  if (key == "true") return "True";
  if (key == "false") return "False";
  return std::string(trim(text));
}

double require_real(const DocNode& n, const std::string& path) {
  if (!n.text) fail(CompileErrorKind::MissingField, path, "expected a number");
  return parse_real(*n.text, path);
}

double require_nonneg(const DocNode& n, const std::string& path) {
  double v = require_real(n, path);
  if (v < 0) fail(CompileErrorKind::InvalidValue, path, "must be >= 0");
  return v;
}

double require_positive(const DocNode& n, const std::string& path) {
  double v = require_real(n, path);
  if (v <= 0) fail(CompileErrorKind::InvalidValue, path, "must be > 0");
  return v;
}

// Items of a list-valued node: its text, or its (empty) children's tags.
std::vector<std::string> list_items(const DocNode& n, const std::string& path) {
  if (n.text) return {*n.text};
  std::vector<std::string> out;
  for (const auto& c : n.children) {
    if (!c.is_empty()) fail(CompileErrorKind::UnexpectedTag, join(path, c.tag), "expected a bare name");
    out.push_back(c.tag);
  }
  return out;
}

std::set<std::string> label_set(const DocNode& n, const std::string& path) {
  auto items = list_items(n, path);
  return {items.begin(), items.end()};
}

template <class Map>
void insert_unique(Map& m, const std::string& key, typename Map::mapped_type value, const std::string& path) {
  if (!m.emplace(key, std::move(value)).second) fail(CompileErrorKind::DuplicateName, path, "duplicate '" + key + "'");
}

Keyword kw(const DocNode& n) { return classify_tag(n.tag).keyword; }

double parse_percent(const DocNode& n, const std::string& path) {
  if (!n.text) fail(CompileErrorKind::MissingField, path, "expected a percentage");
  double v = 0;
  bool pct = false;
  if (!try_amount(*n.text, v, pct)) fail(CompileErrorKind::BadNumber, path, "'" + *n.text + "' is not a percentage");
  return v;
}

Mitigation parse_mitigation(std::string_view text, std::string label, const std::string& path) {
  double v = 0;
  bool pct = false;
  if (!try_amount(text, v, pct)) fail(CompileErrorKind::BadNumber, path, "'" + std::string(text) + "' is not armor");
  if (v < 0 || (pct && v > 100)) fail(CompileErrorKind::InvalidValue, path, "armor out of range");
  return pct ? Mitigation::percent(v, std::move(label)) : Mitigation::flat(v, std::move(label));
}

ShapeSpec make_shape(Keyword kind, const std::optional<std::string>& size, const std::string& path) {
  if (kind == Keyword::Point) return shape::Point{};
  if (!size) fail(CompileErrorKind::MissingField, join(path, "Size"), "shape needs a size");
  auto one = [&] {
    double v = parse_real(*size, join(path, "Size"));
    if (v <= 0) fail(CompileErrorKind::InvalidValue, join(path, "Size"), "must be > 0");
    return v;
  };
  auto two = [&] {
    auto p = try_pair(*size);
    if (!p) fail(CompileErrorKind::BadNumber, join(path, "Size"), "expected two numbers, got '" + *size + "'");
    if (p->first <= 0 || p->second <= 0) fail(CompileErrorKind::InvalidValue, join(path, "Size"), "must be > 0");
    return *p;
  };
  switch (kind) {
    case Keyword::Square: return shape::Square{one()};
    case Keyword::Circle: return shape::Circle{one()};
    case Keyword::Rectangle: {
      auto [a, b] = two();
      return shape::Rectangle{a, b};
    }
    case Keyword::FCone: {
      auto [a, b] = two();
      return shape::FCone{a, b};
    }
    case Keyword::BCone: {
      auto [a, b] = two();
      return shape::BCone{a, b};
    }
    default: fail(CompileErrorKind::InvalidValue, path, "unknown shape");
  }
}

bool is_shape_keyword(Keyword k) {
  return k == Keyword::Point || k == Keyword::Square || k == Keyword::Rectangle || k == Keyword::Circle ||
         k == Keyword::FCone || k == Keyword::BCone;
}

// Handles both `<Shape>Circle</Shape><Size>..` and `<Shape><Square>2</Square>`.
ShapeSpec compile_shape(const DocNode& shape, const std::optional<std::string>& sibling_size, const std::string& path) {
  if (shape.text) {
    Keyword k = classify_tag(*shape.text).keyword;
    if (!is_shape_keyword(k)) fail(CompileErrorKind::InvalidValue, path, "unknown shape '" + *shape.text + "'");
    return make_shape(k, sibling_size, path);
  }
  if (shape.children.size() != 1) fail(CompileErrorKind::InvalidValue, path, "expected exactly one shape");
  const DocNode& s = shape.children.front();
  Keyword k = kw(s);
  const std::string spath = join(path, s.tag);
  if (!is_shape_keyword(k)) fail(CompileErrorKind::UnexpectedTag, spath, "unknown shape");
  std::optional<std::string> size = s.text;
  for (const auto& c : s.children) {
    if (kw(c) != Keyword::Size || !c.text) fail(CompileErrorKind::UnexpectedTag, join(spath, c.tag), "expected Size");
    size = c.text;
  }
  if (!size) size = sibling_size;
  return make_shape(k, size, spath);
}

DistanceSpec compile_distance(const DocNode& n, const std::string& path) {
  DistanceSpec d;
  for (const auto& c : n.children) {
    const std::string cp = join(path, c.tag);
    switch (kw(c)) {
      case Keyword::Less: d.less = require_nonneg(c, cp); break;
      case Keyword::Greater: d.greater = require_nonneg(c, cp); break;
      default: fail(CompileErrorKind::UnexpectedTag, cp, "expected Less or Greater");
    }
  }
  if (d.greater && d.less && !(*d.greater < *d.less)) {
    fail(CompileErrorKind::InvalidValue, path, "Greater must be below Less");
  }
  return d;
}

RequireSpec compile_require(const DocNode& n, const std::string& path) {
  RequireSpec r;
  if (n.text) {
    r.techs.push_back(*n.text);
    return r;
  }
  for (const auto& c : n.children) {
    const std::string cp = join(path, c.tag);
    switch (kw(c)) {
      case Keyword::Resource:
        for (const auto& res : c.children) {
          const std::string rp = join(cp, res.tag);
          insert_unique(r.resources, res.tag, require_nonneg(res, rp), rp);
        }
        if (c.text) fail(CompileErrorKind::InvalidValue, cp, "expected resource amounts");
        break;
      case Keyword::Building:
        for (auto& b : list_items(c, cp)) r.buildings.push_back(b);
        break;
      case Keyword::Enemy:
        for (const auto& t : c.children) {
          std::string value = t.text ? normalize_value(*t.text) : "True";
          insert_unique(r.target_traits, name_key(t.tag), value, join(cp, t.tag));
        }
        break;
      case Keyword::Distance: r.distance = compile_distance(c, cp); break;
      case Keyword::GameSpecific:
        if (c.is_empty()) {
          r.techs.push_back(c.tag);
        } else if (c.text) {
          insert_unique(r.resources, c.tag, require_nonneg(c, cp), cp);
        } else {
          fail(CompileErrorKind::UnexpectedTag, cp, "unexpected nested requirement");
        }
        break;
      default: fail(CompileErrorKind::UnexpectedTag, cp, "not valid inside Require");
    }
  }
  return r;
}

DamageSpec compile_damage(const DocNode& n, const std::string& path) {
  DamageSpec d;
  bool have_universal = false;
  if (n.text) {
    d.universal = parse_range_text(*n.text);
    have_universal = true;
  }
  for (const auto& c : n.children) {
    const std::string cp = join(path, c.tag);
    DamageRange r;
    if (c.is_empty() && try_range(c.tag, r)) {
      d.universal = r;
      have_universal = true;
    } else if (c.text) {
      insert_unique(d.per_target, name_key(c.tag), parse_range_text(*c.text), cp);
    } else {
      fail(CompileErrorKind::UnexpectedTag, cp, "expected a damage range");
    }
  }
  if (!have_universal) fail(CompileErrorKind::MissingField, path, "damage needs a universal range");
  return d;
}

AttackDef compile_attack(const DocNode& n, const std::string& path) {
  AttackDef a;
  a.name = n.tag;
  const DocNode* shape = nullptr;
  std::optional<std::string> size;
  bool have_range = false;
  bool have_damage = false;
  bool have_recharge = false;
  for (const auto& c : n.children) {
    const std::string cp = join(path, c.tag);
    switch (kw(c)) {
      case Keyword::Range:
        a.range = require_nonneg(c, cp);
        have_range = true;
        break;
      case Keyword::Damage:
        a.damage = compile_damage(c, cp);
        have_damage = true;
        break;
      case Keyword::Recharge:
        a.recharge_s = require_positive(c, cp);
        have_recharge = true;
        break;
      case Keyword::Shape: shape = &c; break;
      case Keyword::Size: size = c.text; break;
      case Keyword::Terrain: a.target_terrain = label_set(c, cp); break;
      case Keyword::Require: a.require = compile_require(c, cp); break;
      default: fail(CompileErrorKind::UnexpectedTag, cp, "not valid inside an attack");
    }
  }
  if (!have_range) fail(CompileErrorKind::MissingField, join(path, "Range"), "attack needs a range");
  if (!have_damage) fail(CompileErrorKind::MissingField, join(path, "Damage"), "attack needs damage");
  if (!have_recharge) fail(CompileErrorKind::MissingField, join(path, "Recharge"), "attack needs a recharge");
  if (shape) a.shape = compile_shape(*shape, size, join(path, "Shape"));
  return a;
}

PropertyModifier compile_modifier(const DocNode& n, const std::string& path) {
  PropertyModifier m;
  m.property = name_key(n.tag);
  if (!n.children.empty()) fail(CompileErrorKind::UnexpectedTag, path, "modifier must be a value");
  if (!n.text) {
    m.text = "True";
    return m;
  }
  double v = 0;
  bool pct = false;
  if (try_amount(*n.text, v, pct)) {
    m.kind = pct ? PropertyModifier::Kind::AddPercent : PropertyModifier::Kind::Set;
    m.value = v;
    m.text = std::string(trim(*n.text));
  } else {
    m.text = normalize_value(*n.text);
  }
  return m;
}

AbilityDef compile_ability(const DocNode& n, const std::string& path) {
  AbilityDef a;
  a.name = n.tag;
  for (const auto& c : n.children) {
    const std::string cp = join(path, c.tag);
    switch (kw(c)) {
      case Keyword::Enemy:
        for (const auto& m : c.children) a.target_modifiers.push_back(compile_modifier(m, join(cp, m.tag)));
        break;
      case Keyword::Require: a.require = compile_require(c, cp); break;
      case Keyword::TimeLimit: a.time_limit_s = require_positive(c, cp); break;
      case Keyword::Limit: {
        double v = require_real(c, cp);
        if (v < 1 || std::floor(v) != v) fail(CompileErrorKind::InvalidValue, cp, "limit must be an integer >= 1");
        a.use_limit = static_cast<int>(v);
        break;
      }
      default: fail(CompileErrorKind::UnexpectedTag, cp, "not valid inside an ability");
    }
  }
  return a;
}

ArmorSpec compile_armor(const DocNode& n, const std::set<std::string>& attack_names, const std::string& path) {
  ArmorSpec a;
  auto bare_value = [&](const std::string& s, const std::string& p) {
    double v = 0;
    bool pct = false;
    if (try_amount(s, v, pct)) {
      a.universal = parse_mitigation(s, {}, p);
    } else {
      a.armor_class = s;
    }
  };
  if (n.text) bare_value(*n.text, path);
  for (const auto& c : n.children) {
    if (c.is_empty()) bare_value(c.tag, join(path, c.tag));
  }
  const bool explicit_universal = a.universal.has_value();
  for (const auto& c : n.children) {
    if (c.is_empty()) continue;
    const std::string cp = join(path, c.tag);
    if (!c.text) fail(CompileErrorKind::UnexpectedTag, cp, "armor entries need a value");
    Mitigation m = parse_mitigation(*c.text, c.tag, cp);
    const std::string key = name_key(c.tag);
    if (explicit_universal || attack_names.count(key)) {
      insert_unique(a.per_attack, key, m, cp);
    } else if (a.universal) {
      fail(CompileErrorKind::InvalidValue, cp, "more than one named armor piece without a matching attack");
    } else {
      a.universal = m;
    }
  }
  return a;
}

RepairRate compile_repair_rate(const DocNode& n, RepairRate defaults, const std::string& path) {
  RepairRate r = defaults;
  bool have_rate = false;
  if (n.text) {
    r.rate_hp_per_s = parse_real(*n.text, path);
    have_rate = true;
  }
  for (const auto& c : n.children) {
    double v = 0;
    if (c.is_empty() && try_real(c.tag, v)) {
      r.rate_hp_per_s = v;
      have_rate = true;
    } else if (kw(c) == Keyword::Range) {
      r.range = require_nonneg(c, join(path, c.tag));
    }
  }
  if (have_rate && r.rate_hp_per_s <= 0) fail(CompileErrorKind::InvalidValue, path, "repair rate must be > 0");
  return r;
}

RepairSpec compile_repair(const DocNode& n, const std::string& path) {
  RepairSpec r;
  r.universal = compile_repair_rate(n, RepairRate{0.0, 1.0}, path);
  if (r.universal.rate_hp_per_s <= 0) fail(CompileErrorKind::MissingField, path, "repair needs a rate");
  for (const auto& c : n.children) {
    double v = 0;
    if ((c.is_empty() && try_real(c.tag, v)) || kw(c) == Keyword::Range) continue;
    const std::string cp = join(path, c.tag);
    if (kw(c) != Keyword::GameSpecific) fail(CompileErrorKind::UnexpectedTag, cp, "not valid inside Repair");
    insert_unique(r.per_target, name_key(c.tag), compile_repair_rate(c, r.universal, cp), cp);
  }
  return r;
}

PurposeSpec compile_purpose(const DocNode& n, const std::string& path) {
  PurposeSpec p;
  for (const auto& c : n.children) {
    const std::string cp = join(path, c.tag);
    switch (kw(c)) {
      case Keyword::Process:
        if (c.children.size() == 1 && kw(c.children.front()) == Keyword::Resource) {
          p.process = list_items(c.children.front(), join(cp, "Resource"));
        } else {
          p.process = list_items(c, cp);
        }
        break;
      case Keyword::Prepare:
        if (c.children.size() == 1 && kw(c.children.front()) == Keyword::Resource) {
          p.prepare = list_items(c.children.front(), join(cp, "Resource"));
        } else {
          p.prepare = list_items(c, cp);
        }
        break;
      case Keyword::Build: p.build = list_items(c, cp); break;
      default: fail(CompileErrorKind::UnexpectedTag, cp, "not valid inside Purpose");
    }
  }
  return p;
}

Position parse_position_text(std::string_view text, const std::string& path) {
  std::string_view s = trim(text);
  if (s.size() >= 2 && s.front() == '(' && s.back() == ')') s = s.substr(1, s.size() - 2);
  std::size_t comma = s.find(',');
  double x = 0;
  double y = 0;
  if (comma == std::string_view::npos || !try_real(s.substr(0, comma), x) || !try_real(s.substr(comma + 1), y)) {
    fail(CompileErrorKind::BadNumber, path, "'" + std::string(text) + "' is not a position");
  }
  return {x, y};
}

SampleInstance& sample_position(SampleInstance& s, const DocNode& n, const std::string& path) {
  if (n.text) {
    s.position = parse_position_text(*n.text, path);
    return s;
  }
  for (const auto& c : n.children) {
    if (kw(c) != Keyword::XY || !c.text) fail(CompileErrorKind::UnexpectedTag, join(path, c.tag), "expected X,Y");
    s.position = parse_position_text(*c.text, join(path, c.tag));
  }
  return s;
}

PrototypeDef compile_prototype(ProtoKind kind, const DocNode& n, const std::set<std::string>& attack_names,
                               const std::string& path) {
  PrototypeDef p;
  p.kind = kind;
  p.name = n.tag;
  if (n.text) fail(CompileErrorKind::UnexpectedTag, path, "prototype must contain fields");
  bool have_hp = false;
  const DocNode* shape = nullptr;
  const DocNode* armor = nullptr;
  std::optional<std::string> size;
  for (const auto& c : n.children) {
    const std::string cp = join(path, c.tag);
    switch (kw(c)) {
      case Keyword::HealthPoint:
        p.max_health = require_positive(c, cp);
        have_hp = true;
        break;
      case Keyword::BuildingTime: p.build_time_s = require_nonneg(c, cp); break;
      case Keyword::Armor: armor = &c; break;
      case Keyword::Shape: shape = &c; break;
      case Keyword::Size:
        if (!c.text) fail(CompileErrorKind::MissingField, cp, "size needs a value");
        size = c.text;
        break;
      case Keyword::Terrain: p.occupy_terrain = label_set(c, cp); break;
      case Keyword::Movement:
        for (const auto& m : c.children) {
          const std::string mp = join(cp, m.tag);
          if (kw(m) == Keyword::Terrain) {
            p.movement_terrain = label_set(m, mp);
          } else if (kw(m) == Keyword::Speed) {
            p.speed = require_nonneg(m, mp);
          } else {
            fail(CompileErrorKind::UnexpectedTag, mp, "not valid inside Movement");
          }
        }
        if (!p.movement_terrain) fail(CompileErrorKind::MissingField, join(cp, "Terrain"), "movement needs terrain");
        break;
      case Keyword::Vision: p.vision = require_nonneg(c, cp); break;
      case Keyword::Speed: p.speed = require_nonneg(c, cp); break;
      case Keyword::Attack:
        for (const auto& a : c.children) p.attacks.push_back(compile_attack(a, join(cp, a.tag)));
        break;
      case Keyword::Require: p.require = compile_require(c, cp); break;
      case Keyword::Upgrade:
        for (auto& u : list_items(c, cp)) p.upgrades_to.push_back(u);
        break;
      case Keyword::Purpose: p.purpose = compile_purpose(c, cp); break;
      case Keyword::Gather:
        for (const auto& g : c.children) {
          const std::string gp = join(cp, g.tag);
          if (!g.text) fail(CompileErrorKind::MissingField, gp, "gather needs a capacity");
          GatherCapacity cap;
          double single = 0;
          if (try_real(*g.text, single)) {
            cap.capacity = single;
          } else {
            DamageRange r = parse_range_text(*g.text);
            cap.carrying = r.min;
            cap.capacity = r.max;
          }
          if (cap.capacity <= 0) fail(CompileErrorKind::InvalidValue, gp, "capacity must be > 0");
          insert_unique(p.gather, g.tag, cap, gp);
        }
        break;
      case Keyword::Contain: {
        ContainSpec spec;
        bool have_weight = false;
        for (const auto& k : c.children) {
          const std::string kp = join(cp, k.tag);
          if (kw(k) == Keyword::Weight) {
            spec.max_weight = require_positive(k, kp);
            have_weight = true;
          } else if (kw(k) == Keyword::Armor) {
            spec.allowed_armor_classes = label_set(k, kp);
          } else {
            fail(CompileErrorKind::UnexpectedTag, kp, "not valid inside Contain");
          }
        }
        if (!have_weight) fail(CompileErrorKind::MissingField, join(cp, "Weight"), "contain needs a weight");
        p.contain = spec;
        break;
      }
      case Keyword::Repair: p.repair = compile_repair(c, cp); break;
      case Keyword::Weight: p.weight = require_positive(c, cp); break;
      case Keyword::UniqueID:
        if (c.text) p.sample.unique_id = *c.text;
        break;
      case Keyword::Action:
        if (c.text) {
          p.sample.action = *c.text;
        } else if (!c.children.empty()) {
          p.sample.action = c.children.front().tag;
        }
        break;
      case Keyword::Position: sample_position(p.sample, c, cp); break;
      case Keyword::Enemy: p.sample.lists_enemies = true; break;
      case Keyword::GameSpecific:
        if (!c.children.empty()) {
          p.abilities.push_back(compile_ability(c, cp));
        } else {
          insert_unique(p.traits, name_key(c.tag), c.text ? normalize_value(*c.text) : std::string("True"), cp);
        }
        break;
      default: fail(CompileErrorKind::UnexpectedTag, cp, "not valid inside a prototype");
    }
  }
  if (!have_hp) fail(CompileErrorKind::MissingField, join(path, "Health Point"), "prototype needs health points");
  if (shape) {
    p.shape = compile_shape(*shape, size, join(path, "Shape"));
  } else if (size) {
    fail(CompileErrorKind::MissingField, join(path, "Shape"), "size given without a shape");
  }
  if (armor) p.armor = compile_armor(*armor, attack_names, join(path, "Armor"));
  if (kind == ProtoKind::Building && !p.movement_terrain) p.speed = 0.0;
  for (auto& a : p.attacks) {
    if (a.target_terrain.empty()) a.target_terrain = p.occupy_terrain;
    if (a.target_terrain.empty()) {
      fail(CompileErrorKind::MissingField, join(join(path, a.name), "Terrain"), "attack has no target terrain");
    }
  }
  return p;
}

TechDef compile_tech(const DocNode& n, const std::string& path) {
  TechDef t;
  t.name = n.tag;
  for (const auto& c : n.children) {
    const std::string cp = join(path, c.tag);
    switch (kw(c)) {
      case Keyword::BuildingTime: t.build_time_s = require_nonneg(c, cp); break;
      case Keyword::Require: t.require = compile_require(c, cp); break;
      default: fail(CompileErrorKind::UnexpectedTag, cp, "not valid inside a tech");
    }
  }
  return t;
}

void compile_terrain_rule(const DocNode& label, GameDefinition& def, const std::string& path) {
  TerrainRule rule;
  for (const auto& c : label.children) {
    const std::string cp = join(path, c.tag);
    if (kw(c) != Keyword::Modify) fail(CompileErrorKind::UnexpectedTag, cp, "expected Modify");
    for (const auto& m : c.children) {
      const std::string mp = join(cp, m.tag);
      switch (kw(m)) {
        case Keyword::Attack:
          for (const auto& target : m.children) {
            const std::string tp = join(mp, target.tag);
            for (const auto& prop : target.children) {
              if (kw(prop) != Keyword::Damage) fail(CompileErrorKind::UnexpectedTag, join(tp, prop.tag), "expected Damage");
              insert_unique(rule.attack_damage_percent, name_key(target.tag), parse_percent(prop, join(tp, prop.tag)),
                            tp);
            }
          }
          break;
        case Keyword::Speed: rule.speed_percent = parse_percent(m, mp); break;
        case Keyword::Vision: rule.vision_percent = parse_percent(m, mp); break;
        default: fail(CompileErrorKind::UnexpectedTag, mp, "not valid inside Modify");
      }
    }
  }
  insert_unique(def.terrain_rules, name_key(label.tag), rule, path);
}

std::vector<TerrainLayer> compile_layers(const DocNode& n, CellDef& cell, GameDefinition& def, const std::string& path) {
  std::vector<TerrainLayer> layers;
  if (n.text) {
    layers.push_back({*n.text, std::nullopt});
    return layers;
  }
  for (const auto& c : n.children) {
    const std::string cp = join(path, c.tag);
    if (c.is_empty()) {
      layers.push_back({c.tag, std::nullopt});
    } else if (c.text && c.condition_suffix) {
      double amount = parse_real(*c.text, cp);
      if (amount <= 0) fail(CompileErrorKind::InvalidValue, cp, "conditional amount must be > 0");
      layers.push_back({c.tag, TerrainCondition{c.tag, amount, *c.condition_suffix}});
      insert_unique(cell.deposits, c.tag, amount, cp);
    } else if (!c.children.empty()) {
      compile_terrain_rule(c, def, cp);
      layers.push_back({c.tag, std::nullopt});
    } else {
      fail(CompileErrorKind::InvalidValue, cp, "terrain value needs a '/Label' replacement");
    }
  }
  return layers;
}

MapDef compile_map(const DocNode& n, GameDefinition& def, const CompileOptions& options, const std::string& path) {
  MapDef m;
  m.default_layer = options.default_layer;
  bool have_name = false;
  std::optional<std::pair<int, int>> size;
  int max_x = 0;
  int max_y = 0;
  for (const auto& c : n.children) {
    const std::string cp = join(path, c.tag);
    switch (kw(c)) {
      case Keyword::Name:
        if (!c.text) fail(CompileErrorKind::MissingField, cp, "map needs a name");
        m.name = *c.text;
        have_name = true;
        break;
      case Keyword::Size: {
        auto p = c.text ? try_pair(*c.text) : std::nullopt;
        if (!p || p->first < 1 || p->second < 1 || std::floor(p->first) != p->first ||
            std::floor(p->second) != p->second) {
          fail(CompileErrorKind::BadNumber, cp, "map size must be two positive integers");
        }
        size = std::make_pair(static_cast<int>(p->first), static_cast<int>(p->second));
        break;
      }
      case Keyword::Coordinate: {
        std::optional<std::pair<int, int>> xy;
        try {
          xy = parse_coordinate_tag(c.tag);
        } catch (const MalformedCoordinate& e) {
          fail(CompileErrorKind::BadNumber, cp, e.what());
        }
        if (!xy) fail(CompileErrorKind::InvalidValue, cp, "placeholder coordinate");
        if (xy->first < 0 || xy->second < 0) fail(CompileErrorKind::InvalidValue, cp, "negative coordinate");
        Cell at{xy->first, xy->second};
        if (m.cells.count(at)) fail(CompileErrorKind::DuplicateName, cp, "cell declared twice");
        CellDef cell;
        for (const auto& k : c.children) {
          const std::string kp = join(cp, k.tag);
          if (kw(k) == Keyword::Terrain) {
            auto layers = compile_layers(k, cell, def, kp);
            cell.layers.insert(cell.layers.end(), layers.begin(), layers.end());
          } else if (kw(k) == Keyword::GameSpecific && k.text) {
            double amount = require_nonneg(k, kp);
            insert_unique(cell.deposits, k.tag, amount, kp);
          } else {
            fail(CompileErrorKind::UnexpectedTag, kp, "not valid inside a map cell");
          }
        }
        if (cell.layers.empty()) fail(CompileErrorKind::MissingField, join(cp, "Terrain"), "cell needs terrain");
        max_x = std::max(max_x, at.x);
        max_y = std::max(max_y, at.y);
        m.cells.emplace(at, std::move(cell));
        break;
      }
      case Keyword::Start:
        for (const auto& slot : c.children) {
          std::vector<StartPlacement> placements;
          for (const auto& e : slot.children) {
            const std::string ep = join(join(cp, slot.tag), e.tag);
            if (!e.text) fail(CompileErrorKind::MissingField, ep, "start entry needs a position");
            placements.push_back({e.tag, parse_position_text(*e.text, ep)});
          }
          m.start.push_back(std::move(placements));
        }
        break;
      default: fail(CompileErrorKind::UnexpectedTag, cp, "not valid inside Map");
    }
  }
  if (!have_name) fail(CompileErrorKind::MissingField, join(path, "Name"), "map needs a name");
  if (size) {
    m.width = size->first;
    m.height = size->second;
    for (const auto& [at, _] : m.cells) {
      if (at.x >= m.width || at.y >= m.height) fail(CompileErrorKind::InvalidValue, path, "cell outside map size");
    }
  } else {
    m.width = max_x + 1;
    m.height = max_y + 1;
  }
  for (const auto& slot : m.start) {
    for (const auto& s : slot) {
      if (s.position.x < 0 || s.position.y < 0 || s.position.x >= m.width || s.position.y >= m.height) {
        fail(CompileErrorKind::InvalidValue, join(path, "Start"), "start position outside the map");
      }
    }
  }
  return m;
}

// Attack names across every prototype, used to disambiguate armor entries.
void collect_attack_names(const DocNode& n, std::set<std::string>& out) {
  for (const auto& c : n.children) {
    if (kw(c) == Keyword::Attack) {
      for (const auto& a : c.children) out.insert(name_key(a.tag));
    } else {
      collect_attack_names(c, out);
    }
  }
}

void add_prototype(FactionDef& f, PrototypeDef p, const std::string& path) {
  if (f.prototype(p.name) || f.tech(p.name)) fail(CompileErrorKind::DuplicateName, path, "duplicate '" + p.name + "'");
  (p.kind == ProtoKind::Building ? f.buildings : f.units).push_back(std::move(p));
}

}  // namespace

const AbilityDef* PrototypeDef::ability(const std::string& n) const {
  const std::string key = name_key(n);
  for (const auto& a : abilities) {
    if (name_key(a.name) == key) return &a;
  }
  return nullptr;
}

const PrototypeDef* FactionDef::prototype(const std::string& n) const {
  const std::string key = name_key(n);
  for (const auto* list : {&buildings, &units}) {
    for (const auto& p : *list) {
      if (name_key(p.name) == key) return &p;
    }
  }
  return nullptr;
}

const TechDef* FactionDef::tech(const std::string& n) const {
  const std::string key = name_key(n);
  for (const auto& t : techs) {
    if (name_key(t.name) == key) return &t;
  }
  return nullptr;
}

const FactionDef* GameDefinition::faction(const std::string& n) const {
  const std::string key = name_key(n);
  for (const auto& f : factions) {
    if (name_key(f.name) == key) return &f;
  }
  return nullptr;
}

const MapDef* GameDefinition::map(const std::string& n) const {
  if (maps.empty()) return nullptr;
  if (n.empty()) return &maps.front();
  const std::string key = name_key(n);
  for (const auto& m : maps) {
    if (name_key(m.name) == key) return &m;
  }
  return nullptr;
}

const char* to_string(CompileErrorKind kind) {
  switch (kind) {
    case CompileErrorKind::MissingField: return "MissingField";
    case CompileErrorKind::BadNumber: return "BadNumber";
    case CompileErrorKind::DuplicateName: return "DuplicateName";
    case CompileErrorKind::UnexpectedTag: return "UnexpectedTag";
    case CompileErrorKind::InvalidValue: return "InvalidValue";
    case CompileErrorKind::Reference: return "Reference";
  }
  return "?";
}

const char* to_string(Diagnostic::Category category) {
  switch (category) {
    case Diagnostic::Category::UnknownUpgradeTarget: return "UnknownUpgradeTarget";
    case Diagnostic::Category::UnknownResource: return "UnknownResource";
    case Diagnostic::Category::UnknownBuilding: return "UnknownBuilding";
    case Diagnostic::Category::UnknownTech: return "UnknownTech";
    case Diagnostic::Category::UnknownBuildProduct: return "UnknownBuildProduct";
    case Diagnostic::Category::UnknownPrototype: return "UnknownPrototype";
  }
  return "?";
}

std::string format_diagnostic(const Diagnostic& d) {
  std::string path = d.path;
  std::replace(path.begin(), path.end(), ' ', '_');
  return std::string("ERROR ") + path + " " + to_string(d.category) + " '" + d.name + "'";
}

CompileError::CompileError(CompileErrorKind kind, std::string path, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + " at " + path + ": " + detail),
      kind_(kind),
      path_(std::move(path)) {}

CompileError::CompileError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(std::to_string(diagnostics.size()) + " unresolved reference(s)" +
                         (diagnostics.empty() ? std::string() : ": " + format_diagnostic(diagnostics.front()))),
      kind_(CompileErrorKind::Reference),
      diagnostics_(std::move(diagnostics)) {}

double parse_real(std::string_view text, const std::string& path) {
  double v = 0;
  if (!try_real(text, v)) fail(CompileErrorKind::BadNumber, path, "'" + std::string(trim(text)) + "' is not a number");
  return v;
}

DamageRange parse_range_text(std::string_view text) {
  std::string_view s = trim(text);
  double single = 0;
  if (try_real(s, single)) return {single, single};
  std::size_t dash = s.find('-', 1);
  double a = 0;
  double b = 0;
  if (dash == std::string_view::npos || !try_real(s.substr(0, dash), a) || !try_real(s.substr(dash + 1), b)) {
    fail(CompileErrorKind::BadNumber, "", "'" + std::string(s) + "' is not a range");
  }
  if (a > b) std::swap(a, b);
  return {a, b};
}

GameDefinition compile_definition(const DocNode& root, const CompileOptions& options) {
  GameDefinition def;
  const DocNode* factions = nullptr;
  std::vector<const DocNode*> maps;
  std::vector<const DocNode*> blocks;
  for (const auto& c : root.children) {
    switch (kw(c)) {
      case Keyword::Faction:
        if (factions) fail(CompileErrorKind::DuplicateName, c.tag, "factions declared twice");
        factions = &c;
        break;
      case Keyword::Resource:
        for (const auto& r : c.children) {
          double amount = r.text ? require_nonneg(r, join("Resource", r.tag)) : 0.0;
          insert_unique(def.starting_resources, r.tag, amount, join("Resource", r.tag));
        }
        break;
      case Keyword::Terrain:
        for (const auto& label : c.children) {
          if (!label.children.empty()) compile_terrain_rule(label, def, join("Terrain", label.tag));
        }
        break;
      case Keyword::Map: maps.push_back(&c); break;
      case Keyword::GameSpecific: blocks.push_back(&c); break;
      default: fail(CompileErrorKind::UnexpectedTag, c.tag, "not valid at top level");
    }
  }
  if (maps.empty()) fail(CompileErrorKind::MissingField, "Map", "definition needs a map");
  if (!factions) fail(CompileErrorKind::MissingField, "Factions", "definition needs factions");

  for (const auto& name : list_items(*factions, factions->tag)) {
    if (def.faction(name)) fail(CompileErrorKind::DuplicateName, factions->tag, "duplicate faction '" + name + "'");
    def.factions.push_back(FactionDef{name, {}, {}, {}});
  }
  if (def.factions.empty()) fail(CompileErrorKind::MissingField, "Factions", "no factions declared");

  std::set<std::string> attack_names;
  for (const auto* b : blocks) collect_attack_names(*b, attack_names);

  for (const auto* b : blocks) {
    auto* f = const_cast<FactionDef*>(def.faction(b->tag));
    if (!f) fail(CompileErrorKind::UnexpectedTag, b->tag, "'" + b->tag + "' is not a declared faction");
    for (const auto& section : b->children) {
      const std::string sp = join(b->tag, section.tag);
      switch (kw(section)) {
        case Keyword::Building:
        case Keyword::Unit: {
          ProtoKind kind = kw(section) == Keyword::Building ? ProtoKind::Building : ProtoKind::Unit;
          for (const auto& p : section.children) {
            const std::string pp = join(sp, p.tag);
            add_prototype(*f, compile_prototype(kind, p, attack_names, pp), pp);
          }
          break;
        }
        case Keyword::Tech:
          for (const auto& t : section.children) {
            const std::string tp = join(sp, t.tag);
            if (f->prototype(t.tag) || f->tech(t.tag)) fail(CompileErrorKind::DuplicateName, tp, "duplicate name");
            f->techs.push_back(compile_tech(t, tp));
          }
          break;
        default: fail(CompileErrorKind::UnexpectedTag, sp, "expected Building, Unit or Tech");
      }
    }
  }

  for (const auto* m : maps) {
    MapDef map = compile_map(*m, def, options, "Map");
    if (def.map(map.name)) fail(CompileErrorKind::DuplicateName, "Map", "duplicate map '" + map.name + "'");
    def.maps.push_back(std::move(map));
  }

  if (options.check_references) {
    auto diags = validate_references(def);
    if (!diags.empty()) throw CompileError(std::move(diags));
  }
  return def;
}

std::vector<Diagnostic> validate_references(const GameDefinition& def) {
  using C = Diagnostic::Category;
  std::vector<Diagnostic> out;
  auto resource_known = [&](const std::string& r) {
    for (const auto& [name, _] : def.starting_resources) {
      if (name_key(name) == name_key(r)) return true;
    }
    return false;
  };
  auto any_prototype = [&](const std::string& key) {
    for (const auto& f : def.factions) {
      if (f.prototype(key)) return true;
    }
    return false;
  };
  auto check_resource = [&](const std::string& r, const std::string& path) {
    if (!resource_known(r)) out.push_back({C::UnknownResource, path, r});
  };

  for (const auto& f : def.factions) {
    auto check_require = [&](const RequireSpec& req, const std::string& path) {
      for (const auto& [r, _] : req.resources) check_resource(r, join(path, "Require"));
      for (const auto& b : req.buildings) {
        const PrototypeDef* p = f.prototype(b);
        if (!p || p->kind != ProtoKind::Building) out.push_back({C::UnknownBuilding, join(path, "Require"), b});
      }
      for (const auto& t : req.techs) {
        if (!f.tech(t) && !f.prototype(t)) out.push_back({C::UnknownTech, join(path, "Require"), t});
      }
    };
    for (const auto* list : {&f.buildings, &f.units}) {
      for (const auto& p : *list) {
        const std::string path = join(f.name, p.name);
        for (const auto& u : p.upgrades_to) {
          if (!f.prototype(u)) out.push_back({C::UnknownUpgradeTarget, join(path, "Upgrade"), u});
        }
        check_require(p.require, path);
        for (const auto& a : p.attacks) {
          const std::string ap = join(join(path, "Attack"), a.name);
          check_require(a.require, ap);
          for (const auto& [target, _] : a.damage.per_target) {
            if (!any_prototype(target)) out.push_back({C::UnknownPrototype, join(ap, "Damage"), target});
          }
        }
        for (const auto& ab : p.abilities) check_require(ab.require, join(path, ab.name));
        for (const auto& r : p.purpose.process) check_resource(r, join(path, "Purpose/Process"));
        for (const auto& r : p.purpose.prepare) check_resource(r, join(path, "Purpose/Prepare"));
        for (const auto& b : p.purpose.build) {
          if (!f.prototype(b) && !f.tech(b)) out.push_back({C::UnknownBuildProduct, join(path, "Purpose/Build"), b});
        }
        for (const auto& [r, _] : p.gather) check_resource(r, join(path, "Gather"));
        if (p.repair) {
          for (const auto& [target, _] : p.repair->per_target) {
            if (!any_prototype(target)) out.push_back({C::UnknownPrototype, join(path, "Repair"), target});
          }
        }
      }
    }
    for (const auto& t : f.techs) check_require(t.require, join(f.name, t.name));
  }
  for (const auto& m : def.maps) {
    for (const auto& [at, cell] : m.cells) {
      const std::string cp = "Map/" + m.name + "/(" + std::to_string(at.x) + "," + std::to_string(at.y) + ")";
      for (const auto& [r, _] : cell.deposits) check_resource(r, cp);
    }
    for (const auto& slot : m.start) {
      for (const auto& s : slot) {
        if (!any_prototype(s.prototype)) out.push_back({C::UnknownPrototype, "Map/" + m.name + "/Start", s.prototype});
      }
    }
  }
  return out;
}

}  // namespace rtsl
