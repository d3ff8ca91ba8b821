#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "rtsl/definition.hpp"
#include "rtsl/doc.hpp"
#include "rtsl/fixtures.hpp"
#include "support.hpp"

using namespace rtsl;
using test::compile_text;

namespace {

GameDefinition compile_framed(const std::string& id) {
  Fixture f = load_fixture(id);
  return compile_definition(parse_document(f.framed));
}

const PrototypeDef& proto(const GameDefinition& d, const std::string& faction, const std::string& name) {
  const FactionDef* f = d.faction(faction);
  REQUIRE(f != nullptr);
  const PrototypeDef* p = f->prototype(name);
  REQUIRE(p != nullptr);
  return *p;
}

std::string diag_text(const Diagnostic& d) { return std::string(to_string(d.category)) + " " + d.name; }

void collect_words(const DocNode& n, std::set<std::string>& out) {
  if (!n.tag.empty()) out.insert(name_key(n.tag));
  if (n.text) out.insert(name_key(*n.text));
  for (const auto& c : n.children) collect_words(c, out);
}

// Every place a prototype or tech name can be referenced from.
bool referenced(const GameDefinition& d, const std::string& name) {
  const std::string key = name_key(name);
  auto in = [&](const std::vector<std::string>& v) {
    return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return name_key(s) == key; });
  };
  for (const auto& f : d.factions) {
    for (const auto* list : {&f.buildings, &f.units}) {
      for (const auto& p : *list) {
        if (in(p.upgrades_to) || in(p.purpose.build) || in(p.require.buildings) || in(p.require.techs)) return true;
      }
    }
    for (const auto& t : f.techs) {
      if (in(t.require.buildings) || in(t.require.techs)) return true;
    }
  }
  for (const auto& m : d.maps) {
    for (const auto& slot : m.start) {
      for (const auto& s : slot) {
        if (name_key(s.prototype) == key) return true;
      }
    }
  }
  return false;
}

}  // namespace

TEST_CASE("starting resources and factions") {
  GameDefinition d = compile_framed("factions-resources");
  REQUIRE(d.factions.size() == 2);
  CHECK(d.factions[0].name == "Human");
  CHECK(d.factions[1].name == "Orc");
  CHECK(d.starting_resources.at("Wood") == 100);
  CHECK(d.starting_resources.at("Gold") == 100);
  CHECK(d.starting_resources.at("Oil") == 10);
  CHECK(d.starting_resources.at("Food") == 5);
  CHECK(validate_references(d).empty());
}

TEST_CASE("Town Hall listing") {
  GameDefinition d = compile_framed("town-hall");
  CHECK(validate_references(d).empty());
  const PrototypeDef& h = proto(d, "Human", "Town Hall");
  CHECK(h.kind == ProtoKind::Building);
  CHECK(h.max_health == 1200);
  CHECK(h.build_time_s == 30);
  CHECK(h.vision == 1);
  CHECK(h.speed == 0);
  CHECK(h.shape == ShapeSpec{shape::Square{2}});
  CHECK(h.occupy_terrain == std::set<std::string>{"Ground"});
  CHECK(h.require.resources == std::map<std::string, double>{{"Wood", 800}, {"Gold", 1200}});
  CHECK(h.upgrades_to == std::vector<std::string>{"Keep"});
  CHECK(h.purpose.process == std::vector<std::string>{"Wood", "Gold"});
  CHECK(h.purpose.build == std::vector<std::string>{"Peasants"});
  CHECK(h.sample.unique_id == "TownHall1");
  CHECK(h.sample.action == "Idle");
  CHECK(h.sample.position == Position{120, 120});
  CHECK(h.sample.lists_enemies);
}

TEST_CASE("Elvin Archer listing") {
  GameDefinition d = compile_framed("elvin-archer");
  CHECK(validate_references(d).empty());
  const PrototypeDef& a = proto(d, "Human", "Elvin Archer");
  CHECK(a.kind == ProtoKind::Unit);
  CHECK(a.max_health == 40);
  CHECK(a.build_time_s == 15);
  CHECK(a.vision == 5);
  CHECK(a.speed == 3);
  CHECK(a.shape == ShapeSpec{shape::Circle{0.5}});
  REQUIRE(a.attacks.size() == 1);
  const AttackDef& arrow = a.attacks[0];
  CHECK(arrow.name == "Arrow");
  CHECK(arrow.range == 4);
  CHECK(arrow.damage.universal == DamageRange{3, 9});
  CHECK(arrow.recharge_s == 2);
  CHECK_FALSE(arrow.target_terrain.empty());
  REQUIRE(a.armor.per_attack.size() + (a.armor.universal ? 1 : 0) >= 1);
  CHECK(a.require.resources == std::map<std::string, double>{{"Gold", 500}, {"Wood", 50}, {"Food", 1}});
  CHECK(a.sample.unique_id == "Archer1");
}

TEST_CASE("Hills map listing") {
  GameDefinition d = compile_framed("hills-map");
  CHECK(validate_references(d).empty());
  const MapDef* m = d.map("Hills");
  REQUIRE(m != nullptr);
  CHECK(m->cells.size() == 2);
  const CellDef& high = m->cells.at(Cell{0, 0});
  std::vector<std::string> labels;
  for (const auto& l : high.layers) labels.push_back(l.label);
  CHECK(labels == std::vector<std::string>{"Ground", "High", "Air"});
  CHECK(high.deposits.at("Gold") == 1000);
  const CellDef& wood = m->cells.at(Cell{0, 1});
  REQUIRE(wood.layers.size() == 3);
  REQUIRE(wood.layers[0].condition.has_value());
  CHECK(wood.layers[0].condition->resource == "Wood");
  CHECK(wood.layers[0].condition->amount == 300);
  CHECK(wood.layers[0].condition->replacement_label == "Ground");
  CHECK(wood.layers[1].label == "Low");
  CHECK(wood.layers[2].label == "Air");
  CHECK(wood.deposits.at("Wood") == 300);
}

TEST_CASE("Lockdown listing") {
  GameDefinition d = compile_framed("lockdown");
  CHECK(validate_references(d).empty());
  const AbilityDef* a = proto(d, "Orc", "Ghost").ability("Lockdown");
  REQUIRE(a != nullptr);
  CHECK(a->time_limit_s == 12);
  CHECK_FALSE(a->use_limit.has_value());
  CHECK(a->require.target_traits == std::map<std::string, std::string>{{"biological", "False"}});
  REQUIRE(a->target_modifiers.size() == 2);
  bool speed = false, recharge = false;
  for (const auto& m : a->target_modifiers) {
    if (m.property == "speed") {
      speed = true;
      CHECK(m.kind == PropertyModifier::Kind::AddPercent);
      CHECK(m.value == -100);
    }
    if (m.property == "recharge") {
      recharge = true;
      CHECK(m.kind == PropertyModifier::Kind::Set);
      CHECK(m.value == 100000);
    }
  }
  CHECK(speed);
  CHECK(recharge);
}

TEST_CASE("coordinate grid listing") {
  GameDefinition d = compile_framed("coordinate-grid");
  const MapDef& m = d.primary_map();
  CHECK(m.width == 2);
  CHECK(m.height == 2);
  CHECK(m.cells.at(Cell{0, 0}).layers.at(0).label == "Sea");
  CHECK(m.cells.at(Cell{1, 0}).layers.at(0).label == "Grass");
  CHECK(m.cells.at(Cell{0, 1}).layers.at(0).label == "Grass");
  CHECK(m.cells.at(Cell{1, 1}).layers.at(0).label == "Dirt");
}

TEST_CASE("armor, contain, limit and movement keywords") {
  GameDefinition armored_def = compile_framed("keyword-armor");
  const PrototypeDef& armored = proto(armored_def, "Human", "Probe");
  REQUIRE(armored.armor.universal.has_value());
  CHECK(*armored.armor.universal == Mitigation::flat(2));
  CHECK(armored.armor.per_attack.at("arrow").kind == Mitigation::Kind::Percent);
  CHECK(armored.armor.per_attack.at("arrow").value == 3);
  CHECK(armored.armor.per_attack.at("sword").kind == Mitigation::Kind::Flat);
  CHECK(armored.armor.per_attack.at("sword").value == 5);

  GameDefinition box_def = compile_framed("keyword-contain");
  const PrototypeDef& box = proto(box_def, "Human", "Probe");
  REQUIRE(box.contain.has_value());
  CHECK(box.contain->max_weight == 8);
  CHECK(box.contain->allowed_armor_classes == std::set<std::string>{"Light"});

  GameDefinition miner_def = compile_framed("keyword-limit");
  const PrototypeDef& miner = proto(miner_def, "Human", "Probe");
  const AbilityDef* mine = miner.ability("Mine");
  REQUIRE(mine != nullptr);
  CHECK(mine->use_limit == 4);

  GameDefinition flyer_def = compile_framed("keyword-movement");
  const PrototypeDef& flyer = proto(flyer_def, "Human", "Probe");
  CHECK(flyer.occupy_terrain == std::set<std::string>{"Ground"});
  REQUIRE(flyer.movement_terrain.has_value());
  CHECK(*flyer.movement_terrain == std::set<std::string>{"Air"});
}

TEST_CASE("terrain modify rule") {
  GameDefinition d = compile_framed("keyword-modify");
  REQUIRE(d.terrain_rules.count("low"));
  CHECK(d.terrain_rules.at("low").attack_damage_percent.at("high") == -25);
}

TEST_CASE("repair keyword in a unit") {
  std::string frame = read_text_file(fixture_dir() + "/frames/unit.rtsl");
  std::string src = frame.replace(frame.find("{{FIXTURE}}"), 11, load_fixture("keyword-repair").source);
  src += "\n<Human><Unit><Horse><Health Point>5</Health Point><Terrain>Ground</Terrain></Horse></Unit></Human>";
  GameDefinition d = compile_text(src);
  const PrototypeDef& p = proto(d, "Human", "Probe");
  REQUIRE(p.repair.has_value());
  CHECK(p.repair->universal == RepairRate{2, 1});
  CHECK(p.repair->for_target("horse") == RepairRate{1, 2});
  CHECK(p.repair->for_target("probe") == RepairRate{2, 1});
}

TEST_CASE("manifest expectations hold for every fixture") {
  for (const auto& f : load_all_fixtures()) {
    CAPTURE(f.id);
    std::optional<DocNode> root;
    try {
      root = parse_document(f.framed);
      CHECK(f.expect.parse == "ok");
    } catch (const DocError& e) {
      CHECK(f.expect.parse == to_string(e.kind()));
      continue;
    }
    if (!f.expect.compile) continue;
    try {
      GameDefinition d = compile_definition(*root);
      CHECK(*f.expect.compile == "ok");
      if (f.expect.diagnostics) CHECK(f.expect.diagnostics->empty());
    } catch (const CompileError& e) {
      CHECK(*f.expect.compile == to_string(e.kind()));
      if (f.expect.diagnostics) {
        std::vector<std::string> got;
        for (const auto& d : e.diagnostics()) got.push_back(diag_text(d));
        CHECK(got == *f.expect.diagnostics);
      }
    }
  }
}

TEST_CASE("the assembled game compiles clean") {
  auto d = test::paper_game();
  CHECK(validate_references(*d).empty());
  CHECK(d->factions.size() == 2);
  CHECK(d->maps.size() == 3);
  CHECK(proto(*d, "Human", "Keep").max_health == 2400);
  CHECK(proto(*d, "Orc", "Ghost").ability("Mine")->use_limit == 4);
}

TEST_CASE("every reserved keyword appears somewhere in the corpus") {
  std::set<std::string> words;
  for (const auto& f : load_all_fixtures()) {
    if (f.expect.parse != "ok") continue;
    collect_words(parse_document(f.framed), words);
  }
  std::set<Keyword> seen;
  for (const auto& w : words) seen.insert(classify_tag(w).keyword);
  for (Keyword k : all_keywords()) {
    CHECK_MESSAGE(seen.count(k), to_string(k));
  }
}

TEST_CASE("compile errors") {
  auto kind_of = [](const std::string& src) {
    try {
      compile_text(src);
    } catch (const CompileError& e) {
      return std::string(to_string(e.kind()));
    }
    return std::string("ok");
  };
  const std::string head = "<Factions>Human</Factions><Resource><Wood>1</Wood></Resource>";
  const std::string map = "<Map><Name>M</Name><(0,0)><Terrain>Ground</Terrain></(0,0)></Map>";
  auto unit = [&](const std::string& body) {
    return head + "<Human><Unit><U><Terrain>Ground</Terrain>" + body + "</U></Unit></Human>" + map;
  };
  CHECK(kind_of(unit("<Health Point>5</Health Point>")) == "ok");
  CHECK(kind_of(unit("<Health Point>five</Health Point>")) == "BadNumber");
  CHECK(kind_of(unit("<Health Point>0</Health Point>")) == "InvalidValue");
  CHECK(kind_of(head + "<Human><Unit><U><Health Point>1</Health Point></U><U><Health Point>1</Health Point></U>"
                       "</Unit></Human>" + map) == "DuplicateName");
  CHECK(kind_of(unit("<Health Point>5</Health Point><Attack><A><Damage>3</Damage></A></Attack>")) != "ok");
  CHECK(kind_of(unit("<Health Point>5</Health Point><Mine><Limit>2.5</Limit></Mine>")) == "InvalidValue");
  CHECK(kind_of(unit("<Health Point>5</Health Point><Require><Distance><Less>1</Less><Greater>3</Greater>"
                     "</Distance></Require>")) == "InvalidValue");
  CHECK(kind_of(head + "<Map><Name>M</Name><Size>2,2</Size><(5,0)><Terrain>Ground</Terrain></(5,0)></Map>") ==
        "InvalidValue");
  CHECK(kind_of(unit("<Health Point>5</Health Point><Require><Resource><Mana>1</Mana></Resource></Require>")) ==
        "Reference");
}

TEST_CASE("damage ranges") {
  CHECK(parse_range_text("3-9") == DamageRange{3, 9});
  CHECK(parse_range_text(" 2 - 5 ") == DamageRange{2, 5});
  CHECK(parse_range_text("7") == DamageRange{7, 7});
  CHECK(parse_range_text("0.5-1.25") == DamageRange{0.5, 1.25});
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> n(0, 500);
  for (int i = 0; i < 500; ++i) {
    int a = n(rng), b = n(rng);
    int lo = std::min(a, b), hi = std::max(a, b);
    std::string text = std::to_string(lo) + std::string(static_cast<std::size_t>(i % 3), ' ') + "-" +
                       std::string(static_cast<std::size_t>(i % 2), ' ') + std::to_string(hi);
    DamageRange r = parse_range_text(text);
    CHECK(r.min == lo);
    CHECK(r.max == hi);
    CHECK(r.min <= r.max);
  }
}

TEST_CASE("deleting a referenced name always yields a diagnostic for it") {
  auto base = test::paper_game();
  std::vector<std::pair<std::size_t, std::string>> names;
  for (std::size_t fi = 0; fi < base->factions.size(); ++fi) {
    const auto& f = base->factions[fi];
    for (const auto& p : f.buildings) names.emplace_back(fi, p.name);
    for (const auto& p : f.units) names.emplace_back(fi, p.name);
    for (const auto& t : f.techs) names.emplace_back(fi, t.name);
  }
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    auto [fi, name] = names[std::uniform_int_distribution<std::size_t>(0, names.size() - 1)(rng)];
    CAPTURE(name);
    GameDefinition d = *base;
    FactionDef& f = d.factions[fi];
    auto drop = [&](auto& v) { std::erase_if(v, [&](const auto& x) { return x.name == name; }); };
    drop(f.buildings);
    drop(f.units);
    drop(f.techs);
    auto diags = validate_references(d);
    for (const auto& dg : diags) CHECK(name_key(dg.name) == name_key(name));
    CHECK(diags.empty() == !referenced(d, name));
  }
}

TEST_CASE("compiled definitions satisfy type invariants") {
  auto d = test::paper_game();
  for (const auto& f : d->factions) {
    std::set<std::string> names;
    for (const auto* list : {&f.buildings, &f.units}) {
      for (const auto& p : *list) {
        CHECK(names.insert(name_key(p.name)).second);
        CHECK(p.max_health > 0);
        for (const auto& a : p.attacks) {
          CHECK(a.damage.universal.min <= a.damage.universal.max);
          CHECK_FALSE(a.target_terrain.empty());
        }
        if (p.require.distance && p.require.distance->greater && p.require.distance->less) {
          CHECK(*p.require.distance->greater < *p.require.distance->less);
        }
        if (p.armor.universal) CHECK(p.armor.universal->value >= 0);
      }
    }
  }
  for (const auto& m : d->maps) {
    for (const auto& [c, cell] : m.cells) {
      CHECK(c.x >= 0);
      CHECK(c.y >= 0);
      CHECK(c.x < m.width);
      CHECK(c.y < m.height);
      CHECK_FALSE(cell.layers.empty());
      for (const auto& l : cell.layers) {
        if (l.condition) CHECK(l.condition->amount > 0);
      }
    }
  }
}
