#include "rtsl/protocol.hpp"

#include <map>

namespace rtsl {

namespace {

DocNode leaf(std::string tag, std::string text) {
  DocNode n;
  n.tag = std::move(tag);
  n.text = std::move(text);
  return n;
}

DocNode bare(std::string tag) {
  DocNode n;
  n.tag = std::move(tag);
  return n;
}

DocNode branch(std::string tag, std::vector<DocNode> children = {}) {
  DocNode n;
  n.tag = std::move(tag);
  n.children = std::move(children);
  return n;
}

std::string xy(Position p) { return format_number(p.x) + "," + format_number(p.y); }

DocNode position(Position p) { return branch("Position", {leaf("X,Y", xy(p))}); }

DocNode entity_node(const EntityView& e) {
  DocNode n = branch(e.proto);
  n.children.push_back(leaf("UniqueID", e.id));
  n.children.push_back(leaf("Health Point", format_number(e.hp)));
  if (e.pos) n.children.push_back(position(*e.pos));
  if (e.action_value.empty()) {
    n.children.push_back(leaf("Action", e.action));
  } else {
    n.children.push_back(branch("Action", {leaf(e.action, e.action_value)}));
  }
  if (e.carrying) {
    std::string amount = e.carrying->amount.to_string();
    if (e.carry_capacity > 0) amount += "-" + format_number(e.carry_capacity);
    n.children.push_back(branch("Gather", {leaf(e.carrying->resource, amount)}));
  }
  if (!e.contained.empty()) {
    DocNode c = branch("Contain");
    for (const auto& id : e.contained) c.children.push_back(leaf("UniqueID", id));
    n.children.push_back(std::move(c));
  }
  return n;
}

DocNode cell_node(const CellView& c) {
  DocNode n = branch("(" + std::to_string(c.at.x) + "," + std::to_string(c.at.y) + ")");
  DocNode terrain = branch("Terrain");
  for (const auto& l : c.layers) {
    if (l.condition) {
      DocNode cond = leaf(l.label, format_number(l.condition->amount));
      cond.condition_suffix = l.condition->replacement_label;
      terrain.children.push_back(std::move(cond));
    } else {
      terrain.children.push_back(bare(l.label));
    }
  }
  if (terrain.children.size() == 1 && !terrain.children[0].condition_suffix) {
    terrain = leaf("Terrain", terrain.children[0].tag);
  }
  n.children.push_back(std::move(terrain));
  for (const auto& [res, q] : c.deposits) n.children.push_back(leaf(res, q.to_string()));
  return n;
}

}  // namespace

DocNode update_document(const UpdateView& view) {
  DocNode root;
  DocNode bank = branch("Resource");
  for (const auto& [res, q] : view.bank) bank.children.push_back(leaf(res, q.to_string()));
  root.children.push_back(std::move(bank));

  DocNode units = branch("Unit");
  DocNode buildings = branch("Building");
  for (const auto& e : view.own) (e.kind == ProtoKind::Unit ? units : buildings).children.push_back(entity_node(e));
  if (!units.children.empty()) root.children.push_back(std::move(units));
  if (!buildings.children.empty()) root.children.push_back(std::move(buildings));

  if (!view.enemies.empty()) {
    std::map<std::string, std::vector<const EnemyView*>> by_proto;
    for (const auto& e : view.enemies) by_proto[e.proto].push_back(&e);
    DocNode enemy = branch("Enemy");
    for (const auto& [proto, list] : by_proto) {
      DocNode p = branch(proto);
      for (const EnemyView* e : list) {
        DocNode id = branch("UniqueID", {bare(e->id)});
        if (e->hp) id.children.push_back(leaf("Health Point", format_number(*e->hp)));
        id.children.push_back(position(e->pos));
        p.children.push_back(std::move(id));
      }
      enemy.children.push_back(std::move(p));
    }
    root.children.push_back(std::move(enemy));
  }

  if (!view.cells.empty()) {
    DocNode map = branch("Map");
    for (const auto& c : view.cells) map.children.push_back(cell_node(c));
    root.children.push_back(std::move(map));
  }
  return root;
}

std::string encode_update(const UpdateView& view) {
  return "UPDATE-BEGIN " + std::to_string(view.tick) + "\n" + serialize_document(update_document(view)) +
         "\nUPDATE-END";
}

ClientMessage parse_client_line(std::string_view line) {
  std::string_view s = trim(line);
  std::size_t sp = s.find_first_of(" \t");
  std::string_view verb = s.substr(0, sp);
  std::string_view rest = sp == std::string_view::npos ? std::string_view{} : trim(s.substr(sp));
  if (verb == "FACTION") {
    if (rest.empty()) throw BadMessage("FACTION needs a name");
    return {ClientMessage::Kind::Faction, normalize_tag(rest)};
  }
  if (verb == "CMD") {
    if (rest.empty()) throw BadMessage("CMD needs a command");
    return {ClientMessage::Kind::Cmd, std::string(rest)};
  }
  if (verb == "UPDATE") {
    if (!rest.empty()) throw BadMessage("UPDATE takes no arguments");
    return {ClientMessage::Kind::Update, {}};
  }
  throw BadMessage("unknown message '" + std::string(s.substr(0, 40)) + "'");
}

std::string client_line(const ClientMessage& m) {
  switch (m.kind) {
    case ClientMessage::Kind::Faction: return "FACTION " + m.payload;
    case ClientMessage::Kind::Cmd: return "CMD " + m.payload;
    case ClientMessage::Kind::Update: return "UPDATE";
  }
  return {};
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace rtsl
