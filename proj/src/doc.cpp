#include "rtsl/doc.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <unordered_map>

namespace rtsl {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

}  // namespace

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string normalize_tag(std::string_view tag) {
  std::string out;
  bool pending_space = false;
  for (char c : trim(tag)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string name_key(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  for (char c : name) {
    if (!is_space(c)) out.push_back(lower(c));
  }
  return out;
}

std::string to_string(const SourceSpan& span) {
  return std::to_string(span.start_line) + ":" + std::to_string(span.start_col) + "-" +
         std::to_string(span.end_line) + ":" + std::to_string(span.end_col);
}

bool DocNode::structurally_equal(const DocNode& other) const {
  if (tag != other.tag || text != other.text || condition_suffix != other.condition_suffix ||
      children.size() != other.children.size()) {
    return false;
  }
  for (std::size_t i = 0; i < children.size(); ++i) {
    if (!children[i].structurally_equal(other.children[i])) return false;
  }
  return true;
}

const char* to_string(DocErrorKind kind) {
  switch (kind) {
    case DocErrorKind::UnbalancedTag: return "UnbalancedTag";
    case DocErrorKind::UnterminatedTag: return "UnterminatedTag";
    case DocErrorKind::EmptyTagName: return "EmptyTagName";
    case DocErrorKind::StrayText: return "StrayText";
  }
  return "?";
}

DocError::DocError(DocErrorKind kind, SourceSpan span, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + " at " + to_string(span) + ": " + detail),
      kind_(kind),
      span_(span) {}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Cursor {
  int line = 1;
  int col = 1;
};

struct TextSegment {
  std::string text;
  Cursor start;
  // True when the segment begins right after a close tag of an element child.
  bool follows_close = false;
};

struct Frame {
  DocNode node;
  SourceSpan open_span;
  // Content in document order: element children are referenced by index into
  // node.children, text segments by index into segments.
  std::vector<std::pair<bool, std::size_t>> items;  // (is_element, index)
  std::vector<TextSegment> segments;
  std::vector<DocNode> elements;
  bool is_root = false;
};

struct Line {
  std::string text;
  SourceSpan span;
};

// Splits a segment into trimmed nonempty lines with their spans.
std::vector<Line> split_lines(const TextSegment& seg) {
  std::vector<Line> out;
  Cursor cur = seg.start;
  std::size_t i = 0;
  while (i <= seg.text.size()) {
    std::size_t j = seg.text.find('\n', i);
    if (j == std::string::npos) j = seg.text.size();
    std::string_view raw(seg.text.data() + i, j - i);
    std::size_t lead = 0;
    while (lead < raw.size() && is_space(raw[lead])) ++lead;
    std::string_view trimmed = trim(raw);
    if (!trimmed.empty()) {
      SourceSpan span;
      span.start_line = cur.line;
      span.start_col = cur.col + static_cast<int>(lead);
      span.end_line = cur.line;
      span.end_col = span.start_col + static_cast<int>(trimmed.size()) - 1;
      out.push_back({std::string(trimmed), span});
    }
    if (j == seg.text.size()) break;
    i = j + 1;
    cur.line += 1;
    cur.col = 1;
  }
  return out;
}

DocNode bare_node(const Line& line) {
  DocNode n;
  n.tag = normalize_tag(line.text);
  n.span = line.span;
  return n;
}

void check_bare(const Line& line) {
  if (line.text.front() == '/') {
    throw DocError(DocErrorKind::StrayText, line.span,
                   "condition suffix '" + line.text + "' must directly follow a close tag");
  }
  if (line.text.find('>') != std::string::npos) {
    throw DocError(DocErrorKind::StrayText, line.span, "stray '>' in '" + line.text + "'");
  }
}

// Assembles children/text of a frame once its close tag (or EOF) is seen.
void finalize(Frame& f) {
  const bool has_elements = !f.elements.empty();
  if (!has_elements) {
    std::vector<Line> lines;
    for (const auto& seg : f.segments) {
      auto more = split_lines(seg);
      lines.insert(lines.end(), more.begin(), more.end());
    }
    if (lines.size() == 1 && !f.is_root) {
      if (lines[0].text.find('>') != std::string::npos) {
        throw DocError(DocErrorKind::StrayText, lines[0].span, "stray '>' in text");
      }
      f.node.text = lines[0].text;
      return;
    }
    for (const auto& l : lines) {
      check_bare(l);
      f.node.children.push_back(bare_node(l));
    }
    return;
  }
  for (const auto& [is_element, index] : f.items) {
    if (is_element) {
      f.node.children.push_back(std::move(f.elements[index]));
      continue;
    }
    TextSegment seg = f.segments[index];
    if (seg.follows_close && !seg.text.empty() && seg.text.front() == '/') {
      std::size_t nl = seg.text.find('\n');
      std::string label(trim(std::string_view(seg.text).substr(1, nl == std::string::npos ? std::string::npos : nl - 1)));
      SourceSpan span{seg.start.line, seg.start.col, seg.start.line,
                      seg.start.col + static_cast<int>(nl == std::string::npos ? seg.text.size() : nl) - 1};
      if (label.empty() || label.find('>') != std::string::npos) {
        throw DocError(DocErrorKind::StrayText, span, "empty or malformed condition suffix");
      }
      DocNode& prev = f.node.children.back();
      prev.condition_suffix = normalize_tag(label);
      if (nl == std::string::npos) continue;
      seg.text = seg.text.substr(nl + 1);
      seg.start = Cursor{seg.start.line + 1, 1};
    }
    for (const auto& l : split_lines(seg)) {
      check_bare(l);
      f.node.children.push_back(bare_node(l));
    }
  }
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  DocNode run() {
    Frame root;
    root.is_root = true;
    root.node.span = SourceSpan{1, 1, 1, 1};
    stack_.push_back(std::move(root));
    bool last_was_close = false;
    while (pos_ < src_.size()) {
      if (src_[pos_] == '<') {
        last_was_close = read_tag();
        continue;
      }
      read_text(last_was_close);
      last_was_close = false;
    }
    if (stack_.size() > 1) {
      const Frame& open = stack_.back();
      throw DocError(DocErrorKind::UnbalancedTag, open.open_span,
                     "element '" + open.node.tag + "' is never closed");
    }
    Frame& r = stack_.back();
    finalize(r);
    r.node.span.end_line = cur_.line;
    r.node.span.end_col = std::max(1, cur_.col - 1);
    return std::move(r.node);
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      cur_.line += 1;
      cur_.col = 1;
    } else {
      cur_.col += 1;
    }
    ++pos_;
  }

  void read_text(bool follows_close) {
    TextSegment seg;
    seg.start = cur_;
    seg.follows_close = follows_close;
    std::size_t begin = pos_;
    while (pos_ < src_.size() && src_[pos_] != '<') advance();
    seg.text.assign(src_.substr(begin, pos_ - begin));
    Frame& f = stack_.back();
    f.items.emplace_back(false, f.segments.size());
    f.segments.push_back(std::move(seg));
  }

  // Returns true when the tag was a close tag.
  bool read_tag() {
    Cursor start = cur_;
    advance();  // '<'
    std::size_t begin = pos_;
    while (pos_ < src_.size() && src_[pos_] != '>') {
      char c = src_[pos_];
      if (c == '<' || c == '\n') {
        throw DocError(DocErrorKind::UnterminatedTag, SourceSpan{start.line, start.col, cur_.line, cur_.col},
                       "tag is missing its closing '>'");
      }
      advance();
    }
    if (pos_ >= src_.size()) {
      throw DocError(DocErrorKind::UnterminatedTag,
                     SourceSpan{start.line, start.col, cur_.line, std::max(1, cur_.col - 1)},
                     "tag is missing its closing '>'");
    }
    std::string_view raw = src_.substr(begin, pos_ - begin);
    SourceSpan span{start.line, start.col, cur_.line, cur_.col};
    advance();  // '>'

    std::string_view body = trim(raw);
    bool closing = !body.empty() && body.front() == '/';
    if (closing) body.remove_prefix(1);
    std::string name = normalize_tag(body);
    if (name.empty()) throw DocError(DocErrorKind::EmptyTagName, span, "tag has no name");

    if (!closing) {
      Frame f;
      f.node.tag = std::move(name);
      f.open_span = span;
      f.node.span.start_line = span.start_line;
      f.node.span.start_col = span.start_col;
      stack_.push_back(std::move(f));
      return false;
    }

    const std::string key = name_key(name);
    if (stack_.size() == 1 || name_key(stack_.back().node.tag) != key) {
      // Either a stray close tag or an unclosed element inside the matching one.
      bool matches_ancestor = false;
      for (std::size_t i = 1; i + 1 < stack_.size(); ++i) {
        if (name_key(stack_[i].node.tag) == key) matches_ancestor = true;
      }
      if (matches_ancestor) {
        const Frame& open = stack_.back();
        throw DocError(DocErrorKind::UnbalancedTag, open.open_span,
                       "element '" + open.node.tag + "' is never closed");
      }
      throw DocError(DocErrorKind::UnbalancedTag, span, "close tag '" + name + "' has no matching open tag");
    }

    Frame f = std::move(stack_.back());
    stack_.pop_back();
    finalize(f);
    f.node.span.end_line = span.end_line;
    f.node.span.end_col = span.end_col;
    Frame& parent = stack_.back();
    parent.items.emplace_back(true, parent.elements.size());
    parent.elements.push_back(std::move(f.node));
    return true;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  Cursor cur_;
  std::vector<Frame> stack_;
};

}  // namespace

DocNode parse_document(std::string_view source) { return Parser(source).run(); }

// ---------------------------------------------------------------------------
// Serializer

namespace {

bool bare_safe(const DocNode& n) {
  if (!n.is_empty() || n.condition_suffix) return false;
  if (n.tag.empty() || n.tag.front() == '/') return false;
  if (n.tag.find_first_of("<>\n") != std::string::npos) return false;
  return classify_tag(n.tag).keyword == Keyword::GameSpecific;
}

void emit(const DocNode& n, int indent, bool allow_bare, std::string& out) {
  if (!out.empty()) out.push_back('\n');
  out.append(static_cast<std::size_t>(indent), ' ');
  if (allow_bare && bare_safe(n)) {
    out += n.tag;
    return;
  }
  out += "<" + n.tag + ">";
  if (n.text) {
    out += *n.text;
  } else if (!n.children.empty()) {
    const bool children_bare = n.children.size() >= 2;
    for (const auto& c : n.children) emit(c, indent + 2, children_bare, out);
    out.push_back('\n');
    out.append(static_cast<std::size_t>(indent), ' ');
  }
  out += "</" + n.tag + ">";
  if (n.condition_suffix) out += "/" + *n.condition_suffix;
}

}  // namespace

std::string serialize_document(const DocNode& root) {
  std::string out;
  for (const auto& c : root.children) emit(c, 0, true, out);
  return out;
}

// ---------------------------------------------------------------------------
// Keywords

namespace {

struct KeywordEntry {
  Keyword keyword;
  const char* display;
  std::vector<const char*> keys;
};

const std::vector<KeywordEntry>& keyword_table() {
  static const std::vector<KeywordEntry> table = {
      {Keyword::Coordinate, "#,#", {"#,#"}},
      {Keyword::Action, "Action", {"action"}},
      {Keyword::Armor, "Armor", {"armor"}},
      {Keyword::Attack, "Attack", {"attack"}},
      {Keyword::Build, "Build", {"build"}},
      {Keyword::Building, "Building", {"building"}},
      {Keyword::BuildingTime, "Building Time", {"buildingtime", "buildtime", "buildspeed"}},
      {Keyword::Contain, "Contain", {"contain"}},
      {Keyword::Damage, "Damage", {"damage"}},
      {Keyword::Distance, "Distance", {"distance"}},
      {Keyword::Enemy, "Enemy", {"enemy"}},
      {Keyword::Faction, "Faction", {"faction", "factions"}},
      {Keyword::Gather, "Gather", {"gather"}},
      {Keyword::HealthPoint, "Health Point", {"healthpoint"}},
      {Keyword::Limit, "Limit", {"limit"}},
      {Keyword::Map, "Map", {"map"}},
      {Keyword::Modify, "Modify", {"modify"}},
      {Keyword::Movement, "Movement", {"movement"}},
      {Keyword::Name, "Name", {"name"}},
      {Keyword::Prepare, "Prepare", {"prepare"}},
      {Keyword::Process, "Process", {"process"}},
      {Keyword::Purpose, "Purpose", {"purpose"}},
      {Keyword::Range, "Range", {"range"}},
      {Keyword::Recharge, "Recharge", {"recharge"}},
      {Keyword::Repair, "Repair", {"repair"}},
      {Keyword::Require, "Require", {"require"}},
      {Keyword::Resource, "Resource", {"resource"}},
      {Keyword::Shape, "Shape", {"shape"}},
      {Keyword::Point, "Point", {"point"}},
      {Keyword::Square, "Square", {"square"}},
      {Keyword::Rectangle, "Rectangle", {"rectangle"}},
      {Keyword::Circle, "Circle", {"circle"}},
      {Keyword::FCone, "F_Cone", {"f_cone", "fcone"}},
      {Keyword::BCone, "B_Cone", {"b_cone", "bcone"}},
      {Keyword::Size, "Size", {"size"}},
      {Keyword::Speed, "Speed", {"speed"}},
      {Keyword::Terrain, "Terrain", {"terrain"}},
      {Keyword::TimeLimit, "Time Limit", {"timelimit"}},
      {Keyword::Weight, "Weight", {"weight"}},
      {Keyword::Vision, "Vision", {"vision"}},
      {Keyword::Unit, "Unit", {"unit"}},
      {Keyword::UniqueID, "UniqueID", {"uniqueid"}},
      {Keyword::Upgrade, "Upgrade", {"upgrade"}},
      {Keyword::Position, "Position", {"position"}},
      {Keyword::XY, "X,Y", {"x,y"}},
      {Keyword::Less, "Less", {"less"}},
      {Keyword::Greater, "Greater", {"greater"}},
      {Keyword::Tech, "Tech", {"tech"}},
      {Keyword::Start, "Start", {"start"}},
  };
  return table;
}

const std::unordered_map<std::string, Keyword>& keyword_index() {
  static const auto index = [] {
    std::unordered_map<std::string, Keyword> m;
    for (const auto& e : keyword_table()) {
      for (const char* k : e.keys) m.emplace(k, e.keyword);
    }
    return m;
  }();
  return index;
}

bool parse_int(std::string_view s, int& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool numeric_start(std::string_view s) {
  s = trim(s);
  return !s.empty() && (std::isdigit(static_cast<unsigned char>(s.front())) || s.front() == '-' || s.front() == '+');
}

}  // namespace

const char* to_string(Keyword keyword) {
  if (keyword == Keyword::GameSpecific) return "GameSpecific";
  for (const auto& e : keyword_table()) {
    if (e.keyword == keyword) return e.display;
  }
  return "?";
}

const std::vector<Keyword>& all_keywords() {
  static const std::vector<Keyword> all = [] {
    std::vector<Keyword> v;
    for (const auto& e : keyword_table()) v.push_back(e.keyword);
    return v;
  }();
  return all;
}

std::optional<std::pair<int, int>> parse_coordinate_tag(std::string_view tag) {
  std::string_view s = trim(tag);
  bool parens = s.size() >= 2 && s.front() == '(' && s.back() == ')';
  if (parens) s = trim(s.substr(1, s.size() - 2));
  std::size_t comma = s.find(',');
  if (comma == std::string_view::npos) {
    if (parens) throw MalformedCoordinate(std::string(tag));
    return std::nullopt;
  }
  std::string_view xs = s.substr(0, comma);
  std::string_view ys = s.substr(comma + 1);
  if (!parens && !numeric_start(xs) && !numeric_start(ys)) return std::nullopt;
  int x = 0;
  int y = 0;
  if (!parse_int(xs, x) || !parse_int(ys, y)) throw MalformedCoordinate(std::string(tag));
  return std::make_pair(x, y);
}

Classified classify_tag(std::string_view tag) {
  const std::string key = name_key(tag);
  const auto& index = keyword_index();
  if (auto it = index.find(key); it != index.end()) return Classified{it->second, {}};
  try {
    if (parse_coordinate_tag(tag)) return Classified{Keyword::Coordinate, {}};
  } catch (const MalformedCoordinate&) {
  }
  return Classified{Keyword::GameSpecific, std::string(tag)};
}

}  // namespace rtsl
