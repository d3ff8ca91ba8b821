// Document layer for the RTSL textual dialect.
//
// The dialect is XML-like but deliberately loose: tag names may contain
// spaces, coordinates ("<0, 0>", "<(0,1)>") are tags, newline separated bare
// words become empty child nodes, and a close tag may be followed directly by
// "/Label" to express conditional terrain.

#ifndef RTSL_DOC_HPP
#define RTSL_DOC_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rtsl {

struct SourceSpan {
  int start_line = 1;
  int start_col = 1;
  int end_line = 1;
  int end_col = 1;

  bool operator==(const SourceSpan&) const = default;
};

std::string to_string(const SourceSpan& span);

struct DocNode {
  std::string tag;
  std::optional<std::string> text;
  std::vector<DocNode> children;
  std::optional<std::string> condition_suffix;
  SourceSpan span;

  bool is_empty() const { return !text && children.empty(); }
  // Spans are ignored.
  bool structurally_equal(const DocNode& other) const;
};

enum class DocErrorKind { UnbalancedTag, UnterminatedTag, EmptyTagName, StrayText };

const char* to_string(DocErrorKind kind);

class DocError : public std::runtime_error {
 public:
  DocError(DocErrorKind kind, SourceSpan span, const std::string& detail);

  DocErrorKind kind() const { return kind_; }
  const SourceSpan& span() const { return span_; }

 private:
  DocErrorKind kind_;
  SourceSpan span_;
};

// Returns a synthetic root (empty tag) whose children are the top-level
// elements. Throws DocError; no partial tree is ever returned.
DocNode parse_document(std::string_view source);

// Canonical form: two-space indentation, one element per line, no trailing
// newline. An empty root serializes to "".
std::string serialize_document(const DocNode& root);

enum class Keyword {
  Coordinate,
  Action,
  Armor,
  Attack,
  Build,
  Building,
  BuildingTime,
  Contain,
  Damage,
  Distance,
  Enemy,
  Faction,
  Gather,
  HealthPoint,
  Limit,
  Map,
  Modify,
  Movement,
  Name,
  Prepare,
  Process,
  Purpose,
  Range,
  Recharge,
  Repair,
  Require,
  Resource,
  Shape,
  Point,
  Square,
  Rectangle,
  Circle,
  FCone,
  BCone,
  Size,
  Speed,
  Terrain,
  TimeLimit,
  Weight,
  Vision,
  Unit,
  UniqueID,
  Upgrade,
  // Structural tags used by the listings but not defined as keywords.
  Position,
  XY,
  Less,
  Greater,
  Tech,
  Start,
  GameSpecific,
};

const char* to_string(Keyword keyword);

// All reserved keywords (everything except GameSpecific).
const std::vector<Keyword>& all_keywords();

struct Classified {
  Keyword keyword = Keyword::GameSpecific;
  // Original tag for GameSpecific, empty otherwise.
  std::string name;

  bool operator==(const Classified&) const = default;
};

Classified classify_tag(std::string_view tag);

inline bool is_keyword(std::string_view tag, Keyword keyword) {
  return classify_tag(tag).keyword == keyword;
}

class MalformedCoordinate : public std::invalid_argument {
 public:
  explicit MalformedCoordinate(const std::string& tag)
      : std::invalid_argument("malformed coordinate '" + tag + "'") {}
};

// Accepts "x,y" and "(x,y)" with arbitrary interior whitespace.
std::optional<std::pair<int, int>> parse_coordinate_tag(std::string_view tag);

// Trim plus collapse of interior whitespace runs to a single space.
std::string normalize_tag(std::string_view tag);

// Case- and whitespace-insensitive identity used for every name comparison.
std::string name_key(std::string_view name);

std::string_view trim(std::string_view s);

}  // namespace rtsl

#endif  // RTSL_DOC_HPP
