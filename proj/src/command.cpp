#include "rtsl/command.hpp"

#include <charconv>
#include <cmath>

#include "rtsl/doc.hpp"

namespace rtsl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string join_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out + "]";
}

std::string join_numbers(const std::vector<double>& items) {
  std::vector<std::string> s;
  for (double v : items) s.push_back(format_number(v));
  return join_list(s);
}

// One argument: either a scalar or a bracketed list.
struct Arg {
  bool is_list = false;
  std::string scalar;
  std::vector<std::string> list;
};

[[noreturn]] void syntax(std::string_view text, const std::string& why) {
  throw CommandError(CommandErrorKind::BadCommandSyntax, "BadCommandSyntax: " + why + " in '" + std::string(text) + "'");
}

std::vector<Arg> split_args(std::string_view body, std::string_view text) {
  std::vector<Arg> args;
  if (trim(body).empty()) return args;
  std::size_t i = 0;
  while (true) {
    while (i < body.size() && (body[i] == ' ' || body[i] == '\t')) ++i;
    Arg a;
    if (i < body.size() && body[i] == '[') {
      std::size_t close = body.find(']', i);
      if (close == std::string_view::npos) syntax(text, "unterminated '['");
      std::string_view inner = trim(body.substr(i + 1, close - i - 1));
      a.is_list = true;
      if (!inner.empty()) {
        std::size_t s = 0;
        while (true) {
          std::size_t c = inner.find(',', s);
          std::string_view item = trim(inner.substr(s, c == std::string_view::npos ? std::string_view::npos : c - s));
          if (item.empty()) syntax(text, "empty list item");
          if (item.find('[') != std::string_view::npos) syntax(text, "nested list");
          a.list.emplace_back(item);
          if (c == std::string_view::npos) break;
          s = c + 1;
        }
      }
      i = close + 1;
      while (i < body.size() && (body[i] == ' ' || body[i] == '\t')) ++i;
    } else {
      std::size_t c = body.find(',', i);
      std::string_view item = trim(body.substr(i, c == std::string_view::npos ? std::string_view::npos : c - i));
      if (item.empty()) syntax(text, "empty argument");
      if (item.find_first_of("[]") != std::string_view::npos) syntax(text, "stray bracket");
      a.scalar = std::string(item);
      i = c == std::string_view::npos ? body.size() : c;
    }
    args.push_back(std::move(a));
    if (i >= body.size()) break;
    if (body[i] != ',') syntax(text, "expected ','");
    ++i;
  }
  return args;
}

double number(const Arg& a, std::string_view text) {
  if (a.is_list) syntax(text, "expected a number, got a list");
  std::string_view s = a.scalar;
  std::string buf(s.front() == '+' ? s.substr(1) : s);
  double v = 0;
  auto [ptr, ec] = std::from_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc() || ptr != buf.data() + buf.size() || !std::isfinite(v)) {
    syntax(text, "'" + a.scalar + "' is not a number");
  }
  return v;
}

std::string name(const Arg& a, std::string_view text) {
  if (a.is_list) syntax(text, "expected a name, got a list");
  return normalize_tag(a.scalar);
}

std::vector<std::string> names(const Arg& a, std::string_view text) {
  if (!a.is_list) syntax(text, "expected a list");
  std::vector<std::string> out;
  for (const auto& s : a.list) out.push_back(normalize_tag(s));
  return out;
}

std::vector<double> numbers(const Arg& a, std::string_view text) {
  if (!a.is_list) syntax(text, "expected a list");
  std::vector<double> out;
  for (const auto& s : a.list) out.push_back(number(Arg{false, s, {}}, text));
  return out;
}

}  // namespace

const char* to_string(CommandErrorKind kind) {
  return kind == CommandErrorKind::WrongArity ? "WrongArity" : "BadCommandSyntax";
}

std::string format_number(double v) {
  if (v == 0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

const char* command_name(const Command& c) {
  return std::visit(overloaded{
                        [](const cmd::Construct&) { return "Construct"; },
                        [](const cmd::Move&) { return "Move"; },
                        [](const cmd::Train&) { return "Train"; },
                        [](const cmd::Gather&) { return "Gather"; },
                        [](const cmd::Attack&) { return "Attack"; },
                        [](const cmd::GameAction&) { return "Action"; },
                        [](const cmd::Update&) { return "Update"; },
                    },
                    c);
}

std::string command_text(const Command& c) {
  return std::visit(
      overloaded{
          [](const cmd::Construct& v) {
            return "Construct(" + v.building + ", " + format_number(v.x) + ", " + format_number(v.y) + ")";
          },
          [](const cmd::Move& v) { return "Move(" + v.id + ", " + format_number(v.x) + ", " + format_number(v.y) + ")"; },
          [](const cmd::Train& v) { return "Train(" + v.location + ", " + v.product + ")"; },
          [](const cmd::Gather& v) {
            return "Gather(" + v.unit + ", " + format_number(v.x) + ", " + format_number(v.y) + ")";
          },
          [](const cmd::Attack& v) { return "Attack(" + v.ally + ", " + v.enemy + ")"; },
          [](const cmd::GameAction& v) {
            return "Action(" + v.name + ", " + join_list(v.allies) + ", " + join_list(v.enemies) + ", " +
                   join_numbers(v.xs) + ", " + join_numbers(v.ys) + ")";
          },
          [](const cmd::Update&) { return std::string("Update"); },
      },
      c);
}

Command decode_command(std::string_view text) {
  std::string_view s = trim(text);
  if (s.empty()) syntax(text, "empty command");
  std::size_t open = s.find('(');
  std::string verb = name_key(s.substr(0, open));
  if (open == std::string_view::npos) {
    if (verb == "update") return cmd::Update{};
    syntax(text, "missing '('");
  }
  if (s.back() != ')') syntax(text, "missing ')'");
  std::string_view body = s.substr(open + 1, s.size() - open - 2);
  if (body.find_first_of("()") != std::string_view::npos) syntax(text, "unbalanced parentheses");
  auto args = split_args(body, text);

  auto arity = [&](const char* display, std::size_t want) {
    if (args.size() != want) {
      throw CommandError(CommandErrorKind::WrongArity, "WrongArity: " + std::string(display) + " takes " +
                                                           std::to_string(want) + " arguments, got " +
                                                           std::to_string(args.size()));
    }
  };

  if (verb == "construct") {
    arity("Construct", 3);
    return cmd::Construct{name(args[0], text), number(args[1], text), number(args[2], text)};
  }
  if (verb == "move") {
    arity("Move", 3);
    return cmd::Move{name(args[0], text), number(args[1], text), number(args[2], text)};
  }
  if (verb == "train") {
    arity("Train", 2);
    return cmd::Train{name(args[0], text), name(args[1], text)};
  }
  if (verb == "gather") {
    arity("Gather", 3);
    return cmd::Gather{name(args[0], text), number(args[1], text), number(args[2], text)};
  }
  if (verb == "attack") {
    arity("Attack", 2);
    return cmd::Attack{name(args[0], text), name(args[1], text)};
  }
  if (verb == "action") {
    arity("Action", 5);
    cmd::GameAction a;
    a.name = name(args[0], text);
    a.allies = names(args[1], text);
    a.enemies = names(args[2], text);
    a.xs = numbers(args[3], text);
    a.ys = numbers(args[4], text);
    if (a.xs.size() != a.ys.size()) syntax(text, "X and Y lists differ in length");
    return a;
  }
  if (verb == "update") {
    arity("Update", 0);
    return cmd::Update{};
  }
  syntax(text, "unknown command '" + std::string(trim(s.substr(0, open))) + "'");
}

}  // namespace rtsl
