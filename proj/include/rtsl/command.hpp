// The seven agent commands and their textual forms.

#ifndef RTSL_COMMAND_HPP
#define RTSL_COMMAND_HPP

#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rtsl {

namespace cmd {
struct Construct {
  std::string building;
  double x = 0;
  double y = 0;
  bool operator==(const Construct&) const = default;
};
struct Move {
  std::string id;
  double x = 0;
  double y = 0;
  bool operator==(const Move&) const = default;
};
struct Train {
  std::string location;
  std::string product;
  bool operator==(const Train&) const = default;
};
struct Gather {
  std::string unit;
  double x = 0;
  double y = 0;
  bool operator==(const Gather&) const = default;
};
struct Attack {
  std::string ally;
  std::string enemy;
  bool operator==(const Attack&) const = default;
};
// Game specific action. "Repair", "Load" and "Unload" are built in; every
// other name refers to an ability of the allied entities.
struct GameAction {
  std::string name;
  std::vector<std::string> allies;
  std::vector<std::string> enemies;
  std::vector<double> xs;
  std::vector<double> ys;
  bool operator==(const GameAction&) const = default;
};
struct Update {
  bool operator==(const Update&) const = default;
};
}  // namespace cmd

using Command = std::variant<cmd::Construct, cmd::Move, cmd::Train, cmd::Gather, cmd::Attack, cmd::GameAction, cmd::Update>;

const char* command_name(const Command& c);

// Canonical text, e.g. "Construct(Town Hall, 10, 12)" or
// "Action(Lockdown, [Ghost1], [Tank3], [], [])".
std::string command_text(const Command& c);

enum class CommandErrorKind { BadCommandSyntax, WrongArity };

class CommandError : public std::runtime_error {
 public:
  CommandError(CommandErrorKind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  CommandErrorKind kind() const { return kind_; }

 private:
  CommandErrorKind kind_;
};

const char* to_string(CommandErrorKind kind);

// Parses the textual forms; whitespace tolerant, verbs case-insensitive.
Command decode_command(std::string_view text);

// Shortest decimal that round-trips ("120", "0.3").
std::string format_number(double v);

}  // namespace rtsl

#endif  // RTSL_COMMAND_HPP
