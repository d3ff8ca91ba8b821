// Line protocol between agents and the match manager.

#ifndef RTSL_PROTOCOL_HPP
#define RTSL_PROTOCOL_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rtsl/doc.hpp"
#include "rtsl/kernel.hpp"

namespace rtsl {

// RTSL fragment for a view: Resource, Unit, Building, Enemy and Map blocks.
DocNode update_document(const UpdateView& view);

// Full reply: "UPDATE-BEGIN <tick>", the fragment, "UPDATE-END".
std::string encode_update(const UpdateView& view);

struct ClientMessage {
  enum class Kind { Faction, Cmd, Update };
  Kind kind = Kind::Update;
  std::string payload;

  bool operator==(const ClientMessage&) const = default;
};

class BadMessage : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// "FACTION <name>", "CMD <command>", "UPDATE". Throws BadMessage.
ClientMessage parse_client_line(std::string_view line);
std::string client_line(const ClientMessage& m);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace rtsl

#endif  // RTSL_PROTOCOL_HPP
