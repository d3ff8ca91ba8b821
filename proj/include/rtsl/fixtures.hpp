// The shared RTSL corpus: listings, keyword examples and mutants.

#ifndef RTSL_FIXTURES_HPP
#define RTSL_FIXTURES_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtsl {

class UnknownFixture : public std::runtime_error {
 public:
  explicit UnknownFixture(const std::string& id) : std::runtime_error("unknown fixture '" + id + "'"), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

struct FixtureExpect {
  std::string parse = "ok";                 // or a DocErrorKind name
  std::optional<std::string> frame;         // frame the source is compiled in
  std::optional<std::string> compile;       // "ok" or a CompileErrorKind name
  std::optional<std::vector<std::string>> diagnostics;  // "<Category> <name>"
};

struct Fixture {
  std::string id;
  std::string description;
  std::string origin;  // as given in the manifest
  std::string path;
  std::string source;
  FixtureExpect expect;
  // The source spliced into its frame, or the source itself.
  std::string framed;
};

// RTSL_FIXTURE_DIR from the environment, else the build-time default.
std::string fixture_dir();

// Throws UnknownFixture for ids missing from the manifest.
Fixture load_fixture(const std::string& id, const std::string& dir = fixture_dir());
std::vector<std::string> fixture_ids(const std::string& dir = fixture_dir());
std::vector<Fixture> load_all_fixtures(const std::string& dir = fixture_dir());

std::string read_text_file(const std::string& path);

}  // namespace rtsl

#endif  // RTSL_FIXTURES_HPP
