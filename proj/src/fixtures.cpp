#include "rtsl/fixtures.hpp"

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace rtsl {

namespace {

using nlohmann::json;

json manifest(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw std::runtime_error("cannot open " + dir + "/manifest.json");
  return json::parse(in);
}

Fixture from_entry(const json& e, const std::string& dir) {
  Fixture f;
  f.id = e.at("id").get<std::string>();
  f.description = e.value("description", "");
  f.origin = e.value("origin", "");
  f.path = dir + "/" + e.at("file").get<std::string>();
  f.source = read_text_file(f.path);
  const json& x = e.at("expect");
  f.expect.parse = x.value("parse", "ok");
  if (x.contains("frame")) f.expect.frame = x["frame"].get<std::string>();
  if (x.contains("compile")) f.expect.compile = x["compile"].get<std::string>();
  if (x.contains("diagnostics")) f.expect.diagnostics = x["diagnostics"].get<std::vector<std::string>>();
  f.framed = f.source;
  if (f.expect.frame) {
    std::string frame = read_text_file(dir + "/frames/" + *f.expect.frame + ".rtsl");
    const std::string hole = "{{FIXTURE}}";
    auto at = frame.find(hole);
    if (at == std::string::npos) throw std::runtime_error("frame " + *f.expect.frame + " has no placeholder");
    f.framed = frame.replace(at, hole.size(), f.source);
  }
  return f;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string fixture_dir() {
  if (const char* env = std::getenv("RTSL_FIXTURE_DIR"); env && *env) return env;
  return RTSL_DEFAULT_FIXTURE_DIR;
}

Fixture load_fixture(const std::string& id, const std::string& dir) {
  const json m = manifest(dir);
  for (const auto& e : m.at("fixtures")) {
    if (e.at("id") == id) return from_entry(e, dir);
  }
  throw UnknownFixture(id);
}

std::vector<std::string> fixture_ids(const std::string& dir) {
  std::vector<std::string> ids;
  const json m = manifest(dir);
  for (const auto& e : m.at("fixtures")) ids.push_back(e.at("id").get<std::string>());
  return ids;
}

std::vector<Fixture> load_all_fixtures(const std::string& dir) {
  std::vector<Fixture> out;
  const json m = manifest(dir);
  for (const auto& e : m.at("fixtures")) out.push_back(from_entry(e, dir));
  return out;
}

}  // namespace rtsl
