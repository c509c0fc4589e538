#include "hopflab/config.hpp"

#include <fstream>
#include <sstream>

#include "hopflab/errors.hpp"

namespace hopflab {

const std::map<std::string, std::string>& RunConfig::allowed_keys() {
  static const std::map<std::string, std::string> keys = {
      {"map", "map descriptor"},
      {"init", "initial map descriptor for the flow"},
      {"lemma", "verifier selector"},
      {"theorem", "pinching theorem selector"},
      {"a", "pinching parameter a"},
      {"mode", "theorem B builtin mode"},
      {"n", "sample / cloud size"},
      {"k", "neighbors per point"},
      {"steps", "flow steps"},
      {"seed", "random seed"},
      {"h", "finite-difference step"},
      {"order", "finite-difference order (2 or 4)"},
      {"out", "output directory"},
      {"tol", "acceptance tolerance"},
      {"stride", "snapshot stride"},
  };
  return keys;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!allowed_keys().count(key))
    throw UsageError("unknown config key '" + key + "'");
  kv_[key] = value;
}

bool RunConfig::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string RunConfig::get(const std::string& key,
                           const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "' is not a number: '" +
                     it->second + "'");
  }
}

int RunConfig::get_int(const std::string& key, int fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "' is not an integer: '" +
                     it->second + "'");
  }
}

std::uint64_t RunConfig::get_u64(const std::string& key,
                                 std::uint64_t fallback) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw UsageError("config key '" + key + "' is not an integer: '" +
                     it->second + "'");
  }
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

RunConfig RunConfig::from_text(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) +
                       " is not key=value: '" + line + "'");
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string()
                                    : s.substr(b, e - b + 1);
    };
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

std::string RunConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : kv_) out += k + "=" + v + "\n";
  return out;
}

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : kv_) j[k] = v;
  return j;
}

void RunConfig::merge_overrides(const RunConfig& overrides) {
  for (const auto& [k, v] : overrides.kv_) kv_[k] = v;
}

}  // namespace hopflab
