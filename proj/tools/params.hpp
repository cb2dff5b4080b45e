#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace foucault::cli {

// Flat "section.key" parameters read from an INI-style file and --set
// overrides. Every value looked up is echoed into `used()` so the manifest
// records the full parameter set, defaults included.
class Params {
 public:
  void load_file(const std::string& path);
  void set(const std::string& assignment);  // "section.key=value"

  double number(const std::string& key, double fallback);
  long long integer(const std::string& key, long long fallback);
  std::string text(const std::string& key, const std::string& fallback);
  std::vector<double> list(const std::string& key, const std::vector<double>& fallback);

  const nlohmann::json& used() const { return used_; }
  // Keys given in the file or with --set that no command looked up.
  std::vector<std::string> unused() const;

 private:
  std::map<std::string, std::string> values_;
  nlohmann::json used_ = nlohmann::json::object();
  std::map<std::string, bool> touched_;

  const std::string* find(const std::string& key);
};

std::uint64_t fnv1a(const std::string& bytes);

}  // namespace foucault::cli
