#include "params.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <sstream>

#include "foucault/error.hpp"

namespace foucault::cli {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || trim(v.substr(pos)) != "" || !std::isfinite(d)) {
    throw ValidationError("parameter " + key + " = '" + v + "' is not a finite number");
  }
  return d;
}

}  // namespace

void Params::load_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError(std::string("cannot read config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      values_[section] = trim(body.data());
      continue;
    }
    for (const auto& [key, leaf] : body) values_[section + "." + key] = trim(leaf.data());
  }
}

void Params::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError("--set expects section.key=value, got '" + assignment + "'");
  }
  values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

const std::string* Params::find(const std::string& key) {
  touched_[key] = true;
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

double Params::number(const std::string& key, double fallback) {
  const std::string* v = find(key);
  const double d = v ? parse_double(key, *v) : fallback;
  used_[key] = d;
  return d;
}

long long Params::integer(const std::string& key, long long fallback) {
  const std::string* v = find(key);
  long long n = fallback;
  if (v) {
    const double d = parse_double(key, *v);
    if (d != std::floor(d)) throw ValidationError("parameter " + key + " must be an integer");
    n = static_cast<long long>(d);
  }
  used_[key] = n;
  return n;
}

std::string Params::text(const std::string& key, const std::string& fallback) {
  const std::string* v = find(key);
  std::string s = v ? *v : fallback;
  used_[key] = s;
  return s;
}

std::vector<double> Params::list(const std::string& key, const std::vector<double>& fallback) {
  const std::string* v = find(key);
  std::vector<double> out = fallback;
  if (v) {
    out.clear();
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
    if (out.empty()) throw ValidationError("parameter " + key + " is an empty list");
  }
  used_[key] = out;
  return out;
}

std::vector<std::string> Params::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    if (!touched_.count(k)) out.push_back(k);
  }
  return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace foucault::cli
