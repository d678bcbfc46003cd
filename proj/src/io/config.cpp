#include "sdigs/io/config.hpp"

#include "sdigs/core/error.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace sdigs {
namespace {

std::string trim(const std::string& s) {
  const size_t first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const size_t last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw UsageError("config: key '" + key + "' has malformed value '" + value +
                   "'");
}

}  // namespace

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("config: cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_text(text.str());
}

ConfigMap ConfigMap::parse_text(const std::string& text) {
  ConfigMap config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config: line " + std::to_string(line_no) +
                       " is not `key = value`: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw UsageError("config: line " + std::to_string(line_no) +
                       " has an empty key or value");
    if (!config.values_.emplace(key, value).second)
      throw UsageError("config: duplicate key '" + key + "'");
  }
  return config;
}

bool ConfigMap::has(const std::string& key) const {
  return values_.count(key) != 0;
}

std::string ConfigMap::get_string(const std::string& key,
                                  const std::string& fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(it->second.c_str(), &end);
  if (errno != 0 || end == it->second.c_str() || *end != '\0')
    bad_value(key, it->second);
  return v;
}

int64_t ConfigMap::get_int64(const std::string& key, int64_t fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(it->second.c_str(), &end, 10);
  if (errno != 0 || end == it->second.c_str() || *end != '\0')
    bad_value(key, it->second);
  return v;
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
  const int64_t v = get_int64(key, fallback);
  if (v < INT32_MIN || v > INT32_MAX) bad_value(key, values_.at(key));
  return static_cast<int>(v);
}

uint64_t ConfigMap::get_uint64(const std::string& key, uint64_t fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
  if (errno != 0 || end == it->second.c_str() || *end != '\0' ||
      it->second.front() == '-')
    bad_value(key, it->second);
  return v;
}

std::vector<std::string> ConfigMap::unconsumed() const {
  std::vector<std::string> keys;
  for (const auto& [key, value] : values_)
    if (!consumed_.count(key)) keys.push_back(key);
  return keys;
}

void write_loss_csv(const std::string& path, const std::vector<double>& trace) {
  std::ofstream out(path);
  if (!out) throw DataError("write_loss_csv: cannot open " + path);
  out << "iteration,loss\n";
  char buf[40];
  for (size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, trace[i]);
    out << buf;
  }
  if (!out.flush()) throw DataError("write_loss_csv: write failed " + path);
}

std::vector<double> read_loss_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("read_loss_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "iteration,loss")
    throw DataError("read_loss_csv: bad header in " + path);
  std::vector<double> trace;
  size_t expect = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    size_t iteration = 0;
    double loss = 0.0;
    if (std::sscanf(line.c_str(), "%zu,%lf", &iteration, &loss) != 2 ||
        iteration != expect)
      throw DataError("read_loss_csv: bad row '" + line + "' in " + path);
    trace.push_back(loss);
    ++expect;
  }
  return trace;
}

}  // namespace sdigs
