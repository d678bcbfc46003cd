#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace sdigs {

// Flat `key = value` configuration text. `#` starts a comment, blank lines
// are skipped, duplicate keys are rejected. Typed getters throw UsageError
// (naming the key) on malformed values; fetched keys are tracked so callers
// can reject unknown leftovers.
class ConfigMap {
 public:
  static ConfigMap parse_file(const std::string& path);  // DataError on open
  static ConfigMap parse_text(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  int64_t get_int64(const std::string& key, int64_t fallback) const;
  uint64_t get_uint64(const std::string& key, uint64_t fallback) const;

  // Keys present in the file that no getter ever asked for.
  std::vector<std::string> unconsumed() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

// Loss traces as CSV with the header line `iteration,loss`.
void write_loss_csv(const std::string& path, const std::vector<double>& trace);
std::vector<double> read_loss_csv(const std::string& path);

}  // namespace sdigs
