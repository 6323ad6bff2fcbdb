#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sdlab::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;  // throws if absent
};

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

// FNV-1a 64 over the file bytes, hex-encoded; used for artifact manifests
std::string file_checksum(const std::string& path);

bool file_exists(const std::string& path);

// Flat key-value config with [section] tables. Values are strings; typed
// accessors parse on demand.
class KvConfig {
 public:
  static KvConfig parse_file(const std::string& path);
  static KvConfig parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback = "") const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  long get_int(const std::string& section, const std::string& key, long fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace sdlab::io
