#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace peranno {

// Round-trip-exact decimal form used for every double that lands in a file.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path,
                     const std::string& text);

// Flat key=value document, one pair per line, insertion-ordered. This is
// the diffable on-disk form of stats and eval reports.
class KvFile {
 public:
  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, std::int64_t value);

  const std::vector<std::pair<std::string, std::string>>& items() const {
    return items_;
  }
  std::optional<std::string> find(const std::string& key) const;
  std::string get(const std::string& key) const;  // throws when absent
  double get_double(const std::string& key) const;

  std::string to_string() const;
  static KvFile parse(const std::string& text);
  void write(const std::filesystem::path& path) const;
  static KvFile read(const std::filesystem::path& path);

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

}  // namespace peranno
