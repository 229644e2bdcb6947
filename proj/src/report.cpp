#include "peranno/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "peranno/error.hpp"

namespace peranno {

std::string format_double(double v) {
  // Shortest decimal form that parses back to the same double.
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open " + path.string());
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error("cannot write " + path.string());
  }
  out << text;
  if (!out) {
    throw Error("write failed for " + path.string());
  }
}

void KvFile::add(const std::string& key, const std::string& value) {
  items_.emplace_back(key, value);
}

void KvFile::add(const std::string& key, double value) {
  items_.emplace_back(key, format_double(value));
}

void KvFile::add(const std::string& key, std::int64_t value) {
  items_.emplace_back(key, std::to_string(value));
}

std::optional<std::string> KvFile::find(const std::string& key) const {
  for (const auto& [k, v] : items_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string KvFile::get(const std::string& key) const {
  if (const auto v = find(key)) return *v;
  throw Error("report: missing key '" + key + "'");
}

double KvFile::get_double(const std::string& key) const {
  const std::string v = get(key);
  try {
    std::size_t used = 0;
    const double parsed = std::stod(v, &used);
    if (used != v.size()) throw Error("");
    return parsed;
  } catch (...) {
    throw Error("report: key '" + key + "' is not a number: " + v);
  }
}

std::string KvFile::to_string() const {
  std::string out;
  for (const auto& [k, v] : items_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

KvFile KvFile::parse(const std::string& text) {
  KvFile kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("report: malformed line: " + line);
    }
    kv.items_.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return kv;
}

void KvFile::write(const std::filesystem::path& path) const {
  write_text_file(path, to_string());
}

KvFile KvFile::read(const std::filesystem::path& path) {
  return parse(read_text_file(path));
}

}  // namespace peranno
