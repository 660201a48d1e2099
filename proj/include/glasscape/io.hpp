#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <locale>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "glasscape/critical.hpp"
#include "glasscape/errors.hpp"
#include "glasscape/sampler.hpp"
#include "glasscape/version.hpp"

namespace glasscape {

/// Shortest round-trip-safe enough form: 15 significant digits, "." decimal point.
inline std::string format_number(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(15) << v;
  return os.str();
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/**
 * `key value` lines; `#` starts a comment.  Later keys override earlier
 * ones, and set() overrides both.
 */
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
      std::istringstream ls(line);
      std::string key, value, extra;
      if (!(ls >> key)) continue;
      if (!(ls >> value) || (ls >> extra))
        throw UsageError("config line " + std::to_string(lineno) + ": expected `key value`");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    return parse(in);
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  std::optional<std::string> get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
  }

  double get_double(const std::string& key, double fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    std::istringstream is(*v);
    is.imbue(std::locale::classic());
    double d;
    if (!(is >> d) || !is.eof()) throw UsageError("config key " + key + " is not a number: " + *v);
    return d;
  }

  long long get_int(const std::string& key, long long fallback) const {
    auto v = get(key);
    if (!v) return fallback;
    std::size_t used = 0;
    long long r = 0;
    try {
      r = std::stoll(*v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != v->size() || v->empty()) throw UsageError("config key " + key + " is not an integer: " + *v);
    return r;
  }

  /// Canonical `key value` listing, sorted by key.
  std::string canonical() const {
    std::string s;
    for (const auto& [k, v] : values_) s += k + " " + v + "\n";
    return s;
  }

  std::uint64_t hash() const { return fnv1a64(canonical()); }

 private:
  std::map<std::string, std::string> values_;
};

struct OutputHeader {
  std::string command;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
};

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline void write_header(std::ostream& os, const OutputHeader& h) {
  os << "# glasscape " << kVersion << " command=" << h.command << " config_hash=" << hex64(h.config_hash)
     << " seed=" << h.seed << "\n";
}

/// Ordered `key value` summary lines.
class Summary {
 public:
  Summary& add(const std::string& key, double v) { return add_raw(key, format_number(v)); }
  Summary& add(const std::string& key, long long v) { return add_raw(key, std::to_string(v)); }
  Summary& add(const std::string& key, int v) { return add_raw(key, std::to_string(v)); }
  Summary& add(const std::string& key, bool v) { return add_raw(key, v ? "true" : "false"); }
  Summary& add(const std::string& key, const std::string& v) { return add_raw(key, v); }
  Summary& add(const std::string& key, const char* v) { return add_raw(key, v); }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void write(std::ostream& os) const {
    for (const auto& [k, v] : entries_) os << k << " " << v << "\n";
  }

 private:
  Summary& add_raw(const std::string& key, const std::string& v) {
    entries_.emplace_back(key, v);
    return *this;
  }
  std::vector<std::pair<std::string, std::string>> entries_;
};

class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::vector<std::string>& columns) : os_(os), width_(columns.size()) {
    line(columns);
  }

  void row(const std::vector<double>& values) {
    if (values.size() != width_) throw UsageError("csv row width mismatch");
    std::vector<std::string> cells;
    for (double v : values) cells.push_back(format_number(v));
    line(cells);
  }

 private:
  void line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << "\n";
  }
  std::ostream& os_;
  std::size_t width_;
};

inline void write_histogram_csv(std::ostream& os, const OverlapHistogram& h) {
  CsvWriter w(os, {"bin_lo", "bin_hi", "count"});
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    w.row({h.bin_edges[i], h.bin_edges[i + 1], static_cast<double>(h.counts[i])});
}

inline void write_critical_points_csv(std::ostream& os, const std::vector<CriticalPoint>& pts) {
  CsvWriter w(os, {"energy_per_site", "radial_per_sqrt", "grad_residual", "index"});
  for (const auto& p : pts)
    w.row({p.energy_per_site, p.radial_per_sqrt, p.grad_residual, static_cast<double>(p.index)});
}

/// Opens dir/name for writing and emits the header line.
inline std::ofstream open_output(const std::filesystem::path& dir, const std::string& name, const OutputHeader& h) {
  std::filesystem::create_directories(dir);
  std::ofstream os(dir / name, std::ios::binary);
  if (!os) throw UsageError("cannot write " + (dir / name).string());
  os.imbue(std::locale::classic());
  write_header(os, h);
  return os;
}

}  // namespace glasscape
