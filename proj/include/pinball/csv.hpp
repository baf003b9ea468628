#pragma once

// Minimal CSV emission: '#' metadata lines, one header row, then records.
// Numbers use the shortest round-trip form and never depend on the locale.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace pinball {

inline constexpr std::string_view kToolVersion = "0.1.0";

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  /// Writes "# key: value". Only valid before the header.
  void meta(std::string_view key, std::string_view value);
  void meta(std::string_view key, double value) { meta(key, format(value)); }
  void header(std::initializer_list<std::string_view> columns);

  template <class... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << field(fields), first = false), ...);
    out_ << '\n';
  }

  [[nodiscard]] static std::string format(double v);
  [[nodiscard]] static std::string quote(std::string_view s);

 private:
  static std::string field(double v) { return format(v); }
  static std::string field(std::size_t v) { return std::to_string(v); }
  static std::string field(int v) { return std::to_string(v); }
  static std::string field(bool v) { return v ? "1" : "0"; }
  static std::string field(std::string_view s) { return quote(s); }
  static std::string field(const std::string& s) { return quote(s); }
  static std::string field(const char* s) { return quote(s); }

  std::ostream& out_;
};

}  // namespace pinball
