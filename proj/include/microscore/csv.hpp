#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace microscore {

// Shortest round-trip decimal form of a double; locale-independent and
// byte-stable across runs, which the reproducibility contract relies on.
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Minimal RFC 4180 writer: comma separated, CRLF line endings. Fields here
// are numeric or plain identifiers, so quoting is never needed.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path);
  }

  template <typename... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    (write_field(fields, first), ...);
    out_ << "\r\n";
  }

 private:
  template <typename T>
  void write_field(const T& f, bool& first) {
    if (!first) out_ << ',';
    first = false;
    if constexpr (std::is_same_v<T, double> || std::is_same_v<T, float>)
      out_ << format_double(f);
    else
      out_ << f;
  }

  std::ofstream out_;
};

}  // namespace microscore
