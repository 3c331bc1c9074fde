#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "medspec/error.hpp"

namespace medspec {

/// Shortest round-trip-safe text for the 9-significant-digit ASCII formats.
inline std::string format_g9(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

/// Full double precision, used where artifacts must reload bit-exactly.
inline std::string format_g17(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

/// Line-oriented reader that tracks line numbers for error messages.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path) : path_(path.string()), in_(path) {
    if (!in_) fail(ErrorCode::io, "cannot open " + path_);
  }

  /// Next non-blank line with '#' comments stripped; false at EOF.
  bool next(std::string& line, bool strip_comments = true) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (strip_comments) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
      }
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  }

  std::string require(const char* what) {
    std::string line;
    if (!next(line)) fail(ErrorCode::format, path_ + ": unexpected end of file, expected " + what);
    return line;
  }

  [[noreturn]] void error(const std::string& msg) const {
    fail(ErrorCode::format, path_ + ":" + std::to_string(line_no_) + ": " + msg);
  }

  int line_number() const { return line_no_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  int line_no_ = 0;
};

template <typename T>
T parse_number(std::string_view token, const LineReader& reader) {
  T value{};
  auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
    reader.error("invalid number '" + std::string(token) + "'");
  return value;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  return out;
}

}  // namespace medspec
