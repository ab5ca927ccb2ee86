#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace greencells {

// RFC-4180-style CSV: UTF-8, LF line endings, minimal quoting. Numeric cells
// print through one fixed %.12g format so identical runs are byte-stable.
class CsvWriter {
public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open CSV output: " + path);
  }

  void header(const std::vector<std::string>& names) { row_strings(names); }

  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << quoted(cells[i]);
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << format(cells[i]);
    }
    out_ << '\n';
  }

  static std::string format(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
  }

  static std::string quoted(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += "\"\"";
      else q += c;
    }
    q += '"';
    return q;
  }

private:
  std::ofstream out_;
};

}  // namespace greencells
