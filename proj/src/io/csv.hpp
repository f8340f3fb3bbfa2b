#pragma once

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

namespace dish::io {

/// Formats a double with 17 significant digits, enough for an exact
/// round trip; run outputs are reproducible byte-for-byte.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : out_(path) {
    if (!out_) throw std::runtime_error("csv: cannot write " + path);
    write_row_raw(header);
  }

  void row(const std::vector<std::string>& cells) { write_row_raw(cells); }

  void row_mixed(std::initializer_list<std::string> cells) {
    write_row_raw(std::vector<std::string>(cells));
  }

 private:
  void write_row_raw(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::ofstream out_;
};

}  // namespace dish::io
