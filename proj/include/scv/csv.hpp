#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace scv {

// Round-trip-exact formatting so identical runs produce identical bytes.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open csv for writing: " + path);
  }

  void header(const std::vector<std::string>& names) { write_line(names); }

  CsvWriter& cell(double x) {
    cells_.push_back(format_double(x));
    return *this;
  }
  CsvWriter& cell(int x) {
    cells_.push_back(std::to_string(x));
    return *this;
  }
  CsvWriter& cell(std::size_t x) {
    cells_.push_back(std::to_string(x));
    return *this;
  }
  CsvWriter& cell(const std::string& s) {
    cells_.push_back(s);
    return *this;
  }

  void end_row() {
    write_line(cells_);
    cells_.clear();
  }

 private:
  void write_line(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  std::ofstream out_;
  std::vector<std::string> cells_;
};

}  // namespace scv
