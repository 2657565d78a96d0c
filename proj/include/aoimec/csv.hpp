#pragma once

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "aoimec/errors.hpp"

namespace aoimec {

/// Minimal CSV emitter: '.' decimal separator, '\n' row terminator, mandatory
/// header, deterministic %.12g number formatting so reruns are byte-identical.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_) throw InvalidConfig("cannot open CSV output: " + path);
  }

  void header(const std::vector<std::string>& cols) { write_strings(cols); }

  void row(const std::vector<double>& values) {
    std::string line;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) line += ',';
      line += format(values[i]);
    }
    out_ << line << '\n';
  }

  void raw_row(const std::vector<std::string>& cells) { write_strings(cells); }

  static std::string format(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
  }

 private:
  void write_strings(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += ',';
      line += cells[i];
    }
    out_ << line << '\n';
  }

  std::ofstream out_;
};

}  // namespace aoimec
