#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "ssldyn/errors.hpp"

namespace ssldyn::cli {

/// CSV emission with 17 significant digits (round-trip exact doubles).
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path) {
    if (!out_.is_open()) throw IoError("cannot open output file: " + path);
  }

  void header(const std::vector<std::string>& cols) {
    for (size_t i = 0; i < cols.size(); ++i) {
      if (i) out_ << ',';
      out_ << cols[i];
    }
    out_ << '\n';
  }

  void row(const std::vector<double>& vals) {
    char buf[40];
    for (size_t i = 0; i < vals.size(); ++i) {
      if (i) out_ << ',';
      std::snprintf(buf, sizeof buf, "%.17g", vals[i]);
      out_ << buf;
    }
    out_ << '\n';
  }

  void raw_row(const std::string& line) { out_ << line << '\n'; }

  void close() {
    out_.close();
    if (out_.fail()) throw IoError("write failure on CSV output");
  }

 private:
  std::ofstream out_;
};

}  // namespace ssldyn::cli
