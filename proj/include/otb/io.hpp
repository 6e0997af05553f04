#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "otb/errors.hpp"

namespace otb {

// 17 significant digits: enough for exact double round-trips, so re-running a
// command reproduces output files byte for byte.
inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot open output file: " + path);
    write(header);
  }

  void row(const std::vector<std::string>& cells) { write(cells); }

  void close() {
    out_.close();
    if (!out_) throw Error("failed writing output file");
  }

 private:
  std::ofstream out_;

  void write(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out_ << ',';
      out_ << cells[k];
    }
    out_ << '\n';
  }
};

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path);
  out << body;
  out.close();
  if (!out) throw Error("failed writing output file: " + path);
}

}  // namespace otb
