#pragma once

// Small CSV helpers shared by dataset parsing and the CLI writers. All file
// writes go through AtomicFileWriter (temp file + rename) so outputs are
// complete or absent, never partial.

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "pifeat/errors.hpp"

namespace pifeat::csv {

struct Row {
  std::size_t line_number = 0;  // 1-based, as in the file
  std::vector<std::string> fields;
};

/// Parse a delimited text file. Skips blank lines. Throws IoError if the
/// file cannot be opened.
std::vector<Row> read_rows(const std::filesystem::path& path, char delimiter = ',');

/// Split one line (no quoting; these formats never need it).
std::vector<std::string> split(const std::string& line, char delimiter);

/// strtod with a ParseError carrying file:line context on failure.
double parse_double(const std::string& field, const std::filesystem::path& path,
                    std::size_t line_number);

/// Shortest text that round-trips a double exactly.
std::string format_double(double value);
/// Shortest text that round-trips a 32-bit float exactly.
std::string format_float(float value);

class AtomicFileWriter {
 public:
  explicit AtomicFileWriter(const std::filesystem::path& path);
  ~AtomicFileWriter();
  AtomicFileWriter(const AtomicFileWriter&) = delete;
  AtomicFileWriter& operator=(const AtomicFileWriter&) = delete;

  std::ostream& stream() { return out_; }
  void commit();  // flush, close, rename into place

 private:
  std::filesystem::path final_path_;
  std::filesystem::path temp_path_;
  std::ofstream out_;
  bool committed_ = false;
};

}  // namespace pifeat::csv
