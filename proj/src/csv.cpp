#include "pifeat/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>

namespace pifeat::csv {

std::vector<std::string> split(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::vector<Row> read_rows(const std::filesystem::path& path, char delimiter) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::vector<Row> rows;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    if (delimiter == ' ') {
      // space-separated: collapse runs of whitespace
      Row row{line_number, {}};
      std::size_t i = 0;
      while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        std::size_t begin = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
        if (i > begin) row.fields.push_back(line.substr(begin, i - begin));
      }
      if (!row.fields.empty()) rows.push_back(std::move(row));
    } else {
      rows.push_back(Row{line_number, split(line, delimiter)});
    }
  }
  return rows;
}

double parse_double(const std::string& field, const std::filesystem::path& path,
                    std::size_t line_number) {
  const char* begin = field.c_str();
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    throw ParseError(path.string() + ":" + std::to_string(line_number) +
                     ": cannot parse number '" + field + "'");
  }
  return value;
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  // Trim to the shortest representation that still round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof(shorter), "%.*g", prec, value);
    if (std::strtod(shorter, nullptr) == value) {
      return shorter;
    }
  }
  return buf;
}

std::string format_float(float value) {
  for (int prec = 1; prec <= 9; ++prec) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, static_cast<double>(value));
    if (static_cast<float>(std::strtod(buf, nullptr)) == value) {
      return buf;
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(value));
  return buf;
}

AtomicFileWriter::AtomicFileWriter(const std::filesystem::path& path)
    : final_path_(path), temp_path_(path.string() + ".tmp") {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  out_.open(temp_path_, std::ios::binary | std::ios::trunc);
  if (!out_) {
    throw IoError("cannot open " + temp_path_.string() + " for writing");
  }
}

AtomicFileWriter::~AtomicFileWriter() {
  if (!committed_) {
    out_.close();
    std::error_code ec;
    std::filesystem::remove(temp_path_, ec);
  }
}

void AtomicFileWriter::commit() {
  out_.flush();
  if (!out_) {
    throw IoError("write failed for " + temp_path_.string());
  }
  out_.close();
  std::error_code ec;
  std::filesystem::rename(temp_path_, final_path_, ec);
  if (ec) {
    throw IoError("cannot rename " + temp_path_.string() + " to " + final_path_.string() +
                  ": " + ec.message());
  }
  committed_ = true;
}

}  // namespace pifeat::csv
