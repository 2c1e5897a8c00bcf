#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace infrisk::detail {

struct CsvRecord {
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> fields;
  std::string error;     // nonempty when the record is malformed
};

/// RFC 4180: comma separated, double-quote quoting with "" escapes, CRLF or
/// LF record ends, quoted fields may span lines. A leading UTF-8 BOM is
/// dropped and fully blank lines are skipped.
std::vector<CsvRecord> parse_csv(std::string_view text);

/// Quotes the field when it contains a comma, quote or line break.
std::string csv_escape(std::string_view field);

}  // namespace infrisk::detail
