#include "calibration/csv.hpp"

namespace infrisk::detail {

std::vector<CsvRecord> parse_csv(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<CsvRecord> records;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = text.size();

  while (i < n) {
    CsvRecord rec;
    rec.line = line;
    std::string field;
    bool record_done = false;
    bool any_content = false;

    while (!record_done) {
      if (i < n && text[i] == '"') {
        any_content = true;
        ++i;
        bool closed = false;
        while (i < n) {
          const char c = text[i];
          if (c == '"') {
            if (i + 1 < n && text[i + 1] == '"') {
              field.push_back('"');
              i += 2;
              continue;
            }
            ++i;
            closed = true;
            break;
          }
          if (c == '\n') ++line;
          field.push_back(c);
          ++i;
        }
        if (!closed) {
          rec.error = "unterminated quoted field";
          i = n;
        } else if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          rec.error = "unexpected character after closing quote";
          while (i < n && text[i] != '\n') ++i;
        }
      } else {
        while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          if (text[i] == '"' && rec.error.empty()) rec.error = "quote inside unquoted field";
          field.push_back(text[i]);
          ++i;
        }
        if (!field.empty()) any_content = true;
      }

      rec.fields.push_back(std::move(field));
      field.clear();

      if (i >= n) {
        record_done = true;
      } else if (text[i] == ',') {
        any_content = true;
        ++i;
      } else {
        if (text[i] == '\r' && i + 1 < n && text[i + 1] == '\n') ++i;
        ++i;
        ++line;
        record_done = true;
      }
    }
    if (any_content || !rec.error.empty()) records.push_back(std::move(rec));
  }
  return records;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace infrisk::detail
