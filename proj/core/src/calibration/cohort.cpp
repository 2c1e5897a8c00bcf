#include "infrisk/calibration/cohort.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "calibration/csv.hpp"
#include "infrisk/answers.hpp"
#include "infrisk/error.hpp"

namespace infrisk {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::optional<bool> parse_flag(const std::string& cell) {
  const auto v = lower(cell);
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  return std::nullopt;
}

std::optional<double> parse_number(const std::string& cell) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

}  // namespace

IngestResult ingest_cohort_csv(std::string_view csv, const QuestionnaireSchema& schema,
                               const IngestOptions& options, std::string provenance) {
  const auto records = detail::parse_csv(csv);
  if (records.empty()) {
    throw Error(ErrorCode::validation, "empty file: no header and no data rows");
  }

  IngestResult result;
  auto& ds = result.dataset;
  ds.schema_id = schema.id;
  ds.feature_ids = schema.feature_ids();
  ds.interaction_pairs = schema.interaction_pairs;
  ds.provenance = std::move(provenance);

  const auto& header = records.front();
  if (!header.error.empty()) {
    throw Error(ErrorCode::validation, "line " + std::to_string(header.line) + ": " + header.error);
  }

  // column index -> question (nullptr for the outcome or ignored columns)
  std::vector<const Question*> columns;
  std::optional<std::size_t> outcome_col;
  std::vector<std::string> header_errors;
  std::map<std::string, std::size_t> seen;
  for (std::size_t c = 0; c < header.fields.size(); ++c) {
    const auto name = trim(header.fields[c]);
    if (!seen.emplace(name, c).second) header_errors.push_back("duplicate column '" + name + "'");
    if (name == kOutcomeColumn) {
      outcome_col = c;
      columns.push_back(nullptr);
      continue;
    }
    const auto* q = schema.find_question(name);
    if (q == nullptr) {
      const auto msg = "unknown column '" + name + "'";
      if (options.strict) header_errors.push_back(msg);
      else result.warnings.push_back(msg + " ignored");
    }
    columns.push_back(q);
  }
  if (!outcome_col) header_errors.insert(header_errors.begin(), "missing outcome column 'infected'");
  if (!header_errors.empty()) {
    throw Error(ErrorCode::validation, "cohort header rejected", std::move(header_errors));
  }
  for (const auto& q : schema.questions) {
    if (!seen.count(q.id)) result.warnings.push_back("column '" + q.id + "' absent; question default used");
  }

  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    auto reject = [&](std::string reason) { result.rejected.push_back({rec.line, std::move(reason)}); };
    if (!rec.error.empty()) {
      reject(rec.error);
      continue;
    }
    if (rec.fields.size() != header.fields.size()) {
      reject("expected " + std::to_string(header.fields.size()) + " fields, got " +
             std::to_string(rec.fields.size()));
      continue;
    }

    AnswerSet answers;
    answers.schema_id = schema.id;
    std::vector<std::string> problems;
    int outcome = -1;
    for (std::size_t c = 0; c < rec.fields.size(); ++c) {
      const auto cell = trim(rec.fields[c]);
      if (c == *outcome_col) {
        if (cell == "0") outcome = 0;
        else if (cell == "1") outcome = 1;
        else problems.push_back("outcome 'infected' must be 0 or 1, got '" + cell + "'");
        continue;
      }
      const Question* q = columns[c];
      if (q == nullptr || cell.empty()) continue;
      switch (q->widget) {
        case Widget::checkbox:
        case Widget::tri_state:
          if (auto flag = parse_flag(cell)) answers.answers[q->id] = *flag;
          else problems.push_back("column '" + q->id + "': expected 0, 1, true or false, got '" + cell + "'");
          break;
        case Widget::dropdown:
          answers.answers[q->id] = cell;
          break;
        case Widget::slider:
          if (auto num = parse_number(cell)) answers.answers[q->id] = *num;
          else problems.push_back("column '" + q->id + "': expected a number, got '" + cell + "'");
          break;
      }
    }
    if (!problems.empty()) {
      reject(join(problems));
      continue;
    }

    AnswerSet validated;
    try {
      validated = validate_answers(schema, answers);
    } catch (const Error& e) {
      reject(join(e.details()));
      continue;
    }
    auto features = encode_features(schema, validated);
    if (!features.unknown.empty()) {
      std::vector<std::string> names(features.unknown.begin(), features.unknown.end());
      reject("missing value for " + join(names) + " (\"do not know\" is not allowed in cohort data)");
      continue;
    }
    ds.rows.push_back({std::move(features), outcome});
  }

  std::vector<std::string> details;
  for (const auto& rj : result.rejected) {
    details.push_back("line " + std::to_string(rj.line) + ": " + rj.reason);
  }
  if (options.strict && !result.rejected.empty()) {
    throw Error(ErrorCode::validation,
                std::to_string(result.rejected.size()) + " row(s) rejected", std::move(details));
  }
  if (ds.rows.empty()) {
    throw Error(ErrorCode::validation, "no data rows", std::move(details));
  }
  for (auto& d : details) result.warnings.push_back(std::move(d));
  return result;
}

IngestResult ingest_cohort_csv_file(const std::filesystem::path& path,
                                    const QuestionnaireSchema& schema, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read cohort file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ingest_cohort_csv(buf.str(), schema, options, path.string());
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Raw slider value whose re-scaling reproduces `scaled` exactly.
double unscale(double scaled, const SliderBounds& b) {
  const double span = b.hi - b.lo;
  double raw = std::clamp(b.lo + scaled * span, b.lo, b.hi);
  if ((raw - b.lo) / span == scaled) return raw;
  double up = raw;
  double down = raw;
  for (int i = 0; i < 64; ++i) {
    up = std::nextafter(up, b.hi);
    down = std::nextafter(down, b.lo);
    if ((up - b.lo) / span == scaled) return up;
    if ((down - b.lo) / span == scaled) return down;
  }
  return raw;
}

}  // namespace

std::string write_cohort_csv(const CohortDataset& dataset, const QuestionnaireSchema& schema) {
  std::string out;
  for (const auto& q : schema.questions) {
    out += detail::csv_escape(q.id);
    out += ',';
  }
  out += kOutcomeColumn;
  out += "\r\n";

  for (const auto& row : dataset.rows) {
    for (const auto& q : schema.questions) {
      switch (q.widget) {
        case Widget::checkbox:
        case Widget::tri_state:
          out += row.features.value_or_zero(*q.feature) == 1.0 ? "1" : "0";
          break;
        case Widget::dropdown: {
          const Option* chosen = nullptr;
          const Option* reference = nullptr;
          for (const auto& o : q.options) {
            if (!o.feature) {
              if (reference == nullptr) reference = &o;
            } else if (row.features.value_or_zero(*o.feature) == 1.0) {
              chosen = &o;
            }
          }
          if (chosen == nullptr) chosen = reference;
          if (chosen != nullptr) out += detail::csv_escape(chosen->value);
          break;
        }
        case Widget::slider:
          out += format_double(unscale(row.features.value_or_zero(*q.feature), *q.bounds));
          break;
      }
      out += ',';
    }
    out += row.outcome == 1 ? "1" : "0";
    out += "\r\n";
  }
  return out;
}

}  // namespace infrisk
