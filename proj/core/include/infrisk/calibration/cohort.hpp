#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "infrisk/feature_vector.hpp"
#include "infrisk/schema.hpp"

namespace infrisk {

struct CohortRow {
  FeatureVector features;  // unknown set always empty
  int outcome = 0;         // 1 = infected

  bool operator==(const CohortRow&) const = default;
};

/// Encoded cohort extract, one row per patient.
struct CohortDataset {
  std::string schema_id;
  std::vector<std::string> feature_ids;
  std::vector<FeaturePair> interaction_pairs;
  std::vector<CohortRow> rows;
  std::string provenance;
};

inline constexpr std::string_view kOutcomeColumn = "infected";

struct IngestOptions {
  /// Strict: unknown columns and rejected rows fail the whole import.
  /// Lenient: both become warnings and the accepted rows are kept.
  bool strict = true;
};

struct RowRejection {
  std::size_t line = 0;
  std::string reason;
};

struct IngestResult {
  CohortDataset dataset;
  std::vector<RowRejection> rejected;
  std::vector<std::string> warnings;
};

/// Columns are question ids plus the `infected` outcome (0 or 1). Cells use
/// the answer domain of their question: checkbox and tri-state accept
/// 0/1/true/false, dropdowns an option value, sliders a number in bounds
/// (scaled on encoding). An empty cell means unanswered and takes the
/// question default; "do not know" cannot appear in calibration data.
///
/// Throws Error(validation) for an empty file, a missing outcome column,
/// no accepted rows ("no data rows"), or in strict mode any unknown column
/// or rejected row. The details of the error cite line numbers.
IngestResult ingest_cohort_csv(std::string_view csv, const QuestionnaireSchema& schema,
                               const IngestOptions& options = {}, std::string provenance = {});

IngestResult ingest_cohort_csv_file(const std::filesystem::path& path,
                                    const QuestionnaireSchema& schema,
                                    const IngestOptions& options = {});

/// Inverse of ingestion: re-ingesting the output reproduces `dataset`.
std::string write_cohort_csv(const CohortDataset& dataset, const QuestionnaireSchema& schema);

}  // namespace infrisk
