#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "glottal/classifier.hpp"
#include "glottal/feature_sets.hpp"
#include "glottal/pipeline.hpp"

namespace glottal::store {

struct Row {
  std::string id;
  VoiceLabel label = VoiceLabel::kNormal;
  std::string speaker;
  Task task = Task::kVowelA;
  std::vector<double> values;  // aligned with FeatureStore::columns, NaN = missing
};

struct Excluded {
  std::string id;
  std::string reason;
};

struct FeatureStore {
  std::string module_version;
  std::string params_hash;
  std::string config;  // canonical extraction config JSON
  std::vector<std::string> columns;
  std::vector<Row> rows;
  std::vector<Excluded> excluded;
};

inline constexpr const char* kFeaturesFile = "features.csv";
inline constexpr const char* kSchemaFile = "schema.json";

/// Every column of FS-12 for each successfully extracted recording.
FeatureStore build(const std::vector<pipe::RecordingResult>& results, const pipe::ExtractConfig& config);

/// features.csv (id, label, speaker, task, module_version, params_hash, features...)
/// plus schema.json. Values are written with 17 significant digits.
void write(const FeatureStore& store, const std::filesystem::path& dir);
FeatureStore read(const std::filesystem::path& dir);

/// FNV-1a digest of the two store files, as 16 hex digits.
std::string content_hash(const std::filesystem::path& dir);

/// Rows restricted to one task (if given) and to the columns of a feature set.
clf::Dataset dataset(const FeatureStore& store, const fsets::FeatureSetSpec& spec,
                     std::optional<Task> task = std::nullopt);

struct BoxStats {
  std::size_t n = 0;
  double median = 0.0, q1 = 0.0, q3 = 0.0;
  double lower_whisker = 0.0, upper_whisker = 0.0;  // extreme data within 1.5 IQR of the box
  std::size_t outliers = 0;
};

/// Box-plot statistics of the finite values.
BoxStats box_stats(std::vector<double> values);

struct AnalysisRow {
  std::string feature;
  VoiceLabel label = VoiceLabel::kNormal;
  BoxStats stats;
};

/// Box statistics per feature (recording-level means) and class. Throws
/// kSingleClass unless both labels are present.
std::vector<AnalysisRow> analyze(const FeatureStore& store, const std::vector<std::string>& features);
std::string analysis_csv(const std::vector<AnalysisRow>& rows);

// Reports.

/// "78.37±4.18" style row values: accuracy 2 decimals with std, SE/SP/AUC 2, EER 3.
std::string format_row(const clf::MetricsReport& report);
std::string report_table(const std::vector<clf::MetricsReport>& reports);
std::string report_csv(const std::vector<clf::MetricsReport>& reports);
std::string folds_csv(const clf::MetricsReport& report);

inline constexpr const char* kReportColumns[] = {"Feature set", "Accuracy [%]", "SE", "SP", "AUC",
                                                 "EER"};

}  // namespace glottal::store
