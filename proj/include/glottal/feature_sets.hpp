#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace glottal::fsets {

/// Frame- or cycle-level feature families; each feature set is a union of them.
enum class Family { kQcpGlottal, kZffExcitation, kSourceMisc, kMfccQcp, kMfccZff, kMfcc, kPlp };

const char* to_string(Family family);

/// Base (pre-aggregation) feature names of a family, e.g. "NAQ" or "MFCC_QCP_07".
std::vector<std::string> family_features(Family family);

struct FeatureSetSpec {
  std::string id;  // "FS-1" .. "FS-12"
  std::vector<Family> families;
};

const std::vector<FeatureSetSpec>& all_feature_sets();

/// Throws kConfig for an unknown id.
const FeatureSetSpec& feature_set(std::string_view id);

/// Aggregated column names: "<feature>.mean" and "<feature>.std" per base feature.
std::vector<std::string> columns(const FeatureSetSpec& spec);
std::size_t dimension(const FeatureSetSpec& spec);

/// "FS-1,FS-9" or "all" -> ids, validated.
std::vector<std::string> parse_list(std::string_view text);

}  // namespace glottal::fsets
