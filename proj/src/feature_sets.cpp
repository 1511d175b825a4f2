#include "glottal/feature_sets.hpp"

#include <cstdio>
#include <sstream>

#include "glottal/error.hpp"

namespace glottal::fsets {

namespace {

std::vector<std::string> numbered(const char* prefix, int n) {
  std::vector<std::string> out;
  char buf[64];
  for (int i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%s_%02d", prefix, i);
    out.emplace_back(buf);
  }
  return out;
}

constexpr int kCepstralWidth = 39;

}  // namespace

const char* to_string(Family family) {
  switch (family) {
    case Family::kQcpGlottal: return "qcp_glottal";
    case Family::kZffExcitation: return "zff_excitation";
    case Family::kSourceMisc: return "source";
    case Family::kMfccQcp: return "mfcc_qcp";
    case Family::kMfccZff: return "mfcc_zff";
    case Family::kMfcc: return "mfcc";
    case Family::kPlp: return "plp";
  }
  return "?";
}

std::vector<std::string> family_features(Family family) {
  switch (family) {
    case Family::kQcpGlottal:
      return {"OQ1", "OQ2", "NAQ", "ClQ", "SQ1", "SQ2", "AQ", "QoQ", "OQa", "H1H2", "PSP", "HRF"};
    case Family::kZffExcitation: return {"SoE", "EoE", "Loudness", "ZFF_energy"};
    case Family::kSourceMisc: return {"MDQ", "PS", "CPP", "Rd"};
    case Family::kMfccQcp: return numbered("MFCC_QCP", kCepstralWidth);
    case Family::kMfccZff: return numbered("MFCC_ZFF", kCepstralWidth);
    case Family::kMfcc: return numbered("MFCC", kCepstralWidth);
    case Family::kPlp: return numbered("PLP", kCepstralWidth);
  }
  return {};
}

const std::vector<FeatureSetSpec>& all_feature_sets() {
  using F = Family;
  static const std::vector<FeatureSetSpec> sets{
      {"FS-1", {F::kQcpGlottal}},
      {"FS-2", {F::kZffExcitation}},
      {"FS-3", {F::kSourceMisc}},
      {"FS-4", {F::kMfccQcp}},
      {"FS-5", {F::kMfccZff}},
      {"FS-6", {F::kMfcc}},
      {"FS-7", {F::kPlp}},
      {"FS-8", {F::kQcpGlottal, F::kZffExcitation, F::kSourceMisc}},
      {"FS-9", {F::kMfccQcp, F::kMfccZff}},
      {"FS-10", {F::kQcpGlottal, F::kZffExcitation, F::kSourceMisc, F::kMfccQcp, F::kMfccZff}},
      {"FS-11", {F::kMfcc, F::kPlp}},
      {"FS-12",
       {F::kQcpGlottal, F::kZffExcitation, F::kSourceMisc, F::kMfccQcp, F::kMfccZff, F::kMfcc,
        F::kPlp}},
  };
  return sets;
}

const FeatureSetSpec& feature_set(std::string_view id) {
  for (const auto& s : all_feature_sets())
    if (s.id == id) return s;
  throw Error(ErrorKind::kConfig, "unknown feature set '" + std::string(id) + "'");
}

std::vector<std::string> columns(const FeatureSetSpec& spec) {
  std::vector<std::string> out;
  for (Family f : spec.families)
    for (const auto& name : family_features(f)) {
      out.push_back(name + ".mean");
      out.push_back(name + ".std");
    }
  return out;
}

std::size_t dimension(const FeatureSetSpec& spec) { return columns(spec).size(); }

std::vector<std::string> parse_list(std::string_view text) {
  std::vector<std::string> ids;
  if (text == "all") {
    for (const auto& s : all_feature_sets()) ids.push_back(s.id);
    return ids;
  }
  std::stringstream ss{std::string(text)};
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    ids.push_back(feature_set(tok).id);
  }
  if (ids.empty()) throw Error(ErrorKind::kConfig, "no feature sets requested");
  return ids;
}

}  // namespace glottal::fsets
