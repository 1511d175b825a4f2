#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "glottal/cepstral_features.hpp"
#include "glottal/classifier.hpp"
#include "glottal/glottal_params.hpp"
#include "glottal/lf_synth.hpp"
#include "glottal/qcp.hpp"
#include "glottal/signal_io.hpp"
#include "glottal/zff.hpp"

namespace glottal::pipe {

inline constexpr const char* kModuleVersion = "glottal-1.0";

struct ExtractConfig {
  qcp::QcpConfig qcp;
  zff::ZffConfig zff;
  cep::CepstralConfig cep;
  gp::LevelConfig levels;
  int residual_order = 12;
  double fd_min_frame_ms = 25.0;  // frequency-domain frames: max(this, fd_periods * median T0)
  double fd_periods = 3.0;
  double fd_shift_ms = 5.0;
  double ps_frame_ms = 25.0;
  double cpp_frame_ms = 40.0;
  double cpp_shift_ms = 5.0;
  bool rd_from_signal = false;  // Rd on the speech signal instead of the QCP flow derivative
};

/// Applies one `key=value` override. Throws kConfig for unknown keys or bad values.
void apply_param(ExtractConfig& extract, clf::CvConfig& cv, const std::string& assignment);

/// Canonical JSON of the extraction parameters (stable key order).
std::string config_json(const ExtractConfig& config);
std::string params_hash(const ExtractConfig& config);

/// 64-bit FNV-1a digest as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// All frame/cycle/epoch tracks of one recording, keyed by base feature name.
/// Vowel tasks keep voiced frames only. Throws kInsufficientEpochs below 5 GCIs.
clf::FrameTracks extract_tracks(const SampledSignal& signal, Task task, const ExtractConfig& config);

struct RecordingResult {
  ManifestEntry entry;
  std::string id;
  bool ok = false;
  std::string reason;  // why the recording was excluded
  std::map<std::string, clf::Stat> stats;
};

using Logger = std::function<void(const std::string&)>;

/// Per-recording extraction over a manifest. Failures are logged and marked,
/// never thrown; results keep manifest order whatever `jobs` is.
std::vector<RecordingResult> extract_manifest(const DatasetManifest& manifest,
                                              const ExtractConfig& config, int jobs = 1,
                                              const Logger& log = {});

/// Recording id: file stem.
std::string recording_id(const ManifestEntry& entry);

// Synthetic two-class corpus.

struct CorpusSpec {
  std::size_t pairs = 100;
  std::uint64_t seed = 42;
  double duration = 1.0;
  double fs = 25000.0;
};

struct CorpusItem {
  std::string id;
  VoiceLabel label = VoiceLabel::kNormal;
  lf::SynthSpec spec;
};

/// Matched normal-like / pathological-like pairs sharing F0 and formants.
std::vector<CorpusItem> oracle_corpus(const CorpusSpec& spec);

/// Writes <id>.wav, <id>.json (ground truth) and manifest.csv into `dir`.
DatasetManifest write_corpus(const std::filesystem::path& dir, const std::vector<CorpusItem>& items,
                             int jobs = 1);

struct Sidecar {
  CorpusItem item;
  std::vector<std::size_t> gcis;
};

/// Reads back a ground-truth sidecar written by write_corpus.
Sidecar read_sidecar(const std::filesystem::path& path);

/// Parses a corpus spec file: {"pairs", "seed", "duration", "fs"}.
CorpusSpec load_corpus_spec(const std::filesystem::path& path);

/// Runs `fn(i)` for i in [0, n) on up to `jobs` threads; rethrows the first failure.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace glottal::pipe
