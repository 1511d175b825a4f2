#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace glottal {

/// Mono waveform plus its sampling rate. Samples are nominally in [-1, 1].
struct SampledSignal {
  std::vector<double> samples;
  double fs = 0.0;

  std::size_t size() const { return samples.size(); }
  double duration() const { return fs > 0 ? samples.size() / fs : 0.0; }
};

/// Throws kInvalidArgument unless fs > 0, samples non-empty and finite.
void validate(const SampledSignal& signal);

enum class VoiceLabel { kNormal, kPathological };

enum class Task { kVowelA, kVowelI, kVowelU, kSentence };

const char* to_string(VoiceLabel label);
const char* to_string(Task task);
VoiceLabel parse_label(std::string_view token);
Task parse_task(std::string_view token);

struct ManifestEntry {
  std::string path;
  VoiceLabel label = VoiceLabel::kNormal;
  std::string speaker;
  Task task = Task::kVowelA;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;

  /// (normal, pathological)
  std::pair<std::size_t, std::size_t> class_counts() const;
};

namespace io {

SampledSignal load_wav(const std::filesystem::path& path);

enum class WavEncoding { kPcm16, kFloat32 };

/// Writes a mono file. PCM16 values are clipped to [-1, 1 - 2^-15].
void write_wav(const std::filesystem::path& path, std::span<const double> samples,
               double fs, WavEncoding encoding = WavEncoding::kPcm16);

/// Parses `path,label,speaker,task` CSV. Relative paths are resolved against
/// the manifest's directory.
DatasetManifest load_manifest(const std::filesystem::path& path);
DatasetManifest parse_manifest(std::string_view text,
                               const std::filesystem::path& base_dir = {});
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

/// Polyphase rational resampling with a windowed-sinc anti-alias filter.
SampledSignal resample(const SampledSignal& signal, double target_fs);

}  // namespace io
}  // namespace glottal
