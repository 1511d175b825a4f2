#include "glottal/signal_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "glottal/error.hpp"

namespace glottal {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kFormat: return "format error";
    case ErrorKind::kUnsupportedCodec: return "unsupported codec";
    case ErrorKind::kEmptySignal: return "empty signal";
    case ErrorKind::kTooShort: return "signal too short";
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kUnvoiced: return "unvoiced signal";
    case ErrorKind::kDegenerateFrame: return "degenerate frame";
    case ErrorKind::kSingularSystem: return "singular system";
    case ErrorKind::kInsufficientEpochs: return "insufficient epochs";
    case ErrorKind::kAmplitudeQuotient: return "amplitude quotient undefined";
    case ErrorKind::kSynthesis: return "synthesis error";
    case ErrorKind::kSingleClass: return "single class";
    case ErrorKind::kDimensionMismatch: return "dimension mismatch";
    case ErrorKind::kDegenerateFolds: return "degenerate folds";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kConfig: return "config error";
  }
  return "error";
}

void validate(const SampledSignal& signal) {
  if (!(signal.fs > 0.0)) throw Error(ErrorKind::kInvalidArgument, "fs must be positive");
  if (signal.samples.empty()) throw Error(ErrorKind::kEmptySignal, "no samples");
  for (double v : signal.samples)
    if (!std::isfinite(v)) throw Error(ErrorKind::kInvalidArgument, "non-finite sample");
}

const char* to_string(VoiceLabel label) {
  return label == VoiceLabel::kNormal ? "normal" : "pathological";
}

const char* to_string(Task task) {
  switch (task) {
    case Task::kVowelA: return "vowel-a";
    case Task::kVowelI: return "vowel-i";
    case Task::kVowelU: return "vowel-u";
    case Task::kSentence: return "sentence";
  }
  return "vowel-a";
}

namespace {

std::string lower_trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

VoiceLabel parse_label(std::string_view token) {
  const std::string t = lower_trim(token);
  if (t == "normal" || t == "healthy") return VoiceLabel::kNormal;
  if (t == "pathological" || t == "pathology") return VoiceLabel::kPathological;
  throw Error(ErrorKind::kFormat, "unknown label token '" + std::string(token) + "'");
}

Task parse_task(std::string_view token) {
  const std::string t = lower_trim(token);
  if (t == "vowel-a" || t == "a") return Task::kVowelA;
  if (t == "vowel-i" || t == "i") return Task::kVowelI;
  if (t == "vowel-u" || t == "u") return Task::kVowelU;
  if (t == "sentence") return Task::kSentence;
  throw Error(ErrorKind::kFormat, "unknown task token '" + std::string(token) + "'");
}

std::pair<std::size_t, std::size_t> DatasetManifest::class_counts() const {
  std::size_t n = 0, p = 0;
  for (const auto& e : entries) (e.label == VoiceLabel::kNormal ? n : p)++;
  return {n, p};
}

namespace io {

namespace {

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

}  // namespace

SampledSignal load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw Error(ErrorKind::kFormat, path.string() + ": not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  bool have_data = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || size > avail)
        throw Error(ErrorKind::kFormat, path.string() + ": truncated fmt chunk");
      const unsigned char* f = bytes.data() + body;
      format = read_u16(f);
      channels = read_u16(f + 2);
      rate = read_u32(f + 4);
      bits = read_u16(f + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw Error(ErrorKind::kFormat, path.string() + ": bad extensible fmt");
        format = read_u16(f + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      // Some writers leave the data size at 0 or 0xFFFFFFFF when streaming.
      data = bytes.data() + body;
      data_size = std::min<std::size_t>(size, avail);
      have_data = true;
      break;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt || !have_data)
    throw Error(ErrorKind::kFormat, path.string() + ": missing fmt or data chunk");
  if (channels == 0 || rate == 0)
    throw Error(ErrorKind::kFormat, path.string() + ": zero channels or rate");

  std::size_t bytes_per_sample = 0;
  if (format == kFormatPcm && bits == 16) {
    bytes_per_sample = 2;
  } else if (format == kFormatFloat && bits == 32) {
    bytes_per_sample = 4;
  } else {
    throw Error(ErrorKind::kUnsupportedCodec,
                path.string() + ": format " + std::to_string(format) + " with " +
                    std::to_string(bits) + " bits");
  }
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t n = data_size / frame_bytes;
  if (n == 0) throw Error(ErrorKind::kEmptySignal, path.string() + ": empty data chunk");

  SampledSignal out;
  out.fs = static_cast<double>(rate);
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* p = data + i * frame_bytes;
    if (bytes_per_sample == 2) {
      const auto v = static_cast<std::int16_t>(read_u16(p));
      out.samples[i] = v / 32768.0;
    } else {
      const std::uint32_t bitsv = read_u32(p);
      float f;
      std::memcpy(&f, &bitsv, sizeof f);
      out.samples[i] = static_cast<double>(f);
    }
  }
  return out;
}

void write_wav(const std::filesystem::path& path, std::span<const double> samples, double fs,
               WavEncoding encoding) {
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : 32;
  const std::uint16_t fmt = encoding == WavEncoding::kPcm16 ? kFormatPcm : kFormatFloat;
  const std::uint32_t rate = static_cast<std::uint32_t>(std::lround(fs));
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * bits / 8);

  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, fmt);
  put_u16(out, 1);
  put_u32(out, rate);
  put_u32(out, rate * bits / 8);
  put_u16(out, bits / 8);
  put_u16(out, bits);
  out += "data";
  put_u32(out, data_bytes);
  for (double v : samples) {
    if (encoding == WavEncoding::kPcm16) {
      const double q = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
    } else {
      const float f = static_cast<float>(v);
      std::uint32_t b;
      std::memcpy(&b, &f, sizeof b);
      put_u32(out, b);
    }
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
}

DatasetManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  DatasetManifest manifest;
  std::istringstream in{std::string(text)};
  std::string line;
  int col_path = -1, col_label = -1, col_speaker = -1, col_task = -1;
  bool have_header = false;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1 && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF)
      line.erase(0, 3);
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto cols = split_csv_line(line);
    if (!have_header) {
      for (int i = 0; i < static_cast<int>(cols.size()); ++i) {
        const std::string c = lower_trim(cols[i]);
        if (c == "path") col_path = i;
        else if (c == "label") col_label = i;
        else if (c == "speaker") col_speaker = i;
        else if (c == "task") col_task = i;
      }
      if (col_path < 0 || col_label < 0 || col_speaker < 0 || col_task < 0)
        throw Error(ErrorKind::kFormat, "manifest header must contain path,label,speaker,task");
      have_header = true;
      continue;
    }
    const int need = std::max({col_path, col_label, col_speaker, col_task});
    if (static_cast<int>(cols.size()) <= need)
      throw Error(ErrorKind::kFormat, "manifest line " + std::to_string(line_no) +
                                          ": missing column");
    ManifestEntry e;
    std::filesystem::path p = trim(cols[col_path]);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    e.path = p.lexically_normal().string();
    e.label = parse_label(cols[col_label]);
    e.speaker = trim(cols[col_speaker]);
    e.task = parse_task(cols[col_task]);
    if (!seen.insert(e.path).second)
      throw Error(ErrorKind::kFormat, "duplicate manifest path " + e.path);
    manifest.entries.push_back(std::move(e));
  }
  if (!have_header) throw Error(ErrorKind::kFormat, "manifest has no header");
  if (manifest.entries.empty()) throw Error(ErrorKind::kFormat, "manifest has zero rows");
  return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  os << "path,label,speaker,task\n";
  for (const auto& e : manifest.entries)
    os << e.path << ',' << to_string(e.label) << ',' << e.speaker << ',' << to_string(e.task)
       << '\n';
}

namespace {

// Best rational approximation of x with a bounded denominator (Stern-Brocot /
// continued fractions), good to ~1e-9 relative.
std::pair<long, long> rational_ratio(double target, double fs) {
  const double rt = std::round(target), rf = std::round(fs);
  if (std::abs(target - rt) < 1e-9 && std::abs(fs - rf) < 1e-9) {
    const long a = static_cast<long>(rt), b = static_cast<long>(rf);
    const long g = std::gcd(a, b);
    return {a / g, b / g};
  }
  const double x = target / fs;
  long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double r = x;
  for (int it = 0; it < 64; ++it) {
    const long a = static_cast<long>(std::floor(r));
    const long h2 = a * h1 + h0, k2 = a * k1 + k0;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    if (std::abs(static_cast<double>(h1) / k1 - x) <= 1e-9 * x || k1 > 100000) break;
    const double frac = r - a;
    if (frac < 1e-15) break;
    r = 1.0 / frac;
  }
  return {h1, k1};
}

}  // namespace

SampledSignal resample(const SampledSignal& signal, double target_fs) {
  if (!(target_fs > 0.0)) throw Error(ErrorKind::kInvalidArgument, "target_fs must be positive");
  if (!(signal.fs > 0.0)) throw Error(ErrorKind::kInvalidArgument, "fs must be positive");
  if (target_fs == signal.fs) return signal;
  const auto [up, down] = rational_ratio(target_fs, signal.fs);
  const double upsampled_rate = static_cast<double>(up) * signal.fs;
  const double cutoff = 0.45 * std::min(signal.fs, target_fs);
  const double fc = cutoff / upsampled_rate;  // cycles per upsampled sample
  const int zero_crossings = 24;
  const long half = static_cast<long>(std::ceil(zero_crossings / (2.0 * fc)));
  const long taps = 2 * half + 1;

  std::vector<double> h(static_cast<std::size_t>(taps));
  for (long k = 0; k < taps; ++k) {
    const double t = static_cast<double>(k - half);
    const double arg = 2.0 * fc * t;
    const double sinc = t == 0 ? 1.0 : std::sin(std::numbers::pi * arg) / (std::numbers::pi * arg);
    const double a = 2.0 * std::numbers::pi * k / (taps - 1);
    const double blackman = 0.42 - 0.5 * std::cos(a) + 0.08 * std::cos(2 * a);
    h[k] = static_cast<double>(up) * 2.0 * fc * sinc * blackman;
  }

  const long n_in = static_cast<long>(signal.samples.size());
  const long n_out = std::lround(static_cast<double>(n_in) * up / down);
  SampledSignal out;
  out.fs = signal.fs * static_cast<double>(up) / static_cast<double>(down);
  out.samples.assign(static_cast<std::size_t>(std::max(0L, n_out)), 0.0);
  for (long m = 0; m < n_out; ++m) {
    const long t = m * down + half;  // position in upsampled domain, shifted by delay
    // taps index j = t - n*up must lie in [0, taps)
    long n_lo = (t - (taps - 1) + up - 1) / up;
    if (t - (taps - 1) < 0) n_lo = 0;
    const long n_hi = std::min(n_in - 1, t / up);
    double acc = 0.0;
    for (long n = std::max(0L, n_lo); n <= n_hi; ++n) acc += signal.samples[n] * h[t - n * up];
    out.samples[m] = acc;
  }
  return out;
}

}  // namespace io
}  // namespace glottal
