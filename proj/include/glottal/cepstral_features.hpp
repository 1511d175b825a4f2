#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "glottal/zff.hpp"

namespace glottal::cep {

struct CepstralConfig {
  std::size_t n_dft = 1024;  // raised to the next power of two above the frame length
  int n_mel_filters = 26;
  int n_ceps = 13;  // c0..c12
  double frame_ms = 25.0;
  double shift_ms = 5.0;
  int delta_window = 2;

  void validate() const;
};

enum class CepstralKind { kMfcc, kMfccQcp, kMfccZff, kPlp };
const char* to_string(CepstralKind kind);

/// Row-major frames x width matrix (width = 3 * n_ceps after dynamics).
struct FeatureFrameSeries {
  std::size_t n_frames = 0;
  std::size_t width = 0;
  std::vector<double> vectors;
  CepstralKind kind = CepstralKind::kMfcc;
  std::vector<char> voiced_mask;  // empty until set_voicing()
  std::vector<std::size_t> starts;
  std::size_t frame_len = 0;

  std::span<const double> row(std::size_t i) const { return {vectors.data() + i * width, width}; }
};

double hz_to_mel(double f);
double mel_to_hz(double m);

/// Triangular filters equally spaced on the mel scale over [0, fs/2]; each row
/// holds n_dft/2 + 1 bin weights.
std::vector<std::vector<double>> mel_filterbank(int n_filters, std::size_t n_dft, double fs);

/// Orthonormal DCT-II, first n_keep coefficients.
std::vector<double> dct2(std::span<const double> x, int n_keep);

/// Effective DFT size for a frame: max(cfg.n_dft, next power of two >= len).
std::size_t dft_size(std::size_t frame_len, const CepstralConfig& cfg);

/// Static MFCCs (c0..c12) of one raw frame; the Hamming window is applied here.
std::vector<double> mfcc_frame(std::span<const double> frame, double fs, const CepstralConfig& cfg);

FeatureFrameSeries mfcc(std::span<const double> x, double fs, const CepstralConfig& cfg = {},
                        CepstralKind kind = CepstralKind::kMfcc);

double hz_to_bark(double f);

/// Equal-loudness weight E(w) = (w^2 + 56.8e6) w^4 / ((w^2 + 6.3e6)^2 (w^2 + 0.38e9)),
/// w = 2 pi f.
double equal_loudness(double f_hz);

struct BarkBank {
  std::vector<std::vector<double>> filters;  // per band, n_dft/2 + 1 bin weights
  std::vector<double> centers_hz;
};

/// Critical-band filters with the usual trapezoidal (in log units) masking
/// curve, centres evenly spaced at most 1 Bark apart from 0 to the Nyquist Bark.
BarkBank bark_filterbank(std::size_t n_dft, double fs);

/// Critical-band energies of the Hamming-windowed power spectrum, weighted by
/// the equal-loudness curve at each band centre.
std::vector<double> plp_auditory_spectrum(std::span<const double> frame, double fs,
                                          const CepstralConfig& cfg);

inline constexpr int kPlpOrder = 12;

/// Static PLP cepstrum (n_ceps values) of one raw frame.
std::vector<double> plp_frame(std::span<const double> frame, double fs, const CepstralConfig& cfg);

FeatureFrameSeries plp(std::span<const double> x, double fs, const CepstralConfig& cfg = {});

/// Stacks statics with deltas and double-deltas (regression over +-window
/// frames, edges replicated). Input is row-major n_frames x width.
std::vector<double> append_dynamics(std::span<const double> statics, std::size_t n_frames,
                                    std::size_t width, int window = 2);

/// Marks frames that contain at least one epoch.
void set_voicing(FeatureFrameSeries& series, const zff::GciSequence& gcis);

}  // namespace glottal::cep
