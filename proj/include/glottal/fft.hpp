#pragma once

#include <complex>
#include <span>
#include <vector>

namespace glottal::fft {

using Complex = std::complex<double>;

/// Real-to-complex transform of `x` zero-padded (or truncated) to n points.
/// Returns bins 0..n/2.
std::vector<Complex> rfft(std::span<const double> x, std::size_t n);

/// Inverse of rfft: takes n/2+1 bins, returns n real samples (scaled by 1/n).
std::vector<double> irfft(std::span<const Complex> half_spectrum, std::size_t n);

/// Full complex transforms. inverse() is scaled by 1/n.
std::vector<Complex> forward(std::span<const Complex> x);
std::vector<Complex> inverse(std::span<const Complex> x);

std::size_t next_pow2(std::size_t n);

}  // namespace glottal::fft
