#include "glottal/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace glottal::fft {

namespace {

// FFTW planning is not thread-safe; execution through the new-array interface
// is. Plans are created once per (kind, size) and kept for the process lifetime.
enum class Kind { kR2C, kC2R, kForward, kBackward };

class PlanCache {
 public:
  fftw_plan get(Kind kind, std::size_t n) {
    std::lock_guard lock(mu_);
    auto key = std::make_tuple(kind, n);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const int ni = static_cast<int>(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    double* r = fftw_alloc_real(n);
    fftw_complex* c = fftw_alloc_complex(n);
    fftw_complex* c2 = fftw_alloc_complex(n);
    fftw_plan p = nullptr;
    switch (kind) {
      case Kind::kR2C: p = fftw_plan_dft_r2c_1d(ni, r, c, flags); break;
      case Kind::kC2R: p = fftw_plan_dft_c2r_1d(ni, c, r, flags); break;
      case Kind::kForward: p = fftw_plan_dft_1d(ni, c, c2, FFTW_FORWARD, flags); break;
      case Kind::kBackward: p = fftw_plan_dft_1d(ni, c, c2, FFTW_BACKWARD, flags); break;
    }
    fftw_free(r);
    fftw_free(c);
    fftw_free(c2);
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<Kind, std::size_t>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<Complex> rfft(std::span<const double> x, std::size_t n) {
  std::vector<double> in(n, 0.0);
  const std::size_t m = std::min(n, x.size());
  std::copy(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(m), in.begin());
  std::vector<Complex> out(n / 2 + 1);
  fftw_execute_dft_r2c(cache().get(Kind::kR2C, n), in.data(), as_fftw(out.data()));
  return out;
}

std::vector<double> irfft(std::span<const Complex> half_spectrum, std::size_t n) {
  // c2r destroys its input, so work on a copy.
  std::vector<Complex> in(half_spectrum.begin(), half_spectrum.end());
  in.resize(n / 2 + 1);
  std::vector<double> out(n);
  fftw_execute_dft_c2r(cache().get(Kind::kC2R, n), as_fftw(in.data()), out.data());
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : out) v *= scale;
  return out;
}

std::vector<Complex> forward(std::span<const Complex> x) {
  std::vector<Complex> in(x.begin(), x.end());
  std::vector<Complex> out(x.size());
  fftw_execute_dft(cache().get(Kind::kForward, x.size()), as_fftw(in.data()),
                   as_fftw(out.data()));
  return out;
}

std::vector<Complex> inverse(std::span<const Complex> x) {
  std::vector<Complex> in(x.begin(), x.end());
  std::vector<Complex> out(x.size());
  fftw_execute_dft(cache().get(Kind::kBackward, x.size()), as_fftw(in.data()),
                   as_fftw(out.data()));
  const double scale = 1.0 / static_cast<double>(x.size());
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace glottal::fft
