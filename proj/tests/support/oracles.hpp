#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library routines they are compared against.

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "glottal/lf_synth.hpp"
#include "glottal/linear_prediction.hpp"

namespace oracle {

/// |X[k]|, k = 0..n/2, by the direct O(n^2) DFT sum of x zero-padded to n.
std::vector<double> dft_magnitude(std::span<const double> x, std::size_t n);

struct DualOptimum {
  std::vector<double> alpha;
  double objective = 0.0;
};

/// Exact maximiser of the SVM dual on a small problem: every split of the
/// variables into {0, C, free} is tried, the free block solved from the KKT
/// system, and the best feasible point kept. Exponential; n <= 12.
DualOptimum svm_dual_bruteforce(const Eigen::MatrixXd& kernel, std::span<const int> y, double c);

/// Mann-Whitney estimate: P(s+ > s-) + P(s+ = s-)/2 over all pairs.
double pairwise_auc(std::span<const double> scores, std::span<const int> labels);

/// EER by counting errors at every distinct threshold (decide +1 when s >= t),
/// then interpolating linearly where FNR - FPR first changes sign.
double threshold_eer(std::span<const double> scores, std::span<const int> labels);

/// Two-sided exact binomial sign test over paired differences (zeros dropped).
double sign_test_p(std::span<const double> a, std::span<const double> b);

double spearman(std::span<const double> a, std::span<const double> b);

/// c0 of one frame through a hand-rolled mel pipeline: direct DFT, per-bin
/// triangle weights, natural log, orthonormal DCT first row.
double mel_c0(std::span<const double> frame, double fs, std::size_t n_dft, int n_filters);

/// One LF flow cycle on a fine grid: trapezoid integration of the continuous
/// derivative at `oversample` points per sample, with te rounded to the
/// sample grid. Area balance is solved on the fine grid.
struct FineFlow {
  std::vector<double> flow;
  std::vector<double> derivative;
  double dt = 0.0;
};
FineFlow lf_fine_flow(double rd, double ee, std::size_t period, double fs, int oversample);

/// NAQ of a single-period flow (starting at closure): (max - min) / (|min d| * T).
double naq_of_cycle(std::span<const double> flow, std::span<const double> derivative, double dt);

/// Rising crossing of the level `frac` of the AC amplitude before the peak,
/// mapped to an open quotient (T - t) / T. Fractional by linear interpolation.
double open_quotient_at(std::span<const double> flow, double frac);

/// Formant frequencies (Hz) from the angles of the complex roots of A(z) with
/// |r| > min_radius, sorted ascending.
std::vector<double> formants_from_roots(const std::vector<double>& polynomial, double fs,
                                        double min_radius = 0.7);

/// Mean relative error of the nearest spectral peak of 1/|A| to each of the
/// first `count` true formants.
double formant_error(const glottal::lp::LpModel& model, const std::vector<glottal::lf::Formant>& truth,
                     double fs, std::size_t count = 3);

/// Median NAQ of the cycles between consecutive GCIs (first and last skipped).
double median_naq(std::span<const double> flow, std::span<const std::size_t> gcis, double fs);

}  // namespace oracle
