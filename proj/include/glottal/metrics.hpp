#pragma once

#include <span>

namespace glottal::metrics {

/// Detection metrics with the pathological class as positive (+1).
struct Metrics {
  double acc = 0.0;  // %
  double se = 0.0;
  double sp = 0.0;
  double auc = 0.0;
  double eer = 0.0;
};

/// ACC/SE/SP at threshold 0 (score >= 0 predicts +1); AUC and EER from the ROC.
Metrics compute_metrics(std::span<const double> scores, std::span<const int> labels);

/// Area under the ROC by the trapezoid rule; tied scores contribute 1/2.
double auc(std::span<const double> scores, std::span<const int> labels);

/// Point where false-positive and false-negative rates meet, linearly
/// interpolated between adjacent ROC vertices.
double eer(std::span<const double> scores, std::span<const int> labels);

}  // namespace glottal::metrics
