#include "glottal/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "glottal/error.hpp"

namespace glottal::metrics {

namespace {

struct Counts {
  std::size_t pos = 0, neg = 0;
};

Counts check(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size())
    throw Error(ErrorKind::kDimensionMismatch, "scores and labels differ in length");
  Counts c;
  for (int l : labels) {
    if (l == 1) ++c.pos;
    else if (l == -1) ++c.neg;
    else throw Error(ErrorKind::kInvalidArgument, "labels must be +1 or -1");
  }
  if (c.pos == 0 || c.neg == 0) throw Error(ErrorKind::kSingleClass, "metrics need both classes");
  return c;
}

// ROC vertices (fpr, tpr) from the strictest threshold down, one per distinct score.
std::vector<std::pair<double, double>> roc(std::span<const double> scores,
                                           std::span<const int> labels, Counts c) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] == 1 ? tp : fp)++;
    pts.emplace_back(static_cast<double>(fp) / static_cast<double>(c.neg),
                     static_cast<double>(tp) / static_cast<double>(c.pos));
  }
  return pts;
}

}  // namespace

double auc(std::span<const double> scores, std::span<const int> labels) {
  const auto pts = roc(scores, labels, check(scores, labels));
  double a = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    a += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 2.0;
  return a;
}

double eer(std::span<const double> scores, std::span<const int> labels) {
  const auto pts = roc(scores, labels, check(scores, labels));
  // d = fnr - fpr falls from 1 to -1 along the curve.
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double d0 = (1.0 - pts[i - 1].second) - pts[i - 1].first;
    const double d1 = (1.0 - pts[i].second) - pts[i].first;
    if (d0 >= 0.0 && d1 <= 0.0) {
      if (d0 == d1) return pts[i].first;
      const double lam = d0 / (d0 - d1);
      return pts[i - 1].first + lam * (pts[i].first - pts[i - 1].first);
    }
  }
  return 0.5;
}

Metrics compute_metrics(std::span<const double> scores, std::span<const int> labels) {
  const Counts c = check(scores, labels);
  std::size_t tp = 0, tn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int pred = scores[i] >= 0.0 ? 1 : -1;
    if (pred == labels[i]) (pred == 1 ? tp : tn)++;
  }
  Metrics m;
  m.acc = 100.0 * static_cast<double>(tp + tn) / static_cast<double>(scores.size());
  m.se = static_cast<double>(tp) / static_cast<double>(c.pos);
  m.sp = static_cast<double>(tn) / static_cast<double>(c.neg);
  m.auc = auc(scores, labels);
  m.eer = eer(scores, labels);
  return m;
}

}  // namespace glottal::metrics
