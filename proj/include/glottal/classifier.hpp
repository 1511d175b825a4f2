#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "glottal/metrics.hpp"
#include "glottal/svm.hpp"

namespace glottal::clf {

struct Stat {
  double mean = 0.0;
  double std = 0.0;  // population
};

/// Frame/cycle/epoch level values per base feature name; NaN marks an unusable value.
using FrameTracks = std::map<std::string, std::vector<double>>;

/// Mean and std of the finite values of every track. A track without any
/// finite value yields NaN statistics (imputed later from the training fold).
std::map<std::string, Stat> aggregate(const FrameTracks& tracks);

inline constexpr std::size_t kMinUsable = 5;

struct Scaling {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
};

/// Column statistics ignoring NaN; zero (or undefined) std is replaced by 1.
Scaling zscore_fit(const Eigen::MatrixXd& train);

/// (x - mean) / std; NaN entries become 0, i.e. the training mean.
Eigen::MatrixXd zscore_apply(const Scaling& scaling, const Eigen::MatrixXd& x);

struct Dataset {
  Eigen::MatrixXd x;            // recordings x features
  std::vector<int> y;           // +1 pathological, -1 normal
  std::vector<std::string> speakers;
  std::vector<std::string> ids;
};

struct CvConfig {
  int folds = 20;
  std::uint64_t seed = 42;
  bool speaker_disjoint = false;
  int inner_folds = 5;
  std::vector<double> c_grid{0.1, 1.0, 10.0, 100.0};
  std::vector<double> gamma_grid{0.1, 1.0, 10.0};  // divided by the feature dimension
  int jobs = 1;
};

/// Stratified random partition; fold sizes differ by at most one per class.
/// With speaker grouping, whole speakers are dealt to the smallest fold.
/// Draws are repeated (up to 10 times) until every training part holds both
/// classes; afterwards kDegenerateFolds is thrown.
std::vector<std::vector<std::size_t>> make_folds(const std::vector<int>& y,
                                                 const std::vector<std::string>& speakers,
                                                 int folds, std::uint64_t seed,
                                                 bool speaker_disjoint = false);

struct FoldResult {
  std::size_t fold = 0;
  std::size_t n_test = 0;
  double acc = 0.0;  // %
  double se = 0.0;   // NaN when the fold has no positive
  double sp = 0.0;   // NaN when the fold has no negative
  double c = 0.0;
  double gamma = 0.0;
};

struct MetricsReport {
  std::string feature_set;
  double acc = 0.0;      // mean over folds, %
  double acc_std = 0.0;  // sample std over folds
  double se = 0.0;
  double sp = 0.0;
  double auc = 0.0;      // pooled ROC
  double eer = 0.0;
  std::vector<FoldResult> folds;
  std::vector<double> pooled_scores;  // in recording order
  std::vector<int> pooled_labels;
};

MetricsReport cross_validate(const Dataset& data, const CvConfig& config,
                             const std::string& feature_set);

/// Trained detector: z-score scaling plus SVM.
struct Detector {
  Scaling scaling;
  svm::SvmModel model;
};

/// Scales, selects (C, gamma) by inner CV and trains on all rows.
Detector train_detector(const Eigen::MatrixXd& x, const std::vector<int>& y,
                        const CvConfig& config, std::uint64_t seed);
std::vector<double> score(const Detector& detector, const Eigen::MatrixXd& x);

inline constexpr int kModelVersion = 1;
std::string model_to_json(const Detector& detector);
Detector model_from_json(const std::string& text);

}  // namespace glottal::clf
