#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "readcx/complexity.hpp"
#include "readcx/gaze.hpp"
#include "readcx/regress.hpp"

namespace readcx {

struct ScorePair {
  double explained_variance = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

/// 1 - Var(y - yhat) / Var(y) with population variances. Insensitive to a
/// constant offset in the predictions.
double explained_variance(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

/// 1 - SS_res / SS_tot. Penalizes systematic offsets.
double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

ScorePair score(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

/// 1-based ranks; tied values share the mean of their rank range.
std::vector<double> average_ranks(const std::vector<double>& v);

/// Pearson correlation of the average ranks.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sided p-value of a correlation under the large-sample approximation
/// t = r sqrt((n-2)/(1-r^2)) ~ N(0, 1).
double correlation_p_value(double r, std::size_t n);

// ---------------------------------------------------------------------------
// Cross-validated pipelines

using Predictor = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;
/// Trains on (X, y) and returns the fitted predictor.
using Fitter = std::function<Predictor(const Eigen::MatrixXd&, const Eigen::VectorXd&)>;

struct CvResult {
  Eigen::VectorXd oof_predictions;  // out-of-fold prediction for every sample
  std::vector<ScorePair> folds;
  ScorePair mean;  // per-fold scores averaged; n = total samples
};

CvResult cross_validate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Fitter& fit, const FoldPlan& plan);

/// Fitter for the linear SVR.
Fitter svr_fitter(const SvrParams& params = {});

enum class Permutation { Shuffle, Identity };

/// `y` reordered by a seeded uniform permutation (fixed points allowed).
Eigen::VectorXd permuted_targets(const Eigen::VectorXd& y, std::uint64_t seed);

struct BaselineRun {
  std::uint64_t seed = 0;
  CvResult cv;
};

/// For each seed: pair every input with the target of a random other sample,
/// cross-validate, and score the out-of-fold predictions against the permuted
/// targets. Permutation::Identity skips the shuffle (control run).
std::vector<BaselineRun> random_baseline(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Fitter& fit,
                                         const std::vector<std::uint64_t>& seeds, const FoldPlan& plan,
                                         Permutation mode = Permutation::Shuffle);

ScorePair mean_score(const std::vector<BaselineRun>& runs);

// ---------------------------------------------------------------------------
// Feature / metric correlations

struct CorrelationCell {
  std::optional<double> rho;  // absent when either side is constant
  double p_value = 1.0;
  bool p_below_01 = false;   // p < 0.01
  bool p_below_001 = false;  // p < 0.001
};

struct CorrelationMatrix {
  std::array<std::array<CorrelationCell, kNumGazeMetrics>, kNumFeatures> cells{};
  std::size_t n = 0;
  std::vector<std::string> ids;  // aligned sentences
};

/// Spearman correlation of every feature with every metric, joined on
/// sentence id.
CorrelationMatrix correlation_matrix(const std::vector<ProfileRow>& profiles, const std::vector<GazeMetrics>& metrics);

/// CSV: feature,<metric columns>; missing cells are written as "NA".
void write_correlation_csv(const CorrelationMatrix& m, std::ostream& out);

}  // namespace readcx
