#include "readcx/evalx.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>

#include "readcx/error.hpp"
#include "readcx/random.hpp"
#include "readcx/text.hpp"

namespace readcx {

namespace {

void check_pair(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  if (y.size() != yhat.size()) throw Error(ErrorKind::Argument, "targets and predictions differ in length");
  if (y.size() < 2) throw Error(ErrorKind::Argument, "scoring needs at least two samples");
}

double population_variance(const Eigen::VectorXd& v) { return (v.array() - v.mean()).square().mean(); }

bool is_constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

double explained_variance(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  check_pair(y, yhat);
  const double var_y = population_variance(y);
  if (!(var_y > 0.0)) throw Error(ErrorKind::DegenerateTarget, "target is constant");
  return 1.0 - population_variance(y - yhat) / var_y;
}

double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  check_pair(y, yhat);
  const double ss_tot = (y.array() - y.mean()).square().sum();
  if (!(ss_tot > 0.0)) throw Error(ErrorKind::DegenerateTarget, "target is constant");
  return 1.0 - (y - yhat).squaredNorm() / ss_tot;
}

ScorePair score(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
  return {explained_variance(y, yhat), r_squared(y, yhat), static_cast<std::size_t>(y.size())};
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;  // mean of ranks i+1..j+1
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::Argument, "spearman inputs differ in length");
  if (x.size() < 3) throw Error(ErrorKind::Argument, "spearman needs at least three pairs");
  if (is_constant(x) || is_constant(y)) throw Error(ErrorKind::DegenerateInput, "spearman input is constant");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mean = (n + 1.0) / 2.0;  // mean rank is invariant under tie averaging
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double correlation_p_value(double r, std::size_t n) {
  if (n < 3) return 1.0;
  const double denom = 1.0 - r * r;
  if (denom <= 0.0) return 0.0;
  const double t = std::abs(r) * std::sqrt(static_cast<double>(n - 2) / denom);
  return std::erfc(t / std::sqrt(2.0));
}

CvResult cross_validate(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Fitter& fit, const FoldPlan& plan) {
  if (X.rows() != y.size() || plan.size() != static_cast<std::size_t>(y.size()))
    throw Error(ErrorKind::Argument, "inputs, targets and fold plan differ in size");
  CvResult out;
  out.oof_predictions = Eigen::VectorXd::Zero(y.size());
  for (int f = 0; f < plan.k; ++f) {
    const auto train = plan.train_indices(f);
    const auto test = plan.test_indices(f);
    const Predictor predictor = fit(take_rows(X, train), take_rows(y, train));
    const Eigen::VectorXd pred = predictor(take_rows(X, test));
    for (std::size_t i = 0; i < test.size(); ++i) out.oof_predictions(static_cast<Eigen::Index>(test[i])) = pred(static_cast<Eigen::Index>(i));
    const Eigen::VectorXd yt = take_rows(y, test);
    // A fold with a single sample or a constant target has no score of its own.
    if (yt.size() >= 2 && population_variance(yt) > 0.0) out.folds.push_back(score(yt, pred));
  }
  if (out.folds.empty()) {
    out.mean = score(y, out.oof_predictions);
  } else {
    for (const auto& s : out.folds) {
      out.mean.explained_variance += s.explained_variance / static_cast<double>(out.folds.size());
      out.mean.r_squared += s.r_squared / static_cast<double>(out.folds.size());
    }
  }
  out.mean.n = static_cast<std::size_t>(y.size());
  return out;
}

Fitter svr_fitter(const SvrParams& params) {
  return [params](const Eigen::MatrixXd& X, const Eigen::VectorXd& y) -> Predictor {
    auto model = std::make_shared<LinearModel>(train_svr(X, y, params));
    return [model](const Eigen::MatrixXd& Xt) { return predict(*model, Xt); };
  };
}

Eigen::VectorXd permuted_targets(const Eigen::VectorXd& y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto perm = shuffled_indices(static_cast<std::size_t>(y.size()), rng);
  return take_rows(y, perm);
}

std::vector<BaselineRun> random_baseline(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Fitter& fit,
                                         const std::vector<std::uint64_t>& seeds, const FoldPlan& plan,
                                         Permutation mode) {
  if (seeds.empty()) throw Error(ErrorKind::Argument, "random baseline needs at least one seed");
  std::vector<BaselineRun> runs;
  for (const auto seed : seeds) {
    const Eigen::VectorXd target = mode == Permutation::Identity ? y : permuted_targets(y, seed);
    runs.push_back({seed, cross_validate(X, target, fit, plan)});
  }
  return runs;
}

ScorePair mean_score(const std::vector<BaselineRun>& runs) {
  ScorePair m;
  for (const auto& r : runs) {
    m.explained_variance += r.cv.mean.explained_variance / static_cast<double>(runs.size());
    m.r_squared += r.cv.mean.r_squared / static_cast<double>(runs.size());
    m.n = r.cv.mean.n;
  }
  return m;
}

CorrelationMatrix correlation_matrix(const std::vector<ProfileRow>& profiles, const std::vector<GazeMetrics>& metrics) {
  std::unordered_map<std::string, const GazeMetrics*> by_id;
  for (const auto& m : metrics) by_id[m.sentence_id] = &m;

  CorrelationMatrix out;
  std::array<std::vector<double>, kNumFeatures> feats;
  std::array<std::vector<double>, kNumGazeMetrics> gaze;
  for (const auto& p : profiles) {
    const auto it = by_id.find(p.sentence_id);
    if (it == by_id.end()) continue;
    out.ids.push_back(p.sentence_id);
    const auto v = p.profile.values();
    for (std::size_t f = 0; f < kNumFeatures; ++f) feats[f].push_back(v[f]);
    for (std::size_t m = 0; m < kNumGazeMetrics; ++m) gaze[m].push_back(it->second->get(kGazeMetrics[m]));
  }
  out.n = out.ids.size();
  if (out.n == 0) throw Error(ErrorKind::Alignment, "profiles and metrics share no sentence ids");
  if (out.n < 3) throw Error(ErrorKind::Argument, "correlations need at least three aligned sentences");

  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    for (std::size_t m = 0; m < kNumGazeMetrics; ++m) {
      auto& cell = out.cells[f][m];
      if (is_constant(feats[f]) || is_constant(gaze[m])) continue;
      cell.rho = spearman(feats[f], gaze[m]);
      cell.p_value = correlation_p_value(*cell.rho, out.n);
      cell.p_below_01 = cell.p_value < 0.01;
      cell.p_below_001 = cell.p_value < 0.001;
    }
  }
  return out;
}

void write_correlation_csv(const CorrelationMatrix& m, std::ostream& out) {
  out << "feature";
  for (auto metric : kGazeMetrics) out << ',' << to_string(metric);
  out << '\n';
  for (std::size_t f = 0; f < kNumFeatures; ++f) {
    out << kFeatureNames[f];
    for (std::size_t k = 0; k < kNumGazeMetrics; ++k) {
      const auto& c = m.cells[f][k];
      out << ',' << (c.rho ? text::format_double(*c.rho, 6) : std::string("NA"));
    }
    out << '\n';
  }
}

}  // namespace readcx
