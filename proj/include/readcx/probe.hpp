#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "readcx/complexity.hpp"
#include "readcx/embed.hpp"
#include "readcx/regress.hpp"

namespace readcx {

struct ProbeConfig {
  int k = 5;
  std::size_t train_size = 800;
  std::size_t test_size = 200;
  int epochs = 5;
  std::uint64_t seed = 0;
  double lr = 1e-2;
  int batch = 32;
  bool standardize_inputs = true;
  bool multitask = true;  // false trains nine single-output probes
};

struct FeatureProbe {
  std::string feature;
  double r2_pretrained = 0.0;
  double r2_finetuned = 0.0;
  double delta = 0.0;  // r2_finetuned - r2_pretrained
  bool excluded = false;  // constant target; not scored
  int folds_scored = 0;
};

struct ProbeReport {
  std::string language;
  int k = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  std::vector<FeatureProbe> features;  // canonical feature order

  /// Mean delta over the features that were scored.
  double mean_delta() const;
};

/// n x 9 matrix of raw feature values in canonical order.
Eigen::MatrixXd probe_targets(const std::vector<ProfileRow>& profiles);

struct ZScoredTargets {
  Eigen::MatrixXd values;
  Scaler scaler;
  std::array<bool, kNumFeatures> constant{};
};

/// Population z-score of each column; constant columns are flagged and left at zero.
ZScoredTargets zscore_targets(const Eigen::MatrixXd& targets);

/// Trains probing heads on frozen sentence embeddings from two encoder states
/// and reports per-feature held-out R^2 and its change. Every fold uses the
/// same split, target scaler and training seed for both embedding sets.
ProbeReport run_probe(const EmbeddingSet& emb_pre, const EmbeddingSet& emb_ft, const std::vector<ProfileRow>& profiles,
                      const ProbeConfig& cfg, const std::string& language = {});

/// CSV: feature,r2_pre,r2_ft,delta,language (excluded features carry "NA").
void write_probe_csv(const std::vector<ProbeReport>& reports, std::ostream& out);

}  // namespace readcx
