#include "readcx/probe.hpp"

#include <cmath>
#include <ostream>

#include "readcx/error.hpp"
#include "readcx/evalx.hpp"
#include "readcx/random.hpp"
#include "readcx/text.hpp"

namespace readcx {

namespace {

Eigen::MatrixXd embedding_matrix(const EmbeddingSet& set, const std::vector<std::string>& ids, const char* which) {
  Eigen::MatrixXd X(static_cast<Eigen::Index>(ids.size()), set.dim());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!set.contains(ids[i]))
      throw Error(ErrorKind::Alignment, std::string(which) + " embeddings lack sentence '" + ids[i] + "'");
    const auto& v = set.at(ids[i]);
    for (int j = 0; j < set.dim(); ++j) X(static_cast<Eigen::Index>(i), j) = v[static_cast<std::size_t>(j)];
  }
  return X;
}

bool column_constant(const Eigen::MatrixXd& m, Eigen::Index c) {
  return m.rows() == 0 || (m.col(c).array() == m(0, c)).all();
}

// Held-out predictions for every target column.
Eigen::MatrixXd fit_and_predict(const Eigen::MatrixXd& Xtr, const Eigen::MatrixXd& Ytr, const Eigen::MatrixXd& Xte,
                                const HeadParams& hp, bool multitask) {
  if (multitask) return predict(train_multitask_head(Xtr, Ytr, hp), Xte);
  Eigen::MatrixXd out(Xte.rows(), Ytr.cols());
  for (Eigen::Index t = 0; t < Ytr.cols(); ++t) {
    const auto model = train_multitask_head(Xtr, Ytr.col(t), hp);
    out.col(t) = predict(model, Xte);
  }
  return out;
}

}  // namespace

double ProbeReport::mean_delta() const {
  double sum = 0.0;
  int n = 0;
  for (const auto& f : features) {
    if (f.excluded) continue;
    sum += f.delta;
    ++n;
  }
  return n == 0 ? 0.0 : sum / n;
}

Eigen::MatrixXd probe_targets(const std::vector<ProfileRow>& profiles) {
  if (profiles.empty()) throw Error(ErrorKind::Argument, "no profiles to probe");
  Eigen::MatrixXd T(static_cast<Eigen::Index>(profiles.size()), static_cast<Eigen::Index>(kNumFeatures));
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const auto v = profiles[i].profile.values();
    for (std::size_t f = 0; f < kNumFeatures; ++f) T(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)) = v[f];
  }
  return T;
}

ZScoredTargets zscore_targets(const Eigen::MatrixXd& targets) {
  ZScoredTargets z;
  z.scaler = fit_scaler(targets);
  z.values = apply_scaler(z.scaler, targets);
  for (Eigen::Index c = 0; c < targets.cols() && c < static_cast<Eigen::Index>(kNumFeatures); ++c)
    z.constant[static_cast<std::size_t>(c)] = column_constant(targets, c);
  return z;
}

ProbeReport run_probe(const EmbeddingSet& emb_pre, const EmbeddingSet& emb_ft, const std::vector<ProfileRow>& profiles,
                      const ProbeConfig& cfg, const std::string& language) {
  const std::size_t n = profiles.size();
  if (n != cfg.train_size + cfg.test_size)
    throw Error(ErrorKind::Argument, "probe expects " + std::to_string(cfg.train_size + cfg.test_size) +
                                         " sentences, got " + std::to_string(n));
  if (cfg.k < 2 || n % static_cast<std::size_t>(cfg.k) != 0 || n / static_cast<std::size_t>(cfg.k) != cfg.test_size)
    throw Error(ErrorKind::Argument, "train/test sizes do not match a " + std::to_string(cfg.k) + "-fold split of " +
                                         std::to_string(n) + " sentences");

  std::vector<std::string> ids;
  ids.reserve(n);
  for (const auto& p : profiles) ids.push_back(p.sentence_id);
  const Eigen::MatrixXd X_pre = embedding_matrix(emb_pre, ids, "pre-trained");
  const Eigen::MatrixXd X_ft = embedding_matrix(emb_ft, ids, "fine-tuned");
  const Eigen::MatrixXd raw = probe_targets(profiles);
  const auto global = zscore_targets(raw);

  ProbeReport report;
  report.language = language;
  report.k = cfg.k;
  report.seed = cfg.seed;
  report.n = n;
  std::array<double, kNumFeatures> sum_pre{};
  std::array<double, kNumFeatures> sum_ft{};
  std::array<int, kNumFeatures> scored{};

  const auto plan = kfold_split(n, cfg.k, derive_seed(cfg.seed, 0x70726f6265ULL));
  for (int f = 0; f < cfg.k; ++f) {
    const auto train = plan.train_indices(f);
    const auto test = plan.test_indices(f);
    const Eigen::MatrixXd raw_train = take_rows(raw, train);
    const Scaler target_scaler = fit_scaler(raw_train);
    const Eigen::MatrixXd Ytr = apply_scaler(target_scaler, raw_train);
    const Eigen::MatrixXd Yte = apply_scaler(target_scaler, take_rows(raw, test));

    HeadParams hp;
    hp.lr = cfg.lr;
    hp.batch = cfg.batch;
    hp.epochs = cfg.epochs;
    hp.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(f) + 1);
    hp.validation_fraction = 0.0;
    hp.standardize = cfg.standardize_inputs;

    const Eigen::MatrixXd pred_pre = fit_and_predict(take_rows(X_pre, train), Ytr, take_rows(X_pre, test), hp, cfg.multitask);
    const Eigen::MatrixXd pred_ft = fit_and_predict(take_rows(X_ft, train), Ytr, take_rows(X_ft, test), hp, cfg.multitask);

    for (std::size_t c = 0; c < kNumFeatures; ++c) {
      const auto col = static_cast<Eigen::Index>(c);
      if (global.constant[c] || column_constant(raw_train, col) || column_constant(Yte, col)) continue;
      sum_pre[c] += r_squared(Yte.col(col), pred_pre.col(col));
      sum_ft[c] += r_squared(Yte.col(col), pred_ft.col(col));
      ++scored[c];
    }
  }

  for (std::size_t c = 0; c < kNumFeatures; ++c) {
    FeatureProbe fp;
    fp.feature = std::string(kFeatureNames[c]);
    fp.folds_scored = scored[c];
    fp.excluded = scored[c] == 0;
    if (!fp.excluded) {
      fp.r2_pretrained = sum_pre[c] / scored[c];
      fp.r2_finetuned = sum_ft[c] / scored[c];
      fp.delta = fp.r2_finetuned - fp.r2_pretrained;
    }
    report.features.push_back(fp);
  }
  return report;
}

void write_probe_csv(const std::vector<ProbeReport>& reports, std::ostream& out) {
  out << "feature,r2_pre,r2_ft,delta,language\n";
  for (const auto& r : reports) {
    for (const auto& f : r.features) {
      out << f.feature << ',';
      if (f.excluded) {
        out << "NA,NA,NA";
      } else {
        out << text::format_double(f.r2_pretrained, 9) << ',' << text::format_double(f.r2_finetuned, 9) << ','
            << text::format_double(f.delta, 9);
      }
      out << ',' << r.language << '\n';
    }
  }
}

}  // namespace readcx
