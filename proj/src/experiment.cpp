#include "readcx/experiment.hpp"

#include <array>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <future>
#include <istream>
#include <memory>
#include <set>
#include <sstream>

#include "json.hpp"

#include "readcx/complexity.hpp"
#include "readcx/corpus.hpp"
#include "readcx/embed.hpp"
#include "readcx/error.hpp"
#include "readcx/evalx.hpp"
#include "readcx/gaze.hpp"
#include "readcx/lexicon.hpp"
#include "readcx/probe.hpp"
#include "readcx/random.hpp"
#include "readcx/regress.hpp"
#include "readcx/scramble.hpp"
#include "readcx/text.hpp"

namespace fs = std::filesystem;

namespace readcx {

// ---------------------------------------------------------------------------
// Config

ExperimentConfig ExperimentConfig::parse(std::istream& in, fs::path base_dir) {
  ExperimentConfig cfg;
  cfg.base_dir_ = std::move(base_dir);
  std::ostringstream all;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    all << line << '\n';
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
    const std::string key(text::trim(body.substr(0, eq)));
    const std::string value(text::trim(body.substr(eq + 1)));
    if (key.empty()) throw ParseError(line_no, "empty key");
    for (char c : key) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-'))
        throw ParseError(line_no, "invalid character in key '" + key + "'");
    }
    if (!cfg.values_.emplace(key, value).second) throw ParseError(line_no, "duplicate key '" + key + "'");
  }
  cfg.text_ = all.str();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path.string() + "'");
  return parse(in, path.parent_path());
}

const std::string& ExperimentConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end() || it->second.empty()) throw Error(ErrorKind::Config, "missing required field '" + key + "'");
  return it->second;
}

std::string ExperimentConfig::get_or(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
  if (!has(key)) return fallback;
  double v = 0.0;
  if (!text::parse_double(get(key), v)) throw Error(ErrorKind::Config, "field '" + key + "' must be a number");
  return v;
}

long long ExperimentConfig::get_int(const std::string& key, long long fallback) const {
  if (!has(key)) return fallback;
  long long v = 0;
  if (!text::parse_int(get(key), v)) throw Error(ErrorKind::Config, "field '" + key + "' must be an integer");
  return v;
}

bool ExperimentConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const auto& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorKind::Config, "field '" + key + "' must be true or false");
}

fs::path ExperimentConfig::get_path(const std::string& key) const {
  fs::path p(get(key));
  return p.is_absolute() || base_dir_.empty() ? p : base_dir_ / p;
}

std::optional<fs::path> ExperimentConfig::find_path(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return get_path(key);
}

std::vector<std::string> ExperimentConfig::get_list(const std::string& key) const {
  std::string v = get(key);
  for (auto& c : v) {
    if (c == ',') c = ' ';
  }
  return text::split_whitespace(v);
}

// ---------------------------------------------------------------------------
// Pipelines

namespace {

constexpr std::uint64_t kFoldStream = 1;
constexpr std::uint64_t kTrainStream = 100;
constexpr std::uint64_t kBaselineStream = 1000;

/// In-memory bundle; written out in one go once every stage has succeeded.
class Bundle {
 public:
  std::ostream& file(const std::string& name) {
    auto& slot = files_[name];
    if (!slot) slot = std::make_unique<std::ostringstream>();
    return *slot;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : files_) out.push_back(name);
    return out;
  }

  void append(const Bundle& other) {
    for (const auto& [name, content] : other.files_) file(name) << content->str();
  }

  void write_to(const fs::path& dir) const {
    for (const auto& [name, content] : files_) {
      std::ofstream out(dir / name, std::ios::binary);
      out << content->str();
      if (!out) throw Error(ErrorKind::Io, "failed to write '" + (dir / name).string() + "'");
    }
  }

 private:
  std::map<std::string, std::unique_ptr<std::ostringstream>> files_;
};

struct Settings {
  std::string pipeline;
  std::uint64_t seed = 0;
  int folds = 5;
  std::vector<std::string> languages;
  std::size_t min_tokens = 0;
  ComplexityConfig complexity;
};

Settings read_settings(const ExperimentConfig& cfg) {
  Settings s;
  s.pipeline = cfg.get("pipeline");
  s.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  s.folds = static_cast<int>(cfg.get_int("folds", 5));
  s.languages = cfg.get_list("languages");
  const auto min_tokens = cfg.get_int("min_tokens", 0);
  if (min_tokens < 0) throw Error(ErrorKind::Config, "field 'min_tokens' must be non-negative");
  s.min_tokens = static_cast<std::size_t>(min_tokens);
  s.complexity.low_frequency_threshold = cfg.get_double("low_frequency_threshold", 4.0);
  s.complexity.punct_chars_in_word_length = cfg.get_bool("punct_chars_in_word_length", false);
  return s;
}

std::string key_for(const std::string& name, const std::string& lang) { return name + "." + lang; }

std::optional<Document> load_language_corpus(const ExperimentConfig& cfg, const Settings& s, const std::string& lang) {
  std::optional<fs::path> path = cfg.find_path(key_for("conllu", lang));
  if (!path) path = cfg.find_path(key_for("corpus", lang));
  if (!path) return std::nullopt;
  return filter_min_length(load_corpus(path->string(), lang), s.min_tokens);
}

Document require_corpus(const ExperimentConfig& cfg, const Settings& s, const std::string& lang) {
  auto doc = load_language_corpus(cfg, s, lang);
  if (!doc) throw Error(ErrorKind::Config, "missing required field '" + key_for("conllu", lang) + "'");
  return std::move(*doc);
}

std::vector<ProfileRow> language_profiles(const ExperimentConfig& cfg, const Settings& s, const std::string& lang) {
  const auto doc = require_corpus(cfg, s, lang);
  const auto lex = load_lexicon_file(cfg.get_path(key_for("lexicon", lang)).string(), lang);
  return profile_document(doc, lex, s.complexity);
}

/// Participant-averaged, per-dataset scaled metrics for one language.
ScaledDataset language_gaze(const ExperimentConfig& cfg, const Settings& s, const std::string& lang) {
  const auto corpus = load_language_corpus(cfg, s, lang);
  std::vector<GazeMetrics> averaged;
  if (auto metrics = cfg.find_path(key_for("metrics", lang))) {
    averaged = import_sentence_metrics_file(metrics->string());
  } else if (auto fixations = cfg.find_path(key_for("fixations", lang))) {
    if (!corpus)
      throw Error(ErrorKind::Config, "field '" + key_for("fixations", lang) + "' needs '" + key_for("conllu", lang) + "'");
    SentenceBounds bounds;
    for (const auto& sent : corpus->sentences) bounds[sent.id] = static_cast<int>(sent.tokens.size());
    std::ifstream in(*fixations);
    if (!in) throw Error(ErrorKind::Io, "cannot open fixations '" + fixations->string() + "'");
    averaged = average_all(aggregate_fixations(read_fixations_csv(in), bounds));
  } else {
    throw Error(ErrorKind::Config, "missing required field '" + key_for("metrics", lang) + "'");
  }
  if (corpus) {
    std::set<std::string> keep;
    for (const auto& sent : corpus->sentences) keep.insert(sent.id);
    std::erase_if(averaged, [&](const GazeMetrics& g) { return !keep.count(g.sentence_id); });
  }
  return scale_metrics(averaged);
}

std::map<std::string, std::vector<double>> gaze_targets(const ScaledDataset& ds) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& row : ds.rows) {
    std::vector<double> v;
    for (auto m : kGazeMetrics) v.push_back(row.get(m));
    out[row.sentence_id] = std::move(v);
  }
  return out;
}

struct FeatureTable {
  std::vector<std::string> ids;
  Eigen::MatrixXd X;  // all nine features
  Eigen::MatrixXd Y;  // four metrics
};

FeatureTable join_features(const std::vector<ProfileRow>& profiles, const ScaledDataset& gaze) {
  const auto targets = gaze_targets(gaze);
  std::map<std::string, const ComplexityProfile*> by_id;
  for (const auto& p : profiles) by_id[p.sentence_id] = &p.profile;
  FeatureTable t;
  for (const auto& [id, _] : targets) {
    if (by_id.count(id)) t.ids.push_back(id);
  }
  if (t.ids.empty()) throw Error(ErrorKind::Alignment, "profiles and eye-tracking metrics share no sentence ids");
  const auto n = static_cast<Eigen::Index>(t.ids.size());
  t.X.resize(n, static_cast<Eigen::Index>(kNumFeatures));
  t.Y.resize(n, static_cast<Eigen::Index>(kNumGazeMetrics));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& id = t.ids[static_cast<std::size_t>(i)];
    const auto v = by_id.at(id)->values();
    for (std::size_t f = 0; f < kNumFeatures; ++f) t.X(i, static_cast<Eigen::Index>(f)) = v[f];
    const auto& y = targets.at(id);
    for (std::size_t m = 0; m < kNumGazeMetrics; ++m) t.Y(i, static_cast<Eigen::Index>(m)) = y[m];
  }
  return t;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, FeatureGroup g) {
  const auto idx = feature_indices(g);
  Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = X.col(static_cast<Eigen::Index>(idx[j]));
  return out;
}

SvrParams svr_params(const ExperimentConfig& cfg, std::uint64_t seed) {
  SvrParams p;
  p.C = cfg.get_double("svr.C", p.C);
  p.epsilon = cfg.get_double("svr.epsilon", p.epsilon);
  p.tol = cfg.get_double("svr.tol", p.tol);
  p.max_iter = static_cast<int>(cfg.get_int("svr.max_iter", p.max_iter));
  p.standardize = cfg.get_bool("svr.standardize", true);
  p.seed = seed;
  return p;
}

HeadParams head_params(const ExperimentConfig& cfg, std::uint64_t seed) {
  HeadParams p;
  p.lr = cfg.get_double("head.lr", p.lr);
  p.batch = static_cast<int>(cfg.get_int("head.batch", p.batch));
  p.epochs = static_cast<int>(cfg.get_int("head.epochs", p.epochs));
  p.eval_every = static_cast<int>(cfg.get_int("head.eval_every", p.eval_every));
  p.patience = static_cast<int>(cfg.get_int("head.patience", p.patience));
  p.validation_fraction = cfg.get_double("head.validation_fraction", p.validation_fraction);
  p.standardize = cfg.get_bool("head.standardize", true);
  p.seed = seed;
  return p;
}

void write_score_header(std::ostream& out) { out << "language,metric,condition,fold,explained_variance,r_squared,n\n"; }

void write_score_row(std::ostream& out, const std::string& lang, GazeMetric m, const std::string& condition,
                     const std::string& fold, const ScorePair& s) {
  out << lang << ',' << to_string(m) << ',' << condition << ',' << fold << ','
      << text::format_double(s.explained_variance, 9) << ',' << text::format_double(s.r_squared, 9) << ',' << s.n
      << '\n';
}

void write_cv_rows(std::ostream& out, const std::string& lang, GazeMetric m, const std::string& condition,
                   const CvResult& cv) {
  for (std::size_t f = 0; f < cv.folds.size(); ++f) write_score_row(out, lang, m, condition, std::to_string(f), cv.folds[f]);
  write_score_row(out, lang, m, condition, "mean", cv.mean);
}

// Runs `fn` for every language concurrently; results come back in language
// order, and the first failure (in that order) is rethrown.
template <typename Fn>
auto per_language(const Settings& s, Fn fn) {
  using Result = decltype(fn(std::string{}));
  std::vector<std::future<Result>> jobs;
  for (const auto& lang : s.languages) jobs.push_back(std::async(std::launch::async, fn, lang));
  std::vector<Result> out;
  std::exception_ptr failure;
  for (auto& job : jobs) {
    try {
      out.push_back(job.get());
    } catch (...) {
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

void run_svr(const ExperimentConfig& cfg, const Settings& s, Bundle& bundle) {
  const auto group = parse_feature_group(cfg.get_or("feature_group", "ALL"));
  write_score_header(bundle.file("scores.csv"));
  bundle.file("svr_subsets.csv") << "language,metric,feature_group,explained_variance,r_squared\n";
  const auto params = svr_params(cfg, derive_seed(s.seed, kTrainStream));

  auto parts = per_language(s, [&](const std::string& lang) {
    Bundle part;
    auto& scores = part.file("scores.csv");
    auto& subsets = part.file("svr_subsets.csv");
    const auto profiles = language_profiles(cfg, s, lang);
    const auto gaze = language_gaze(cfg, s, lang);
    const auto table = join_features(profiles, gaze);
    const auto plan = kfold_split(table.ids.size(), s.folds, derive_seed(s.seed, kFoldStream));

    for (std::size_t m = 0; m < kNumGazeMetrics; ++m) {
      const Eigen::VectorXd y = table.Y.col(static_cast<Eigen::Index>(m));
      for (auto g : {FeatureGroup::LENGTH, FeatureGroup::FREQUENCY, FeatureGroup::STRUCTURAL, FeatureGroup::ALL}) {
        const auto cv = cross_validate(select_columns(table.X, g), y, svr_fitter(params), plan);
        if (g == group) write_cv_rows(scores, lang, kGazeMetrics[m], std::string(to_string(g)), cv);
        subsets << lang << ',' << to_string(kGazeMetrics[m]) << ',' << to_string(g) << ','
                << text::format_double(cv.mean.explained_variance, 9) << ','
                << text::format_double(cv.mean.r_squared, 9) << '\n';
      }
    }
    write_correlation_csv(correlation_matrix(profiles, gaze.rows), part.file("correlations_" + lang + ".csv"));
    return part;
  });
  for (const auto& part : parts) bundle.append(part);
}

// Out-of-fold multi-task scores; `extra` inputs share rows with X and are
// predicted by the same fold models.
struct HeadCv {
  std::vector<std::array<ScorePair, kNumGazeMetrics>> folds;
  std::vector<std::array<ScorePair, kNumGazeMetrics>> extra_folds;
};

HeadCv cross_validate_head(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const HeadParams& base,
                           const FoldPlan& plan, const Eigen::MatrixXd* extra, std::uint64_t seed) {
  HeadCv out;
  for (int f = 0; f < plan.k; ++f) {
    const auto train = plan.train_indices(f);
    const auto test = plan.test_indices(f);
    HeadParams hp = base;
    hp.seed = derive_seed(seed, kTrainStream + static_cast<std::uint64_t>(f));
    const auto model = train_multitask_head(take_rows(X, train), take_rows(Y, train), hp);
    const Eigen::MatrixXd Yte = take_rows(Y, test);
    auto score_all = [&](const Eigen::MatrixXd& pred) {
      std::array<ScorePair, kNumGazeMetrics> s{};
      for (std::size_t m = 0; m < kNumGazeMetrics; ++m)
        s[m] = score(Yte.col(static_cast<Eigen::Index>(m)), pred.col(static_cast<Eigen::Index>(m)));
      return s;
    };
    out.folds.push_back(score_all(predict(model, take_rows(X, test))));
    if (extra) out.extra_folds.push_back(score_all(predict(model, take_rows(*extra, test))));
  }
  return out;
}

void write_head_rows(std::ostream& out, const std::string& lang, const std::string& condition,
                     const std::vector<std::array<ScorePair, kNumGazeMetrics>>& folds) {
  for (std::size_t m = 0; m < kNumGazeMetrics; ++m) {
    CvResult cv;
    for (const auto& f : folds) cv.folds.push_back(f[m]);
    for (const auto& f : cv.folds) {
      cv.mean.explained_variance += f.explained_variance / static_cast<double>(cv.folds.size());
      cv.mean.r_squared += f.r_squared / static_cast<double>(cv.folds.size());
      cv.mean.n += f.n;
    }
    write_cv_rows(out, lang, kGazeMetrics[m], condition, cv);
  }
}

// Scrambled vectors are looked up as "<id>-scrambled", falling back to the
// plain id for files that kept the original ids.
Eigen::MatrixXd scrambled_inputs(const EmbeddingSet& emb_s, const std::vector<std::string>& ids, int dim) {
  if (emb_s.dim() != dim) throw Error(ErrorKind::Dimension, "scrambled embeddings have a different dimension");
  Eigen::MatrixXd Xs(static_cast<Eigen::Index>(ids.size()), dim);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const std::string tagged = ids[i] + kScrambledSuffix;
    const std::string& id = emb_s.contains(tagged) ? tagged : ids[i];
    if (!emb_s.contains(id)) throw Error(ErrorKind::Alignment, "scrambled embeddings lack sentence '" + ids[i] + "'");
    const auto& v = emb_s.at(id);
    for (int j = 0; j < dim; ++j) Xs(static_cast<Eigen::Index>(i), j) = v[static_cast<std::size_t>(j)];
  }
  return Xs;
}

void run_head(const ExperimentConfig& cfg, const Settings& s, Bundle& bundle, bool scrambled) {
  write_score_header(bundle.file("scores.csv"));
  const auto hp = head_params(cfg, 0);
  auto parts = per_language(s, [&](const std::string& lang) {
    Bundle part;
    auto& scores = part.file("scores.csv");
    const auto gaze = language_gaze(cfg, s, lang);
    const auto emb = read_embeddings_file(cfg.get_path(key_for("embeddings", lang)).string());
    const auto aligned = align(emb, gaze_targets(gaze));
    const auto plan = kfold_split(aligned.ids.size(), s.folds, derive_seed(s.seed, kFoldStream));
    if (!scrambled) {
      const auto cv = cross_validate_head(aligned.X, aligned.Y, hp, plan, nullptr, s.seed);
      write_head_rows(scores, lang, "embeddings", cv.folds);
      return part;
    }
    const auto emb_s = read_embeddings_file(cfg.get_path(key_for("embeddings_scrambled", lang)).string());
    const Eigen::MatrixXd Xs = scrambled_inputs(emb_s, aligned.ids, emb.dim());
    const auto cv = cross_validate_head(aligned.X, aligned.Y, hp, plan, &Xs, s.seed);
    write_head_rows(scores, lang, "normal", cv.folds);
    write_head_rows(scores, lang, "scrambled", cv.extra_folds);
    return part;
  });
  for (const auto& part : parts) bundle.append(part);
}

void run_baseline(const ExperimentConfig& cfg, const Settings& s, Bundle& bundle) {
  const auto model = cfg.get_or("baseline_model", "svr");
  if (model != "svr" && model != "head") throw Error(ErrorKind::Config, "field 'baseline_model' must be svr or head");
  const auto runs = cfg.get_int("baseline_runs", 5);
  if (runs < 1) throw Error(ErrorKind::Config, "field 'baseline_runs' must be positive");
  std::vector<std::uint64_t> seeds;
  for (long long i = 0; i < runs; ++i) seeds.push_back(derive_seed(s.seed, kBaselineStream + static_cast<std::uint64_t>(i)));

  write_score_header(bundle.file("baseline.csv"));
  bundle.file("baseline_summary.csv") << "language,metric,explained_variance,r_squared,runs\n";

  auto parts = per_language(s, [&](const std::string& lang) {
    Bundle part;
    auto& scores = part.file("baseline.csv");
    auto& summary = part.file("baseline_summary.csv");
    const auto gaze = language_gaze(cfg, s, lang);
    Eigen::MatrixXd X;
    Eigen::MatrixXd Y;
    Fitter fitter;
    if (model == "svr") {
      const auto table = join_features(language_profiles(cfg, s, lang), gaze);
      X = select_columns(table.X, parse_feature_group(cfg.get_or("feature_group", "ALL")));
      Y = table.Y;
      fitter = svr_fitter(svr_params(cfg, derive_seed(s.seed, kTrainStream)));
    } else {
      const auto emb = read_embeddings_file(cfg.get_path(key_for("embeddings", lang)).string());
      auto aligned = align(emb, gaze_targets(gaze));
      X = std::move(aligned.X);
      Y = std::move(aligned.Y);
      const auto hp = head_params(cfg, derive_seed(s.seed, kTrainStream));
      fitter = [hp](const Eigen::MatrixXd& Xtr, const Eigen::VectorXd& ytr) -> Predictor {
        auto m = std::make_shared<MultiHeadModel>(train_multitask_head(Xtr, ytr, hp));
        return [m](const Eigen::MatrixXd& Xt) -> Eigen::VectorXd { return predict(*m, Xt).col(0); };
      };
    }
    const auto plan = kfold_split(static_cast<std::size_t>(X.rows()), s.folds, derive_seed(s.seed, kFoldStream));
    for (std::size_t m = 0; m < kNumGazeMetrics; ++m) {
      const auto result = random_baseline(X, Y.col(static_cast<Eigen::Index>(m)), fitter, seeds, plan);
      for (std::size_t r = 0; r < result.size(); ++r)
        write_cv_rows(scores, lang, kGazeMetrics[m], "permuted-" + std::to_string(r), result[r].cv);
      const auto mean = mean_score(result);
      summary << lang << ',' << to_string(kGazeMetrics[m]) << ',' << text::format_double(mean.explained_variance, 9)
              << ',' << text::format_double(mean.r_squared, 9) << ',' << result.size() << '\n';
    }
    return part;
  });
  for (const auto& part : parts) bundle.append(part);
}

void run_probe_pipeline(const ExperimentConfig& cfg, const Settings& s, Bundle& bundle) {
  ProbeConfig pc;
  pc.k = s.folds;
  pc.train_size = static_cast<std::size_t>(cfg.get_int("probe.train_size", static_cast<long long>(pc.train_size)));
  pc.test_size = static_cast<std::size_t>(cfg.get_int("probe.test_size", static_cast<long long>(pc.test_size)));
  pc.epochs = static_cast<int>(cfg.get_int("probe.epochs", pc.epochs));
  pc.lr = cfg.get_double("probe.lr", pc.lr);
  pc.batch = static_cast<int>(cfg.get_int("probe.batch", pc.batch));
  pc.multitask = cfg.get_bool("probe.multitask", true);
  pc.seed = derive_seed(s.seed, kTrainStream);

  const auto reports = per_language(s, [&](const std::string& lang) {
    const auto profiles = language_profiles(cfg, s, lang);
    const auto pre = read_embeddings_file(cfg.get_path(key_for("embeddings_pre", lang)).string());
    const auto ft = read_embeddings_file(cfg.get_path(key_for("embeddings_ft", lang)).string());
    return run_probe(pre, ft, profiles, pc, lang);
  });
  write_probe_csv(reports, bundle.file("probe_report.csv"));
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const auto s = read_settings(cfg);
  const fs::path output_dir = cfg.get_path("output_dir");
  if (s.languages.empty()) throw Error(ErrorKind::Config, "missing required field 'languages'");
  if (s.folds < 2) throw Error(ErrorKind::Config, "field 'folds' must be at least 2");

  Bundle bundle;
  if (s.pipeline == "svr") {
    run_svr(cfg, s, bundle);
  } else if (s.pipeline == "head") {
    run_head(cfg, s, bundle, false);
  } else if (s.pipeline == "scramble-eval") {
    run_head(cfg, s, bundle, true);
  } else if (s.pipeline == "baseline") {
    run_baseline(cfg, s, bundle);
  } else if (s.pipeline == "probe") {
    run_probe_pipeline(cfg, s, bundle);
  } else {
    throw Error(ErrorKind::Config, "field 'pipeline' must be one of svr, head, probe, scramble-eval, baseline");
  }

  nlohmann::ordered_json manifest;
  manifest["version"] = kVersion;
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(text::fnv1a(cfg.text())));
  manifest["config_hash"] = hash;
  manifest["config"] = cfg.values();
  manifest["pipeline"] = s.pipeline;
  manifest["seed"] = s.seed;
  manifest["derived_seeds"] = {{"folds", derive_seed(s.seed, kFoldStream)}, {"training", derive_seed(s.seed, kTrainStream)}};
  manifest["outputs"] = bundle.names();
  manifest["created"] = timestamp();
  bundle.file("manifest.json") << manifest.dump(2) << '\n';

  fs::path staging = output_dir;
  staging += ".partial";
  try {
    fs::remove_all(staging);
    fs::create_directories(staging);
    bundle.write_to(staging);
    fs::remove_all(output_dir);
    if (output_dir.has_parent_path()) fs::create_directories(output_dir.parent_path());
    fs::rename(staging, output_dir);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }

  ExperimentResult result;
  result.output_dir = output_dir;
  result.files = bundle.names();
  return result;
}

}  // namespace readcx
