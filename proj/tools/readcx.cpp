#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <variant>

#include "CLI11.hpp"

#include "readcx/complexity.hpp"
#include "readcx/corpus.hpp"
#include "readcx/embed.hpp"
#include "readcx/error.hpp"
#include "readcx/evalx.hpp"
#include "readcx/experiment.hpp"
#include "readcx/gaze.hpp"
#include "readcx/lexicon.hpp"
#include "readcx/probe.hpp"
#include "readcx/random.hpp"
#include "readcx/regress.hpp"
#include "readcx/scramble.hpp"

using namespace readcx;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

// "-" or empty means stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  void close() {
    if (!file_) return;
    file_->close();
    if (!*file_) throw Error(ErrorKind::Io, "write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  return in;
}

std::map<std::string, std::vector<double>> metric_targets(const std::vector<GazeMetrics>& rows,
                                                          const std::vector<GazeMetric>& metrics) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& r : rows) {
    std::vector<double> v;
    for (auto m : metrics) v.push_back(r.get(m));
    out[r.sentence_id] = std::move(v);
  }
  return out;
}

std::map<std::string, std::vector<double>> profile_inputs(const std::vector<ProfileRow>& rows, FeatureGroup g) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& r : rows) out[r.sentence_id] = subset(r.profile, g);
  return out;
}

// Joins feature rows with targets by sentence id through the embedding
// alignment, so both input kinds share one code path.
Alignment join_inputs(const std::map<std::string, std::vector<double>>& inputs,
                      const std::map<std::string, std::vector<double>>& targets) {
  if (inputs.empty()) throw Error(ErrorKind::Argument, "no input rows");
  EmbeddingSet set(static_cast<int>(inputs.begin()->second.size()), "features");
  for (const auto& [id, v] : inputs) set.add(id, v);
  return align(set, targets);
}

std::vector<GazeMetric> selected_metrics(const std::string& name) {
  if (name.empty() || name == "all") return {kGazeMetrics.begin(), kGazeMetrics.end()};
  return {parse_gaze_metric(name)};
}

struct Options {
  // shared
  std::string corpus, lang, lexicon, out, metrics, profiles, embeddings, model, config, output_dir;
  std::size_t min_tokens = 0;
  double low_frequency_threshold = 4.0;
  std::string group = "ALL";
  std::string metric;
  std::uint64_t seed = 0;
  // gaze-aggregate
  std::string fixations, scaler_out;
  bool raw = false;
  // scramble
  bool pin_final_punct = false;
  std::string format = "text";
  // training
  SvrParams svr;
  bool no_standardize = false;
  HeadParams head;
  std::string log;
  // evaluate
  std::string correlations_out;
  // probe / baseline
  std::string pre, ft;
  ProbeConfig probe;
  bool single_task = false;
  int folds = 5;
  int runs = 5;
};

int cmd_profile(const Options& o) {
  const auto doc = filter_min_length(load_corpus(o.corpus, o.lang), o.min_tokens);
  const auto lex = load_lexicon_file(o.lexicon, o.lang);
  ComplexityConfig cfg;
  cfg.low_frequency_threshold = o.low_frequency_threshold;
  Output out(o.out);
  write_profiles_csv(profile_document(doc, lex, cfg), out.stream());
  out.close();
  return 0;
}

int cmd_gaze_aggregate(const Options& o) {
  const auto doc = load_corpus(o.corpus, o.lang);
  SentenceBounds bounds;
  for (const auto& s : doc.sentences) bounds[s.id] = static_cast<int>(s.tokens.size());
  auto in = open_input(o.fixations);
  const auto averaged = average_all(aggregate_fixations(read_fixations_csv(in), bounds));
  Output out(o.out);
  if (o.raw) {
    write_metrics_csv(averaged, out.stream());
  } else {
    const auto scaled = scale_metrics(averaged);
    write_metrics_csv(scaled.rows, out.stream());
    if (!o.scaler_out.empty()) {
      Output scaler(o.scaler_out);
      write_scaler_json(scaled, scaler.stream());
      scaler.close();
    }
  }
  out.close();
  return 0;
}

int cmd_scramble(const Options& o) {
  ScrambleOptions opts;
  opts.pin_final_punct = o.pin_final_punct;
  const auto scrambled = scramble_corpus(load_corpus(o.corpus, o.lang), o.seed, opts);
  Output out(o.out);
  if (o.format == "text") {
    write_plain_text(scrambled, out.stream());
  } else {
    write_conllu(scrambled, out.stream());
  }
  out.close();
  return 0;
}

int cmd_train_svr(const Options& o) {
  const auto group = parse_feature_group(o.group);
  const auto metric = parse_gaze_metric(o.metric);
  const auto data = join_inputs(profile_inputs(read_profiles_csv_file(o.profiles), group),
                                metric_targets(import_sentence_metrics_file(o.metrics), {metric}));
  SvrParams p = o.svr;
  p.seed = o.seed;
  p.standardize = !o.no_standardize;
  auto model = train_svr(data.X, data.Y.col(0), p);
  model.target = std::string(to_string(metric));
  for (auto i : feature_indices(group)) model.feature_names.emplace_back(kFeatureNames[i]);
  model.provenance = "complexity:" + std::string(to_string(group));
  if (!model.diagnostics.converged)
    std::cerr << "warning: svr stopped after " << model.diagnostics.epochs << " epochs without converging\n";
  Output out(o.out);
  save_model(model, out.stream());
  out.close();
  return 0;
}

int cmd_train_head(const Options& o) {
  const auto emb = read_embeddings_file(o.embeddings);
  const auto metrics = selected_metrics(o.metric);
  const auto data = align(emb, metric_targets(import_sentence_metrics_file(o.metrics), metrics));
  HeadParams p = o.head;
  p.seed = o.seed;
  auto model = train_multitask_head(data.X, data.Y, p);
  for (auto m : metrics) model.task_names.emplace_back(to_string(m));
  model.provenance = emb.provenance();
  Output out(o.out);
  save_model(model, out.stream());
  out.close();
  if (!o.log.empty()) {
    Output log(o.log);
    write_training_log_csv(model, log.stream());
    log.close();
  }
  return 0;
}

int cmd_evaluate(const Options& o) {
  const auto loaded = load_model_file(o.model);
  const auto gaze = import_sentence_metrics_file(o.metrics);
  Output out(o.out);
  out.stream() << "metric,explained_variance,r_squared,n\n";
  auto emit = [&](const std::string& name, const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
    const auto s = score(y, yhat);
    out.stream() << name << ',' << s.explained_variance << ',' << s.r_squared << ',' << s.n << '\n';
  };
  if (const auto* svr = std::get_if<LinearModel>(&loaded)) {
    if (o.profiles.empty()) throw Error(ErrorKind::Argument, "an svr model is evaluated on --profiles");
    const auto metric = parse_gaze_metric(svr->target.empty() ? o.metric : svr->target);
    const auto group = o.group.empty() ? FeatureGroup::ALL : parse_feature_group(o.group);
    const auto data = join_inputs(profile_inputs(read_profiles_csv_file(o.profiles), group), metric_targets(gaze, {metric}));
    emit(std::string(to_string(metric)), data.Y.col(0), predict(*svr, data.X));
    if (!o.correlations_out.empty()) {
      Output corr(o.correlations_out);
      write_correlation_csv(correlation_matrix(read_profiles_csv_file(o.profiles), gaze), corr.stream());
      corr.close();
    }
  } else {
    const auto& head = std::get<MultiHeadModel>(loaded);
    if (o.embeddings.empty()) throw Error(ErrorKind::Argument, "a head model is evaluated on --embeddings");
    std::vector<GazeMetric> metrics;
    for (const auto& t : head.task_names) metrics.push_back(parse_gaze_metric(t));
    if (metrics.empty()) metrics = selected_metrics(o.metric);
    const auto data = align(read_embeddings_file(o.embeddings), metric_targets(gaze, metrics));
    const Eigen::MatrixXd pred = predict(head, data.X);
    for (std::size_t m = 0; m < metrics.size(); ++m)
      emit(std::string(to_string(metrics[m])), data.Y.col(static_cast<Eigen::Index>(m)),
           pred.col(static_cast<Eigen::Index>(m)));
  }
  out.close();
  return 0;
}

int cmd_probe(const Options& o) {
  ProbeConfig cfg = o.probe;
  cfg.k = o.folds;
  cfg.seed = o.seed;
  cfg.multitask = !o.single_task;
  const auto report = run_probe(read_embeddings_file(o.pre), read_embeddings_file(o.ft),
                                read_profiles_csv_file(o.profiles), cfg, o.lang);
  Output out(o.out);
  write_probe_csv({report}, out.stream());
  out.close();
  return 0;
}

int cmd_baseline(const Options& o) {
  const auto metrics = selected_metrics(o.metric);
  const auto targets = metric_targets(import_sentence_metrics_file(o.metrics), metrics);
  Alignment data;
  Fitter fit;
  if (!o.profiles.empty() == !o.embeddings.empty())
    throw Error(ErrorKind::Argument, "give exactly one of --profiles or --embeddings");
  if (!o.profiles.empty()) {
    data = join_inputs(profile_inputs(read_profiles_csv_file(o.profiles), parse_feature_group(o.group)), targets);
    SvrParams p = o.svr;
    p.seed = derive_seed(o.seed, 100);
    fit = svr_fitter(p);
  } else {
    data = align(read_embeddings_file(o.embeddings), targets);
    HeadParams hp = o.head;
    hp.seed = derive_seed(o.seed, 100);
    fit = [hp](const Eigen::MatrixXd& X, const Eigen::VectorXd& y) -> Predictor {
      auto m = std::make_shared<MultiHeadModel>(train_multitask_head(X, y, hp));
      return [m](const Eigen::MatrixXd& Xt) -> Eigen::VectorXd { return predict(*m, Xt).col(0); };
    };
  }
  std::vector<std::uint64_t> seeds;
  for (int r = 0; r < o.runs; ++r) seeds.push_back(derive_seed(o.seed, 1000 + static_cast<std::uint64_t>(r)));
  const auto plan = kfold_split(data.ids.size(), o.folds, derive_seed(o.seed, 1));

  Output out(o.out);
  out.stream() << "metric,run,fold,explained_variance,r_squared,n\n";
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    const auto runs = random_baseline(data.X, data.Y.col(static_cast<Eigen::Index>(m)), fit, seeds, plan);
    const auto name = to_string(metrics[m]);
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const auto& folds = runs[r].cv.folds;
      for (std::size_t f = 0; f < folds.size(); ++f)
        out.stream() << name << ',' << r << ',' << f << ',' << folds[f].explained_variance << ','
                     << folds[f].r_squared << ',' << folds[f].n << '\n';
    }
    const auto mean = mean_score(runs);
    out.stream() << name << ",mean,mean," << mean.explained_variance << ',' << mean.r_squared << ',' << mean.n << '\n';
  }
  out.close();
  return 0;
}

int cmd_run(const Options& o) {
  auto cfg = ExperimentConfig::load(o.config);
  if (!o.output_dir.empty()) cfg.set("output_dir", std::filesystem::absolute(o.output_dir).string());
  const auto result = run_experiment(cfg);
  std::cout << "wrote " << result.output_dir.string() << '\n';
  for (const auto& f : result.files) std::cout << "  " << f << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentence complexity and eye-tracking analysis toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto* profile = app.add_subcommand("profile", "Compute complexity profiles for a corpus");
  profile->add_option("--corpus", o.corpus, "CoNLL-U or plain-text corpus")->required()->check(CLI::ExistingFile);
  profile->add_option("--lang", o.lang, "Language code")->required();
  profile->add_option("--lexicon", o.lexicon, "Zipf frequency lexicon (word<TAB>zipf)")->required()->check(CLI::ExistingFile);
  profile->add_option("--min-tokens", o.min_tokens, "Drop sentences with fewer words");
  profile->add_option("--low-frequency-threshold", o.low_frequency_threshold, "Zipf threshold for rare words");
  profile->add_option("-o,--out", o.out, "Output CSV (default stdout)");

  auto* gaze = app.add_subcommand("gaze-aggregate", "Aggregate fixation logs into sentence metrics");
  gaze->add_option("--fixations", o.fixations, "Fixation CSV")->required()->check(CLI::ExistingFile);
  gaze->add_option("--corpus", o.corpus, "Corpus the fixations refer to")->required()->check(CLI::ExistingFile);
  gaze->add_option("--lang", o.lang, "Language code")->required();
  gaze->add_flag("--raw", o.raw, "Write participant averages without scaling");
  gaze->add_option("--scaler-out", o.scaler_out, "Write the per-metric min/max as JSON");
  gaze->add_option("-o,--out", o.out, "Output CSV (default stdout)");

  auto* scramble = app.add_subcommand("scramble", "Shuffle the word order of every sentence");
  scramble->add_option("--corpus", o.corpus, "Input corpus")->required()->check(CLI::ExistingFile);
  scramble->add_option("--lang", o.lang, "Language code")->required();
  scramble->add_option("--seed", o.seed, "Shuffle seed")->required();
  scramble->add_flag("--pin-final-punct", o.pin_final_punct, "Keep sentence-final punctuation in place");
  scramble->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"conllu", "text"}));
  scramble->add_option("-o,--out", o.out, "Output file (default stdout)");

  auto* train_svr_cmd = app.add_subcommand("train-svr", "Fit a linear SVR on complexity features");
  train_svr_cmd->add_option("--profiles", o.profiles, "Profile CSV")->required()->check(CLI::ExistingFile);
  train_svr_cmd->add_option("--metrics", o.metrics, "Sentence metric CSV")->required()->check(CLI::ExistingFile);
  train_svr_cmd->add_option("--metric", o.metric, "Target metric")->required();
  train_svr_cmd->add_option("--group", o.group, "Feature group: LENGTH, FREQUENCY, STRUCTURAL or ALL");
  train_svr_cmd->add_option("--C", o.svr.C, "Regularization constant")->check(CLI::PositiveNumber);
  train_svr_cmd->add_option("--epsilon", o.svr.epsilon, "Insensitive-zone width")->check(CLI::NonNegativeNumber);
  train_svr_cmd->add_option("--tol", o.svr.tol, "Stopping tolerance")->check(CLI::PositiveNumber);
  train_svr_cmd->add_option("--max-iter", o.svr.max_iter, "Maximum epochs")->check(CLI::PositiveNumber);
  train_svr_cmd->add_option("--seed", o.seed, "Coordinate order seed");
  train_svr_cmd->add_flag("--no-standardize", o.no_standardize, "Use raw feature values");
  train_svr_cmd->add_option("-o,--out", o.out, "Model JSON (default stdout)");

  auto* train_head_cmd = app.add_subcommand("train-head", "Fit multi-task linear heads on embeddings");
  train_head_cmd->add_option("--embeddings", o.embeddings, "Embedding file")->required()->check(CLI::ExistingFile);
  train_head_cmd->add_option("--metrics", o.metrics, "Sentence metric CSV")->required()->check(CLI::ExistingFile);
  train_head_cmd->add_option("--metric", o.metric, "Single target metric (default: all four)");
  train_head_cmd->add_option("--lr", o.head.lr, "Learning rate")->check(CLI::PositiveNumber);
  train_head_cmd->add_option("--batch", o.head.batch, "Batch size")->check(CLI::PositiveNumber);
  train_head_cmd->add_option("--epochs", o.head.epochs, "Epochs")->check(CLI::PositiveNumber);
  train_head_cmd->add_option("--eval-every", o.head.eval_every, "Steps between evaluations")->check(CLI::PositiveNumber);
  train_head_cmd->add_option("--patience", o.head.patience, "Evaluations without improvement before stopping");
  train_head_cmd->add_option("--validation-fraction", o.head.validation_fraction, "Held-out share of rows")
      ->check(CLI::Range(0.0, 0.9));
  train_head_cmd->add_flag("--standardize", o.head.standardize, "z-score inputs");
  train_head_cmd->add_option("--seed", o.seed, "Training seed");
  train_head_cmd->add_option("--log", o.log, "Training log CSV");
  train_head_cmd->add_option("-o,--out", o.out, "Model JSON (default stdout)");

  auto* evaluate = app.add_subcommand("evaluate", "Score a saved model on held-out data");
  evaluate->add_option("--model", o.model, "Model JSON")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--metrics", o.metrics, "Sentence metric CSV")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--profiles", o.profiles, "Profile CSV (svr models)")->check(CLI::ExistingFile);
  evaluate->add_option("--embeddings", o.embeddings, "Embedding file (head models)")->check(CLI::ExistingFile);
  evaluate->add_option("--group", o.group, "Feature group the svr model was trained on");
  evaluate->add_option("--metric", o.metric, "Target metric when the model does not record it");
  evaluate->add_option("--correlations-out", o.correlations_out, "Feature/metric Spearman matrix CSV (svr models)");
  evaluate->add_option("-o,--out", o.out, "Output CSV (default stdout)");

  auto* probe = app.add_subcommand("probe", "Compare pre-trained and fine-tuned embeddings with linear probes");
  probe->add_option("--pre", o.pre, "Pre-trained embedding file")->required()->check(CLI::ExistingFile);
  probe->add_option("--ft", o.ft, "Fine-tuned embedding file")->required()->check(CLI::ExistingFile);
  probe->add_option("--profiles", o.profiles, "Profile CSV")->required()->check(CLI::ExistingFile);
  probe->add_option("--lang", o.lang, "Language label for the report")->required();
  probe->add_option("--folds", o.folds, "Number of folds")->check(CLI::Range(2, 1000));
  probe->add_option("--train-size", o.probe.train_size, "Training sentences per fold");
  probe->add_option("--test-size", o.probe.test_size, "Test sentences per fold");
  probe->add_option("--epochs", o.probe.epochs, "Training epochs")->check(CLI::NonNegativeNumber);
  probe->add_option("--lr", o.probe.lr, "Learning rate")->check(CLI::PositiveNumber);
  probe->add_option("--batch", o.probe.batch, "Batch size")->check(CLI::PositiveNumber);
  probe->add_flag("--single-task", o.single_task, "Train nine separate probes");
  probe->add_option("--seed", o.seed, "Seed");
  probe->add_option("-o,--out", o.out, "Output CSV (default stdout)");

  auto* baseline = app.add_subcommand("baseline", "Cross-validate on randomly re-paired targets");
  baseline->add_option("--profiles", o.profiles, "Profile CSV (svr on complexity features)")->check(CLI::ExistingFile);
  baseline->add_option("--embeddings", o.embeddings, "Embedding file (linear head)")->check(CLI::ExistingFile);
  baseline->add_option("--metrics", o.metrics, "Sentence metric CSV")->required()->check(CLI::ExistingFile);
  baseline->add_option("--metric", o.metric, "Single target metric (default: all four)");
  baseline->add_option("--group", o.group, "Feature group for --profiles");
  baseline->add_option("--runs", o.runs, "Number of permutation seeds")->check(CLI::PositiveNumber);
  baseline->add_option("--folds", o.folds, "Number of folds")->check(CLI::Range(2, 1000));
  baseline->add_option("--seed", o.seed, "Seed");
  baseline->add_option("-o,--out", o.out, "Output CSV (default stdout)");

  auto* run = app.add_subcommand("run", "Run the pipeline named in an experiment config");
  run->add_option("--config", o.config, "Experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--output-dir", o.output_dir, "Override the config's output_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (profile->parsed()) return cmd_profile(o);
    if (gaze->parsed()) return cmd_gaze_aggregate(o);
    if (scramble->parsed()) return cmd_scramble(o);
    if (train_svr_cmd->parsed()) return cmd_train_svr(o);
    if (train_head_cmd->parsed()) return cmd_train_head(o);
    if (evaluate->parsed()) return cmd_evaluate(o);
    if (probe->parsed()) return cmd_probe(o);
    if (baseline->parsed()) return cmd_baseline(o);
    if (run->parsed()) return cmd_run(o);
  } catch (const ParseError& e) {
    std::cerr << "error: " << to_string(e.kind()) << " at line " << e.line() << ": " << e.what() << '\n';
    return kExitValidation;
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << '\n';
    return is_validation_error(e.kind()) ? kExitValidation : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
