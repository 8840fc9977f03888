#include "readcx/regress.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>

#include "json.hpp"

#include "readcx/error.hpp"
#include "readcx/random.hpp"
#include "readcx/text.hpp"

namespace readcx {

namespace {

void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorKind::Value, std::string(what) + " contains non-finite values");
}

}  // namespace

// ---------------------------------------------------------------------------
// Folds

std::vector<std::size_t> FoldPlan::test_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan kfold_split(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::Argument, "k-fold split needs k >= 2");
  if (static_cast<std::size_t>(k) > n)
    throw Error(ErrorKind::Argument, "k = " + std::to_string(k) + " exceeds sample count " + std::to_string(n));
  std::mt19937_64 rng(seed);
  const auto order = shuffled_indices(n, rng);
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(n, 0);
  for (std::size_t pos = 0; pos < n; ++pos) plan.assignments[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  return plan;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Eigen::VectorXd take_rows(const Eigen::VectorXd& v, const std::vector<std::size_t>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(idx[i]));
  return out;
}

// ---------------------------------------------------------------------------
// Scaler

Scaler fit_scaler(const Eigen::MatrixXd& X) {
  if (X.rows() == 0 || X.cols() == 0) throw Error(ErrorKind::Argument, "cannot fit a scaler on an empty matrix");
  Scaler s;
  s.mean = X.colwise().mean().transpose();
  s.std = ((X.rowwise() - s.mean.transpose()).array().square().colwise().mean().sqrt()).transpose();
  for (Eigen::Index j = 0; j < s.std.size(); ++j) {
    if (!(s.std(j) > 1e-12 * std::max(1.0, std::abs(s.mean(j))))) s.std(j) = 1.0;
  }
  return s;
}

Eigen::MatrixXd apply_scaler(const Scaler& scaler, const Eigen::MatrixXd& X) {
  if (X.cols() != scaler.mean.size())
    throw Error(ErrorKind::Argument, "scaler fitted on " + std::to_string(scaler.mean.size()) +
                                         " columns applied to " + std::to_string(X.cols()));
  return ((X.rowwise() - scaler.mean.transpose()).array().rowwise() / scaler.std.transpose().array()).matrix();
}

// ---------------------------------------------------------------------------
// SVR

LinearModel train_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrParams& params) {
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  if (n != y.size()) throw Error(ErrorKind::Argument, "X and y have different row counts");
  if (n < 2) throw Error(ErrorKind::Argument, "SVR needs at least two samples");
  if (!(params.C > 0.0) || params.epsilon < 0.0 || !(params.tol > 0.0) || params.max_iter < 0)
    throw Error(ErrorKind::Argument, "invalid SVR parameters");
  require_finite(X, "SVR inputs");
  require_finite(y, "SVR targets");

  LinearModel model;
  model.params = params;
  Eigen::MatrixXd Z(n, d + 1);
  Eigen::VectorXd x_shift = Eigen::VectorXd::Zero(d);
  if (params.standardize) {
    model.scaler = fit_scaler(X);
    Z.leftCols(d) = apply_scaler(*model.scaler, X);
  } else {
    // Centre the raw columns anyway so the regularized unit feature only has
    // to absorb a residual offset; the shift is folded back into the bias.
    x_shift = X.colwise().mean().transpose();
    Z.leftCols(d) = X.rowwise() - x_shift.transpose();
  }
  Z.col(d).setOnes();

  const double y_mean = y.mean();
  const Eigen::VectorXd yc = y.array() - y_mean;
  const double C = params.C;
  const double eps = params.epsilon;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
  const Eigen::VectorXd qd = Z.rowwise().squaredNorm();

  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(params.seed);

  auto dual_objective = [&] { return 0.5 * w.squaredNorm() + eps * beta.lpNorm<1>() - yc.dot(beta); };

  auto& diag = model.diagnostics;
  while (diag.epochs < params.max_iter) {
    shuffle(order, rng);
    double max_violation = 0.0;
    for (const std::size_t idx : order) {
      const auto i = static_cast<Eigen::Index>(idx);
      const double g = Z.row(i).dot(w) - yc(i);
      const double gp = g + eps;
      const double gn = g - eps;
      const double b = beta(i);

      double violation = 0.0;
      if (b == 0.0) {
        if (gp < 0.0) violation = -gp;
        else if (gn > 0.0) violation = gn;
      } else if (b >= C) {
        if (gp > 0.0) violation = gp;
      } else if (b <= -C) {
        if (gn < 0.0) violation = -gn;
      } else if (b > 0.0) {
        violation = std::abs(gp);
      } else {
        violation = std::abs(gn);
      }
      max_violation = std::max(max_violation, violation);

      // Exact minimizer of the one-dimensional piecewise quadratic.
      const double h = qd(i);
      double step;
      if (gp < h * b) step = -gp / h;
      else if (gn > h * b) step = -gn / h;
      else step = -b;
      if (std::abs(step) < 1e-12) continue;
      const double updated = std::clamp(b + step, -C, C);
      const double delta = updated - b;
      if (delta != 0.0) {
        beta(i) = updated;
        w.noalias() += delta * Z.row(i).transpose();
      }
    }
    ++diag.epochs;
    diag.max_violation = max_violation;
    diag.dual_objective.push_back(dual_objective());
    if (max_violation < params.tol) {
      diag.converged = true;
      break;
    }
  }

  model.weights = w.head(d);
  model.bias = w(d) + y_mean - model.weights.dot(x_shift);
  return model;
}

Eigen::VectorXd predict(const LinearModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.weights.size())
    throw Error(ErrorKind::Argument, "model expects " + std::to_string(model.weights.size()) +
                                         " features, got " + std::to_string(X.cols()));
  const Eigen::MatrixXd Z = model.scaler ? apply_scaler(*model.scaler, X) : X;
  return (Z * model.weights).array() + model.bias;
}

// ---------------------------------------------------------------------------
// Multi-task heads

double summed_mse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& Y) {
  if (Y.rows() == 0) return 0.0;
  return (predictions - Y).array().square().colwise().mean().sum();
}

MultiHeadModel train_multitask_head(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const HeadParams& params) {
  const Eigen::Index n = X.rows();
  if (n != Y.rows()) throw Error(ErrorKind::Argument, "X and Y have different row counts");
  if (Y.cols() < 1) throw Error(ErrorKind::Argument, "at least one task is required");
  if (n < 1 || X.cols() < 1) throw Error(ErrorKind::Argument, "empty training matrix");
  if (params.batch < 1 || params.epochs < 0 || params.eval_every < 1 || params.patience < 1 || !(params.lr > 0.0) ||
      params.validation_fraction < 0.0 || params.validation_fraction >= 1.0)
    throw Error(ErrorKind::Argument, "invalid head training parameters");
  require_finite(X, "head inputs");
  require_finite(Y, "head targets");

  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> val_idx;
  {
    std::mt19937_64 split_rng(derive_seed(params.seed, 1));
    const auto order = shuffled_indices(static_cast<std::size_t>(n), split_rng);
    const auto n_val = static_cast<std::size_t>(std::floor(params.validation_fraction * static_cast<double>(n)));
    if (params.validation_fraction > 0.0 && n_val == 0)
      throw Error(ErrorKind::Argument, "validation split is empty for " + std::to_string(n) + " rows");
    val_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    train_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(val_idx.begin(), val_idx.end());
    std::sort(train_idx.begin(), train_idx.end());
  }

  MultiHeadModel model;
  model.params = params;
  Eigen::MatrixXd Xtr = take_rows(X, train_idx);
  Eigen::MatrixXd Xval = take_rows(X, val_idx);
  if (params.standardize) {
    model.scaler = fit_scaler(Xtr);
    Xtr = apply_scaler(*model.scaler, Xtr);
    if (!val_idx.empty()) Xval = apply_scaler(*model.scaler, Xval);
  }
  const Eigen::MatrixXd Ytr = take_rows(Y, train_idx);
  const Eigen::MatrixXd Yval = take_rows(Y, val_idx);
  const bool validate = !val_idx.empty();

  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(X.cols(), Y.cols());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(Y.cols());
  auto forward = [&](const Eigen::MatrixXd& in) -> Eigen::MatrixXd { return (in * W).rowwise() + b.transpose(); };

  Eigen::MatrixXd best_W = W;
  Eigen::VectorXd best_b = b;
  double best_loss = std::numeric_limits<double>::infinity();
  int stale = 0;
  int step = 0;
  int epoch = 0;

  // Returns true when early stopping triggers.
  auto evaluate = [&]() -> bool {
    HeadLogEntry e;
    e.step = step;
    e.epoch = epoch;
    e.train_loss = summed_mse(forward(Xtr), Ytr);
    if (!std::isfinite(e.train_loss))
      throw Error(ErrorKind::Value, "training diverged (non-finite loss); lower the learning rate");
    if (validate) e.validation_loss = summed_mse(forward(Xval), Yval);
    model.log.push_back(e);
    if (!validate) return false;
    if (e.validation_loss < best_loss) {
      best_loss = e.validation_loss;
      best_W = W;
      best_b = b;
      model.best_step = step;
      stale = 0;
      return false;
    }
    return ++stale >= params.patience;
  };

  bool stopped = evaluate();
  std::mt19937_64 batch_rng(derive_seed(params.seed, 2));
  std::vector<std::size_t> order(train_idx.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const auto batch = static_cast<std::size_t>(params.batch);

  for (epoch = 1; epoch <= params.epochs && !stopped; ++epoch) {
    shuffle(order, batch_rng);
    for (std::size_t start = 0; start < order.size() && !stopped; start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start),
                                          order.begin() + static_cast<std::ptrdiff_t>(end));
      const Eigen::MatrixXd xb = take_rows(Xtr, rows);
      const Eigen::MatrixXd residual = forward(xb) - take_rows(Ytr, rows);
      const double scale = 2.0 / static_cast<double>(rows.size());
      W.noalias() -= params.lr * scale * (xb.transpose() * residual);
      b -= params.lr * scale * residual.colwise().sum().transpose();
      ++step;
      if (step % params.eval_every == 0) stopped = evaluate();
    }
  }
  epoch = std::min(epoch, params.epochs);
  if (!stopped && step % params.eval_every != 0) evaluate();

  if (validate) {
    model.weights = best_W;
    model.biases = best_b;
  } else {
    model.weights = W;
    model.biases = b;
    model.best_step = step;
  }
  return model;
}

Eigen::MatrixXd predict(const MultiHeadModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() != model.weights.rows())
    throw Error(ErrorKind::Argument, "model expects inputs of dimension " + std::to_string(model.weights.rows()) +
                                         ", got " + std::to_string(X.cols()));
  const Eigen::MatrixXd Z = model.scaler ? apply_scaler(*model.scaler, X) : X;
  return (Z * model.weights).rowwise() + model.biases.transpose();
}

// ---------------------------------------------------------------------------
// JSON model files

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ordered_json scaler_json(const std::optional<Scaler>& s) {
  if (!s) return nullptr;
  return {{"mean", to_vec(s->mean)}, {"std", to_vec(s->std)}};
}

std::optional<Scaler> scaler_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  Scaler s{from_vec(j.at("mean").get<std::vector<double>>()), from_vec(j.at("std").get<std::vector<double>>())};
  if (s.mean.size() != s.std.size()) throw Error(ErrorKind::Schema, "scaler mean/std lengths differ");
  for (Eigen::Index i = 0; i < s.std.size(); ++i) {
    if (!(s.std(i) > 0.0)) throw Error(ErrorKind::Value, "scaler std must be positive");
  }
  return s;
}

LinearModel linear_from(const json& j) {
  LinearModel m;
  m.weights = from_vec(j.at("weights").get<std::vector<double>>());
  m.bias = j.at("bias").get<double>();
  m.scaler = scaler_from(j.at("scaler"));
  if (m.scaler && m.scaler->mean.size() != m.weights.size())
    throw Error(ErrorKind::Schema, "scaler and weights have different lengths");
  const auto& p = j.at("params");
  m.params.C = p.at("C").get<double>();
  m.params.epsilon = p.at("epsilon").get<double>();
  m.params.tol = p.at("tol").get<double>();
  m.params.max_iter = p.at("max_iter").get<int>();
  m.params.seed = p.at("seed").get<std::uint64_t>();
  m.params.standardize = p.at("standardize").get<bool>();
  m.diagnostics.epochs = j.value("epochs", 0);
  m.diagnostics.converged = j.value("converged", false);
  m.target = j.value("target", "");
  m.feature_names = j.value("features", std::vector<std::string>{});
  m.provenance = j.value("provenance", "");
  return m;
}

MultiHeadModel multihead_from(const json& j) {
  MultiHeadModel m;
  const auto heads = j.at("weights").get<std::vector<std::vector<double>>>();
  const auto biases = j.at("biases").get<std::vector<double>>();
  if (heads.empty() || heads.size() != biases.size()) throw Error(ErrorKind::Schema, "malformed head weights");
  const auto dim = static_cast<Eigen::Index>(heads.front().size());
  m.weights.resize(dim, static_cast<Eigen::Index>(heads.size()));
  for (std::size_t t = 0; t < heads.size(); ++t) {
    if (static_cast<Eigen::Index>(heads[t].size()) != dim)
      throw Error(ErrorKind::Schema, "heads have different input dimensions");
    m.weights.col(static_cast<Eigen::Index>(t)) = from_vec(heads[t]);
  }
  m.biases = from_vec(biases);
  m.scaler = scaler_from(j.at("scaler"));
  const auto& p = j.at("params");
  m.params.lr = p.at("lr").get<double>();
  m.params.batch = p.at("batch").get<int>();
  m.params.epochs = p.at("epochs").get<int>();
  m.params.eval_every = p.at("eval_every").get<int>();
  m.params.patience = p.at("patience").get<int>();
  m.params.seed = p.at("seed").get<std::uint64_t>();
  m.params.validation_fraction = p.at("validation_fraction").get<double>();
  m.params.standardize = p.at("standardize").get<bool>();
  m.best_step = j.value("best_step", 0);
  m.task_names = j.value("tasks", std::vector<std::string>{});
  m.provenance = j.value("provenance", "");
  return m;
}

}  // namespace

void save_model(const LinearModel& model, std::ostream& out) {
  ordered_json j;
  j["type"] = "linear_svr";
  j["target"] = model.target;
  j["features"] = model.feature_names;
  j["weights"] = to_vec(model.weights);
  j["bias"] = model.bias;
  j["scaler"] = scaler_json(model.scaler);
  j["params"] = {{"C", model.params.C},           {"epsilon", model.params.epsilon},
                 {"tol", model.params.tol},       {"max_iter", model.params.max_iter},
                 {"seed", model.params.seed},     {"standardize", model.params.standardize}};
  j["epochs"] = model.diagnostics.epochs;
  j["converged"] = model.diagnostics.converged;
  j["provenance"] = model.provenance;
  out << j.dump(2) << '\n';
}

void save_model(const MultiHeadModel& model, std::ostream& out) {
  ordered_json j;
  j["type"] = "multitask_head";
  j["tasks"] = model.task_names;
  std::vector<std::vector<double>> heads;
  for (Eigen::Index t = 0; t < model.weights.cols(); ++t) heads.push_back(to_vec(model.weights.col(t)));
  j["weights"] = heads;
  j["biases"] = to_vec(model.biases);
  j["scaler"] = scaler_json(model.scaler);
  j["params"] = {{"lr", model.params.lr},
                 {"batch", model.params.batch},
                 {"epochs", model.params.epochs},
                 {"eval_every", model.params.eval_every},
                 {"patience", model.params.patience},
                 {"seed", model.params.seed},
                 {"validation_fraction", model.params.validation_fraction},
                 {"standardize", model.params.standardize}};
  j["best_step"] = model.best_step;
  j["provenance"] = model.provenance;
  out << j.dump(2) << '\n';
}

std::variant<LinearModel, MultiHeadModel> load_model(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
    const auto type = j.at("type").get<std::string>();
    if (type == "linear_svr") return linear_from(j);
    if (type == "multitask_head") return multihead_from(j);
    throw Error(ErrorKind::Schema, "unknown model type '" + type + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("malformed model file: ") + e.what());
  }
}

std::variant<LinearModel, MultiHeadModel> load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open model file '" + path + "'");
  return load_model(in);
}

void write_training_log_csv(const MultiHeadModel& model, std::ostream& out) {
  out << "step,epoch,train_loss,validation_loss\n";
  for (const auto& e : model.log) {
    out << e.step << ',' << e.epoch << ',' << text::format_double(e.train_loss) << ','
        << (std::isnan(e.validation_loss) ? std::string("NA") : text::format_double(e.validation_loss)) << '\n';
  }
}

}  // namespace readcx
