#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace readcx {

// ---------------------------------------------------------------------------
// Cross-validation folds

struct FoldPlan {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<int> assignments;  // sample index -> fold id

  std::size_t size() const noexcept { return assignments.size(); }
  std::vector<std::size_t> test_indices(int fold) const;
  std::vector<std::size_t> train_indices(int fold) const;
};

/// Seeded shuffled partition of 0..n-1 into k folds whose sizes differ by at
/// most one. Requires 2 <= k <= n.
FoldPlan kfold_split(std::size_t n, int k, std::uint64_t seed);

/// Rows of `m` at `idx`, in order.
Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& idx);
Eigen::VectorXd take_rows(const Eigen::VectorXd& v, const std::vector<std::size_t>& idx);

// ---------------------------------------------------------------------------
// Standardization

/// Per-column mean and population standard deviation. Constant columns get a
/// standard deviation of 1 so they map to zero.
struct Scaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
};

Scaler fit_scaler(const Eigen::MatrixXd& X);
Eigen::MatrixXd apply_scaler(const Scaler& scaler, const Eigen::MatrixXd& X);

// ---------------------------------------------------------------------------
// Linear epsilon-insensitive support vector regression

struct SvrParams {
  double C = 1.0;
  double epsilon = 0.1;
  double tol = 1e-4;
  int max_iter = 10000;  // epochs over the data
  std::uint64_t seed = 0;
  bool standardize = true;
};

struct SvrDiagnostics {
  int epochs = 0;
  bool converged = false;
  double max_violation = 0.0;
  std::vector<double> dual_objective;  // value after each epoch
};

struct LinearModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  std::optional<Scaler> scaler;
  SvrParams params;
  SvrDiagnostics diagnostics;
  std::string target;
  std::vector<std::string> feature_names;
  std::string provenance;
};

/// Minimizes C * sum_i max(0, |y_i - w.x_i - b| - epsilon) + 0.5 |w|^2 by
/// coordinate descent on the dual. The target is centred on its mean and the
/// intercept is learned as the weight of a constant unit feature (so it is
/// regularized like the other weights). Coordinates are visited in a seeded
/// random order each epoch; training stops once the largest projected-gradient
/// violation of an epoch falls below `tol`, or after `max_iter` epochs with
/// `diagnostics.converged == false`.
LinearModel train_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrParams& params = {});

Eigen::VectorXd predict(const LinearModel& model, const Eigen::MatrixXd& X);

// ---------------------------------------------------------------------------
// Multi-task linear regression heads over a shared input representation

struct HeadParams {
  double lr = 1e-3;
  int batch = 32;
  int epochs = 15;
  int eval_every = 40;  // optimizer steps between evaluations
  int patience = 5;     // evaluations without improvement before stopping
  std::uint64_t seed = 0;
  double validation_fraction = 0.1;  // 0 disables the split and early stopping
  bool standardize = false;          // z-score inputs with a scaler fitted on the training rows
};

struct HeadLogEntry {
  int step = 0;
  int epoch = 0;
  double train_loss = 0.0;
  double validation_loss = std::numeric_limits<double>::quiet_NaN();
};

struct MultiHeadModel {
  Eigen::MatrixXd weights;  // input dim x tasks
  Eigen::VectorXd biases;   // tasks
  std::optional<Scaler> scaler;
  HeadParams params;
  std::vector<HeadLogEntry> log;
  int best_step = 0;
  std::vector<std::string> task_names;
  std::string provenance;

  int input_dim() const { return static_cast<int>(weights.rows()); }
  int tasks() const { return static_cast<int>(weights.cols()); }
};

/// Sum over tasks of the per-task mean squared error.
double summed_mse(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& Y);

/// Mini-batch gradient descent on the summed per-task MSE, starting from zero
/// parameters. With a validation split the returned parameters are those of
/// the first evaluation reaching the lowest validation loss; without one they
/// are the final parameters.
MultiHeadModel train_multitask_head(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                    const HeadParams& params = {});

Eigen::MatrixXd predict(const MultiHeadModel& model, const Eigen::MatrixXd& X);

// ---------------------------------------------------------------------------
// Model files (JSON)

void save_model(const LinearModel& model, std::ostream& out);
void save_model(const MultiHeadModel& model, std::ostream& out);
/// Reads either model type, dispatching on the "type" field.
std::variant<LinearModel, MultiHeadModel> load_model(std::istream& in);
std::variant<LinearModel, MultiHeadModel> load_model_file(const std::string& path);

void write_training_log_csv(const MultiHeadModel& model, std::ostream& out);

}  // namespace readcx
