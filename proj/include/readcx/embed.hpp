#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace readcx {

/// Fixed-dimension sentence vectors keyed by sentence id.
///
/// File grammar (UTF-8, '\n' line ends):
///   header := "#dim=" <positive int> "\t#provenance=" <text without tab/newline>
///   row    := <sentence id without tab/newline> "\t" <v1> (" " <vi>){dim-1}
/// Values are written with 9 significant digits; rows in lexicographic id order.
class EmbeddingSet {
 public:
  explicit EmbeddingSet(int dim = 1, std::string provenance = {});

  /// Throws Dimension (wrong length), Value (non-finite) or Duplication errors.
  void add(const std::string& id, std::vector<double> values);

  int dim() const noexcept { return dim_; }
  const std::string& provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return vectors_.size(); }
  bool contains(const std::string& id) const { return vectors_.count(id) > 0; }
  const std::vector<double>& at(const std::string& id) const;
  const std::map<std::string, std::vector<double>>& vectors() const noexcept { return vectors_; }

  bool operator==(const EmbeddingSet&) const = default;

 private:
  int dim_;
  std::string provenance_;
  std::map<std::string, std::vector<double>> vectors_;
};

EmbeddingSet read_embeddings(std::istream& in);
EmbeddingSet read_embeddings_file(const std::string& path);
void write_embeddings(const EmbeddingSet& set, std::ostream& out);
void write_embeddings_file(const EmbeddingSet& set, const std::string& path);

/// Embeddings joined to per-sentence targets.
struct Alignment {
  std::vector<std::string> ids;  // sorted
  Eigen::MatrixXd X;             // ids.size() x dim
  Eigen::MatrixXd Y;             // ids.size() x target width
  std::vector<std::string> missing_targets;     // embedded, but no target
  std::vector<std::string> missing_embeddings;  // target, but not embedded
};

/// Joins on the intersection of ids. All target rows must share one width.
/// Throws an Alignment error when the intersection is empty.
Alignment align(const EmbeddingSet& set, const std::map<std::string, std::vector<double>>& targets);

}  // namespace readcx
