#include "readcx/embed.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "readcx/error.hpp"
#include "readcx/text.hpp"

namespace readcx {

EmbeddingSet::EmbeddingSet(int dim, std::string provenance) : dim_(dim), provenance_(std::move(provenance)) {
  if (dim_ < 1) throw Error(ErrorKind::Dimension, "embedding dimension must be positive");
  if (provenance_.find_first_of("\t\n\r") != std::string::npos)
    throw Error(ErrorKind::Value, "provenance must not contain tabs or newlines");
}

void EmbeddingSet::add(const std::string& id, std::vector<double> values) {
  if (id.empty() || id.find_first_of("\t\n\r") != std::string::npos)
    throw Error(ErrorKind::Value, "invalid sentence id '" + id + "'");
  if (static_cast<int>(values.size()) != dim_)
    throw Error(ErrorKind::Dimension, "sentence '" + id + "' has " + std::to_string(values.size()) +
                                          " components, expected " + std::to_string(dim_));
  for (double v : values) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Value, "sentence '" + id + "' has a non-finite component");
  }
  if (!vectors_.emplace(id, std::move(values)).second)
    throw Error(ErrorKind::Duplication, "sentence id '" + id + "' occurs twice");
}

const std::vector<double>& EmbeddingSet::at(const std::string& id) const {
  const auto it = vectors_.find(id);
  if (it == vectors_.end()) throw Error(ErrorKind::Alignment, "no embedding for sentence '" + id + "'");
  return it->second;
}

EmbeddingSet read_embeddings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing embedding header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto tab = line.find('\t');
  const std::string_view dim_part = std::string_view(line).substr(0, tab);
  if (dim_part.substr(0, 5) != "#dim=") throw ParseError(1, "header must start with '#dim='");
  long long dim = 0;
  if (!text::parse_int(dim_part.substr(5), dim) || dim < 1) throw ParseError(1, "invalid dimension");
  std::string provenance;
  if (tab != std::string::npos) {
    const std::string_view prov = std::string_view(line).substr(tab + 1);
    if (prov.substr(0, 12) != "#provenance=") throw ParseError(1, "expected '#provenance=' after the dimension");
    provenance = std::string(prov.substr(12));
  }

  EmbeddingSet set(static_cast<int>(dim), provenance);
  std::size_t line_no = 1;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto t = line.find('\t');
    if (t == std::string::npos) throw ParseError(line_no, "expected '<sentence_id>\\t<values>'");
    const std::string id = line.substr(0, t);
    values.clear();
    for (auto field : text::split(std::string_view(line).substr(t + 1), ' ')) {
      if (field.empty()) continue;
      double v = 0.0;
      if (!text::parse_double(field, v))
        throw Error(ErrorKind::Value, "sentence '" + id + "': invalid component '" + std::string(field) + "'");
      values.push_back(v);
    }
    set.add(id, values);
  }
  return set;
}

EmbeddingSet read_embeddings_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open embedding file '" + path + "'");
  return read_embeddings(in);
}

void write_embeddings(const EmbeddingSet& set, std::ostream& out) {
  out << "#dim=" << set.dim() << "\t#provenance=" << set.provenance() << '\n';
  for (const auto& [id, v] : set.vectors()) {
    out << id << '\t';
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out << ' ';
      out << text::format_double(v[i], 9);
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "failed to write embeddings");
}

void write_embeddings_file(const EmbeddingSet& set, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot create embedding file '" + path + "'");
  write_embeddings(set, out);
}

Alignment align(const EmbeddingSet& set, const std::map<std::string, std::vector<double>>& targets) {
  Alignment a;
  std::size_t width = 0;
  bool width_known = false;
  for (const auto& [id, y] : targets) {
    if (!width_known) {
      width = y.size();
      width_known = true;
    } else if (y.size() != width) {
      throw Error(ErrorKind::Dimension, "target rows have differing widths");
    }
    if (set.contains(id)) {
      a.ids.push_back(id);
    } else {
      a.missing_embeddings.push_back(id);
    }
  }
  for (const auto& [id, v] : set.vectors()) {
    if (!targets.count(id)) a.missing_targets.push_back(id);
  }
  if (a.ids.empty()) throw Error(ErrorKind::Alignment, "embeddings and targets share no sentence ids");

  const auto n = static_cast<Eigen::Index>(a.ids.size());
  a.X.resize(n, set.dim());
  a.Y.resize(n, static_cast<Eigen::Index>(width));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& id = a.ids[static_cast<std::size_t>(i)];
    const auto& v = set.at(id);
    const auto& y = targets.at(id);
    for (int j = 0; j < set.dim(); ++j) a.X(i, j) = v[static_cast<std::size_t>(j)];
    for (std::size_t j = 0; j < width; ++j) a.Y(i, static_cast<Eigen::Index>(j)) = y[j];
  }
  return a;
}

}  // namespace readcx
