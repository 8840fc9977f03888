#include "readcx/complexity.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>

#include "readcx/error.hpp"
#include "readcx/text.hpp"

namespace readcx {

namespace {

bool is_cop(std::string_view deprel) { return deprel.substr(0, deprel.find(':')) == "cop"; }

struct SurfaceStats {
  int words = 0;
  double avg_word_length = 0.0;
  double avg_word_frequency = 0.0;
  int n_low_frequency = 0;
  double lexical_density = 0.0;
};

SurfaceStats surface_stats(const Sentence& s, const FrequencyLexicon& lex, const ComplexityConfig& cfg) {
  SurfaceStats st;
  long chars = 0;
  std::vector<double> zipfs;
  int content = 0;
  for (const auto& t : s.tokens) {
    if (t.upos == Upos::PUNCT) {
      if (cfg.punct_chars_in_word_length) chars += t.char_length;
      continue;
    }
    ++st.words;
    chars += t.char_length;
    const double z = lex.zipf(t.surface);
    zipfs.push_back(z);
    if (z < cfg.low_frequency_threshold) ++st.n_low_frequency;
    if (cfg.content_upos.count(t.upos)) ++content;
  }
  if (st.words == 0)
    throw Error(ErrorKind::DegenerateInput, "sentence '" + s.id + "' has no non-punctuation tokens");
  st.avg_word_length = static_cast<double>(chars) / st.words;
  // Summed in sorted order so the mean is bit-identical under any reordering
  // of the tokens.
  std::sort(zipfs.begin(), zipfs.end());
  double zipf_sum = 0.0;
  for (double z : zipfs) zipf_sum += z;
  st.avg_word_frequency = zipf_sum / st.words;
  st.lexical_density = static_cast<double>(content) / st.words;
  return st;
}

void require_tree(const Sentence& s) {
  if (!s.has_tree())
    throw StructureError(s.id, "dependency annotation absent; structural features are undefined");
  validate_tree(s);
}

struct SyntaxStats {
  int depth = 1;
  double avg_link = 0.0;
  int max_link = 0;
  int verbal_heads = 0;
};

SyntaxStats syntax_stats(const Sentence& s) {
  const auto n = s.tokens.size();
  std::vector<int> n_dependents(n + 1, 0);
  std::vector<bool> has_cop_dependent(n + 1, false);
  for (const auto& t : s.tokens) {
    n_dependents[static_cast<std::size_t>(*t.head)]++;
    if (is_cop(t.deprel)) has_cop_dependent[static_cast<std::size_t>(*t.head)] = true;
  }

  SyntaxStats st;
  // Depth in edges from the root, memoised along head chains.
  std::vector<int> depth(n + 1, -1);
  int max_edges = 0;
  for (const auto& t : s.tokens) {
    std::vector<int> chain;
    int cur = t.index;
    while (cur != 0 && depth[static_cast<std::size_t>(cur)] < 0) {
      chain.push_back(cur);
      cur = *s.tokens[static_cast<std::size_t>(cur - 1)].head;
    }
    int d = cur == 0 ? -1 : depth[static_cast<std::size_t>(cur)];
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) depth[static_cast<std::size_t>(*it)] = ++d;
    max_edges = std::max(max_edges, depth[static_cast<std::size_t>(t.index)]);
  }
  st.depth = std::max(1, max_edges);

  int links = 0;
  long link_sum = 0;
  for (const auto& t : s.tokens) {
    if (*t.head == 0 || t.upos == Upos::PUNCT) continue;
    const int len = std::abs(t.index - *t.head);
    link_sum += len;
    st.max_link = std::max(st.max_link, len);
    ++links;
  }
  st.avg_link = links == 0 ? 0.0 : static_cast<double>(link_sum) / links;

  for (const auto& t : s.tokens) {
    const auto i = static_cast<std::size_t>(t.index);
    if (t.upos == Upos::VERB) {
      if (n_dependents[i] > 0) ++st.verbal_heads;
    } else if (*t.head == 0 && has_cop_dependent[i]) {
      ++st.verbal_heads;
    }
  }
  return st;
}

}  // namespace

std::string_view to_string(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::LENGTH: return "LENGTH";
    case FeatureGroup::FREQUENCY: return "FREQUENCY";
    case FeatureGroup::STRUCTURAL: return "STRUCTURAL";
    case FeatureGroup::ALL: return "ALL";
  }
  return "ALL";
}

FeatureGroup parse_feature_group(std::string_view name) {
  const std::string upper = [&] {
    std::string u(name);
    for (auto& c : u) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return u;
  }();
  for (auto g : {FeatureGroup::LENGTH, FeatureGroup::FREQUENCY, FeatureGroup::STRUCTURAL, FeatureGroup::ALL}) {
    if (to_string(g) == upper) return g;
  }
  throw Error(ErrorKind::Argument, "unknown feature group '" + std::string(name) + "'");
}

std::vector<std::size_t> feature_indices(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::LENGTH: return {0, 1};
    case FeatureGroup::FREQUENCY: return {2, 3};
    case FeatureGroup::STRUCTURAL: return {4, 5, 6, 7, 8};
    case FeatureGroup::ALL: return {0, 1, 2, 3, 4, 5, 6, 7, 8};
  }
  return {};
}

std::array<double, kNumFeatures> ComplexityProfile::values() const {
  return {static_cast<double>(sentence_length), avg_word_length,
          avg_word_frequency,                   static_cast<double>(n_low_frequency_words),
          lexical_density,                      static_cast<double>(parse_tree_depth),
          avg_dep_link_length,                  static_cast<double>(max_dep_link_length),
          static_cast<double>(n_verbal_heads)};
}

ComplexityProfile ComplexityProfile::from_values(const std::array<double, kNumFeatures>& v) {
  auto as_int = [](double x) { return static_cast<int>(std::lround(x)); };
  ComplexityProfile p;
  p.sentence_length = as_int(v[0]);
  p.avg_word_length = v[1];
  p.avg_word_frequency = v[2];
  p.n_low_frequency_words = as_int(v[3]);
  p.lexical_density = v[4];
  p.parse_tree_depth = as_int(v[5]);
  p.avg_dep_link_length = v[6];
  p.max_dep_link_length = as_int(v[7]);
  p.n_verbal_heads = as_int(v[8]);
  return p;
}

ComplexityProfile profile(const Sentence& s, const FrequencyLexicon& lex, const ComplexityConfig& cfg) {
  require_tree(s);
  const auto surface = surface_stats(s, lex, cfg);
  const auto syntax = syntax_stats(s);
  ComplexityProfile p;
  p.sentence_length = surface.words;
  p.avg_word_length = surface.avg_word_length;
  p.avg_word_frequency = surface.avg_word_frequency;
  p.n_low_frequency_words = surface.n_low_frequency;
  p.lexical_density = surface.lexical_density;
  p.parse_tree_depth = syntax.depth;
  p.avg_dep_link_length = syntax.avg_link;
  p.max_dep_link_length = syntax.max_link;
  p.n_verbal_heads = syntax.verbal_heads;
  return p;
}

std::vector<double> subset(const ComplexityProfile& p, FeatureGroup g) {
  const auto all = p.values();
  std::vector<double> out;
  for (auto i : feature_indices(g)) out.push_back(all[i]);
  return out;
}

std::vector<double> feature_vector(const Sentence& s, const FrequencyLexicon& lex,
                                   const ComplexityConfig& cfg, FeatureGroup g) {
  if (g == FeatureGroup::STRUCTURAL || g == FeatureGroup::ALL) return subset(profile(s, lex, cfg), g);
  const auto st = surface_stats(s, lex, cfg);
  if (g == FeatureGroup::LENGTH) return {static_cast<double>(st.words), st.avg_word_length};
  return {st.avg_word_frequency, static_cast<double>(st.n_low_frequency)};
}

std::vector<ProfileRow> profile_document(const Document& doc, const FrequencyLexicon& lex,
                                         const ComplexityConfig& cfg) {
  std::vector<ProfileRow> rows;
  rows.reserve(doc.sentences.size());
  for (const auto& s : doc.sentences) rows.push_back({s.id, s.lang, profile(s, lex, cfg)});
  return rows;
}

void write_profiles_csv(const std::vector<ProfileRow>& rows, std::ostream& out) {
  out << "sentence_id,lang";
  for (auto name : kFeatureNames) out << ',' << name;
  out << '\n';
  for (const auto& r : rows) {
    out << r.sentence_id << ',' << r.lang;
    for (double v : r.profile.values()) out << ',' << text::format_double(v);
    out << '\n';
  }
}

std::vector<ProfileRow> read_profiles_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Schema, "profile CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = text::split(line, ',');
  std::vector<std::string_view> expected = {"sentence_id", "lang"};
  expected.insert(expected.end(), kFeatureNames.begin(), kFeatureNames.end());
  if (header != expected) throw Error(ErrorKind::Schema, "profile CSV header does not match the feature schema");

  std::vector<ProfileRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto cols = text::split(line, ',');
    if (cols.size() != expected.size()) throw ParseError(line_no, "wrong number of profile columns");
    std::array<double, kNumFeatures> v{};
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
      if (!text::parse_double(cols[i + 2], v[i]))
        throw ParseError(line_no, "non-numeric value for " + std::string(kFeatureNames[i]));
    }
    rows.push_back({std::string(cols[0]), std::string(cols[1]), ComplexityProfile::from_values(v)});
  }
  return rows;
}

std::vector<ProfileRow> read_profiles_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open profile CSV '" + path + "'");
  return read_profiles_csv(in);
}

}  // namespace readcx
