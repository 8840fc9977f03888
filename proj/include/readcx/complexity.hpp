#pragma once

#include <array>
#include <iosfwd>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "readcx/corpus.hpp"
#include "readcx/lexicon.hpp"

namespace readcx {

inline constexpr std::size_t kNumFeatures = 9;

/// Feature names in their canonical order: two length features, two
/// frequency features, lexical density, then four syntactic features.
inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "sentence_length",      "avg_word_length",     "avg_word_frequency",
    "n_low_frequency_words", "lexical_density",     "parse_tree_depth",
    "avg_dep_link_length",  "max_dep_link_length", "n_verbal_heads",
};

enum class FeatureGroup { LENGTH, FREQUENCY, STRUCTURAL, ALL };

std::string_view to_string(FeatureGroup g);
FeatureGroup parse_feature_group(std::string_view name);
/// Positions (into kFeatureNames) of the features a group selects.
std::vector<std::size_t> feature_indices(FeatureGroup g);

struct ComplexityConfig {
  double low_frequency_threshold = 4.0;  // Zipf; strictly below counts as low frequency
  std::set<Upos> content_upos = {Upos::NOUN, Upos::PROPN, Upos::VERB, Upos::ADJ, Upos::ADV};
  // When set, characters of punctuation tokens enter the avg_word_length
  // numerator; the denominator is always the non-punctuation token count.
  bool punct_chars_in_word_length = false;
};

struct ComplexityProfile {
  int sentence_length = 0;
  double avg_word_length = 0.0;
  double avg_word_frequency = 0.0;
  int n_low_frequency_words = 0;
  double lexical_density = 0.0;
  int parse_tree_depth = 0;
  double avg_dep_link_length = 0.0;
  int max_dep_link_length = 0;
  int n_verbal_heads = 0;

  /// All nine values in canonical order.
  std::array<double, kNumFeatures> values() const;
  static ComplexityProfile from_values(const std::array<double, kNumFeatures>& v);
};

/// Computes all nine features. Requires a dependency tree (throws a
/// Structure error on scrambled sentences) and at least one non-punctuation
/// token (DegenerateInput otherwise).
ComplexityProfile profile(const Sentence& s, const FrequencyLexicon& lex,
                          const ComplexityConfig& cfg = {});

/// Selects a group's features from a full profile.
std::vector<double> subset(const ComplexityProfile& p, FeatureGroup g);

/// Computes only the features of `g`. LENGTH and FREQUENCY work without a
/// dependency tree; STRUCTURAL and ALL throw a Structure error on sentences
/// whose dependencies were dropped.
std::vector<double> feature_vector(const Sentence& s, const FrequencyLexicon& lex,
                                   const ComplexityConfig& cfg, FeatureGroup g);

struct ProfileRow {
  std::string sentence_id;
  std::string lang;
  ComplexityProfile profile;
};

std::vector<ProfileRow> profile_document(const Document& doc, const FrequencyLexicon& lex,
                                         const ComplexityConfig& cfg = {});

/// CSV with header "sentence_id,lang,<nine feature names>".
void write_profiles_csv(const std::vector<ProfileRow>& rows, std::ostream& out);
std::vector<ProfileRow> read_profiles_csv(std::istream& in);
std::vector<ProfileRow> read_profiles_csv_file(const std::string& path);

}  // namespace readcx
