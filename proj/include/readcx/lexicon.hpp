#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>

namespace readcx {

/// Zipf-scale word frequencies (log10 of occurrences per billion words) keyed
/// by lower-cased word form. Immutable after loading.
class FrequencyLexicon {
 public:
  static constexpr double kMinZipf = 0.0;
  static constexpr double kMaxZipf = 9.0;

  explicit FrequencyLexicon(std::string lang = {}, double floor = 0.0);

  /// Inserts or overwrites; the word is lower-cased. Throws a Range error for
  /// values outside [0, 9].
  void set(std::string_view word, double zipf);

  /// Frequency of the lower-cased word, or the floor when absent.
  double zipf(std::string_view word) const;
  bool contains(std::string_view word) const;

  const std::string& lang() const noexcept { return lang_; }
  double floor() const noexcept { return floor_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::string lang_;
  double floor_;
  std::unordered_map<std::string, double> entries_;
};

/// Reads "word<TAB>zipf" lines. Blank lines are ignored; later duplicates win.
FrequencyLexicon load_lexicon(std::istream& in, std::string lang, double floor = 0.0);
FrequencyLexicon load_lexicon_file(const std::string& path, std::string lang, double floor = 0.0);

}  // namespace readcx
