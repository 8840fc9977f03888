#include "readcx/lexicon.hpp"

#include <fstream>
#include <istream>

#include "readcx/error.hpp"
#include "readcx/text.hpp"

namespace readcx {

namespace {

bool in_zipf_range(double v) {
  return v >= FrequencyLexicon::kMinZipf && v <= FrequencyLexicon::kMaxZipf;
}

}  // namespace

FrequencyLexicon::FrequencyLexicon(std::string lang, double floor)
    : lang_(std::move(lang)), floor_(floor) {
  if (!in_zipf_range(floor))
    throw Error(ErrorKind::Range, "lexicon floor " + text::format_double(floor) + " outside [0, 9]");
}

void FrequencyLexicon::set(std::string_view word, double zipf) {
  if (!in_zipf_range(zipf))
    throw Error(ErrorKind::Range, "zipf value " + text::format_double(zipf) + " for '" +
                                      std::string(word) + "' outside [0, 9]");
  entries_[text::lowercase(word)] = zipf;
}

double FrequencyLexicon::zipf(std::string_view word) const {
  const auto it = entries_.find(text::lowercase(word));
  return it == entries_.end() ? floor_ : it->second;
}

bool FrequencyLexicon::contains(std::string_view word) const {
  return entries_.count(text::lowercase(word)) > 0;
}

FrequencyLexicon load_lexicon(std::istream& in, std::string lang, double floor) {
  FrequencyLexicon lex(std::move(lang), floor);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(line_no, "expected word<TAB>zipf");
    const std::string_view word = std::string_view(line).substr(0, tab);
    if (word.empty()) throw ParseError(line_no, "empty word");
    double value = 0.0;
    if (!text::parse_double(std::string_view(line).substr(tab + 1), value))
      throw ParseError(line_no, "non-numeric zipf value '" + line.substr(tab + 1) + "'");
    try {
      lex.set(word, value);
    } catch (const Error& e) {
      throw Error(ErrorKind::Range, "line " + std::to_string(line_no) + ": zipf value " +
                                        text::format_double(value) + " outside [0, 9]");
    }
  }
  return lex;
}

FrequencyLexicon load_lexicon_file(const std::string& path, std::string lang, double floor) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open lexicon '" + path + "'");
  return load_lexicon(in, std::move(lang), floor);
}

}  // namespace readcx
