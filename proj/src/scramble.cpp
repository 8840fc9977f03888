#include "readcx/scramble.hpp"

#include <random>

#include "readcx/error.hpp"
#include "readcx/random.hpp"
#include "readcx/text.hpp"

namespace readcx {

Sentence scramble_sentence(const Sentence& s, std::uint64_t seed, const ScrambleOptions& opts) {
  if (s.tokens.empty()) throw Error(ErrorKind::Argument, "cannot scramble empty sentence '" + s.id + "'");
  std::vector<Token> tokens = s.tokens;
  std::optional<Token> pinned;
  if (opts.pin_final_punct && tokens.size() > 1 && tokens.back().upos == Upos::PUNCT) {
    pinned = tokens.back();
    tokens.pop_back();
  }
  std::mt19937_64 rng(seed);
  shuffle(tokens, rng);
  if (pinned) tokens.push_back(*pinned);

  Sentence out;
  out.id = s.id + kScrambledSuffix;
  out.lang = s.lang;
  out.text_id = s.text_id;
  out.tokens = std::move(tokens);
  for (std::size_t i = 0; i < out.tokens.size(); ++i) {
    auto& t = out.tokens[i];
    t.index = static_cast<int>(i) + 1;
    t.head.reset();
    t.deprel.clear();
  }
  return out;
}

Document scramble_corpus(const Document& doc, std::uint64_t seed, const ScrambleOptions& opts) {
  Document out;
  out.lang = doc.lang;
  out.source = doc.source;
  out.sentences.reserve(doc.sentences.size());
  for (const auto& s : doc.sentences) out.sentences.push_back(scramble_sentence(s, seed ^ text::fnv1a(s.id), opts));
  return out;
}

}  // namespace readcx
