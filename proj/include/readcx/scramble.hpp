#pragma once

#include <cstdint>
#include <string>

#include "readcx/corpus.hpp"

namespace readcx {

inline constexpr const char* kScrambledSuffix = "-scrambled";

struct ScrambleOptions {
  bool pin_final_punct = false;  // keep a sentence-final PUNCT token in place
};

/// Seeded uniform shuffle of the tokens. Indices are renumbered 1..n, upos
/// travels with its token, heads and relations are dropped, and the id gets
/// the "-scrambled" suffix.
Sentence scramble_sentence(const Sentence& s, std::uint64_t seed, const ScrambleOptions& opts = {});

/// Scrambles every sentence with seed XOR fnv1a(sentence id).
Document scramble_corpus(const Document& doc, std::uint64_t seed, const ScrambleOptions& opts = {});

}  // namespace readcx
