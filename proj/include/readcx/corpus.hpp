#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace readcx {

/// The 17 Universal Dependencies part-of-speech tags.
enum class Upos {
  ADJ, ADP, ADV, AUX, CCONJ, DET, INTJ, NOUN, NUM, PART, PRON, PROPN, PUNCT, SCONJ, SYM, VERB, X,
};

std::string_view to_string(Upos tag);
std::optional<Upos> parse_upos(std::string_view tag);

struct Token {
  int index = 0;  // 1-based position in the sentence
  std::string surface;
  std::string lemma;
  Upos upos = Upos::X;
  std::optional<int> head;  // 0 = root; absent once word order is scrambled
  std::string deprel;
  int char_length = 0;  // Unicode scalar values in `surface`
};

struct Sentence {
  std::string id;
  std::vector<Token> tokens;
  std::string lang;
  std::string text_id;

  /// True when every token carries a head, i.e. dependency features apply.
  bool has_tree() const;
  /// Index of the root token (head 0). Requires has_tree().
  int root() const;
  /// Tokens joined by single spaces.
  std::string text() const;
};

struct Document {
  std::vector<Sentence> sentences;
  std::string lang;
  std::string source;
};

/// Builds a token, deriving char_length from the surface form.
Token make_token(int index, std::string surface, std::string lemma, Upos upos,
                 std::optional<int> head, std::string deprel);

/// Checks token numbering and the single-rooted-tree property. Throws
/// StructureError naming the sentence.
void validate_tree(const Sentence& s);

/// Reads CoNLL-U. Multiword ranges ("3-4") and empty nodes ("5.1") are
/// skipped. Ids come from "# sent_id =" comments, else "<source>-s<n>" (or
/// "s<n>" when `source` is empty). "# text_id =" / "# newdoc id =" set text_id.
Document parse_conllu(std::istream& in, std::string lang, std::string source = {});

/// One sentence per line, whitespace tokenized, all upos X, flat tree (token 1
/// is the root, the rest attach to it). A line "<id>\t<text>" supplies its own id.
Document parse_plain_text(std::istream& in, std::string lang, std::string source = {});

/// Emits the retained fields as CONLL-U (feats, deps and misc as "_").
void write_conllu(const Document& doc, std::ostream& out);

/// Emits "<id>\t<text>" per sentence.
void write_plain_text(const Document& doc, std::ostream& out);

/// Number of tokens whose upos is not PUNCT.
std::size_t word_count(const Sentence& s);

/// Keeps sentences with at least `min_tokens` non-punctuation tokens.
Document filter_min_length(const Document& doc, std::size_t min_tokens);

/// Loads a corpus file: ".conllu"/".conll" as CoNLL-U, anything else as plain text.
Document load_corpus(const std::string& path, std::string lang);

}  // namespace readcx
