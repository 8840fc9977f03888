#include "readcx/corpus.hpp"

#include <array>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "readcx/error.hpp"
#include "readcx/text.hpp"

namespace readcx {

namespace {

constexpr std::array<std::string_view, 17> kUposNames = {
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
};

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::string ordinal_id(const std::string& source, std::size_t ordinal) {
  std::string id = "s" + std::to_string(ordinal);
  return source.empty() ? id : source + "-" + id;
}

void check_unique_ids(const Document& doc) {
  std::unordered_set<std::string> seen;
  for (const auto& s : doc.sentences) {
    if (!seen.insert(s.id).second)
      throw Error(ErrorKind::Duplication, "sentence id '" + s.id + "' occurs twice");
  }
}

}  // namespace

std::string_view to_string(Upos tag) { return kUposNames[static_cast<std::size_t>(tag)]; }

std::optional<Upos> parse_upos(std::string_view tag) {
  for (std::size_t i = 0; i < kUposNames.size(); ++i) {
    if (kUposNames[i] == tag) return static_cast<Upos>(i);
  }
  return std::nullopt;
}

bool Sentence::has_tree() const {
  for (const auto& t : tokens) {
    if (!t.head) return false;
  }
  return !tokens.empty();
}

int Sentence::root() const {
  for (const auto& t : tokens) {
    if (t.head && *t.head == 0) return t.index;
  }
  throw StructureError(id, "no root token");
}

std::string Sentence::text() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.surface;
  }
  return out;
}

Token make_token(int index, std::string surface, std::string lemma, Upos upos,
                 std::optional<int> head, std::string deprel) {
  Token t;
  t.index = index;
  t.char_length = static_cast<int>(text::utf8_length(surface));
  t.surface = std::move(surface);
  t.lemma = std::move(lemma);
  t.upos = upos;
  t.head = head;
  t.deprel = std::move(deprel);
  return t;
}

void validate_tree(const Sentence& s) {
  const int n = static_cast<int>(s.tokens.size());
  if (n == 0) throw StructureError(s.id, "sentence has no tokens");
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const auto& t = s.tokens[static_cast<std::size_t>(i)];
    if (t.index != i + 1)
      throw StructureError(s.id, "token indices are not the contiguous sequence 1..n");
    if (t.char_length < 1) throw StructureError(s.id, "token " + std::to_string(t.index) + " is empty");
    if (!t.head) throw StructureError(s.id, "token " + std::to_string(t.index) + " has no head");
    const int h = *t.head;
    if (h < 0 || h > n)
      throw StructureError(s.id, "token " + std::to_string(t.index) + " has head out of range");
    if (h == t.index) throw StructureError(s.id, "token " + std::to_string(t.index) + " heads itself");
    if (h == 0) ++roots;
  }
  if (roots != 1)
    throw StructureError(s.id, "expected exactly one root, found " + std::to_string(roots));

  // Every token must reach the root by following heads. Revisiting a token
  // on the current walk means a cycle.
  std::vector<int> state(static_cast<std::size_t>(n) + 1, 0);  // 0 unknown, 1 visiting, 2 reaches root
  for (int start = 1; start <= n; ++start) {
    std::vector<int> path;
    int cur = start;
    while (cur != 0 && state[static_cast<std::size_t>(cur)] != 2) {
      if (state[static_cast<std::size_t>(cur)] == 1)
        throw StructureError(s.id, "head pointers form a cycle through token " + std::to_string(cur));
      state[static_cast<std::size_t>(cur)] = 1;
      path.push_back(cur);
      cur = *s.tokens[static_cast<std::size_t>(cur - 1)].head;
    }
    for (int v : path) state[static_cast<std::size_t>(v)] = 2;
  }
}

Document parse_conllu(std::istream& in, std::string lang, std::string source) {
  Document doc;
  doc.lang = lang;
  doc.source = source;

  Sentence cur;
  std::string current_text_id;
  bool in_block = false;
  std::size_t ordinal = 0;
  std::size_t line_no = 0;

  auto flush = [&] {
    if (!in_block) return;
    in_block = false;
    if (cur.tokens.empty()) {
      cur = Sentence{};  // comment-only block
      return;
    }
    ++ordinal;
    if (cur.id.empty()) cur.id = ordinal_id(source, ordinal);
    cur.lang = lang;
    cur.text_id = current_text_id;
    validate_tree(cur);
    doc.sentences.push_back(std::move(cur));
    cur = Sentence{};
  };

  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = strip_cr(std::move(raw));
    if (text::trim(line).empty()) {
      flush();
      continue;
    }
    if (line.front() == '#') {
      in_block = true;
      const std::string_view body = text::trim(std::string_view(line).substr(1));
      auto value_of = [&](std::string_view key) -> std::optional<std::string> {
        if (body.substr(0, key.size()) != key) return std::nullopt;
        auto rest = text::trim(body.substr(key.size()));
        if (rest.empty() || rest.front() != '=') return std::nullopt;
        return std::string(text::trim(rest.substr(1)));
      };
      if (auto v = value_of("sent_id")) {
        cur.id = *v;
      } else if (auto t = value_of("text_id")) {
        current_text_id = *t;
      } else if (body.substr(0, 10) == "newdoc id ") {
        if (auto d = value_of("newdoc id")) current_text_id = *d;
      }
      continue;
    }
    in_block = true;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 10)
      throw ParseError(line_no, "expected 10 tab-separated columns, found " + std::to_string(cols.size()));
    const std::string_view id_field = cols[0];
    if (id_field.find('-') != std::string_view::npos || id_field.find('.') != std::string_view::npos)
      continue;  // multiword range or empty node
    long long index = 0;
    if (!text::parse_int(id_field, index) || index < 1)
      throw ParseError(line_no, "invalid token id '" + std::string(id_field) + "'");
    if (cols[1].empty()) throw ParseError(line_no, "empty word form");
    const auto upos = parse_upos(cols[3]);
    if (!upos) throw ParseError(line_no, "unknown UPOS tag '" + std::string(cols[3]) + "'");
    long long head = 0;
    if (!text::parse_int(cols[6], head) || head < 0)
      throw ParseError(line_no, "invalid head '" + std::string(cols[6]) + "'");
    cur.tokens.push_back(make_token(static_cast<int>(index), std::string(cols[1]), std::string(cols[2]),
                                    *upos, static_cast<int>(head), std::string(cols[7])));
  }
  flush();
  check_unique_ids(doc);
  return doc;
}

Document parse_plain_text(std::istream& in, std::string lang, std::string source) {
  Document doc;
  doc.lang = lang;
  doc.source = source;
  std::string raw;
  std::size_t ordinal = 0;
  while (std::getline(in, raw)) {
    const std::string line = strip_cr(std::move(raw));
    std::string_view body = line;
    std::string id;
    if (const auto tab = body.find('\t'); tab != std::string_view::npos) {
      id = std::string(text::trim(body.substr(0, tab)));
      body = body.substr(tab + 1);
    }
    const auto words = text::split_whitespace(body);
    if (words.empty()) continue;
    ++ordinal;
    Sentence s;
    s.id = id.empty() ? ordinal_id(source, ordinal) : id;
    s.lang = lang;
    for (std::size_t i = 0; i < words.size(); ++i) {
      const int index = static_cast<int>(i) + 1;
      s.tokens.push_back(make_token(index, words[i], words[i], Upos::X, index == 1 ? 0 : 1,
                                    index == 1 ? "root" : "dep"));
    }
    doc.sentences.push_back(std::move(s));
  }
  check_unique_ids(doc);
  return doc;
}

void write_conllu(const Document& doc, std::ostream& out) {
  std::string last_text_id;
  for (const auto& s : doc.sentences) {
    if (!s.text_id.empty() && s.text_id != last_text_id) {
      out << "# text_id = " << s.text_id << '\n';
      last_text_id = s.text_id;
    }
    out << "# sent_id = " << s.id << '\n';
    for (const auto& t : s.tokens) {
      out << t.index << '\t' << t.surface << '\t' << (t.lemma.empty() ? "_" : t.lemma) << '\t'
          << to_string(t.upos) << "\t_\t_\t" << (t.head ? std::to_string(*t.head) : "_") << '\t'
          << (t.deprel.empty() ? "_" : t.deprel) << "\t_\t_\n";
    }
    out << '\n';
  }
}

void write_plain_text(const Document& doc, std::ostream& out) {
  for (const auto& s : doc.sentences) out << s.id << '\t' << s.text() << '\n';
}

std::size_t word_count(const Sentence& s) {
  std::size_t n = 0;
  for (const auto& t : s.tokens) {
    if (t.upos != Upos::PUNCT) ++n;
  }
  return n;
}

Document filter_min_length(const Document& doc, std::size_t min_tokens) {
  Document out;
  out.lang = doc.lang;
  out.source = doc.source;
  for (const auto& s : doc.sentences) {
    if (word_count(s) >= min_tokens) out.sentences.push_back(s);
  }
  return out;
}

Document load_corpus(const std::string& path, std::string lang) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open corpus '" + path + "'");
  auto ends_with = [&](std::string_view suffix) {
    return path.size() >= suffix.size() && path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (ends_with(".conllu") || ends_with(".conll")) return parse_conllu(in, std::move(lang), std::filesystem::path(path).stem().string());
  return parse_plain_text(in, std::move(lang), {});
}

}  // namespace readcx
