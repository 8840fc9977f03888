#include "doctest.h"

#include <sstream>

#include "readcx/corpus.hpp"
#include "readcx/error.hpp"
#include "support.hpp"

using namespace readcx;

namespace {

Document parse(const std::string& text, const std::string& source = {}) {
  std::istringstream in(text);
  return parse_conllu(in, "en", source);
}

std::string row(int id, const std::string& form, const std::string& upos, int head, const std::string& rel) {
  return std::to_string(id) + "\t" + form + "\t" + form + "\t" + upos + "\t_\t_\t" + std::to_string(head) + "\t" + rel +
         "\t_\t_\n";
}

template <typename Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("minimal two-token tree") {
    const auto doc = parse(row(1, "the", "DET", 2, "det") + row(2, "dog", "NOUN", 0, "root") + "\n");
    REQUIRE(doc.sentences.size() == 1);
    const auto& s = doc.sentences[0];
    CHECK(s.tokens.size() == 2);
    CHECK(s.root() == 2);
    CHECK(s.id == "s1");
    CHECK(s.tokens[0].upos == Upos::DET);
    CHECK(s.tokens[1].char_length == 3);
  }

  TEST_CASE("multiword range lines are skipped") {
    const auto doc = parse("# sent_id = mw\n" + row(1, "I", "PRON", 2, "nsubj") + row(2, "do", "AUX", 0, "root") +
                           "3-4\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n" + row(3, "do", "AUX", 2, "aux") +
                           row(4, "n't", "PART", 2, "advmod") + "\n");
    REQUIRE(doc.sentences.size() == 1);
    const auto& s = doc.sentences[0];
    CHECK(s.id == "mw");
    REQUIRE(s.tokens.size() == 4);
    CHECK(s.tokens[2].index == 3);
    CHECK(s.tokens[2].surface == "do");
    CHECK(s.tokens[3].surface == "n't");
  }

  TEST_CASE("empty nodes are skipped") {
    const auto doc = parse(row(1, "a", "DET", 2, "det") + row(2, "b", "NOUN", 0, "root") +
                           "2.1\tx\tx\tVERB\t_\t_\t_\t_\t2:conj\t_\n\n");
    CHECK(doc.sentences.at(0).tokens.size() == 2);
  }

  TEST_CASE("cycle raises a structure error with the sentence id") {
    try {
      parse("# sent_id = loop\n" + row(1, "a", "NOUN", 2, "dep") + row(2, "b", "NOUN", 1, "dep") + "\n");
      FAIL("expected structure error");
    } catch (const StructureError& e) {
      CHECK(e.sentence_id() == "loop");
      CHECK(e.kind() == ErrorKind::Structure);
    }
  }

  TEST_CASE("cycle detached from a valid root") {
    CHECK_THROWS_AS(parse(row(1, "r", "VERB", 0, "root") + row(2, "a", "NOUN", 3, "dep") + row(3, "b", "NOUN", 2, "dep") + "\n"),
                    StructureError);
  }

  TEST_CASE("two roots and self heads are rejected") {
    CHECK_THROWS_AS(parse(row(1, "a", "NOUN", 0, "root") + row(2, "b", "NOUN", 0, "root") + "\n"), StructureError);
    CHECK_THROWS_AS(parse(row(1, "a", "NOUN", 0, "root") + row(2, "b", "NOUN", 2, "dep") + "\n"), StructureError);
    CHECK_THROWS_AS(parse(row(1, "a", "NOUN", 0, "root") + row(2, "b", "NOUN", 7, "dep") + "\n"), StructureError);
    CHECK_THROWS_AS(parse(row(1, "a", "NOUN", 0, "root") + row(3, "b", "NOUN", 1, "dep") + "\n"), StructureError);
  }

  TEST_CASE("wrong column count reports the line") {
    try {
      parse("# sent_id = x\n" + row(1, "a", "NOUN", 0, "root") + "2\tb\tb\tNOUN\t_\t1\tdep\n\n");
      FAIL("expected parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }

  TEST_CASE("unknown tag and bad head are parse errors") {
    CHECK_THROWS_AS(parse(row(1, "a", "NOPE", 0, "root") + "\n"), ParseError);
    CHECK_THROWS_AS(parse("1\ta\ta\tNOUN\t_\t_\tx\troot\t_\t_\n\n"), ParseError);
  }

  TEST_CASE("generated ids use the source name and ordinal") {
    const auto text = row(1, "a", "NOUN", 0, "root") + "\n" + row(1, "b", "NOUN", 0, "root") + "\n";
    const auto doc = parse(text, "pud");
    REQUIRE(doc.sentences.size() == 2);
    CHECK(doc.sentences[0].id == "pud-s1");
    CHECK(doc.sentences[1].id == "pud-s2");
    CHECK(parse(text).sentences[1].id == "s2");
  }

  TEST_CASE("duplicate sentence ids are rejected") {
    const auto block = "# sent_id = same\n" + row(1, "a", "NOUN", 0, "root") + "\n";
    CHECK(kind_of([&] { parse(block + block); }) == ErrorKind::Duplication);
  }

  TEST_CASE("text ids group sentences") {
    const auto doc = parse("# newdoc id = d1\n# sent_id = a\n" + row(1, "x", "NOUN", 0, "root") + "\n# sent_id = b\n" +
                           row(1, "y", "NOUN", 0, "root") + "\n# text_id = d2\n# sent_id = c\n" +
                           row(1, "z", "NOUN", 0, "root"));
    REQUIRE(doc.sentences.size() == 3);
    CHECK(doc.sentences[0].text_id == "d1");
    CHECK(doc.sentences[1].text_id == "d1");
    CHECK(doc.sentences[2].text_id == "d2");
  }

  TEST_CASE("char_length counts Unicode scalar values") {
    const auto t = make_token(1, "inanışlarında", "x", Upos::NOUN, 0, "root");
    CHECK(t.char_length == 13);
    CHECK(make_token(1, "Ω", "x", Upos::SYM, 0, "root").char_length == 1);
  }

  TEST_CASE("write then parse is idempotent") {
    std::mt19937_64 rng(11);
    Document doc;
    doc.lang = "xx";
    for (int i = 0; i < 40; ++i) {
      auto s = testing::random_tree(rng, 1 + static_cast<int>(readcx::uniform_below(rng, 15)), "t" + std::to_string(i));
      s.lang = "en";
      doc.sentences.push_back(std::move(s));
    }
    std::ostringstream once;
    write_conllu(doc, once);
    std::istringstream in(once.str());
    const auto back = parse_conllu(in, "en");
    std::ostringstream twice;
    write_conllu(back, twice);
    CHECK(once.str() == twice.str());
    REQUIRE(back.sentences.size() == doc.sentences.size());
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) {
      CHECK(back.sentences[i].id == doc.sentences[i].id);
      for (std::size_t j = 0; j < doc.sentences[i].tokens.size(); ++j) {
        CHECK(back.sentences[i].tokens[j].head == doc.sentences[i].tokens[j].head);
        CHECK(back.sentences[i].tokens[j].upos == doc.sentences[i].tokens[j].upos);
      }
    }
  }

  TEST_CASE("random valid trees always satisfy the tree invariant after parsing") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 500; ++trial) {
      Document doc;
      doc.sentences.push_back(testing::random_tree(rng, 1 + static_cast<int>(readcx::uniform_below(rng, 30)), "p"));
      std::ostringstream out;
      write_conllu(doc, out);
      std::istringstream in(out.str());
      const auto back = parse_conllu(in, "xx");
      REQUIRE(back.sentences.size() == 1);
      const auto& s = back.sentences[0];
      CHECK_NOTHROW(validate_tree(s));
      int roots = 0;
      for (const auto& t : s.tokens) roots += *t.head == 0;
      CHECK(roots == 1);
    }
  }

  TEST_CASE("filter_min_length keeps sentences with enough words") {
    auto make = [](const std::string& id, int words) {
      std::vector<testing::Row> rows;
      for (int i = 1; i <= words; ++i) rows.push_back({"w", Upos::NOUN, i == 1 ? 0 : 1, i == 1 ? "root" : "dep"});
      rows.push_back({".", Upos::PUNCT, 1, "punct"});
      return testing::sentence(id, rows);
    };
    Document doc;
    doc.sentences = {make("a", 3), make("b", 5), make("c", 12)};
    const auto kept = filter_min_length(doc, 5);
    REQUIRE(kept.sentences.size() == 2);
    CHECK(word_count(kept.sentences[0]) == 5);
    CHECK(word_count(kept.sentences[1]) == 12);
    CHECK(filter_min_length(doc, 0).sentences.size() == 3);
    CHECK(filter_min_length(Document{}, 5).sentences.empty());

    std::size_t previous = doc.sentences.size();
    for (std::size_t m = 0; m < 15; ++m) {
      const auto n = filter_min_length(doc, m).sentences.size();
      CHECK(n <= previous);
      previous = n;
    }
  }

  TEST_CASE("plain text ingestion builds flat trees") {
    std::istringstream in("The dog barked\nid7\tHello   there\n\n");
    const auto doc = parse_plain_text(in, "en", "geco");
    REQUIRE(doc.sentences.size() == 2);
    const auto& a = doc.sentences[0];
    CHECK(a.id == "geco-s1");
    REQUIRE(a.tokens.size() == 3);
    CHECK(a.tokens[0].head == 0);
    CHECK(a.tokens[1].head == 1);
    CHECK(a.tokens[2].head == 1);
    CHECK(a.tokens[2].upos == Upos::X);
    CHECK(doc.sentences[1].id == "id7");
    CHECK(doc.sentences[1].text() == "Hello there");

    std::ostringstream out;
    write_plain_text(doc, out);
    CHECK(out.str() == "geco-s1\tThe dog barked\nid7\tHello there\n");
  }

  TEST_CASE("load_corpus picks the reader from the extension") {
    const auto doc = load_corpus(testing::data_path("reference/en.conllu"), "en");
    REQUIRE(doc.sentences.size() == 1);
    CHECK(doc.sentences[0].id == "en-janus");
    CHECK(doc.sentences[0].tokens.size() == 16);
    CHECK_THROWS_AS(load_corpus("/nonexistent/file.conllu", "en"), Error);
  }
}
