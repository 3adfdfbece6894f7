#include "doctest.h"

#include <set>

#include "proofminer/trace.hpp"
#include "synthetic.hpp"

using namespace proofminer;

namespace {

Corpus lemma_ex() {
  Corpus c;
  c.source = "ex.v";
  c.traces.push_back(Trace{"ex",
                           {encode_step("intros", {}, false), encode_step("induction", {"n"}, false),
                            encode_step("tauto", {}, false), encode_step("simpl", {"in H"}, false),
                            encode_step("right", {}, false), encode_step("assert", {"m <= O"}, true),
                            encode_step("try", {"omega"}, false), encode_step("rewrite", {"<- H"}, false),
                            encode_step("auto", {"with arith"}, false)},
                           Polarity::positive});
  return c;
}

} // namespace

TEST_CASE("labels reject whitespace, dots and semicolons") {
  CHECK(Label::is_valid("induction"));
  CHECK(Label::is_valid("intros_0"));
  CHECK_FALSE(Label::is_valid(""));
  CHECK_FALSE(Label::is_valid("auto with"));
  CHECK_FALSE(Label::is_valid("a.b"));
  CHECK_FALSE(Label::is_valid("a;"));
  CHECK_THROWS_AS(Label("x y"), TraceError);
}

TEST_CASE("zero-parameter labels") {
  CHECK(Label("tauto_0").is_zero_param());
  CHECK(Label("tauto_0").method() == "tauto");
  CHECK_FALSE(Label("induction").is_zero_param());
  CHECK_FALSE(Label("_0").is_zero_param());
}

TEST_CASE("encode_step") {
  SUBCASE("with a parameter") {
    const auto e = encode_step("induction", {"n"}, false);
    CHECK(e.label.str() == "induction");
    CHECK(e.values.params == std::vector<std::string>{"n"});
    CHECK_FALSE(e.values.combined);
  }
  SUBCASE("without parameters") {
    const auto e = encode_step("tauto", {}, false);
    CHECK(e.label.str() == "tauto_0");
    CHECK(e.values.params.empty());
  }
  SUBCASE("combined") {
    const auto e = encode_step("assert", {"m <= O"}, true);
    CHECK(e.label.str() == "assert");
    CHECK(e.values.params == std::vector<std::string>{"m <= O"});
    CHECK(e.values.combined);
  }
  SUBCASE("whitespace is normalized") {
    CHECK(encode_step("simpl", {"  in   H "}, false).values.params[0] == "in H");
  }
  SUBCASE("bad input") {
    CHECK_THROWS_AS(encode_step("auto with", {}, false), TraceError);
    CHECK_THROWS_AS(encode_step("a.b", {}, false), TraceError);
    CHECK_THROWS_AS(encode_step("a;b", {}, false), TraceError);
    CHECK_THROWS_AS(encode_step("", {}, false), TraceError);
    CHECK_THROWS_AS(encode_step("foo_0", {"x"}, false), TraceError);
    CHECK_THROWS_AS(encode_step("foo", {"  "}, false), TraceError);
  }
}

TEST_CASE("encode_step keeps labels apart") {
  const std::vector<std::string> methods{"a", "b", "ab", "a_", "a_1", "intros", "intro"};
  std::set<std::string> seen;
  for (const auto& m : methods) {
    for (bool with_params : {false, true}) {
      const auto e = encode_step(m, with_params ? std::vector<std::string>{"x"} : std::vector<std::string>{},
                                 false);
      CHECK(seen.insert(e.label.str()).second);
      CHECK(e.label.is_zero_param() == !with_params);
      CHECK(e.label.method() == m);
    }
  }
}

TEST_CASE("empty corpus serializes to the minimal document") {
  Corpus empty;
  CHECK(corpus_to_json(empty) == R"({"version":1,"traces":[]})");
  CHECK(corpus_from_json(R"({"version":1,"traces":[]})") == empty);
}

TEST_CASE("worked lemma round-trips") {
  const auto c = lemma_ex();
  CHECK(corpus_from_json(corpus_to_json(c)) == c);
}

TEST_CASE("random corpora round-trip bit-exactly") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto c = testing::random_corpus(70, 12, seed, 12);
    if (seed % 3 == 0)
      c.traces[0].polarity = Polarity::negative;
    c.lines = seed * 10;
    const auto bytes = corpus_to_json(c);
    const auto back = corpus_from_json(bytes);
    CHECK(back == c);
    CHECK(corpus_to_json(back) == bytes);
  }
}

TEST_CASE("duplicate trace names are disambiguated on load") {
  const auto c = corpus_from_json(
      R"({"version":1,"traces":[{"name":"a","polarity":"positive","events":[]},)"
      R"({"name":"a","polarity":"positive","events":[]},{"name":"a","polarity":"positive","events":[]}]})");
  REQUIRE(c.traces.size() == 3);
  CHECK(c.traces[0].name == "a");
  CHECK(c.traces[1].name == "a_2");
  CHECK(c.traces[2].name == "a_3");
}

TEST_CASE("malformed trace documents") {
  auto error_of = [](const std::string& doc) -> CorpusFormatError {
    try {
      corpus_from_json(doc);
    } catch (const CorpusFormatError& e) {
      return e;
    }
    FAIL("no error for " << doc);
    return CorpusFormatError("");
  };

  CHECK_THROWS_AS(corpus_from_json("{"), CorpusFormatError);
  CHECK_THROWS_AS(corpus_from_json(R"({"version":2,"traces":[]})"), CorpusFormatError);
  CHECK_THROWS_AS(corpus_from_json(R"({"version":1})"), CorpusFormatError);
  CHECK_THROWS_AS(corpus_from_json(R"({"version":1,"traces":[],"extra":1})"), CorpusFormatError);

  const auto e = error_of(
      R"({"version":1,"traces":[{"name":"t","polarity":"positive","events":[)"
      R"({"label":"a","params":["x"],"combined":false},{"label":"b","params":[""],"combined":false}]}]})");
  CHECK(e.trace_name() == "t");
  CHECK(e.trace_index() == 0);
  CHECK(e.event_index() == 1);

  // Label suffix and parameter count must agree.
  CHECK_THROWS_AS(
      corpus_from_json(R"({"version":1,"traces":[{"name":"t","polarity":"positive","events":[)"
                       R"({"label":"a_0","params":["x"],"combined":false}]}]})"),
      CorpusFormatError);
  CHECK_THROWS_AS(
      corpus_from_json(R"({"version":1,"traces":[{"name":"t","polarity":"positive","events":[)"
                       R"({"label":"a","params":[],"combined":false}]}]})"),
      CorpusFormatError);
}

TEST_CASE("event_count") {
  CHECK(lemma_ex().event_count() == 9);
}
