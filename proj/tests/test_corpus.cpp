#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "glosspipe/corpus.hpp"
#include "glosspipe/errors.hpp"
#include "support/tmpdir.hpp"

using namespace glosspipe;

namespace {

const char* kCupt = "# global.columns = ID FORM LEMMA UPOS XPOS FEATS HEAD DEPREL DEPS MISC "
                    "PARSEME:MWE\n"
                    "# source_sent_id = . . s1\n"
                    "# text = He kicked the bucket down the hill\n"
                    "1\tHe\the\tPRON\t_\t_\t2\tnsubj\t_\t_\t*\n"
                    "2\tkicked\tkick\tVERB\t_\t_\t0\troot\t_\t_\t1:VID\n"
                    "3\tthe\tthe\tDET\t_\t_\t4\tdet\t_\t_\t1\n"
                    "4\tbucket\tbucket\tNOUN\t_\t_\t2\tobj\t_\t_\t1\n"
                    "5\tdown\tdown\tADP\t_\t_\t7\tcase\t_\t_\t*\n"
                    "6\tthe\tthe\tDET\t_\t_\t7\tdet\t_\t_\t*\n"
                    "7\thill\thill\tNOUN\t_\t_\t2\tobl\t_\t_\t*\n"
                    "\n"
                    "# source_sent_id = . . s2\n"
                    "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\t*\n"
                    "1\tdo\tdo\tAUX\t_\t_\t3\taux\t_\t_\t*\n"
                    "2\tnot\tnot\tPART\t_\t_\t3\tadvmod\t_\t_\t*\n"
                    "3\tworry\tworry\tVERB\t_\t_\t0\troot\t_\t_\t*\n"
                    "\n";

const char* kDimsum =
    "1\tMy\tmy\tPRON\tO\t0\t\t\tr1\n"
    "2\ttake\ttake\tVERB\tB\t0\t\tv.social\tr1\n"
    "3\tquick\tquick\tADJ\to\t0\t\t\tr1\n"
    "4\tout\tout\tADP\tI\t2\t_\t\tr1\n"
    "5\tfood\tfood\tNOUN\tO\t0\t\tn.food\tr1\n"
    "\n"
    "1\tgood\tgood\tADJ\tO\t0\t\t\tr2\n"
    "2\tbus\tbus\tNOUN\tB\t0\t\t\tr2\n"
    "3\tstop\tstop\tNOUN\tI\t2\t_\tn.location\tr2\n"
    "\n";

}  // namespace

TEST_CASE("parse_cupt groups MWE tags into annotations") {
  test_support::TempDir tmp;
  auto sentences = parse_cupt(tmp.write("a.cupt", kCupt));
  REQUIRE(sentences.size() == 2);

  const Sentence& s1 = sentences[0];
  CHECK(s1.sent_id == "s1");
  REQUIRE(s1.tokens.size() == 7);
  CHECK(s1.tokens[1].lemma == "kick");
  REQUIRE(s1.gold_mwes.size() == 1);
  CHECK(s1.gold_mwes[0].mwe_id == 1);
  CHECK(s1.gold_mwes[0].token_indices == std::vector<int>{1, 2, 3});
  CHECK(s1.gold_mwes[0].category == "VID");
  CHECK(s1.tokens[1].gold_mwe_id == 1);
  CHECK_FALSE(validate_sentence(s1));

  // the multiword-token range is recorded but never indexed
  const Sentence& s2 = sentences[1];
  CHECK(s2.tokens.size() == 3);
  REQUIRE(s2.mwt_ranges.size() == 1);
  CHECK(s2.mwt_ranges[0].form == "don't");
  CHECK(s2.gold_mwes.empty());
}

TEST_CASE("all-star MWE column means no annotations") {
  test_support::TempDir tmp;
  auto path = tmp.write("b.cupt",
                        "# source_sent_id = . . x1\n"
                        "1\tfine\tfine\tADJ\t_\t_\t0\troot\t_\t_\t*\n\n");
  auto sentences = parse_cupt(path);
  REQUIRE(sentences.size() == 1);
  CHECK(sentences[0].gold_mwes.empty());
}

TEST_CASE("continuation tag without an opener raises DanglingMweRef") {
  test_support::TempDir tmp;
  auto path = tmp.write("c.cupt",
                        "1\ta\ta\tDET\t_\t_\t0\t_\t_\t_\t*\n"
                        "2\tb\tb\tNOUN\t_\t_\t0\t_\t_\t_\t2\n\n");
  CHECK_THROWS_AS(parse_cupt(path), DanglingMweRef);
}

TEST_CASE("cupt round-trip preserves tokens and groupings") {
  test_support::TempDir tmp;
  auto sentences = parse_cupt(tmp.write("a.cupt", kCupt));
  write_cupt(sentences, tmp.path() / "out.cupt");
  auto again = parse_cupt(tmp.path() / "out.cupt");

  REQUIRE(again.size() == sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto& a = sentences[i];
    const auto& b = again[i];
    CHECK(a.sent_id == b.sent_id);
    REQUIRE(a.tokens.size() == b.tokens.size());
    for (std::size_t k = 0; k < a.tokens.size(); ++k) {
      CHECK(a.tokens[k].form == b.tokens[k].form);
      CHECK(a.tokens[k].lemma == b.tokens[k].lemma);
      CHECK(a.tokens[k].upos == b.tokens[k].upos);
      CHECK(a.tokens[k].gold_mwe_id == b.tokens[k].gold_mwe_id);
    }
    REQUIRE(a.gold_mwes.size() == b.gold_mwes.size());
    for (std::size_t k = 0; k < a.gold_mwes.size(); ++k) {
      CHECK(a.gold_mwes[k].token_indices == b.gold_mwes[k].token_indices);
      CHECK(a.gold_mwes[k].category == b.gold_mwes[k].category);
    }
    CHECK(a.mwt_ranges.size() == b.mwt_ranges.size());
  }
}

TEST_CASE("parse_dimsum follows parent chains, including gaps") {
  test_support::TempDir tmp;
  auto sentences = parse_dimsum(tmp.write("a.dimsum", kDimsum));
  REQUIRE(sentences.size() == 2);

  const Sentence& r1 = sentences[0];
  CHECK(r1.sent_id == "r1");
  REQUIRE(r1.gold_mwes.size() == 1);
  // gappy chain: "take ... out" skips the intervening token
  CHECK(r1.gold_mwes[0].token_indices == std::vector<int>{1, 3});
  CHECK(r1.tokens[2].gold_mwe_id == std::nullopt);

  const Sentence& r2 = sentences[1];
  REQUIRE(r2.gold_mwes.size() == 1);
  CHECK(r2.gold_mwes[0].token_indices == std::vector<int>{1, 2});
}

TEST_CASE("dimsum parent pointing at itself is cyclic") {
  test_support::TempDir tmp;
  auto path = tmp.write("bad.dimsum", "1\ta\ta\tNOUN\tB\t1\t\t\tx1\n\n");
  CHECK_THROWS_AS(parse_dimsum(path), CyclicParent);
}

TEST_CASE("dimsum forward parents and bad tags are malformed") {
  test_support::TempDir tmp;
  CHECK_THROWS_AS(parse_dimsum(tmp.write("f.dimsum", "1\ta\ta\tNOUN\tI\t2\t\t\tx1\n\n")),
                  MalformedRow);
  CHECK_THROWS_AS(parse_dimsum(tmp.write("t.dimsum", "1\ta\ta\tNOUN\tQ\t0\t\t\tx1\n\n")),
                  MalformedRow);
}

TEST_CASE("dimsum round-trip preserves tokens and groupings") {
  test_support::TempDir tmp;
  auto sentences = parse_dimsum(tmp.write("a.dimsum", kDimsum));
  write_dimsum(sentences, tmp.path() / "out.dimsum");
  auto again = parse_dimsum(tmp.path() / "out.dimsum");

  REQUIRE(again.size() == sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    CHECK(again[i].sent_id == sentences[i].sent_id);
    REQUIRE(again[i].tokens.size() == sentences[i].tokens.size());
    for (std::size_t k = 0; k < sentences[i].tokens.size(); ++k) {
      CHECK(again[i].tokens[k].form == sentences[i].tokens[k].form);
      CHECK(again[i].tokens[k].lemma == sentences[i].tokens[k].lemma);
      CHECK(again[i].tokens[k].upos == sentences[i].tokens[k].upos);
    }
    REQUIRE(again[i].gold_mwes.size() == sentences[i].gold_mwes.size());
    for (std::size_t k = 0; k < sentences[i].gold_mwes.size(); ++k)
      CHECK(again[i].gold_mwes[k].token_indices == sentences[i].gold_mwes[k].token_indices);
  }
}

TEST_CASE("canonical json round-trip keeps marks and senses") {
  test_support::TempDir tmp;
  auto path = tmp.write(
      "a.jsonl",
      R"({"sent_id":"j1","tokens":[{"form":"He","lemma":"he","upos":"PRON"},{"form":"took","lemma":"take_advantage","upos":"VERB","sense":"ta.v.01"},{"form":"advantage","lemma":"advantage","upos":"NOUN"}],"mwes":[],"marks":[{"indices":[1],"key":"take_advantage","sense":"ta.v.01"}]})"
      "\n");
  auto sentences = parse_canonical_json(path);
  REQUIRE(sentences.size() == 1);
  REQUIRE(sentences[0].mwe_marks.size() == 1);
  CHECK(sentences[0].mwe_marks[0].entry_key == "take_advantage");
  CHECK(sentences[0].tokens[1].gold_sense == "ta.v.01");

  write_canonical_json(sentences, tmp.path() / "out.jsonl");
  auto again = parse_canonical_json(tmp.path() / "out.jsonl");
  REQUIRE(again.size() == 1);
  CHECK(again[0].mwe_marks.size() == 1);
  CHECK(again[0].tokens[1].gold_sense == sentences[0].tokens[1].gold_sense);
}

TEST_CASE("write_predictions replaces the MWE column and round-trips") {
  test_support::TempDir tmp;
  auto sentences = parse_cupt(tmp.write("a.cupt", kCupt));

  std::vector<std::vector<OutputGroup>> groups(2);
  groups[0].push_back(OutputGroup{{1, 2}, ""});
  write_predictions(sentences, groups, CorpusFormat::Cupt, tmp.path() / "pred.cupt");

  auto pred = parse_cupt(tmp.path() / "pred.cupt");
  REQUIRE(pred.size() == 2);
  REQUIRE(pred[0].gold_mwes.size() == 1);
  CHECK(pred[0].gold_mwes[0].token_indices == std::vector<int>{1, 2});
  CHECK(pred[0].gold_mwes[0].category == "MWE");
  CHECK(pred[1].gold_mwes.empty());

  // empty predictions give an all-star column
  std::vector<std::vector<OutputGroup>> empty(2);
  write_predictions(sentences, empty, CorpusFormat::Cupt, tmp.path() / "empty.cupt");
  auto none = parse_cupt(tmp.path() / "empty.cupt");
  CHECK(none[0].gold_mwes.empty());
  CHECK(none[1].gold_mwes.empty());
}

TEST_CASE("validate_sentence flags inconsistent annotations") {
  Sentence s;
  s.sent_id = "v";
  for (int i = 0; i < 3; ++i) {
    Token t;
    t.index = i;
    t.form = "w" + std::to_string(i);
    t.lemma = t.form;
    t.upos = "X";
    s.tokens.push_back(t);
  }
  CHECK_FALSE(validate_sentence(s));

  MweAnnotation ann;
  ann.mwe_id = 1;
  ann.token_indices = {0, 2};
  s.gold_mwes.push_back(ann);
  CHECK(validate_sentence(s).has_value());  // tokens lack the id

  s.tokens[0].gold_mwe_id = 1;
  s.tokens[2].gold_mwe_id = 1;
  CHECK_FALSE(validate_sentence(s));

  s.gold_mwes[0].token_indices = {2, 0};
  CHECK(validate_sentence(s).has_value());  // not strictly increasing
}

TEST_CASE("random disjoint predictions survive write/parse in both formats") {
  std::mt19937_64 rng(123);
  test_support::TempDir tmp;
  std::uniform_int_distribution<int> len_dist(2, 14), group_count(0, 3);

  for (int round = 0; round < 30; ++round) {
    std::vector<Sentence> sentences;
    std::vector<std::vector<OutputGroup>> groups;
    for (int si = 0; si < 4; ++si) {
      Sentence s;
      s.sent_id = "rt" + std::to_string(round) + "_" + std::to_string(si);
      int n = len_dist(rng);
      for (int i = 0; i < n; ++i) {
        Token t;
        t.index = i;
        t.form = "w" + std::to_string(rng() % 9);
        t.lemma = t.form;
        t.upos = rng() % 2 ? "NOUN" : "VERB";
        s.tokens.push_back(std::move(t));
      }
      std::vector<OutputGroup> sentence_groups;
      std::set<int> used;
      for (int g = group_count(rng); g > 0; --g) {
        std::vector<int> indices;
        int start = static_cast<int>(rng() % n);
        int step = 1 + static_cast<int>(rng() % 2);
        for (int k = 0; k < 2 + static_cast<int>(rng() % 2); ++k) {
          int idx = start + k * step;
          if (idx < n && !used.count(idx)) {
            indices.push_back(idx);
            used.insert(idx);
          }
        }
        if (indices.size() >= 2) sentence_groups.push_back(OutputGroup{indices, ""});
      }
      sentences.push_back(std::move(s));
      groups.push_back(std::move(sentence_groups));
    }

    for (auto format : {CorpusFormat::Cupt, CorpusFormat::Dimsum}) {
      auto path = tmp.path() / ("rt" + std::to_string(round) +
                                (format == CorpusFormat::Cupt ? ".cupt" : ".dimsum"));
      write_predictions(sentences, groups, format, path);
      auto parsed = parse_corpus(path, format);
      REQUIRE(parsed.size() == sentences.size());
      for (std::size_t si = 0; si < sentences.size(); ++si) {
        std::vector<std::vector<int>> expected;
        for (const auto& g : groups[si]) {
          auto idx = g.token_indices;
          std::sort(idx.begin(), idx.end());
          expected.push_back(idx);
        }
        std::sort(expected.begin(), expected.end());
        std::vector<std::vector<int>> got;
        for (const auto& ann : parsed[si].gold_mwes) got.push_back(ann.token_indices);
        std::sort(got.begin(), got.end());
        CHECK(got == expected);
      }
    }
  }
}
