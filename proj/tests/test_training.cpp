#include <doctest.h>

#include <cmath>
#include <map>

#include "glosspipe/errors.hpp"
#include "glosspipe/training.hpp"
#include "support/gradcheck.hpp"
#include "support/synthetic.hpp"
#include "support/tmpdir.hpp"

using namespace glosspipe;

namespace {

TrainingExample word_example(std::vector<std::string> sense_ids, std::string gold) {
  TrainingExample ex;
  ex.sentence_index = 0;
  ex.target_indices = {0};
  for (std::size_t i = 0; i < sense_ids.size(); ++i)
    ex.senses.push_back(Sense{sense_ids[i], "gloss " + sense_ids[i], static_cast<int>(i)});
  ex.gold = std::move(gold);
  ex.is_mwe = false;
  return ex;
}

}  // namespace

TEST_CASE("loss reproduces the worked two-label example") {
  auto ex = word_example({"s0", "s1"}, "s0");
  SenseScores scores;
  scores.per_sense = {{"s0", 2.0}, {"s1", 0.0}};
  // -2 + ln(e^2 + e^0)
  CHECK(loss(scores, ex) == doctest::Approx(0.126928011042972).epsilon(1e-9));
}

TEST_CASE("uniform scores cost ln k") {
  for (int k = 1; k <= 6; ++k) {
    std::vector<std::string> ids;
    for (int i = 0; i < k; ++i) ids.push_back("s" + std::to_string(i));
    auto ex = word_example(ids, "s0");
    SenseScores scores;
    for (const auto& id : ids) scores.per_sense.emplace_back(id, 0.7);
    CHECK(loss(scores, ex) == doctest::Approx(std::log(k)).epsilon(1e-9));
  }
}

TEST_CASE("MWE with one sense tied with not-an-MWE costs ln 2") {
  TrainingExample ex;
  ex.sentence_index = 0;
  ex.target_indices = {0, 1};
  ex.senses = {{"s0", "a gloss", 0}};
  ex.gold = std::string(kNotMweLabel);
  ex.is_mwe = true;

  SenseScores scores;
  scores.per_sense = {{"s0", 0.0}};
  scores.not_mwe = 0.0;
  CHECK(loss(scores, ex) == doctest::Approx(std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("loss is invariant to shifting every score") {
  auto ex = word_example({"s0", "s1", "s2"}, "s1");
  SenseScores base;
  base.per_sense = {{"s0", 0.3}, {"s1", -1.2}, {"s2", 2.5}};
  const double reference = loss(base, ex);
  for (double shift : {-1000.0, -3.7, 0.0, 12.25, 500.0}) {
    SenseScores shifted = base;
    for (auto& [id, v] : shifted.per_sense) v += shift;
    CHECK(std::abs(loss(shifted, ex) - reference) < 1e-9);
  }
}

TEST_CASE("loss shrinks as the gold score grows and stays non-negative") {
  auto ex = word_example({"s0", "s1"}, "s0");
  double prev = std::numeric_limits<double>::infinity();
  for (double g = 0.0; g <= 20.0; g += 2.0) {
    SenseScores scores;
    scores.per_sense = {{"s0", g}, {"s1", 0.0}};
    double l = loss(scores, ex);
    CHECK(l >= 0.0);
    CHECK(l < prev);
    prev = l;
  }
}

TEST_CASE("gold outside the label space is an error") {
  auto ex = word_example({"s0"}, "unknown");
  SenseScores scores;
  scores.per_sense = {{"s0", 1.0}};
  CHECK_THROWS_AS(loss(scores, ex), GoldNotInLabelSpace);

  // not-an-MWE gold on a non-MWE example is also out of space
  auto ex2 = word_example({"s0"}, std::string(kNotMweLabel));
  CHECK_THROWS_AS(loss(scores, ex2), GoldNotInLabelSpace);
}

TEST_CASE("analytic gradients match central differences on every path") {
  // tighter sweeps run in the acceptance suite; this is the smoke version
  for (auto kind : {ScorerKind::Biencoder, ScorerKind::Polyencoder,
                    ScorerKind::PolyencoderDistinct}) {
    double err = test_support::grad_check_max_rel_err(kind, 1234);
    CHECK(err < 1e-4);
  }
}

TEST_CASE("all-masked batches produce zero gradient") {
  auto fixture = test_support::grad_check_fixture();
  for (auto& slot : fixture.batch.slots) slot.masked = true;
  fixture.batch.active_count = 0;
  auto w = ScorerWeights::random_init({8, 2, 50, 16}, 5);
  auto grad = loss_gradient(w, ScorerKind::Biencoder, fixture.sentences, fixture.examples,
                            fixture.batch);
  CHECK(grad.mean_loss == 0.0);
  grad.grads.for_each_tensor([&](const char*, const Tensor& t) {
    for (double v : t.data) CHECK(v == 0.0);
  });
}

TEST_CASE("build_batches: [3,3] examples at batch size 4") {
  std::vector<TrainingExample> examples;
  for (int s = 0; s < 2; ++s)
    for (int i = 0; i < 3; ++i) {
      TrainingExample ex = word_example({"s0"}, "s0");
      ex.sentence_index = s;
      examples.push_back(ex);
    }
  auto batches = build_batches(examples, 4, 0);
  REQUIRE(batches.size() == 2);
  CHECK(batches[0].active_count == 4);
  CHECK(batches[0].slots.size() == 6);
  int masked = 0;
  for (const auto& slot : batches[0].slots) masked += slot.masked ? 1 : 0;
  CHECK(masked == 2);
  CHECK(batches[1].active_count == 2);
  CHECK(batches[1].slots.size() == 2);

  // the masked examples are exactly the ones re-emitted active next
  std::vector<std::size_t> carried, reemitted;
  for (const auto& slot : batches[0].slots)
    if (slot.masked) carried.push_back(slot.example_index);
  for (const auto& slot : batches[1].slots) reemitted.push_back(slot.example_index);
  CHECK(carried == reemitted);
}

TEST_CASE("build_batches covers each example exactly once per epoch") {
  std::mt19937_64 rng(77);
  for (int round = 0; round < 100; ++round) {
    std::uniform_int_distribution<int> sent_count(1, 9), per_sent(1, 7), bs_dist(1, 10);
    std::vector<TrainingExample> examples;
    int n_sent = sent_count(rng);
    for (int s = 0; s < n_sent; ++s) {
      int k = per_sent(rng);
      for (int i = 0; i < k; ++i) {
        TrainingExample ex = word_example({"s0"}, "s0");
        ex.sentence_index = s;
        examples.push_back(ex);
      }
    }
    int bs = bs_dist(rng);
    auto batches = build_batches(examples, bs, round);

    std::map<std::size_t, int> active_counts;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      std::size_t active = 0;
      for (const auto& slot : batches[b].slots)
        if (!slot.masked) {
          ++active_counts[slot.example_index];
          ++active;
        }
      CHECK(active == batches[b].active_count);
      if (b + 1 < batches.size())
        CHECK(batches[b].active_count == static_cast<std::size_t>(bs));
      else
        CHECK(batches[b].active_count <= static_cast<std::size_t>(bs));
    }
    CHECK(active_counts.size() == examples.size());
    for (const auto& [idx, count] : active_counts) CHECK(count == 1);
  }
}

TEST_CASE("single batch when batch size covers everything; identical seeds repeat") {
  std::vector<TrainingExample> examples;
  for (int s = 0; s < 3; ++s) {
    TrainingExample ex = word_example({"s0"}, "s0");
    ex.sentence_index = s;
    examples.push_back(ex);
  }
  auto one = build_batches(examples, 100, 9);
  REQUIRE(one.size() == 1);
  CHECK(one[0].active_count == 3);

  auto a = build_batches(examples, 2, 42);
  auto b = build_batches(examples, 2, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].slots.size() == b[i].slots.size());
    for (std::size_t k = 0; k < a[i].slots.size(); ++k) {
      CHECK(a[i].slots[k].example_index == b[i].slots[k].example_index);
      CHECK(a[i].slots[k].masked == b[i].slots[k].masked);
    }
  }
}

TEST_CASE("extract_examples pulls marks and sense-labeled words") {
  auto corpus = test_support::make_planted_corpus(1, 3, 0);
  auto extracted = extract_examples(corpus.train, corpus.lexicon);
  // each planted sentence carries one MWE mark and one labeled word
  CHECK(extracted.examples.size() == 6);
  int mwe = 0, words = 0;
  for (const auto& ex : extracted.examples) ex.is_mwe ? ++mwe : ++words;
  CHECK(mwe == 3);
  CHECK(words == 3);
  CHECK(extracted.skipped_missing_entry == 0);
}

TEST_CASE("zero learning rate leaves weights unchanged and loss flat") {
  auto corpus = test_support::make_planted_corpus(2, 12, 0);
  TrainConfig tc;
  tc.epochs = 3;
  tc.learning_rate = 0.0;
  tc.batch_size = 8;
  tc.seed = 7;
  tc.dev_fraction = 0.25;

  auto w0 = ScorerWeights::random_init({8, 2, 256, 16}, 11);
  auto result = train(w0, corpus.train, corpus.lexicon, tc);
  REQUIRE(result.history.size() == 3);
  CHECK(result.history[0].train_loss == doctest::Approx(result.history[2].train_loss));

  bool unchanged = true;
  std::vector<const Tensor*> before, after;
  w0.for_each_tensor([&](const char*, const Tensor& t) { before.push_back(&t); });
  result.best_weights.for_each_tensor([&](const char*, const Tensor& t) { after.push_back(&t); });
  for (std::size_t i = 0; i < before.size(); ++i)
    if (before[i]->data != after[i]->data) unchanged = false;
  CHECK(unchanged);
}

TEST_CASE("fixed seed reproduces the metric history") {
  auto corpus = test_support::make_planted_corpus(3, 20, 0);
  TrainConfig tc;
  tc.epochs = 2;
  tc.learning_rate = 0.05;
  tc.batch_size = 8;
  tc.seed = 21;

  auto w = ScorerWeights::random_init({8, 2, 256, 16}, 3);
  auto r1 = train(w, corpus.train, corpus.lexicon, tc);
  auto r2 = train(w, corpus.train, corpus.lexicon, tc);
  REQUIRE(r1.history.size() == r2.history.size());
  for (std::size_t i = 0; i < r1.history.size(); ++i) {
    CHECK(r1.history[i].train_loss == r2.history[i].train_loss);
    CHECK(r1.history[i].dev_metric == r2.history[i].dev_metric);
  }
  CHECK(r1.dev_sentence_indices == r2.dev_sentence_indices);
}

TEST_CASE("build_finetune_set labels lexicon hits positive and misses negative") {
  Lexicon lex;
  LexiconEntry e;
  e.key = "kick_the_bucket";
  e.pos = Pos::Verb;
  e.senses = {{"ktb.v.01", "pass from physical life", 0}, {"ktb.v.02", "strike the pail", 1}};
  lex.add_entry(std::move(e));

  // sentence 1: gold MWE present in the lexicon
  Sentence s1;
  s1.sent_id = "f1";
  for (auto [i, form] : std::vector<std::pair<int, std::string>>{
           {0, "he"}, {1, "kick"}, {2, "the"}, {3, "bucket"}}) {
    Token t;
    t.index = i;
    t.form = form;
    t.lemma = form;
    t.upos = "X";
    s1.tokens.push_back(t);
  }
  MweAnnotation ann;
  ann.mwe_id = 1;
  ann.token_indices = {1, 2, 3};
  s1.tokens[1].gold_mwe_id = 1;
  s1.tokens[2].gold_mwe_id = 1;
  s1.tokens[3].gold_mwe_id = 1;
  s1.gold_mwes.push_back(ann);

  // sentence 2: same surface, no gold annotation -> pipeline output is negative
  Sentence s2 = s1;
  s2.sent_id = "f2";
  s2.gold_mwes.clear();
  for (auto& t : s2.tokens) t.gold_mwe_id.reset();

  // sentence 3: gold MWE missing from the lexicon -> no positive
  Sentence s3;
  s3.sent_id = "f3";
  for (auto [i, form] :
       std::vector<std::pair<int, std::string>>{{0, "come"}, {1, "true"}}) {
    Token t;
    t.index = i;
    t.form = form;
    t.lemma = form;
    t.upos = "X";
    s3.tokens.push_back(t);
  }
  MweAnnotation ann3;
  ann3.mwe_id = 1;
  ann3.token_indices = {0, 1};
  s3.tokens[0].gold_mwe_id = 1;
  s3.tokens[1].gold_mwe_id = 1;
  s3.gold_mwes.push_back(ann3);

  auto w = ScorerWeights::random_init({8, 2, 256, 16}, 2);
  PipelineConfig cfg;
  cfg.use_encoder_filter = true;

  auto examples = build_finetune_set(w, {s1, s2, s3}, lex, cfg, ScorerKind::Biencoder);

  int positives = 0, negatives = 0;
  for (const auto& ex : examples) {
    if (ex.gold == kNotMweLabel) {
      ++negatives;
      CHECK(ex.sentence_index == 1);
    } else {
      ++positives;
      CHECK(ex.gold == "ktb.v.01");  // first sense
      CHECK(ex.sentence_index == 0);
    }
  }
  CHECK(positives == 1);
  CHECK(negatives <= 1);  // present only if the random filter let it through

  // predictions that exactly match gold never become negatives
  for (const auto& ex : examples)
    if (ex.sentence_index == 0) CHECK(ex.gold != kNotMweLabel);
}

TEST_CASE("metrics history serializes to JSON lines") {
  test_support::TempDir tmp;
  std::vector<EpochMetrics> history{{0, 1.5, 0.5, 0.5, 0.25}, {1, 1.1, 0.75, 0.75, 0.5}};
  write_metrics_history(history, tmp.path() / "metrics.jsonl");
  auto text = tmp.read("metrics.jsonl");
  CHECK(text.find("\"epoch\":0") != std::string::npos);
  CHECK(text.find("\"epoch\":1") != std::string::npos);
}

TEST_CASE("non-finite losses abort with DivergedLoss") {
  auto corpus = test_support::make_planted_corpus(4, 16, 0);
  TrainConfig tc;
  tc.epochs = 5;
  tc.learning_rate = 1e6;  // guaranteed blow-up
  tc.batch_size = 4;
  tc.seed = 1;
  tc.dev_fraction = 0.0;
  auto w = ScorerWeights::random_init({8, 2, 256, 16}, 1, 1.0);
  CHECK_THROWS_AS(train(w, corpus.train, corpus.lexicon, tc), DivergedLoss);
}
