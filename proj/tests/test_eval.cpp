#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "glosspipe/errors.hpp"
#include "glosspipe/eval.hpp"

using namespace glosspipe;

namespace {

std::vector<SentenceGroups> one(const std::string& id, std::vector<std::vector<int>> groups) {
  return {SentenceGroups{id, std::move(groups)}};
}

std::vector<SentenceGroups> random_prediction_set(std::mt19937_64& rng, int n_sentences) {
  std::uniform_int_distribution<int> group_count(0, 3), len_dist(2, 4), start_dist(0, 14);
  std::vector<SentenceGroups> out;
  for (int i = 0; i < n_sentences; ++i) {
    SentenceGroups sg;
    sg.sent_id = "r" + std::to_string(i);
    int groups = group_count(rng);
    std::set<int> used;
    for (int g = 0; g < groups; ++g) {
      int len = len_dist(rng), start = start_dist(rng);
      std::vector<int> indices;
      for (int k = 0; k < len; ++k)
        if (!used.count(start + 2 * k)) {
          indices.push_back(start + 2 * k);
          used.insert(start + 2 * k);
        }
      if (indices.size() >= 2) sg.groups.push_back(indices);
    }
    out.push_back(std::move(sg));
  }
  return out;
}

}  // namespace

TEST_CASE("mwe_based_prf hand-counted fixture") {
  auto gold = one("s1", {{1, 2}, {4, 5, 6}});
  auto pred = one("s1", {{1, 2}, {4, 5}});
  auto prf = mwe_based_prf(gold, pred);
  CHECK(prf.precision == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(prf.recall == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(prf.f1 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(prf.tp == 1);
  CHECK(prf.fp == 1);
  CHECK(prf.fn == 1);
}

TEST_CASE("mwe_based_prf boundary cases") {
  auto gold = one("s1", {{1, 2}});
  CHECK(mwe_based_prf(gold, gold).f1 == doctest::Approx(1.0));

  auto empty_pred = one("s1", {});
  auto prf = mwe_based_prf(gold, empty_pred);
  CHECK(prf.precision == 0.0);  // 0/0 convention
  CHECK(prf.recall == 0.0);
  CHECK(prf.f1 == 0.0);
}

TEST_CASE("token_based_prf hand-counted fixture") {
  auto gold = one("s1", {{1, 2}, {4, 5, 6}});
  auto pred = one("s1", {{1, 2}, {4, 5}});
  auto prf = token_based_prf(gold, pred);
  CHECK(prf.precision == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(prf.recall == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(prf.f1 == doctest::Approx(2.0 * 0.8 / 1.8).epsilon(1e-12));

  auto disjoint = token_based_prf(one("s1", {{1, 2}}), one("s1", {{5, 6}}));
  CHECK(disjoint.f1 == 0.0);
  CHECK(token_based_prf(gold, gold).f1 == doctest::Approx(1.0));
}

TEST_CASE("dimsum_link_prf hand-counted fixtures") {
  // gold {1,2,3} vs pred {1,2}: gold links (1,2),(2,3); pred links (1,2)
  auto a = dimsum_link_prf(one("s1", {{1, 2, 3}}), one("s1", {{1, 2}}));
  CHECK(a.precision == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(a.recall == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(a.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // gap tolerance: predicted link (1,3) lands inside the same gold group
  auto b = dimsum_link_prf(one("s1", {{1, 2, 3}}), one("s1", {{1, 3}}));
  CHECK(b.precision == doctest::Approx(1.0).epsilon(1e-12));

  auto c = dimsum_link_prf(one("s1", {{1, 2, 3}}), one("s1", {}));
  CHECK(c.recall == 0.0);
}

TEST_CASE("wsd_f1 accuracy identity and multi-gold") {
  std::vector<WsdInstance> gold{{"i1", {"a"}}, {"i2", {"b"}}, {"i3", {"c"}}, {"i4", {"d"}}};
  std::map<std::string, std::string> pred{{"i1", "a"}, {"i2", "b"}, {"i3", "c"}, {"i4", "x"}};
  auto prf = wsd_f1(gold, pred);
  CHECK(prf.f1 == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(prf.precision == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(prf.recall == doctest::Approx(0.75).epsilon(1e-12));

  std::vector<WsdInstance> multi{{"i1", {"a", "b"}}};
  std::map<std::string, std::string> pb{{"i1", "b"}};
  CHECK(wsd_f1(multi, pb).f1 == doctest::Approx(1.0));

  CHECK(wsd_f1({}, {}).f1 == 0.0);
}

TEST_CASE("wsd_f1 missing predictions: lenient counts misses, strict throws") {
  std::vector<WsdInstance> gold{{"i1", {"a"}}, {"i2", {"b"}}};
  std::map<std::string, std::string> pred{{"i1", "a"}};
  auto prf = wsd_f1(gold, pred, /*lenient_missing=*/true);
  CHECK(prf.precision == doctest::Approx(1.0));
  CHECK(prf.recall == doctest::Approx(0.5));
  CHECK_THROWS_AS(wsd_f1(gold, pred, /*lenient_missing=*/false), MissingPrediction);
}

TEST_CASE("sentence id mismatches are rejected") {
  auto gold = one("s1", {{1, 2}});
  auto pred = one("s2", {{1, 2}});
  CHECK_THROWS_AS(mwe_based_prf(gold, pred), SentenceIdMismatch);

  std::vector<SentenceGroups> dup{{"s1", {}}, {"s1", {}}};
  CHECK_THROWS_AS(token_based_prf(dup, dup), SentenceIdMismatch);
}

TEST_CASE("metrics are invariant under sentence reordering") {
  std::mt19937_64 rng(5);
  auto gold = random_prediction_set(rng, 12);
  auto pred = random_prediction_set(rng, 12);

  auto gold_rev = gold;
  auto pred_rev = pred;
  std::reverse(gold_rev.begin(), gold_rev.end());
  std::reverse(pred_rev.begin(), pred_rev.end());

  for (auto metric : {mwe_based_prf, token_based_prf, dimsum_link_prf}) {
    auto a = metric(gold, pred);
    auto b = metric(gold_rev, pred_rev);
    CHECK(a.precision == b.precision);
    CHECK(a.recall == b.recall);
    CHECK(a.f1 == b.f1);
  }
}

TEST_CASE("self-evaluation is perfect for every metric") {
  std::mt19937_64 rng(6);
  for (int round = 0; round < 100; ++round) {
    auto sets = random_prediction_set(rng, 5);
    bool any_group = false;
    for (const auto& sg : sets) any_group = any_group || !sg.groups.empty();
    if (!any_group) continue;
    for (auto metric : {mwe_based_prf, token_based_prf, dimsum_link_prf}) {
      auto prf = metric(sets, sets);
      CHECK(prf.precision == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(prf.recall == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(prf.f1 == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("exact-match predictions contribute all their tokens to token-based tp") {
  std::mt19937_64 rng(8);
  for (int round = 0; round < 50; ++round) {
    auto gold = random_prediction_set(rng, 4);
    auto pred = gold;  // pred == gold: every prediction is an exact match
    auto mwe = mwe_based_prf(gold, pred);
    auto tok = token_based_prf(gold, pred);
    long long gold_tokens = 0;
    for (const auto& sg : gold) {
      std::set<int> toks;
      for (const auto& g : sg.groups) toks.insert(g.begin(), g.end());
      gold_tokens += static_cast<long long>(toks.size());
    }
    CHECK(tok.tp == gold_tokens);
    CHECK(mwe.tp <= tok.tp + 0);  // each matched set has >= 2 tokens
  }
}

TEST_CASE("prf report serializes the counts") {
  auto prf = PRF::from_counts(3, 1, 2);
  auto report = prf_report_json("mwe-based", prf);
  CHECK(report.find("\"metric\":\"mwe-based\"") != std::string::npos);
  CHECK(report.find("\"tp\":3") != std::string::npos);
}
