#include "glosspipe/eval.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "glosspipe/errors.hpp"

namespace glosspipe {

PRF PRF::from_counts(long long tp, long long fp, long long fn) {
  PRF out;
  out.tp = tp;
  out.fp = fp;
  out.fn = fn;
  out.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  out.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  out.f1 = out.precision + out.recall > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

namespace {

// Aligns corpora by sentence id; ids must be unique and the two id sets equal.
std::vector<std::pair<const SentenceGroups*, const SentenceGroups*>> align(
    std::span<const SentenceGroups> gold, std::span<const SentenceGroups> pred) {
  std::map<std::string, const SentenceGroups*> gold_by_id;
  for (const auto& g : gold)
    if (!gold_by_id.emplace(g.sent_id, &g).second)
      throw SentenceIdMismatch("duplicate gold sentence id " + g.sent_id);
  std::map<std::string, const SentenceGroups*> pred_by_id;
  for (const auto& p : pred)
    if (!pred_by_id.emplace(p.sent_id, &p).second)
      throw SentenceIdMismatch("duplicate predicted sentence id " + p.sent_id);
  if (gold_by_id.size() != pred_by_id.size())
    throw SentenceIdMismatch("gold has " + std::to_string(gold_by_id.size()) +
                             " sentences, predictions have " + std::to_string(pred_by_id.size()));
  std::vector<std::pair<const SentenceGroups*, const SentenceGroups*>> out;
  for (const auto& [id, gptr] : gold_by_id) {
    auto it = pred_by_id.find(id);
    if (it == pred_by_id.end()) throw SentenceIdMismatch("missing prediction for sentence " + id);
    out.emplace_back(gptr, it->second);
  }
  return out;
}

std::vector<std::vector<int>> sorted_groups(const SentenceGroups& sg) {
  auto out = sg.groups;
  for (auto& g : out) std::sort(g.begin(), g.end());
  return out;
}

}  // namespace

PRF mwe_based_prf(std::span<const SentenceGroups> gold, std::span<const SentenceGroups> pred) {
  long long tp = 0, fp = 0, fn = 0;
  for (const auto& [g, p] : align(gold, pred)) {
    auto gold_sets = sorted_groups(*g);
    auto pred_sets = sorted_groups(*p);
    std::multiset<std::vector<int>> gold_ms(gold_sets.begin(), gold_sets.end());
    for (const auto& ps : pred_sets) {
      auto it = gold_ms.find(ps);
      if (it != gold_ms.end()) {
        ++tp;
        gold_ms.erase(it);
      } else {
        ++fp;
      }
    }
    fn += static_cast<long long>(gold_ms.size());
  }
  return PRF::from_counts(tp, fp, fn);
}

PRF token_based_prf(std::span<const SentenceGroups> gold, std::span<const SentenceGroups> pred) {
  long long tp = 0, fp = 0, fn = 0;
  for (const auto& [g, p] : align(gold, pred)) {
    std::set<int> gold_tokens, pred_tokens;
    for (const auto& grp : g->groups) gold_tokens.insert(grp.begin(), grp.end());
    for (const auto& grp : p->groups) pred_tokens.insert(grp.begin(), grp.end());
    for (int t : pred_tokens)
      gold_tokens.count(t) ? ++tp : ++fp;
    for (int t : gold_tokens)
      if (!pred_tokens.count(t)) ++fn;
  }
  return PRF::from_counts(tp, fp, fn);
}

PRF dimsum_link_prf(std::span<const SentenceGroups> gold, std::span<const SentenceGroups> pred) {
  long long pred_links = 0, pred_matched = 0;
  long long gold_links = 0, gold_matched = 0;

  auto group_id_of = [](const std::vector<std::vector<int>>& groups) {
    std::map<int, int> id;
    for (std::size_t k = 0; k < groups.size(); ++k)
      for (int t : groups[k]) id.emplace(t, static_cast<int>(k));
    return id;
  };
  auto count_side = [&](const std::vector<std::vector<int>>& from,
                        const std::map<int, int>& other_membership, long long& total,
                        long long& matched) {
    for (const auto& grp : from) {
      for (std::size_t k = 1; k < grp.size(); ++k) {
        ++total;
        auto a = other_membership.find(grp[k - 1]);
        auto b = other_membership.find(grp[k]);
        if (a != other_membership.end() && b != other_membership.end() && a->second == b->second)
          ++matched;
      }
    }
  };

  for (const auto& [g, p] : align(gold, pred)) {
    auto gold_groups = sorted_groups(*g);
    auto pred_groups = sorted_groups(*p);
    auto gold_id = group_id_of(gold_groups);
    auto pred_id = group_id_of(pred_groups);
    count_side(pred_groups, gold_id, pred_links, pred_matched);
    count_side(gold_groups, pred_id, gold_links, gold_matched);
  }

  // P and R have separate numerators here, so fill the PRF directly; the
  // stored counts reflect the precision side plus the recall misses.
  PRF out;
  out.tp = pred_matched;
  out.fp = pred_links - pred_matched;
  out.fn = gold_links - gold_matched;
  out.precision = pred_links > 0 ? static_cast<double>(pred_matched) / pred_links : 0.0;
  out.recall = gold_links > 0 ? static_cast<double>(gold_matched) / gold_links : 0.0;
  out.f1 = out.precision + out.recall > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

PRF wsd_f1(std::span<const WsdInstance> gold, const std::map<std::string, std::string>& predictions,
           bool lenient_missing) {
  long long correct = 0, attempted = 0;
  for (const auto& inst : gold) {
    auto it = predictions.find(inst.instance_id);
    if (it == predictions.end()) {
      if (!lenient_missing) throw MissingPrediction(inst.instance_id);
      continue;
    }
    ++attempted;
    if (std::find(inst.gold_senses.begin(), inst.gold_senses.end(), it->second) !=
        inst.gold_senses.end())
      ++correct;
  }
  const long long total = static_cast<long long>(gold.size());
  PRF out;
  out.tp = correct;
  out.fp = attempted - correct;
  out.fn = total - correct;
  out.precision = attempted > 0 ? static_cast<double>(correct) / attempted : 0.0;
  out.recall = total > 0 ? static_cast<double>(correct) / total : 0.0;
  out.f1 = out.precision + out.recall > 0.0
               ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
               : 0.0;
  return out;
}

std::string prf_report_json(const std::string& metric, const PRF& prf) {
  nlohmann::json j{{"metric", metric},   {"precision", prf.precision}, {"recall", prf.recall},
                   {"f1", prf.f1},       {"tp", prf.tp},               {"fp", prf.fp},
                   {"fn", prf.fn}};
  return j.dump();
}

}  // namespace glosspipe
