#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace glosspipe {

// Micro-averaged precision/recall/F1 with the usual 0/0 -> 0 conventions.
struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long long tp = 0, fp = 0, fn = 0;

  static PRF from_counts(long long tp, long long fp, long long fn);
};

// MWE groups of one sentence, as sorted token-index sets.
struct SentenceGroups {
  std::string sent_id;
  std::vector<std::vector<int>> groups;
};

// Exact-set match: a prediction counts iff some gold group in the same
// sentence has the identical token-index set.
PRF mwe_based_prf(std::span<const SentenceGroups> gold, std::span<const SentenceGroups> pred);

// Token overlap of MWE membership, per sentence, summed over the corpus.
PRF token_based_prf(std::span<const SentenceGroups> gold, std::span<const SentenceGroups> pred);

// Link-based measure: each group decomposes into links between consecutive
// members; a predicted link is correct when both endpoints share a gold group
// (gap tolerant), and symmetrically for recall.
PRF dimsum_link_prf(std::span<const SentenceGroups> gold, std::span<const SentenceGroups> pred);

struct WsdInstance {
  std::string instance_id;
  std::vector<std::string> gold_senses;  // any listed sense counts as correct
};

// With one prediction per instance this reduces to accuracy. Missing
// predictions are counted against recall when lenient, otherwise they raise
// MissingPrediction.
PRF wsd_f1(std::span<const WsdInstance> gold,
           const std::map<std::string, std::string>& predictions, bool lenient_missing = true);

std::string prf_report_json(const std::string& metric, const PRF& prf);

}  // namespace glosspipe
