#include "glosspipe/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "glosspipe/errors.hpp"

namespace glosspipe {

bool MweCandidate::in_order() const {
  for (std::size_t i = 1; i < token_indices.size(); ++i)
    if (token_indices[i - 1] >= token_indices[i]) return false;
  return true;
}

int MweCandidate::gap() const {
  if (token_indices.empty()) return 0;
  auto [mn, mx] = std::minmax_element(token_indices.begin(), token_indices.end());
  return (*mx - *mn + 1) - static_cast<int>(token_indices.size());
}

std::vector<int> MweCandidate::sorted_indices() const {
  auto out = token_indices;
  std::sort(out.begin(), out.end());
  return out;
}

void PipelineConfig::validate() const {
  if (max_gap < 0) throw ConfigError("max_gap must be non-negative");
  if (max_candidates_per_entry < 1) throw ConfigError("max_candidates_per_entry must be >= 1");
}

double ScoredCandidate::margin() const {
  if (!scores.not_mwe) return 0.0;
  return scores.max_sense_score() - *scores.not_mwe;
}

// --- detection ---

namespace {

std::map<std::string, std::vector<int>> lemma_positions(const Sentence& s) {
  std::map<std::string, std::vector<int>> out;
  for (const auto& t : s.tokens) out[to_lower_ascii(t.lemma)].push_back(t.index);
  return out;
}

// DFS over constituents in order, choosing positions ascending, so candidates
// come out in lexicographic index-tuple order.
void enumerate_assignments(const std::vector<const std::vector<int>*>& positions, std::size_t ci,
                           std::vector<int>& current, std::set<int>& used, std::size_t cap,
                           std::vector<std::vector<int>>& out, bool& truncated) {
  if (out.size() >= cap) {
    truncated = true;
    return;
  }
  if (ci == positions.size()) {
    out.push_back(current);
    return;
  }
  for (int pos : *positions[ci]) {
    if (used.count(pos)) continue;
    used.insert(pos);
    current.push_back(pos);
    enumerate_assignments(positions, ci + 1, current, used, cap, out, truncated);
    current.pop_back();
    used.erase(pos);
    if (truncated && out.size() >= cap) return;
  }
}

}  // namespace

std::vector<MweCandidate> detect_exhaustive(const Sentence& sentence, const Lexicon& lexicon,
                                            const PipelineConfig& config, PipelineStats* stats) {
  config.validate();
  auto positions = lemma_positions(sentence);

  // Entries reachable from any sentence lemma, deduplicated, in (key, pos) order.
  std::vector<EntryPtr> entries;
  for (const auto& [lemma, _] : positions)
    for (auto& e : lexicon.entries_for_constituent(lemma)) entries.push_back(std::move(e));
  std::sort(entries.begin(), entries.end(), [](const EntryPtr& a, const EntryPtr& b) {
    return std::tie(a->key, a->pos) < std::tie(b->key, b->pos);
  });
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());

  std::vector<MweCandidate> out;
  for (const auto& entry : entries) {
    // multiset feasibility: every constituent needs enough distinct positions
    std::map<std::string, int> needed;
    for (const auto& c : entry->constituents) ++needed[c];
    bool feasible = true;
    std::vector<const std::vector<int>*> pos_lists;
    for (const auto& c : entry->constituents) {
      auto it = positions.find(c);
      if (it == positions.end() || static_cast<int>(it->second.size()) < needed[c]) {
        feasible = false;
        break;
      }
      pos_lists.push_back(&it->second);
    }
    if (!feasible) continue;

    std::vector<std::vector<int>> tuples;
    std::vector<int> current;
    std::set<int> used;
    bool truncated = false;
    enumerate_assignments(pos_lists, 0, current, used,
                          static_cast<std::size_t>(config.max_candidates_per_entry), tuples,
                          truncated);
    if (truncated && stats) ++stats->cap_truncations;
    for (auto& tup : tuples) {
      MweCandidate cand;
      cand.entry = entry;
      cand.token_indices = std::move(tup);
      cand.sent_id = sentence.sent_id;
      out.push_back(std::move(cand));
    }
  }
  return out;
}

std::vector<MweCandidate> filter_ordered(std::vector<MweCandidate> candidates) {
  std::erase_if(candidates, [](const MweCandidate& c) { return !c.in_order(); });
  return candidates;
}

std::vector<MweCandidate> filter_max_gappiness(std::vector<MweCandidate> candidates, int max_gap) {
  if (max_gap < 0) throw ConfigError("max_gap must be non-negative");
  std::erase_if(candidates, [&](const MweCandidate& c) { return c.gap() > max_gap; });
  return candidates;
}

std::vector<MweCandidate> filter_verbal_only(std::vector<MweCandidate> candidates) {
  std::erase_if(candidates, [](const MweCandidate& c) { return c.entry->pos != Pos::Verb; });
  return candidates;
}

std::vector<ScoredCandidate> filter_encoder(std::span<const MweCandidate> candidates,
                                            const Scorer& scorer, const Sentence& sentence) {
  std::vector<ScoredCandidate> out;
  for (const auto& cand : candidates) {
    SenseScores scores =
        scorer.score(sentence, cand.token_indices, cand.entry->senses, /*is_mwe=*/true);
    if (!scores.not_mwe) throw Error("scorer returned no not-an-MWE score for an MWE candidate");
    if (scores.max_sense_score() > *scores.not_mwe)
      out.push_back(ScoredCandidate{cand, std::move(scores)});
  }
  return out;
}

std::vector<MweCandidate> detect_consecutive_nouns(const Sentence& sentence) {
  auto is_noun = [](const Token& t) { return t.upos == "NOUN" || t.upos == "PROPN"; };
  std::vector<MweCandidate> out;
  const int n = static_cast<int>(sentence.tokens.size());
  int i = 0;
  while (i < n) {
    if (!is_noun(sentence.tokens[i])) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < n && is_noun(sentence.tokens[j + 1])) ++j;
    if (j > i) {
      LexiconEntry entry;
      std::string key;
      for (int k = i; k <= j; ++k) {
        if (k > i) key += "_";
        key += to_lower_ascii(sentence.tokens[k].lemma);
      }
      entry.key = key;
      entry.pos = Pos::Noun;
      std::string gloss = key;
      std::replace(gloss.begin(), gloss.end(), '_', ' ');
      entry.senses.push_back(Sense{key + ".nc.01", gloss, 0});
      for (int k = i; k <= j; ++k)
        entry.constituents.push_back(to_lower_ascii(sentence.tokens[k].lemma));

      MweCandidate cand;
      cand.entry = std::make_shared<const LexiconEntry>(std::move(entry));
      for (int k = i; k <= j; ++k) cand.token_indices.push_back(k);
      cand.sent_id = sentence.sent_id;
      out.push_back(std::move(cand));
    }
    i = j + 1;
  }
  return out;
}

std::vector<PredictedMwe> resolve_overlaps(std::vector<ScoredCandidate> scored) {
  struct Ranked {
    const ScoredCandidate* sc;
    double margin;
    std::vector<int> sorted;
  };
  std::vector<Ranked> ranked;
  ranked.reserve(scored.size());
  for (const auto& sc : scored)
    ranked.push_back(Ranked{&sc, sc.margin(), sc.candidate.sorted_indices()});

  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.margin != b.margin) return a.margin > b.margin;
    if (a.sorted.front() != b.sorted.front()) return a.sorted.front() < b.sorted.front();
    auto span_a = a.sorted.back() - a.sorted.front();
    auto span_b = b.sorted.back() - b.sorted.front();
    if (span_a != span_b) return span_a > span_b;
    if (a.sorted != b.sorted) return a.sorted < b.sorted;
    return a.sc->candidate.entry->key < b.sc->candidate.entry->key;
  });

  std::set<int> taken;
  std::vector<PredictedMwe> out;
  for (const auto& r : ranked) {
    bool overlaps = std::any_of(r.sorted.begin(), r.sorted.end(),
                                [&](int idx) { return taken.count(idx) > 0; });
    if (overlaps) continue;
    taken.insert(r.sorted.begin(), r.sorted.end());

    PredictedMwe p;
    p.token_indices = r.sorted;
    p.entry_key = r.sc->candidate.entry->key;
    p.entry = r.sc->candidate.entry;
    p.margin = r.margin;
    // best sense by score, ties to the lower rank
    const auto& per_sense = r.sc->scores.per_sense;
    std::size_t best = 0;
    for (std::size_t i = 1; i < per_sense.size(); ++i)
      if (per_sense[i].second > per_sense[best].second) best = i;
    p.chosen_sense = per_sense.empty() ? std::string(kNotMweLabel) : per_sense[best].first;
    out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(), [](const PredictedMwe& a, const PredictedMwe& b) {
    return a.token_indices < b.token_indices;
  });
  return out;
}

std::vector<PredictedMwe> run_pipeline(const Sentence& sentence, const Lexicon& lexicon,
                                       const PipelineConfig& config, const Scorer* scorer,
                                       PipelineStats* stats) {
  config.validate();
  if (config.use_encoder_filter && scorer == nullptr)
    throw ConfigError("use_encoder_filter requires a scorer");

  auto candidates = detect_exhaustive(sentence, lexicon, config, stats);
  if (config.ordered_only) candidates = filter_ordered(std::move(candidates));
  candidates = filter_max_gappiness(std::move(candidates), config.max_gap);
  if (config.verbal_only) candidates = filter_verbal_only(std::move(candidates));

  std::vector<ScoredCandidate> scored;
  if (config.use_encoder_filter) {
    scored = filter_encoder(candidates, *scorer, sentence);
  } else {
    for (auto& c : candidates) scored.push_back(ScoredCandidate{std::move(c), SenseScores{}});
  }
  if (config.noun_compound_detector)
    for (auto& c : detect_consecutive_nouns(sentence))
      scored.push_back(ScoredCandidate{std::move(c), SenseScores{}});

  // Rule-based candidates carry no scores; give the resolver the sense list
  // at score 0 so the first sense wins.
  for (auto& sc : scored)
    if (sc.scores.per_sense.empty())
      for (const auto& s : sc.candidate.entry->senses)
        sc.scores.per_sense.emplace_back(s.sense_id, 0.0);

  return resolve_overlaps(std::move(scored));
}

// --- training data construction ---

NegativeSet generate_negatives(const std::vector<Sentence>& sentences, const Lexicon& lexicon,
                               const PipelineConfig& config, double target_ratio,
                               std::uint64_t seed) {
  if (!(target_ratio > 0.0 && target_ratio < 1.0))
    throw ConfigError("negative target_ratio must lie in (0, 1)");
  config.validate();

  std::size_t positives = 0;
  std::vector<MweCandidate> eligible;
  for (const auto& s : sentences) {
    std::set<std::vector<int>> gold_sets;
    for (const auto& m : s.gold_mwes) {
      auto idx = m.token_indices;
      std::sort(idx.begin(), idx.end());
      gold_sets.insert(idx);
    }
    for (const auto& mk : s.mwe_marks) {
      if (mk.not_mwe) continue;
      ++positives;
      gold_sets.insert(mk.token_indices);
    }
    for (const auto& m : s.gold_mwes) {
      auto idx = m.token_indices;
      std::sort(idx.begin(), idx.end());
      bool counted = std::any_of(s.mwe_marks.begin(), s.mwe_marks.end(),
                                 [&](const MweMark& mk) { return mk.token_indices == idx; });
      if (!counted) ++positives;
    }

    for (auto& cand : detect_exhaustive(s, lexicon, config, nullptr)) {
      const bool inverted = !cand.in_order() || cand.gap() > config.max_gap;
      if (!inverted) continue;
      if (gold_sets.count(cand.sorted_indices())) continue;
      eligible.push_back(std::move(cand));
    }
  }

  NegativeSet result;
  result.desired = static_cast<std::size_t>(
      std::llround(static_cast<double>(positives) * target_ratio / (1.0 - target_ratio)));

  std::vector<std::size_t> order(eligible.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<bool> selected(eligible.size(), false);
  for (std::size_t i = 0; i < std::min(result.desired, order.size()); ++i)
    selected[order[i]] = true;
  for (std::size_t i = 0; i < eligible.size(); ++i)
    if (selected[i]) result.negatives.push_back(std::move(eligible[i]));

  result.shortfall = result.negatives.size() < result.desired;
  return result;
}

namespace {

std::vector<std::string> split_underscore(const std::string& s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t us = s.find('_', start);
    if (us == std::string::npos) {
      parts.push_back(s.substr(start));
      break;
    }
    parts.push_back(s.substr(start, us - start));
    start = us + 1;
  }
  return parts;
}

int form_word_count(const std::string& form) {
  int count = 0;
  bool in_word = false;
  for (char c : form) {
    bool sep = c == ' ' || c == '_';
    if (!sep && !in_word) ++count;
    in_word = !sep;
  }
  return count;
}

}  // namespace

void mark_semcor_mwes(std::vector<Sentence>& sentences, PipelineStats* stats) {
  for (auto& s : sentences) {
    std::set<int> marked;
    for (const auto& mk : s.mwe_marks)
      marked.insert(mk.token_indices.begin(), mk.token_indices.end());
    for (const auto& t : s.tokens) {
      if (t.lemma.find('_') == std::string::npos) continue;
      if (marked.count(t.index)) continue;
      auto key = to_lower_ascii(t.lemma);
      auto parts = split_underscore(key);
      bool malformed = parts.size() < 2 ||
                       std::any_of(parts.begin(), parts.end(),
                                   [](const std::string& p) { return p.empty(); });
      if (malformed) {
        if (stats) ++stats->malformed_mwe_lemmas;
        continue;
      }
      MweMark mk;
      mk.token_indices = {t.index};
      mk.entry_key = key;
      mk.gold_sense = t.gold_sense;
      s.mwe_marks.push_back(std::move(mk));
      marked.insert(t.index);
    }
  }
}

void attach_stranded_constituents(Sentence& sentence, const Lexicon& lexicon,
                                  PipelineStats* stats) {
  (void)lexicon;  // constituents come from the mark's key itself
  std::set<int> claimed;
  for (const auto& mk : sentence.mwe_marks)
    claimed.insert(mk.token_indices.begin(), mk.token_indices.end());

  for (auto& mk : sentence.mwe_marks) {
    if (mk.token_indices.size() != 1) continue;
    auto constituents = split_underscore(mk.entry_key);
    if (constituents.size() < 2) continue;
    const Token& anchor = sentence.tokens[mk.token_indices.front()];
    // a token whose form already spells out every constituent is complete
    if (form_word_count(anchor.form) >= static_cast<int>(constituents.size())) continue;

    // which constituent the anchor realizes: form match, else the first
    std::size_t anchor_ci = 0;
    auto anchor_form = to_lower_ascii(anchor.form);
    for (std::size_t ci = 0; ci < constituents.size(); ++ci)
      if (constituents[ci] == anchor_form) {
        anchor_ci = ci;
        break;
      }

    std::vector<std::string> remaining;
    for (std::size_t ci = 0; ci < constituents.size(); ++ci)
      if (ci != anchor_ci) remaining.push_back(constituents[ci]);

    // candidate positions per remaining constituent: unlabeled tokens only
    std::vector<std::vector<int>> options(remaining.size());
    for (std::size_t ri = 0; ri < remaining.size(); ++ri)
      for (const auto& t : sentence.tokens) {
        if (claimed.count(t.index) || t.gold_sense) continue;
        if (to_lower_ascii(t.lemma) == remaining[ri]) options[ri].push_back(t.index);
      }

    std::vector<int> best;
    int best_gap = -1;
    std::vector<int> current{anchor.index};
    std::set<int> used{anchor.index};
    long budget = 10000;

    std::function<void(std::size_t)> search = [&](std::size_t ri) {
      if (budget-- <= 0) return;
      if (ri == remaining.size()) {
        auto idx = current;
        std::sort(idx.begin(), idx.end());
        int gap = (idx.back() - idx.front() + 1) - static_cast<int>(idx.size());
        // ties to the right: prefer the lexicographically larger index set
        if (best_gap < 0 || gap < best_gap || (gap == best_gap && idx > best)) {
          best = idx;
          best_gap = gap;
        }
        return;
      }
      for (int pos : options[ri]) {
        if (used.count(pos)) continue;
        used.insert(pos);
        current.push_back(pos);
        search(ri + 1);
        current.pop_back();
        used.erase(pos);
      }
    };
    search(0);

    if (best.empty()) {
      mk.unattached = true;
      if (stats) ++stats->unattached_marks;
      continue;
    }
    mk.token_indices = best;
    mk.unattached = false;
    claimed.insert(best.begin(), best.end());
  }
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open pipeline config: " + path.string());
  PipelineConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw ConfigError("bad config line " + std::to_string(line_no) + ": " + line);
      continue;
    }
    auto strip = [](std::string s) {
      auto a = s.find_first_not_of(" \t\r");
      if (a == std::string::npos) return std::string();
      auto b = s.find_last_not_of(" \t\r");
      return s.substr(a, b - a + 1);
    };
    std::string key = strip(line.substr(0, eq));
    std::string value = strip(line.substr(eq + 1));
    auto parse_bool = [&](const std::string& v) {
      if (v == "true" || v == "1") return true;
      if (v == "false" || v == "0") return false;
      throw ConfigError("bad boolean '" + v + "' for " + key);
    };
    try {
      if (key == "max_gap") cfg.max_gap = std::stoi(value);
      else if (key == "ordered_only") cfg.ordered_only = parse_bool(value);
      else if (key == "use_encoder_filter") cfg.use_encoder_filter = parse_bool(value);
      else if (key == "verbal_only") cfg.verbal_only = parse_bool(value);
      else if (key == "noun_compound_detector") cfg.noun_compound_detector = parse_bool(value);
      else if (key == "max_candidates_per_entry") cfg.max_candidates_per_entry = std::stoi(value);
      else throw ConfigError("unknown config key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw ConfigError("bad value '" + value + "' for " + key);
    }
  }
  cfg.validate();
  return cfg;
}

}  // namespace glosspipe
