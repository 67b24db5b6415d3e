#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glosspipe/corpus.hpp"
#include "glosspipe/lexicon.hpp"
#include "glosspipe/scorer.hpp"

namespace glosspipe {

// A lexicon entry bound to concrete token positions. token_indices follows
// constituent order: the i-th index realizes the i-th constituent.
struct MweCandidate {
  EntryPtr entry;
  std::vector<int> token_indices;
  std::string sent_id;

  bool in_order() const;
  // Number of non-constituent tokens spanned: (max - min + 1) - |indices|.
  int gap() const;
  std::vector<int> sorted_indices() const;
};

struct PredictedMwe {
  std::vector<int> token_indices;  // sorted
  std::string entry_key;
  std::string chosen_sense;        // never the not-an-MWE label for emitted predictions
  double margin = 0.0;             // best sense score - not-an-MWE score (0 for rule-based)
  EntryPtr entry;                  // backing entry, kept for fine-tuning
};

struct PipelineConfig {
  int max_gap = 3;
  bool ordered_only = true;
  bool use_encoder_filter = false;
  bool verbal_only = false;
  bool noun_compound_detector = false;
  int max_candidates_per_entry = 64;

  void validate() const;  // throws ConfigError
};

// Warning counters; candidate truncation is not an error.
struct PipelineStats {
  std::uint64_t cap_truncations = 0;
  std::uint64_t malformed_mwe_lemmas = 0;
  std::uint64_t unattached_marks = 0;
};

// Every injective assignment of an MWE entry's constituents to distinct
// matching token positions, for every entry whose constituent multiset fits
// the sentence's lemma multiset. Deterministic: entries by (key, pos), index
// tuples lexicographic. Per-entry output capped at max_candidates_per_entry.
std::vector<MweCandidate> detect_exhaustive(const Sentence& sentence, const Lexicon& lexicon,
                                            const PipelineConfig& config,
                                            PipelineStats* stats = nullptr);

std::vector<MweCandidate> filter_ordered(std::vector<MweCandidate> candidates);
std::vector<MweCandidate> filter_max_gappiness(std::vector<MweCandidate> candidates, int max_gap);
std::vector<MweCandidate> filter_verbal_only(std::vector<MweCandidate> candidates);

struct ScoredCandidate {
  MweCandidate candidate;
  SenseScores scores;

  double margin() const;  // max sense score - not-an-MWE score; 0 without scores
};

// Retains exactly the candidates with max_i phi(w, s_i) > phi(w, n), strict.
std::vector<ScoredCandidate> filter_encoder(std::span<const MweCandidate> candidates,
                                            const Scorer& scorer, const Sentence& sentence);

// Each maximal run of >= 2 consecutive noun tokens (UPOS NOUN/PROPN) becomes
// one candidate backed by a synthetic single-sense entry.
std::vector<MweCandidate> detect_consecutive_nouns(const Sentence& sentence);

// Greedy selection by descending margin, ties by smaller first index then
// longer span; output groups are pairwise token-disjoint.
std::vector<PredictedMwe> resolve_overlaps(std::vector<ScoredCandidate> scored);

// detect -> (ordered?) -> gap -> (verbal?) -> (encoder?) -> (+noun runs?) -> resolve.
// use_encoder_filter requires a scorer (ConfigError otherwise).
std::vector<PredictedMwe> run_pipeline(const Sentence& sentence, const Lexicon& lexicon,
                                       const PipelineConfig& config,
                                       const Scorer* scorer = nullptr,
                                       PipelineStats* stats = nullptr);

// --- training data construction ---

struct NegativeSet {
  std::vector<MweCandidate> negatives;  // gold label: not-an-MWE
  std::size_t desired = 0;
  bool shortfall = false;  // corpus could not supply the requested ratio
};

// Inverted-filter negatives: candidates that are out of order and/or gappier
// than max_gap, never matching a gold MWE index set, sampled (seeded) so that
// negatives are about target_ratio of all MWE examples.
NegativeSet generate_negatives(const std::vector<Sentence>& sentences, const Lexicon& lexicon,
                               const PipelineConfig& config, double target_ratio,
                               std::uint64_t seed);

// Marks tokens whose lemma contains '_' as MWE training examples.
// Degenerate underscore lemmas are skipped and counted.
void mark_semcor_mwes(std::vector<Sentence>& sentences, PipelineStats* stats = nullptr);

// Completes single-token MWE marks whose constituents are realized by
// separate unlabeled tokens; nearest completion wins (minimal gap, ties to
// the right). Marks with no completion are flagged unattached.
void attach_stranded_constituents(Sentence& sentence, const Lexicon& lexicon,
                                  PipelineStats* stats = nullptr);

// Key-value pipeline config file ("key = value" lines, '#' comments).
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

}  // namespace glosspipe
