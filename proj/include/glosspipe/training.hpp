#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "glosspipe/corpus.hpp"
#include "glosspipe/lexicon.hpp"
#include "glosspipe/pipeline.hpp"
#include "glosspipe/scorer.hpp"

namespace glosspipe {

// One labeled scoring instance. gold is a sense id from `senses`, or the
// not-an-MWE label (MWE examples only).
struct TrainingExample {
  int sentence_index = 0;
  std::vector<int> target_indices;
  std::vector<Sense> senses;
  std::string gold;
  bool is_mwe = false;
};

struct BatchSlot {
  std::size_t example_index = 0;
  bool masked = false;  // deferred to the next batch
};

// Active (unmasked) slot count equals the configured batch size except in the
// final batch; masked slots re-appear active at the front of the next batch.
struct Batch {
  std::vector<BatchSlot> slots;
  std::size_t active_count = 0;
};

struct TrainConfig {
  int epochs = 15;
  double learning_rate = 0.05;
  int batch_size = 32;
  std::uint64_t seed = 0;
  double dev_fraction = 0.1;      // sentences held out when no dev split given
  double negative_ratio = 0.5;
  ScorerKind scorer_kind = ScorerKind::Biencoder;
  // checkpoint selection metric: example accuracy ("accuracy") or binary
  // is-an-MWE F1 over MWE examples ("mwe-f1", the fine-tuning setting)
  std::string dev_metric = "accuracy";
};

// "key = value" file with the TrainConfig fields (epochs, learning_rate,
// batch_size, seed, dev_fraction, negative_ratio, scorer, dev_metric).
TrainConfig load_train_config(const std::filesystem::path& path);

// Cross-entropy over the example's label space (senses plus the not-an-MWE
// label for MWEs), computed with a max-subtracted log-sum-exp.
double loss(const SenseScores& scores, const TrainingExample& example);

// Mean gradient over the batch's active examples; masked slots contribute
// nothing. Returns the mean loss alongside.
struct BatchGradient {
  ScorerWeights grads;  // congruent to the weights
  double mean_loss = 0.0;
};
BatchGradient loss_gradient(const ScorerWeights& weights, ScorerKind kind,
                            const std::vector<Sentence>& sentences,
                            std::span<const TrainingExample> examples, const Batch& batch);

// Seeded shuffle of sentence order; sentences are appended whole and the
// boundary sentence's overflow examples are masked and carried over.
std::vector<Batch> build_batches(std::span<const TrainingExample> examples, int batch_size,
                                 std::uint64_t seed);

// Builds examples from a processed corpus: sense-labeled single words plus
// MWE marks (positive and negative). Instances whose lemma or gold sense is
// missing from the lexicon are skipped and counted.
struct ExtractedExamples {
  std::vector<TrainingExample> examples;
  std::size_t skipped_missing_entry = 0;
  std::size_t skipped_missing_sense = 0;
};
ExtractedExamples extract_examples(const std::vector<Sentence>& sentences,
                                   const Lexicon& lexicon);

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_metric = 0.0;
  double dev_accuracy = 0.0;
  double dev_mwe_f1 = 0.0;
};

struct TrainResult {
  ScorerWeights best_weights;
  std::vector<EpochMetrics> history;
  int best_epoch = -1;
  std::vector<std::size_t> dev_sentence_indices;
};

// SGD over the batched cross-entropy loss; evaluates the dev split once per
// epoch and returns the best-scoring weights. Throws DivergedLoss on a
// non-finite loss.
TrainResult train(ScorerWeights weights, const std::vector<Sentence>& sentences,
                  const Lexicon& lexicon, const TrainConfig& config,
                  const std::vector<std::size_t>* dev_sentences = nullptr);

// Same loop over a prebuilt example set (e.g. a fine-tuning set).
TrainResult train_on_examples(ScorerWeights weights, const std::vector<Sentence>& sentences,
                              std::vector<TrainingExample> examples, const TrainConfig& config,
                              const std::vector<std::size_t>* dev_sentences = nullptr);

// Fine-tuning set from binary MWE data: gold MWEs found in the lexicon become
// positives labeled with the first sense; pipeline outputs matching no gold
// MWE become not-an-MWE negatives.
std::vector<TrainingExample> build_finetune_set(const ScorerWeights& weights,
                                                const std::vector<Sentence>& sentences,
                                                const Lexicon& lexicon,
                                                const PipelineConfig& pipeline_config,
                                                ScorerKind kind);

// Argmax prediction for one example (sense id or the not-an-MWE label).
std::string predict_example(const ScorerWeights& weights, ScorerKind kind,
                            const Sentence& sentence, const TrainingExample& example);

void write_metrics_history(const std::vector<EpochMetrics>& history,
                           const std::filesystem::path& path);

}  // namespace glosspipe
