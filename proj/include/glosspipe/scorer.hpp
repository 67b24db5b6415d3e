#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "glosspipe/corpus.hpp"
#include "glosspipe/lexicon.hpp"
#include "glosspipe/tensor.hpp"

namespace glosspipe {

// One self-attention block's parameter set.
struct AttentionParams {
  Tensor wq, wk, wv, wo;  // each d x d
};

struct ScorerDims {
  int d = 64;
  int m = 16;               // code count
  int vocab_size = 16384;   // hashed word buckets; bucket 0 is [CLS]
  int max_len = 128;
};

// Full parameter set for the desk-scale encoder and both scoring heads.
// Token/position embeddings are shared between the context and gloss
// encoders; the attention blocks are separate.
struct ScorerWeights {
  ScorerDims dims;
  Tensor token_embeddings;     // vocab x d
  Tensor position_embeddings;  // max_len x d
  AttentionParams context_attention;
  AttentionParams gloss_attention;
  Tensor r_n;                  // 1 x d, the not-an-MWE sense vector
  Tensor codes_word;           // m x d
  Tensor codes_mwe;            // m x d
  Tensor codes_word_target, codes_word_nontarget;  // distinct-codes variants
  Tensor codes_mwe_target, codes_mwe_nontarget;

  static ScorerWeights zeros(const ScorerDims& dims);
  static ScorerWeights random_init(const ScorerDims& dims, std::uint64_t seed,
                                   double stddev = 0.1);

  // Throws Error unless all tensors are finite and d >= 8, m >= 1.
  void validate() const;

  template <class F>
  void for_each_tensor(F&& f) {
    f("token_embeddings", token_embeddings);
    f("position_embeddings", position_embeddings);
    f("context_attention.wq", context_attention.wq);
    f("context_attention.wk", context_attention.wk);
    f("context_attention.wv", context_attention.wv);
    f("context_attention.wo", context_attention.wo);
    f("gloss_attention.wq", gloss_attention.wq);
    f("gloss_attention.wk", gloss_attention.wk);
    f("gloss_attention.wv", gloss_attention.wv);
    f("gloss_attention.wo", gloss_attention.wo);
    f("r_n", r_n);
    f("codes_word", codes_word);
    f("codes_mwe", codes_mwe);
    f("codes_word_target", codes_word_target);
    f("codes_word_nontarget", codes_word_nontarget);
    f("codes_mwe_target", codes_mwe_target);
    f("codes_mwe_nontarget", codes_mwe_nontarget);
  }
  template <class F>
  void for_each_tensor(F&& f) const {
    const_cast<ScorerWeights*>(this)->for_each_tensor(
        [&](const char* name, Tensor& t) { f(name, static_cast<const Tensor&>(t)); });
  }
};

// Scores for one candidate: one entry per lexicon sense in rank order, plus
// the not-an-MWE score when the target is an MWE candidate.
struct SenseScores {
  std::vector<std::pair<std::string, double>> per_sense;  // (sense_id, phi)
  std::optional<double> not_mwe;

  double max_sense_score() const;
};

struct EncodedContext {
  Tensor vectors;  // n x d, one row per token
  int token_count() const { return vectors.rows; }
};

// Hashed word-level vocabulary. Bucket 0 is reserved for [CLS]; words map
// into [1, vocab_size).
int token_bucket(std::string_view word, int vocab_size);

// Lowercased whitespace word pieces of a gloss.
std::vector<std::string> gloss_word_pieces(std::string_view gloss);

// Lowercased token forms, the encoder's input strings.
std::vector<std::string> sentence_token_strings(const Sentence& sentence);

// --- scoring operations ---

EncodedContext encode_context(const ScorerWeights& w, const Sentence& sentence);

// Mean of the listed token rows.
Tensor word_representation(const EncodedContext& ctx, std::span<const int> indices);

// Encodes "[CLS] gloss words..." with the gloss attention block and returns
// the position-0 row. Glosses longer than max_len - 1 pieces are truncated.
Tensor gloss_representation(const ScorerWeights& w, std::string_view gloss);

SenseScores score_biencoder(const ScorerWeights& w, const Sentence& sentence,
                            std::span<const int> indices, std::span<const Sense> senses,
                            bool is_mwe);

// Argmax over senses (and the not-an-MWE label when present). Ties go to the
// lower sense rank; the not-an-MWE label loses ties.
std::string predict_sense(const SenseScores& scores);

// First attention stage: each code row attends over the context rows.
Tensor poly_code_context_attention(const Tensor& codes, const EncodedContext& ctx);

struct GlossAttended {
  Tensor y_final;  // 1 x d
  double score = 0.0;
};

// Second attention stage: the sense vector attends over the code-attended
// context; score is y_final . r_s.
GlossAttended poly_gloss_attention(const Tensor& y_ctxt, const Tensor& r_s);

// Builds the per-position query matrices for distinct-codes attention:
// position j uses q_t when m_t[j] == 1, q_nt otherwise. Masks must be a 0/1
// partition of the positions.
std::vector<Tensor> distinct_codes_query(std::span<const int> m_t, std::span<const int> m_nt,
                                         const Tensor& q_t, const Tensor& q_nt);

SenseScores score_polyencoder(const ScorerWeights& w, const Sentence& sentence,
                              std::span<const int> indices, std::span<const Sense> senses,
                              bool is_mwe, bool distinct_codes);

// --- scorer interface consumed by the pipeline ---

class Scorer {
public:
  virtual ~Scorer() = default;
  virtual SenseScores score(const Sentence& sentence, std::span<const int> indices,
                            std::span<const Sense> senses, bool is_mwe) const = 0;
};

enum class ScorerKind { Biencoder, Polyencoder, PolyencoderDistinct };

std::optional<ScorerKind> scorer_kind_from_string(const std::string& name);
std::string scorer_kind_to_string(ScorerKind kind);

class WeightScorer : public Scorer {
public:
  WeightScorer(std::shared_ptr<const ScorerWeights> weights, ScorerKind kind);
  SenseScores score(const Sentence& sentence, std::span<const int> indices,
                    std::span<const Sense> senses, bool is_mwe) const override;
  const ScorerWeights& weights() const { return *weights_; }
  ScorerKind kind() const { return kind_; }

private:
  std::shared_ptr<const ScorerWeights> weights_;
  ScorerKind kind_;
};

// Bi-encoder scoring over externally computed vectors, so full-scale encoders
// can drive the pipeline. File format (JSON):
//   {"d": int, "r_n": [d floats],
//    "sentences": {sent_id: [[d floats] per token]},
//    "glosses": {sense_id: [d floats]}}
class PrecomputedScorer : public Scorer {
public:
  explicit PrecomputedScorer(const std::filesystem::path& vectors_file);
  SenseScores score(const Sentence& sentence, std::span<const int> indices,
                    std::span<const Sense> senses, bool is_mwe) const override;

private:
  int d_ = 0;
  Tensor r_n_;
  std::map<std::string, Tensor> sentence_vectors_;
  std::map<std::string, Tensor> gloss_vectors_;
};

// --- checkpoints ---
// Flat binary layout: magic "GPCKPT01", u32 d/m/vocab_size/max_len, then the
// tensors in for_each_tensor order as little-endian f64 row-major. A JSON
// manifest describing the layout is written next to the file (path + ".json").
void save_checkpoint(const ScorerWeights& w, const std::filesystem::path& path);
ScorerWeights load_checkpoint(const std::filesystem::path& path);

}  // namespace glosspipe
