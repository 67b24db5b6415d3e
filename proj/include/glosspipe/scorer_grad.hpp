#pragma once

#include <span>
#include <string>
#include <vector>

#include "glosspipe/scorer.hpp"

// Cached forward passes and hand-written backward passes for the three
// scoring paths. Training and the gradient checks go through these; the
// public scoring ops in scorer.hpp reuse the same forwards so there is a
// single source of truth for the math.

namespace glosspipe {

struct EncoderCache {
  std::vector<int> buckets;
  Tensor x;     // embeddings + positions, n x d
  Tensor q, k, v;
  Tensor attn;  // row-wise softmax(q k^T / sqrt(d))
  Tensor h;     // attn * v
  Tensor out;   // x + h * wo
};

EncoderCache encode_tokens_with_cache(const ScorerWeights& w, const AttentionParams& params,
                                      std::vector<int> buckets);

std::vector<int> context_buckets(const ScorerWeights& w, std::span<const std::string> words);
std::vector<int> gloss_buckets(const ScorerWeights& w, std::string_view gloss);

// Accumulates parameter gradients for one encoder application.
void encoder_backward(const ScorerWeights& w, const AttentionParams& params,
                      const EncoderCache& cache, const Tensor& d_out, Tensor& g_tok,
                      Tensor& g_pos, AttentionParams& g_params);

// Per-labeled-vector cache of the poly second attention stage.
struct PolySenseCache {
  Tensor r_s;      // 1 x d query (gloss row or r_n)
  std::vector<double> attn;  // softmax over the m code rows
  Tensor y_final;  // 1 x d
};

// Everything needed to score one example and push gradients back.
struct ExampleForward {
  ScorerKind kind = ScorerKind::Biencoder;
  bool is_mwe = false;
  std::vector<int> indices;
  EncoderCache ctx;
  std::vector<EncoderCache> glosses;  // one per sense
  Tensor r_w;                          // bi-encoder target representation
  // poly state
  std::vector<int> target_mask;        // distinct codes: 1 at target positions
  Tensor code_logits;                  // m x n
  Tensor code_weights;                 // m x n, row softmax
  Tensor y;                            // m x d code-attended context
  std::vector<PolySenseCache> sense_caches;  // senses then (if MWE) not-an-MWE
  // outputs
  std::vector<double> phi;             // per sense
  std::optional<double> phi_n;
};

ExampleForward forward_example(const ScorerWeights& w, ScorerKind kind,
                               std::span<const std::string> context_words,
                               std::span<const int> indices, std::span<const Sense> senses,
                               bool is_mwe);

// d_phi has one entry per sense; d_phi_n is ignored unless the example is an
// MWE. Gradients accumulate into `grads` (a zero-initialized ScorerWeights).
void backward_example(const ScorerWeights& w, const ExampleForward& fwd,
                      std::span<const double> d_phi, double d_phi_n, ScorerWeights& grads);

}  // namespace glosspipe
