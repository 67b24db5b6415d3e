#include "glosspipe/scorer.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "glosspipe/errors.hpp"
#include "glosspipe/scorer_grad.hpp"

namespace glosspipe {

using nlohmann::json;

// --- weights ---

ScorerWeights ScorerWeights::zeros(const ScorerDims& dims) {
  ScorerWeights w;
  w.dims = dims;
  w.token_embeddings = Tensor(dims.vocab_size, dims.d);
  w.position_embeddings = Tensor(dims.max_len, dims.d);
  for (AttentionParams* ap : {&w.context_attention, &w.gloss_attention}) {
    ap->wq = Tensor(dims.d, dims.d);
    ap->wk = Tensor(dims.d, dims.d);
    ap->wv = Tensor(dims.d, dims.d);
    ap->wo = Tensor(dims.d, dims.d);
  }
  w.r_n = Tensor(1, dims.d);
  for (Tensor* t : {&w.codes_word, &w.codes_mwe, &w.codes_word_target, &w.codes_word_nontarget,
                    &w.codes_mwe_target, &w.codes_mwe_nontarget})
    *t = Tensor(dims.m, dims.d);
  return w;
}

ScorerWeights ScorerWeights::random_init(const ScorerDims& dims, std::uint64_t seed,
                                         double stddev) {
  ScorerWeights w = zeros(dims);
  std::mt19937_64 rng(seed);
  w.for_each_tensor([&](const char*, Tensor& t) { randn_fill(t, rng, stddev); });
  return w;
}

void ScorerWeights::validate() const {
  if (dims.d < 8) throw Error("scorer hidden size must be at least 8");
  if (dims.m < 1) throw Error("scorer code count must be at least 1");
  if (dims.vocab_size < 2) throw Error("scorer vocabulary must have at least 2 buckets");
  if (dims.max_len < 2) throw Error("scorer max_len must be at least 2");
  if (r_n.cols != dims.d) throw Error("r_n dimensionality must equal the hidden size");
  for_each_tensor([&](const char* name, const Tensor& t) {
    if (!t.all_finite()) throw Error(std::string("non-finite values in tensor ") + name);
  });
}

double SenseScores::max_sense_score() const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [id, score] : per_sense) best = std::max(best, score);
  return best;
}

// --- tokenization ---

int token_bucket(std::string_view word, int vocab_size) {
  return 1 + static_cast<int>(fnv1a64(word) % static_cast<std::uint64_t>(vocab_size - 1));
}

std::vector<std::string> gloss_word_pieces(std::string_view gloss) {
  std::vector<std::string> pieces;
  std::string cur;
  for (char c : gloss) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) pieces.push_back(std::move(cur)), cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  if (!cur.empty()) pieces.push_back(std::move(cur));
  return pieces;
}

std::vector<std::string> sentence_token_strings(const Sentence& sentence) {
  std::vector<std::string> out;
  out.reserve(sentence.tokens.size());
  for (const auto& t : sentence.tokens) out.push_back(to_lower_ascii(t.form));
  return out;
}

std::vector<int> context_buckets(const ScorerWeights& w, std::span<const std::string> words) {
  std::vector<int> buckets;
  buckets.reserve(words.size());
  for (const auto& word : words) buckets.push_back(token_bucket(word, w.dims.vocab_size));
  return buckets;
}

std::vector<int> gloss_buckets(const ScorerWeights& w, std::string_view gloss) {
  auto pieces = gloss_word_pieces(gloss);
  if (pieces.empty()) throw Error("gloss is empty after trimming");
  if (static_cast<int>(pieces.size()) > w.dims.max_len - 1)
    pieces.resize(w.dims.max_len - 1);
  std::vector<int> buckets{0};  // [CLS]
  for (const auto& p : pieces) buckets.push_back(token_bucket(p, w.dims.vocab_size));
  return buckets;
}

// --- encoder ---

EncoderCache encode_tokens_with_cache(const ScorerWeights& w, const AttentionParams& params,
                                      std::vector<int> buckets) {
  const int n = static_cast<int>(buckets.size());
  const int d = w.dims.d;
  if (n > w.dims.max_len) throw SentenceTooLong(n, w.dims.max_len);

  EncoderCache c;
  c.buckets = std::move(buckets);
  c.x = Tensor(n, d);
  for (int i = 0; i < n; ++i) {
    auto xi = c.x.row(i);
    axpy(1.0, w.token_embeddings.row(c.buckets[i]), xi);
    axpy(1.0, w.position_embeddings.row(i), xi);
  }
  if (n == 0) {
    c.out = Tensor(0, d);
    return c;
  }
  c.q = matmul(c.x, params.wq);
  c.k = matmul(c.x, params.wk);
  c.v = matmul(c.x, params.wv);
  c.attn = matmul_nt(c.q, c.k);
  scale_inplace(c.attn, 1.0 / std::sqrt(static_cast<double>(d)));
  softmax_rows_inplace(c.attn);
  c.h = matmul(c.attn, c.v);
  c.out = matmul(c.h, params.wo);
  add_inplace(c.out, c.x);  // residual
  return c;
}

void encoder_backward(const ScorerWeights& w, const AttentionParams& params,
                      const EncoderCache& cache, const Tensor& d_out, Tensor& g_tok,
                      Tensor& g_pos, AttentionParams& g_params) {
  const int n = cache.out.rows;
  const int d = w.dims.d;
  if (n == 0) return;

  Tensor d_x = d_out;  // residual branch
  add_inplace(g_params.wo, matmul_tn(cache.h, d_out));
  Tensor d_h = matmul_nt(d_out, params.wo);
  Tensor d_attn = matmul_nt(d_h, cache.v);
  Tensor d_v = matmul_tn(cache.attn, d_h);

  Tensor d_scores(n, n);
  for (int i = 0; i < n; ++i)
    softmax_backward(cache.attn.row(i), d_attn.row(i), d_scores.row(i));
  scale_inplace(d_scores, 1.0 / std::sqrt(static_cast<double>(d)));

  Tensor d_q = matmul(d_scores, cache.k);
  Tensor d_k = matmul_tn(d_scores, cache.q);

  add_inplace(d_x, matmul_nt(d_q, params.wq));
  add_inplace(d_x, matmul_nt(d_k, params.wk));
  add_inplace(d_x, matmul_nt(d_v, params.wv));
  add_inplace(g_params.wq, matmul_tn(cache.x, d_q));
  add_inplace(g_params.wk, matmul_tn(cache.x, d_k));
  add_inplace(g_params.wv, matmul_tn(cache.x, d_v));

  for (int i = 0; i < n; ++i) {
    axpy(1.0, d_x.row(i), g_tok.row(cache.buckets[i]));
    axpy(1.0, d_x.row(i), g_pos.row(i));
  }
}

// --- forward / backward over the three scoring paths ---

namespace {

void check_indices(std::span<const int> indices, int n) {
  if (indices.empty()) throw Error("target index list must be non-empty");
  for (int idx : indices)
    if (idx < 0 || idx >= n) throw IndexOutOfRange(idx, static_cast<std::size_t>(n));
}

Tensor mean_rows(const Tensor& rows, std::span<const int> indices) {
  Tensor r(1, rows.cols);
  for (int idx : indices) axpy(1.0, rows.row(idx), r.row(0));
  scale_inplace(r, 1.0 / static_cast<double>(indices.size()));
  return r;
}

// Code row used for position j under the current path.
const Tensor& codes_for_position(const ScorerWeights& w, const ExampleForward& fwd, int j) {
  if (fwd.kind == ScorerKind::PolyencoderDistinct) {
    bool target = fwd.target_mask[j] != 0;
    if (fwd.is_mwe) return target ? w.codes_mwe_target : w.codes_mwe_nontarget;
    return target ? w.codes_word_target : w.codes_word_nontarget;
  }
  return fwd.is_mwe ? w.codes_mwe : w.codes_word;
}

Tensor& grad_codes_for_position(ScorerWeights& g, const ExampleForward& fwd, int j) {
  if (fwd.kind == ScorerKind::PolyencoderDistinct) {
    bool target = fwd.target_mask[j] != 0;
    if (fwd.is_mwe) return target ? g.codes_mwe_target : g.codes_mwe_nontarget;
    return target ? g.codes_word_target : g.codes_word_nontarget;
  }
  return fwd.is_mwe ? g.codes_mwe : g.codes_word;
}

PolySenseCache poly_attend(const Tensor& y, const Tensor& r_s) {
  const int m = y.rows;
  PolySenseCache c;
  c.r_s = r_s;
  c.attn.resize(m);
  for (int k = 0; k < m; ++k) c.attn[k] = dot(r_s.row(0), y.row(k));
  softmax_inplace(c.attn);
  c.y_final = Tensor(1, y.cols);
  for (int k = 0; k < m; ++k) axpy(c.attn[k], y.row(k), c.y_final.row(0));
  return c;
}

}  // namespace

ExampleForward forward_example(const ScorerWeights& w, ScorerKind kind,
                               std::span<const std::string> context_words,
                               std::span<const int> indices, std::span<const Sense> senses,
                               bool is_mwe) {
  if (senses.empty()) throw Error("sense list must be non-empty");

  ExampleForward fwd;
  fwd.kind = kind;
  fwd.is_mwe = is_mwe;
  fwd.indices.assign(indices.begin(), indices.end());
  fwd.ctx = encode_tokens_with_cache(w, w.context_attention, context_buckets(w, context_words));
  check_indices(indices, fwd.ctx.out.rows);

  fwd.glosses.reserve(senses.size());
  for (const auto& s : senses)
    fwd.glosses.push_back(encode_tokens_with_cache(w, w.gloss_attention, gloss_buckets(w, s.gloss)));

  if (kind == ScorerKind::Biencoder) {
    fwd.r_w = mean_rows(fwd.ctx.out, indices);
    for (const auto& g : fwd.glosses)
      fwd.phi.push_back(dot(fwd.r_w.row(0), g.out.row(0)));
    if (is_mwe) fwd.phi_n = dot(fwd.r_w.row(0), w.r_n.row(0));
    return fwd;
  }

  // poly paths
  const int n = fwd.ctx.out.rows;
  const int m = w.dims.m;
  if (kind == ScorerKind::PolyencoderDistinct) {
    fwd.target_mask.assign(n, 0);
    for (int idx : indices) fwd.target_mask[idx] = 1;
  }
  fwd.code_logits = Tensor(m, n);
  for (int j = 0; j < n; ++j) {
    const Tensor& codes = codes_for_position(w, fwd, j);
    for (int i = 0; i < m; ++i)
      fwd.code_logits.at(i, j) = dot(codes.row(i), fwd.ctx.out.row(j));
  }
  fwd.code_weights = fwd.code_logits;
  softmax_rows_inplace(fwd.code_weights);
  fwd.y = matmul(fwd.code_weights, fwd.ctx.out);

  for (const auto& g : fwd.glosses) {
    Tensor r_s = Tensor::row_vector(g.out.row(0));
    fwd.sense_caches.push_back(poly_attend(fwd.y, r_s));
    fwd.phi.push_back(dot(fwd.sense_caches.back().y_final.row(0), r_s.row(0)));
  }
  if (is_mwe) {
    fwd.sense_caches.push_back(poly_attend(fwd.y, w.r_n));
    fwd.phi_n = dot(fwd.sense_caches.back().y_final.row(0), w.r_n.row(0));
  }
  return fwd;
}

void backward_example(const ScorerWeights& w, const ExampleForward& fwd,
                      std::span<const double> d_phi, double d_phi_n, ScorerWeights& grads) {
  const int d = w.dims.d;
  const std::size_t n_senses = fwd.glosses.size();

  if (fwd.kind == ScorerKind::Biencoder) {
    Tensor d_rw(1, d);
    for (std::size_t i = 0; i < n_senses; ++i) {
      if (d_phi[i] == 0.0) continue;
      axpy(d_phi[i], fwd.glosses[i].out.row(0), d_rw.row(0));
      Tensor d_gloss(fwd.glosses[i].out.rows, d);
      axpy(d_phi[i], fwd.r_w.row(0), d_gloss.row(0));
      encoder_backward(w, w.gloss_attention, fwd.glosses[i], d_gloss, grads.token_embeddings,
                       grads.position_embeddings, grads.gloss_attention);
    }
    if (fwd.is_mwe && d_phi_n != 0.0) {
      axpy(d_phi_n, w.r_n.row(0), d_rw.row(0));
      axpy(d_phi_n, fwd.r_w.row(0), grads.r_n.row(0));
    }
    Tensor d_ctx(fwd.ctx.out.rows, d);
    const double inv = 1.0 / static_cast<double>(fwd.indices.size());
    for (int idx : fwd.indices) axpy(inv, d_rw.row(0), d_ctx.row(idx));
    encoder_backward(w, w.context_attention, fwd.ctx, d_ctx, grads.token_embeddings,
                     grads.position_embeddings, grads.context_attention);
    return;
  }

  // poly paths
  const int m = w.dims.m;
  const int n = fwd.ctx.out.rows;
  Tensor d_y(m, d);

  auto backprop_labeled = [&](const PolySenseCache& sc, double dphi, Tensor& d_rs_out) {
    // phi = y_final . r_s ; y_final = sum_k a_k y_k ; a = softmax(r_s . y_k)
    Tensor d_yf(1, d);
    axpy(dphi, sc.r_s.row(0), d_yf.row(0));
    axpy(dphi, sc.y_final.row(0), d_rs_out.row(0));
    std::vector<double> d_a(m), d_u(m);
    for (int k = 0; k < m; ++k) d_a[k] = dot(d_yf.row(0), fwd.y.row(k));
    softmax_backward(std::span<const double>(sc.attn), d_a, d_u);
    for (int k = 0; k < m; ++k) {
      axpy(sc.attn[k], d_yf.row(0), d_y.row(k));
      axpy(d_u[k], sc.r_s.row(0), d_y.row(k));
      axpy(d_u[k], fwd.y.row(k), d_rs_out.row(0));
    }
  };

  for (std::size_t i = 0; i < n_senses; ++i) {
    if (d_phi[i] == 0.0) continue;
    Tensor d_rs(1, d);
    backprop_labeled(fwd.sense_caches[i], d_phi[i], d_rs);
    Tensor d_gloss(fwd.glosses[i].out.rows, d);
    std::copy(d_rs.row(0).begin(), d_rs.row(0).end(), d_gloss.row(0).begin());
    encoder_backward(w, w.gloss_attention, fwd.glosses[i], d_gloss, grads.token_embeddings,
                     grads.position_embeddings, grads.gloss_attention);
  }
  if (fwd.is_mwe && d_phi_n != 0.0) {
    Tensor d_rn(1, d);
    backprop_labeled(fwd.sense_caches[n_senses], d_phi_n, d_rn);
    add_inplace(grads.r_n, d_rn);
  }

  // y = W R ; W = row softmax of logits ; logits[i][j] = c_i(j) . R_j
  Tensor d_w_attn = matmul_nt(d_y, fwd.ctx.out);   // m x n
  Tensor d_r = matmul_tn(fwd.code_weights, d_y);   // n x d
  Tensor d_logits(m, n);
  for (int i = 0; i < m; ++i)
    softmax_backward(fwd.code_weights.row(i), d_w_attn.row(i), d_logits.row(i));
  for (int j = 0; j < n; ++j) {
    const Tensor& codes = codes_for_position(w, fwd, j);
    Tensor& g_codes = grad_codes_for_position(grads, fwd, j);
    for (int i = 0; i < m; ++i) {
      const double dl = d_logits.at(i, j);
      if (dl == 0.0) continue;
      axpy(dl, fwd.ctx.out.row(j), g_codes.row(i));
      axpy(dl, codes.row(i), d_r.row(j));
    }
  }
  encoder_backward(w, w.context_attention, fwd.ctx, d_r, grads.token_embeddings,
                   grads.position_embeddings, grads.context_attention);
}

// --- public scoring ops ---

EncodedContext encode_context(const ScorerWeights& w, const Sentence& sentence) {
  auto words = sentence_token_strings(sentence);
  auto cache = encode_tokens_with_cache(w, w.context_attention, context_buckets(w, words));
  return EncodedContext{std::move(cache.out)};
}

Tensor word_representation(const EncodedContext& ctx, std::span<const int> indices) {
  check_indices(indices, ctx.vectors.rows);
  return mean_rows(ctx.vectors, indices);
}

Tensor gloss_representation(const ScorerWeights& w, std::string_view gloss) {
  auto cache = encode_tokens_with_cache(w, w.gloss_attention, gloss_buckets(w, gloss));
  return Tensor::row_vector(cache.out.row(0));
}

namespace {

SenseScores scores_from_forward(const ExampleForward& fwd, std::span<const Sense> senses) {
  SenseScores out;
  for (std::size_t i = 0; i < senses.size(); ++i)
    out.per_sense.emplace_back(senses[i].sense_id, fwd.phi[i]);
  out.not_mwe = fwd.phi_n;
  return out;
}

}  // namespace

SenseScores score_biencoder(const ScorerWeights& w, const Sentence& sentence,
                            std::span<const int> indices, std::span<const Sense> senses,
                            bool is_mwe) {
  auto words = sentence_token_strings(sentence);
  auto fwd = forward_example(w, ScorerKind::Biencoder, words, indices, senses, is_mwe);
  return scores_from_forward(fwd, senses);
}

std::string predict_sense(const SenseScores& scores) {
  if (scores.per_sense.empty()) throw Error("cannot predict over an empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.per_sense.size(); ++i)
    if (scores.per_sense[i].second > scores.per_sense[best].second) best = i;
  if (scores.not_mwe && *scores.not_mwe > scores.per_sense[best].second)
    return std::string(kNotMweLabel);
  return scores.per_sense[best].first;
}

Tensor poly_code_context_attention(const Tensor& codes, const EncodedContext& ctx) {
  if (ctx.vectors.rows == 0) throw Error("cannot attend over an empty context");
  Tensor weights = matmul_nt(codes, ctx.vectors);  // m x n
  softmax_rows_inplace(weights);
  return matmul(weights, ctx.vectors);
}

GlossAttended poly_gloss_attention(const Tensor& y_ctxt, const Tensor& r_s) {
  PolySenseCache c = poly_attend(y_ctxt, r_s);
  GlossAttended out;
  out.y_final = std::move(c.y_final);
  out.score = dot(out.y_final.row(0), r_s.row(0));
  return out;
}

std::vector<Tensor> distinct_codes_query(std::span<const int> m_t, std::span<const int> m_nt,
                                         const Tensor& q_t, const Tensor& q_nt) {
  if (m_t.size() != m_nt.size()) throw MaskOverlap(0);
  std::vector<Tensor> out;
  out.reserve(m_t.size());
  for (std::size_t j = 0; j < m_t.size(); ++j) {
    if (m_t[j] + m_nt[j] != 1 || m_t[j] < 0 || m_nt[j] < 0)
      throw MaskOverlap(static_cast<int>(j));
    out.push_back(m_t[j] ? q_t : q_nt);
  }
  return out;
}

SenseScores score_polyencoder(const ScorerWeights& w, const Sentence& sentence,
                              std::span<const int> indices, std::span<const Sense> senses,
                              bool is_mwe, bool distinct_codes) {
  auto words = sentence_token_strings(sentence);
  auto fwd = forward_example(
      w, distinct_codes ? ScorerKind::PolyencoderDistinct : ScorerKind::Polyencoder, words,
      indices, senses, is_mwe);
  return scores_from_forward(fwd, senses);
}

// --- scorer interface ---

std::optional<ScorerKind> scorer_kind_from_string(const std::string& name) {
  if (name == "biencoder" || name == "bi") return ScorerKind::Biencoder;
  if (name == "polyencoder" || name == "poly") return ScorerKind::Polyencoder;
  if (name == "polyencoder-distinct" || name == "poly-distinct")
    return ScorerKind::PolyencoderDistinct;
  return std::nullopt;
}

std::string scorer_kind_to_string(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::Biencoder: return "biencoder";
    case ScorerKind::Polyencoder: return "polyencoder";
    case ScorerKind::PolyencoderDistinct: return "polyencoder-distinct";
  }
  return "biencoder";
}

WeightScorer::WeightScorer(std::shared_ptr<const ScorerWeights> weights, ScorerKind kind)
    : weights_(std::move(weights)), kind_(kind) {
  if (!weights_) throw Error("WeightScorer requires weights");
}

SenseScores WeightScorer::score(const Sentence& sentence, std::span<const int> indices,
                                std::span<const Sense> senses, bool is_mwe) const {
  auto words = sentence_token_strings(sentence);
  auto fwd = forward_example(*weights_, kind_, words, indices, senses, is_mwe);
  SenseScores out;
  for (std::size_t i = 0; i < senses.size(); ++i)
    out.per_sense.emplace_back(senses[i].sense_id, fwd.phi[i]);
  out.not_mwe = fwd.phi_n;
  return out;
}

PrecomputedScorer::PrecomputedScorer(const std::filesystem::path& vectors_file) {
  std::ifstream in(vectors_file);
  if (!in) throw Error("cannot open precomputed vectors file: " + vectors_file.string());
  json j;
  try {
    in >> j;
    d_ = j.at("d").get<int>();
    auto rn = j.at("r_n").get<std::vector<double>>();
    if (static_cast<int>(rn.size()) != d_) throw Error("r_n length does not match d");
    r_n_ = Tensor::row_vector(rn);
    for (const auto& [sent_id, rows] : j.at("sentences").items()) {
      Tensor t(static_cast<int>(rows.size()), d_);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        auto row = rows[i].get<std::vector<double>>();
        if (static_cast<int>(row.size()) != d_)
          throw Error("token vector length mismatch in sentence " + sent_id);
        std::copy(row.begin(), row.end(), t.row(static_cast<int>(i)).begin());
      }
      sentence_vectors_.emplace(sent_id, std::move(t));
    }
    for (const auto& [sense_id, vec] : j.at("glosses").items()) {
      auto row = vec.get<std::vector<double>>();
      if (static_cast<int>(row.size()) != d_)
        throw Error("gloss vector length mismatch for sense " + sense_id);
      gloss_vectors_.emplace(sense_id, Tensor::row_vector(row));
    }
  } catch (const json::exception& e) {
    throw Error("bad precomputed vectors file: " + std::string(e.what()));
  }
}

SenseScores PrecomputedScorer::score(const Sentence& sentence, std::span<const int> indices,
                                     std::span<const Sense> senses, bool is_mwe) const {
  auto it = sentence_vectors_.find(sentence.sent_id);
  if (it == sentence_vectors_.end())
    throw Error("no precomputed vectors for sentence " + sentence.sent_id);
  const Tensor& rows = it->second;
  if (rows.rows != static_cast<int>(sentence.tokens.size()))
    throw Error("precomputed vector count mismatch for sentence " + sentence.sent_id);
  check_indices(indices, rows.rows);
  Tensor r_w = mean_rows(rows, indices);

  SenseScores out;
  for (const auto& s : senses) {
    auto git = gloss_vectors_.find(s.sense_id);
    if (git == gloss_vectors_.end())
      throw Error("no precomputed gloss vector for sense " + s.sense_id);
    out.per_sense.emplace_back(s.sense_id, dot(r_w.row(0), git->second.row(0)));
  }
  if (is_mwe) out.not_mwe = dot(r_w.row(0), r_n_.row(0));
  return out;
}

// --- checkpoints ---

namespace {
constexpr char kCheckpointMagic[8] = {'G', 'P', 'C', 'K', 'P', 'T', '0', '1'};
}

void save_checkpoint(const ScorerWeights& w, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint: " + path.string());
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::uint32_t header[4] = {
      static_cast<std::uint32_t>(w.dims.d), static_cast<std::uint32_t>(w.dims.m),
      static_cast<std::uint32_t>(w.dims.vocab_size), static_cast<std::uint32_t>(w.dims.max_len)};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));

  json manifest;
  manifest["format"] = "glosspipe-checkpoint-v1";
  manifest["dims"] = {{"d", w.dims.d}, {"m", w.dims.m}, {"vocab_size", w.dims.vocab_size},
                      {"max_len", w.dims.max_len}};
  json tensors = json::array();
  std::size_t offset = sizeof(kCheckpointMagic) + sizeof(header);
  w.for_each_tensor([&](const char* name, const Tensor& t) {
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    tensors.push_back({{"name", name}, {"rows", t.rows}, {"cols", t.cols},
                       {"offset_bytes", offset}});
    offset += t.data.size() * sizeof(double);
  });
  manifest["tensors"] = tensors;
  if (!out) throw Error("failed writing checkpoint: " + path.string());

  std::ofstream mout(path.string() + ".json");
  if (!mout) throw Error("cannot write checkpoint manifest: " + path.string() + ".json");
  mout << manifest.dump(2) << "\n";
}

ScorerWeights load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw Error("not a glosspipe checkpoint: " + path.string());
  std::uint32_t header[4];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw Error("truncated checkpoint header: " + path.string());

  ScorerDims dims;
  dims.d = static_cast<int>(header[0]);
  dims.m = static_cast<int>(header[1]);
  dims.vocab_size = static_cast<int>(header[2]);
  dims.max_len = static_cast<int>(header[3]);
  ScorerWeights w = ScorerWeights::zeros(dims);
  w.for_each_tensor([&](const char* name, Tensor& t) {
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!in) throw Error(std::string("truncated checkpoint tensor ") + name);
  });
  w.validate();
  return w;
}

}  // namespace glosspipe
