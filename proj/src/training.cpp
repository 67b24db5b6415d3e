#include "glosspipe/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include <json.hpp>

#include "glosspipe/errors.hpp"
#include "glosspipe/scorer_grad.hpp"

namespace glosspipe {

using nlohmann::json;

namespace {

// Scores in label-space order: senses first, then the not-an-MWE label.
std::vector<double> label_scores(const SenseScores& scores, bool is_mwe) {
  std::vector<double> all;
  all.reserve(scores.per_sense.size() + 1);
  for (const auto& [id, phi] : scores.per_sense) all.push_back(phi);
  if (is_mwe) {
    if (!scores.not_mwe) throw Error("MWE example scored without a not-an-MWE score");
    all.push_back(*scores.not_mwe);
  }
  return all;
}

std::size_t gold_label_index(const TrainingExample& example) {
  if (example.gold == kNotMweLabel) {
    if (!example.is_mwe) throw GoldNotInLabelSpace(example.gold);
    return example.senses.size();
  }
  for (std::size_t i = 0; i < example.senses.size(); ++i)
    if (example.senses[i].sense_id == example.gold) return i;
  throw GoldNotInLabelSpace(example.gold);
}

}  // namespace

double loss(const SenseScores& scores, const TrainingExample& example) {
  auto all = label_scores(scores, example.is_mwe);
  std::size_t gold = gold_label_index(example);
  if (gold >= all.size()) throw GoldNotInLabelSpace(example.gold);
  return -all[gold] + log_sum_exp(all);
}

BatchGradient loss_gradient(const ScorerWeights& weights, ScorerKind kind,
                            const std::vector<Sentence>& sentences,
                            std::span<const TrainingExample> examples, const Batch& batch) {
  BatchGradient out;
  out.grads = ScorerWeights::zeros(weights.dims);
  if (batch.active_count == 0) return out;
  const double inv_active = 1.0 / static_cast<double>(batch.active_count);

  for (const auto& slot : batch.slots) {
    if (slot.masked) continue;
    const TrainingExample& ex = examples[slot.example_index];
    const Sentence& sent = sentences.at(static_cast<std::size_t>(ex.sentence_index));
    auto words = sentence_token_strings(sent);
    auto fwd = forward_example(weights, kind, words, ex.target_indices, ex.senses, ex.is_mwe);

    std::vector<double> all = fwd.phi;
    if (ex.is_mwe) all.push_back(*fwd.phi_n);
    const std::size_t gold = gold_label_index(ex);
    out.mean_loss += (-all[gold] + log_sum_exp(all)) * inv_active;

    // d loss / d phi_x = softmax(phi)_x - [x == gold]
    std::vector<double> d_all = all;
    softmax_inplace(d_all);
    d_all[gold] -= 1.0;
    for (double& v : d_all) v *= inv_active;

    std::span<const double> d_phi(d_all.data(), ex.senses.size());
    double d_phi_n = ex.is_mwe ? d_all.back() : 0.0;
    backward_example(weights, fwd, d_phi, d_phi_n, out.grads);
  }
  return out;
}

std::vector<Batch> build_batches(std::span<const TrainingExample> examples, int batch_size,
                                 std::uint64_t seed) {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");

  // examples grouped by sentence, sentence order shuffled
  std::map<int, std::vector<std::size_t>> by_sentence;
  for (std::size_t i = 0; i < examples.size(); ++i)
    by_sentence[examples[i].sentence_index].push_back(i);
  std::vector<int> order;
  order.reserve(by_sentence.size());
  for (const auto& [sent, _] : by_sentence) order.push_back(sent);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Batch> batches;
  std::vector<std::size_t> pending;
  std::size_t next_group = 0;
  const std::size_t target = static_cast<std::size_t>(batch_size);

  while (next_group < order.size() || !pending.empty()) {
    Batch batch;
    std::vector<std::size_t> next_pending;
    for (std::size_t idx : pending) {
      if (batch.active_count < target) {
        batch.slots.push_back({idx, false});
        ++batch.active_count;
      } else {
        batch.slots.push_back({idx, true});
        next_pending.push_back(idx);
      }
    }
    while (batch.active_count < target && next_group < order.size()) {
      for (std::size_t idx : by_sentence[order[next_group]]) {
        if (batch.active_count < target) {
          batch.slots.push_back({idx, false});
          ++batch.active_count;
        } else {
          batch.slots.push_back({idx, true});
          next_pending.push_back(idx);
        }
      }
      ++next_group;
    }
    pending = std::move(next_pending);
    if (!batch.slots.empty()) batches.push_back(std::move(batch));
  }
  return batches;
}

ExtractedExamples extract_examples(const std::vector<Sentence>& sentences,
                                   const Lexicon& lexicon) {
  ExtractedExamples out;
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    const Sentence& s = sentences[si];
    std::set<int> marked;
    for (const auto& mk : s.mwe_marks)
      marked.insert(mk.token_indices.begin(), mk.token_indices.end());

    for (const auto& mk : s.mwe_marks) {
      // pos preference: the anchor token's class first, then v,n,a,r,x
      EntryPtr entry;
      const Token& anchor = s.tokens.at(static_cast<std::size_t>(mk.token_indices.front()));
      std::vector<Pos> prefs{pos_from_upos(anchor.upos), Pos::Verb, Pos::Noun, Pos::Adjective,
                             Pos::Adverb, Pos::Other};
      for (Pos p : prefs)
        if ((entry = lexicon.lookup(mk.entry_key, p))) break;
      if (!entry) {
        ++out.skipped_missing_entry;
        continue;
      }
      TrainingExample ex;
      ex.sentence_index = static_cast<int>(si);
      ex.target_indices = mk.token_indices;
      ex.senses = entry->senses;
      ex.is_mwe = true;
      if (mk.not_mwe) {
        ex.gold = kNotMweLabel;
      } else {
        if (!mk.gold_sense) {
          ++out.skipped_missing_sense;
          continue;
        }
        bool found = false;
        for (const auto& sense : entry->senses)
          if (sense.sense_id == *mk.gold_sense) {
            ex.gold = sense.sense_id;
            found = true;
            break;
          }
        if (!found) {
          ++out.skipped_missing_sense;
          continue;
        }
      }
      out.examples.push_back(std::move(ex));
    }

    for (const auto& t : s.tokens) {
      if (!t.gold_sense || marked.count(t.index)) continue;
      if (t.lemma.find('_') != std::string::npos) continue;
      EntryPtr entry = lexicon.lookup(t.lemma, pos_from_upos(t.upos));
      if (!entry) {
        ++out.skipped_missing_entry;
        continue;
      }
      // multiple acceptable golds come '|'-separated; train on the first
      // one present in the sense inventory
      std::string gold;
      std::string field = *t.gold_sense;
      std::size_t start = 0;
      while (gold.empty() && start <= field.size()) {
        std::size_t bar = field.find('|', start);
        std::string one = field.substr(start, bar == std::string::npos ? std::string::npos
                                                                       : bar - start);
        for (const auto& sense : entry->senses)
          if (sense.sense_id == one) {
            gold = one;
            break;
          }
        if (bar == std::string::npos) break;
        start = bar + 1;
      }
      if (gold.empty()) {
        ++out.skipped_missing_sense;
        continue;
      }
      TrainingExample ex;
      ex.sentence_index = static_cast<int>(si);
      ex.target_indices = {t.index};
      ex.senses = entry->senses;
      ex.gold = gold;
      ex.is_mwe = false;
      out.examples.push_back(std::move(ex));
    }
  }
  return out;
}

std::string predict_example(const ScorerWeights& weights, ScorerKind kind,
                            const Sentence& sentence, const TrainingExample& example) {
  auto words = sentence_token_strings(sentence);
  auto fwd = forward_example(weights, kind, words, example.target_indices, example.senses,
                             example.is_mwe);
  SenseScores scores;
  for (std::size_t i = 0; i < example.senses.size(); ++i)
    scores.per_sense.emplace_back(example.senses[i].sense_id, fwd.phi[i]);
  scores.not_mwe = fwd.phi_n;
  return predict_sense(scores);
}

namespace {

struct DevMetrics {
  double accuracy = 0.0;
  double mwe_f1 = 0.0;
};

DevMetrics evaluate_dev(const ScorerWeights& weights, ScorerKind kind,
                        const std::vector<Sentence>& sentences,
                        std::span<const TrainingExample> dev_examples) {
  DevMetrics out;
  if (dev_examples.empty()) return out;
  std::size_t correct = 0;
  long long tp = 0, fp = 0, fn = 0;
  for (const auto& ex : dev_examples) {
    const Sentence& sent = sentences.at(static_cast<std::size_t>(ex.sentence_index));
    std::string pred = predict_example(weights, kind, sent, ex);
    if (pred == ex.gold) ++correct;
    if (ex.is_mwe) {
      const bool pred_mwe = pred != kNotMweLabel;
      const bool gold_mwe = ex.gold != kNotMweLabel;
      if (pred_mwe && gold_mwe) ++tp;
      else if (pred_mwe && !gold_mwe) ++fp;
      else if (!pred_mwe && gold_mwe) ++fn;
    }
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(dev_examples.size());
  const double p = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  const double r = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  out.mwe_f1 = p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
  return out;
}

}  // namespace

TrainResult train(ScorerWeights weights, const std::vector<Sentence>& sentences,
                  const Lexicon& lexicon, const TrainConfig& config,
                  const std::vector<std::size_t>* dev_sentences) {
  auto extracted = extract_examples(sentences, lexicon);
  return train_on_examples(std::move(weights), sentences, std::move(extracted.examples), config,
                           dev_sentences);
}

TrainResult train_on_examples(ScorerWeights weights, const std::vector<Sentence>& sentences,
                              std::vector<TrainingExample> examples, const TrainConfig& config,
                              const std::vector<std::size_t>* dev_sentences) {
  weights.validate();
  if (config.epochs < 0) throw ConfigError("epochs must be non-negative");
  if (config.batch_size < 1) throw ConfigError("batch_size must be >= 1");

  // dev split: supplied, or a seeded fraction of the sentences
  std::vector<std::size_t> dev_idx;
  if (dev_sentences) {
    dev_idx = *dev_sentences;
  } else if (config.dev_fraction > 0.0 && sentences.size() > 1) {
    std::vector<std::size_t> all(sentences.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ull);
    std::shuffle(all.begin(), all.end(), rng);
    std::size_t n_dev = static_cast<std::size_t>(
        std::floor(config.dev_fraction * static_cast<double>(sentences.size())));
    dev_idx.assign(all.begin(), all.begin() + n_dev);
    std::sort(dev_idx.begin(), dev_idx.end());
  }
  std::set<std::size_t> dev_set(dev_idx.begin(), dev_idx.end());

  std::vector<TrainingExample> train_examples, dev_examples;
  for (auto& ex : examples) {
    if (dev_set.count(static_cast<std::size_t>(ex.sentence_index)))
      dev_examples.push_back(std::move(ex));
    else
      train_examples.push_back(std::move(ex));
  }

  TrainResult result;
  result.dev_sentence_indices = dev_idx;
  result.best_weights = weights;
  double best_metric = -1.0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto batches = build_batches(train_examples, config.batch_size,
                                 config.seed + static_cast<std::uint64_t>(epoch));
    double loss_sum = 0.0;
    std::size_t active_total = 0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      auto grad = loss_gradient(weights, config.scorer_kind, sentences, train_examples,
                                batches[bi]);
      if (!std::isfinite(grad.mean_loss)) throw DivergedLoss(epoch, bi, grad.mean_loss);
      loss_sum += grad.mean_loss * static_cast<double>(batches[bi].active_count);
      active_total += batches[bi].active_count;
      if (config.learning_rate != 0.0) {
        std::vector<Tensor*> wt, gt;
        weights.for_each_tensor([&](const char*, Tensor& t) { wt.push_back(&t); });
        grad.grads.for_each_tensor([&](const char*, Tensor& t) { gt.push_back(&t); });
        for (std::size_t k = 0; k < wt.size(); ++k)
          for (std::size_t e = 0; e < wt[k]->data.size(); ++e)
            wt[k]->data[e] -= config.learning_rate * gt[k]->data[e];
      }
    }

    EpochMetrics em;
    em.epoch = epoch;
    em.train_loss = active_total > 0 ? loss_sum / static_cast<double>(active_total) : 0.0;
    DevMetrics dm = evaluate_dev(weights, config.scorer_kind, sentences, dev_examples);
    em.dev_accuracy = dm.accuracy;
    em.dev_mwe_f1 = dm.mwe_f1;
    em.dev_metric = config.dev_metric == "mwe-f1" ? dm.mwe_f1 : dm.accuracy;
    result.history.push_back(em);

    if (dev_examples.empty()) {
      // without a dev split the final weights win
      result.best_weights = weights;
      result.best_epoch = epoch;
    } else if (em.dev_metric > best_metric) {
      best_metric = em.dev_metric;
      result.best_weights = weights;
      result.best_epoch = epoch;
    }
  }
  return result;
}

std::vector<TrainingExample> build_finetune_set(const ScorerWeights& weights,
                                                const std::vector<Sentence>& sentences,
                                                const Lexicon& lexicon,
                                                const PipelineConfig& pipeline_config,
                                                ScorerKind kind) {
  auto shared = std::make_shared<const ScorerWeights>(weights);
  WeightScorer scorer(shared, kind);

  std::vector<TrainingExample> out;
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    const Sentence& s = sentences[si];
    std::set<std::vector<int>> gold_sets;
    for (const auto& ann : s.gold_mwes) {
      auto idx = ann.token_indices;
      std::sort(idx.begin(), idx.end());
      gold_sets.insert(idx);
    }

    // positives: gold MWEs present in the lexicon, first sense as gold
    for (const auto& ann : s.gold_mwes) {
      std::string key;
      for (std::size_t k = 0; k < ann.token_indices.size(); ++k) {
        if (k > 0) key += "_";
        key += to_lower_ascii(s.tokens.at(ann.token_indices[k]).lemma);
      }
      EntryPtr entry;
      for (Pos p : {Pos::Verb, Pos::Noun, Pos::Adjective, Pos::Adverb, Pos::Other})
        if ((entry = lexicon.lookup(key, p))) break;
      if (!entry) continue;  // unidentifiable regardless; not a training signal
      TrainingExample ex;
      ex.sentence_index = static_cast<int>(si);
      ex.target_indices = ann.token_indices;
      ex.senses = entry->senses;
      ex.gold = entry->senses.front().sense_id;
      ex.is_mwe = true;
      out.push_back(std::move(ex));
    }

    // negatives: the pipeline's own false positives
    for (const auto& pred : run_pipeline(s, lexicon, pipeline_config, &scorer)) {
      if (gold_sets.count(pred.token_indices)) continue;
      if (!pred.entry) continue;
      TrainingExample ex;
      ex.sentence_index = static_cast<int>(si);
      ex.target_indices = pred.token_indices;
      ex.senses = pred.entry->senses;
      ex.gold = kNotMweLabel;
      ex.is_mwe = true;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open training config: " + path.string());
  TrainConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw ConfigError("bad training config line " + std::to_string(line_no) + ": " + line);
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
    try {
      if (key == "epochs") cfg.epochs = std::stoi(value);
      else if (key == "learning_rate") cfg.learning_rate = std::stod(value);
      else if (key == "batch_size") cfg.batch_size = std::stoi(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "dev_fraction") cfg.dev_fraction = std::stod(value);
      else if (key == "negative_ratio") cfg.negative_ratio = std::stod(value);
      else if (key == "dev_metric") cfg.dev_metric = value;
      else if (key == "scorer") {
        auto kind = scorer_kind_from_string(value);
        if (!kind) throw ConfigError("unknown scorer '" + value + "'");
        cfg.scorer_kind = *kind;
      } else {
        throw ConfigError("unknown training config key '" + key + "'");
      }
    } catch (const std::invalid_argument&) {
      throw ConfigError("bad value '" + value + "' for " + key);
    }
  }
  if (cfg.epochs < 0 || cfg.batch_size < 1 || cfg.dev_fraction < 0.0 || cfg.dev_fraction >= 1.0)
    throw ConfigError("training config out of range");
  return cfg;
}

void write_metrics_history(const std::vector<EpochMetrics>& history,
                           const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write metrics history: " + path.string());
  for (const auto& em : history) {
    json j{{"epoch", em.epoch},
           {"train_loss", em.train_loss},
           {"dev_metric", em.dev_metric},
           {"dev_accuracy", em.dev_accuracy},
           {"dev_mwe_f1", em.dev_mwe_f1}};
    out << j.dump() << "\n";
  }
}

}  // namespace glosspipe
