// Command-line surface: candidate extraction, evaluation, corpus
// preprocessing, training and sense prediction. Every command writes a run
// manifest (<output>.manifest.json) before its outputs.

#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "glosspipe/corpus.hpp"
#include "glosspipe/errors.hpp"
#include "glosspipe/eval.hpp"
#include "glosspipe/lexicon.hpp"
#include "glosspipe/manifest.hpp"
#include "glosspipe/pipeline.hpp"
#include "glosspipe/scorer.hpp"
#include "glosspipe/training.hpp"

namespace gp = glosspipe;
using nlohmann::json;

namespace {

gp::CorpusFormat parse_format(const std::string& name, const std::string& path) {
  if (name == "cupt") return gp::CorpusFormat::Cupt;
  if (name == "dimsum") return gp::CorpusFormat::Dimsum;
  if (name == "json") return gp::CorpusFormat::CanonicalJson;
  if (name.empty()) return gp::format_from_path(path);
  throw gp::ConfigError("unknown corpus format '" + name + "'");
}

struct PipelineFlags {
  std::string config_file;
  std::string preset;
  int max_gap = -1;
  int max_candidates = -1;
  bool no_ordered_only = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "pipeline config file (key = value lines)");
    cmd->add_option("--preset", preset, "parseme (ordered+gap+verbal) or dimsum (+noun runs)")
        ->check(CLI::IsMember({"parseme", "dimsum"}));
    cmd->add_option("--max-gap", max_gap, "maximum tokens allowed inside a candidate span");
    cmd->add_option("--max-candidates-per-entry", max_candidates,
                    "cap on assignments per lexicon entry");
    cmd->add_flag("--no-ordered-only", no_ordered_only, "keep out-of-order candidates");
  }

  gp::PipelineConfig build() const {
    gp::PipelineConfig cfg;
    if (!config_file.empty()) cfg = gp::load_pipeline_config(config_file);
    if (preset == "parseme") {
      cfg.ordered_only = true;
      cfg.verbal_only = true;
      cfg.noun_compound_detector = false;
    } else if (preset == "dimsum") {
      cfg.ordered_only = true;
      cfg.verbal_only = false;
      cfg.noun_compound_detector = true;
    }
    if (max_gap >= 0) cfg.max_gap = max_gap;
    if (max_candidates >= 0) cfg.max_candidates_per_entry = max_candidates;
    if (no_ordered_only) cfg.ordered_only = false;
    cfg.validate();
    return cfg;
  }

  void snapshot(gp::RunManifest& m, const gp::PipelineConfig& cfg) const {
    m.config["max_gap"] = std::to_string(cfg.max_gap);
    m.config["ordered_only"] = cfg.ordered_only ? "true" : "false";
    m.config["use_encoder_filter"] = cfg.use_encoder_filter ? "true" : "false";
    m.config["verbal_only"] = cfg.verbal_only ? "true" : "false";
    m.config["noun_compound_detector"] = cfg.noun_compound_detector ? "true" : "false";
    m.config["max_candidates_per_entry"] = std::to_string(cfg.max_candidates_per_entry);
    if (!preset.empty()) m.config["preset"] = preset;
  }
};

// WSD instances of a corpus: sense-carrying tokens plus MWE marks.
struct WsdCorpusInstance {
  std::string id;
  std::size_t sentence_index;
  std::vector<int> indices;
  std::string lemma_key;
  gp::Pos pos;
  std::vector<std::string> gold;
};

std::vector<std::string> split_bar(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t bar = s.find('|', start);
    out.push_back(s.substr(start, bar == std::string::npos ? std::string::npos : bar - start));
    if (bar == std::string::npos) break;
    start = bar + 1;
  }
  return out;
}

std::vector<WsdCorpusInstance> wsd_instances(const std::vector<gp::Sentence>& sentences) {
  std::vector<WsdCorpusInstance> out;
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    const auto& s = sentences[si];
    std::set<int> marked;
    for (const auto& mk : s.mwe_marks)
      marked.insert(mk.token_indices.begin(), mk.token_indices.end());
    for (const auto& t : s.tokens) {
      if (!t.gold_sense || marked.count(t.index)) continue;
      if (t.lemma.find('_') != std::string::npos) continue;
      WsdCorpusInstance inst;
      inst.id = s.sent_id + "#" + std::to_string(t.index);
      inst.sentence_index = si;
      inst.indices = {t.index};
      inst.lemma_key = gp::to_lower_ascii(t.lemma);
      inst.pos = gp::pos_from_upos(t.upos);
      inst.gold = split_bar(*t.gold_sense);
      out.push_back(std::move(inst));
    }
    for (const auto& mk : s.mwe_marks) {
      if (!mk.gold_sense) continue;
      WsdCorpusInstance inst;
      inst.id = s.sent_id + "#m" + std::to_string(mk.token_indices.front());
      inst.sentence_index = si;
      inst.indices = mk.token_indices;
      inst.lemma_key = gp::to_lower_ascii(mk.entry_key);
      inst.pos = gp::pos_from_upos(s.tokens.at(mk.token_indices.front()).upos);
      inst.gold = split_bar(*mk.gold_sense);
      out.push_back(std::move(inst));
    }
  }
  return out;
}

std::vector<gp::SentenceGroups> groups_of(const std::vector<gp::Sentence>& sentences) {
  std::vector<gp::SentenceGroups> out;
  for (const auto& s : sentences) {
    gp::SentenceGroups sg;
    sg.sent_id = s.sent_id;
    for (const auto& m : s.gold_mwes) sg.groups.push_back(m.token_indices);
    out.push_back(std::move(sg));
  }
  return out;
}

// --- extract ---

int cmd_extract(const std::string& input, const std::string& lexicon_path,
                const std::string& output, const std::string& format_name,
                const PipelineFlags& flags, bool encoder_filter, const std::string& weights_path,
                const std::string& scorer_name, const std::string& precomputed_path) {
  auto format = parse_format(format_name, input);
  auto cfg = flags.build();
  cfg.use_encoder_filter = encoder_filter;

  std::unique_ptr<gp::Scorer> scorer;
  if (encoder_filter) {
    if (!precomputed_path.empty()) {
      scorer = std::make_unique<gp::PrecomputedScorer>(precomputed_path);
    } else if (!weights_path.empty()) {
      auto kind = gp::scorer_kind_from_string(scorer_name.empty() ? "biencoder" : scorer_name);
      if (!kind) throw gp::ConfigError("unknown scorer '" + scorer_name + "'");
      auto w = std::make_shared<const gp::ScorerWeights>(gp::load_checkpoint(weights_path));
      scorer = std::make_unique<gp::WeightScorer>(w, *kind);
    } else {
      throw gp::ConfigError("--encoder-filter requires --weights or --precomputed");
    }
  }

  gp::RunManifest manifest;
  manifest.command = "extract";
  flags.snapshot(manifest, cfg);
  if (!scorer_name.empty()) manifest.config["scorer"] = scorer_name;
  manifest.add_input(input);
  manifest.add_input(lexicon_path);
  if (!weights_path.empty()) manifest.add_input(weights_path);
  if (!precomputed_path.empty()) manifest.add_input(precomputed_path);
  manifest.write(output + ".manifest.json");

  auto lexicon = gp::load_lexicon(lexicon_path);
  auto sentences = gp::parse_corpus(input, format);

  gp::PipelineStats stats;
  std::vector<std::vector<gp::OutputGroup>> groups;
  groups.reserve(sentences.size());
  for (const auto& s : sentences) {
    std::vector<gp::OutputGroup> sentence_groups;
    for (const auto& pred : gp::run_pipeline(s, lexicon, cfg, scorer.get(), &stats))
      sentence_groups.push_back(gp::OutputGroup{pred.token_indices, "MWE"});
    groups.push_back(std::move(sentence_groups));
  }
  gp::write_predictions(sentences, groups, format, output);

  if (stats.cap_truncations > 0)
    std::cerr << "warning: candidate cap hit " << stats.cap_truncations << " times\n";
  return 0;
}

// --- eval ---

int cmd_eval(const std::string& gold_path, const std::string& pred_path,
             const std::string& metric, const std::string& format_name,
             const std::string& output, bool strict_missing) {
  gp::PRF prf;
  if (metric == "wsd") {
    auto gold_sentences = gp::parse_corpus(gold_path, parse_format(format_name, gold_path));
    std::vector<gp::WsdInstance> gold;
    for (const auto& inst : wsd_instances(gold_sentences))
      gold.push_back(gp::WsdInstance{inst.id, inst.gold});

    std::map<std::string, std::string> preds;
    std::ifstream in(pred_path);
    if (!in) throw gp::Error("cannot open predictions: " + pred_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j;
      try {
        j = json::parse(line);
        preds[j.at("instance").get<std::string>()] = j.at("sense").get<std::string>();
      } catch (const json::exception& e) {
        throw gp::MalformedLine(line_no, e.what());
      }
    }
    prf = gp::wsd_f1(gold, preds, !strict_missing);
  } else {
    auto format = parse_format(format_name, gold_path);
    auto gold = groups_of(gp::parse_corpus(gold_path, format));
    auto pred = groups_of(gp::parse_corpus(pred_path, parse_format(format_name, pred_path)));
    if (metric == "mwe-based") prf = gp::mwe_based_prf(gold, pred);
    else if (metric == "token-based") prf = gp::token_based_prf(gold, pred);
    else if (metric == "dimsum-link") prf = gp::dimsum_link_prf(gold, pred);
    else throw gp::ConfigError("unknown metric '" + metric + "'");
  }

  std::string report = gp::prf_report_json(metric, prf);
  if (!output.empty()) {
    gp::RunManifest manifest;
    manifest.command = "eval";
    manifest.config["metric"] = metric;
    manifest.add_input(gold_path);
    manifest.add_input(pred_path);
    manifest.write(output + ".manifest.json");
    std::ofstream out(output);
    if (!out) throw gp::Error("cannot write report: " + output);
    out << report << "\n";
  }
  std::cout << report << "\n";
  return 0;
}

// --- preprocess ---

int cmd_preprocess(const std::string& input, const std::string& lexicon_path,
                   const std::string& output, const std::string& format_name,
                   const std::string& annotations_path, double negative_ratio,
                   std::uint64_t seed, const PipelineFlags& flags, const std::string& report_path) {
  auto cfg = flags.build();

  gp::RunManifest manifest;
  manifest.command = "preprocess";
  manifest.seed = seed;
  flags.snapshot(manifest, cfg);
  manifest.config["negative_ratio"] = std::to_string(negative_ratio);
  manifest.add_input(input);
  manifest.add_input(lexicon_path);
  if (!annotations_path.empty()) manifest.add_input(annotations_path);
  manifest.write(output + ".manifest.json");

  auto lexicon = gp::load_lexicon(lexicon_path);
  auto sentences = gp::parse_corpus(input, parse_format(format_name, input));

  json report = json::array();
  auto count_marks = [&]() {
    std::size_t pos = 0, neg = 0;
    for (const auto& s : sentences)
      for (const auto& mk : s.mwe_marks) mk.not_mwe ? ++neg : ++pos;
    return std::make_pair(pos, neg);
  };

  gp::PipelineStats stats;
  gp::mark_semcor_mwes(sentences, &stats);
  for (auto& s : sentences) gp::attach_stranded_constituents(s, lexicon, &stats);
  auto [pos0, neg0] = count_marks();
  report.push_back({{"stage", "marked"}, {"pos_mwe", pos0}, {"neg_mwe", neg0}});

  if (!annotations_path.empty()) {
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < sentences.size(); ++i) by_id[sentences[i].sent_id] = i;
    std::ifstream in(annotations_path);
    if (!in) throw gp::Error("cannot open annotations: " + annotations_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j;
      try {
        j = json::parse(line);
        auto it = by_id.find(j.at("sent_id").get<std::string>());
        if (it == by_id.end())
          throw gp::MalformedLine(line_no, "unknown sentence id in annotation");
        gp::MweMark mk;
        mk.token_indices = j.at("indices").get<std::vector<int>>();
        std::sort(mk.token_indices.begin(), mk.token_indices.end());
        mk.entry_key = j.at("key").get<std::string>();
        std::string label = j.at("label").get<std::string>();
        if (label == gp::kNotMweLabel) mk.not_mwe = true;
        else mk.gold_sense = label;
        sentences[it->second].mwe_marks.push_back(std::move(mk));
      } catch (const json::exception& e) {
        throw gp::MalformedLine(line_no, e.what());
      }
    }
    auto [pos1, neg1] = count_marks();
    report.push_back({{"stage", "+annotation"}, {"pos_mwe", pos1}, {"neg_mwe", neg1}});
  }

  if (negative_ratio > 0.0) {
    auto negatives = gp::generate_negatives(sentences, lexicon, cfg, negative_ratio, seed);
    std::map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < sentences.size(); ++i) by_id[sentences[i].sent_id] = i;
    for (const auto& cand : negatives.negatives) {
      gp::MweMark mk;
      mk.token_indices = cand.sorted_indices();
      mk.entry_key = cand.entry->key;
      mk.not_mwe = true;
      sentences[by_id.at(cand.sent_id)].mwe_marks.push_back(std::move(mk));
    }
    auto [pos2, neg2] = count_marks();
    report.push_back({{"stage", "+autoneg"},
                      {"pos_mwe", pos2},
                      {"neg_mwe", neg2},
                      {"shortfall", negatives.shortfall}});
    if (negatives.shortfall)
      std::cerr << "warning: only " << negatives.negatives.size() << " of "
                << negatives.desired << " requested negatives available\n";
  }

  gp::write_canonical_json(sentences, output);
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw gp::Error("cannot write report: " + report_path);
    out << report.dump(2) << "\n";
  }
  std::cout << report.dump() << "\n";
  if (stats.malformed_mwe_lemmas > 0)
    std::cerr << "warning: skipped " << stats.malformed_mwe_lemmas
              << " malformed underscore lemmas\n";
  if (stats.unattached_marks > 0)
    std::cerr << "warning: " << stats.unattached_marks << " marks left unattached\n";
  return 0;
}

// --- train ---

int cmd_train(const std::string& corpus_path, const std::string& lexicon_path,
              const std::string& output, const std::string& metrics_path,
              const std::string& format_name, gp::TrainConfig tc, int dim, int codes, int vocab,
              int max_len, const std::string& init_weights, bool finetune,
              const PipelineFlags& flags, const std::string& train_config_path) {
  gp::RunManifest manifest;
  manifest.command = "train";
  manifest.seed = tc.seed;
  manifest.config["epochs"] = std::to_string(tc.epochs);
  manifest.config["learning_rate"] = std::to_string(tc.learning_rate);
  manifest.config["batch_size"] = std::to_string(tc.batch_size);
  manifest.config["dev_fraction"] = std::to_string(tc.dev_fraction);
  manifest.config["scorer"] = gp::scorer_kind_to_string(tc.scorer_kind);
  manifest.config["dev_metric"] = tc.dev_metric;
  manifest.config["finetune"] = finetune ? "true" : "false";
  manifest.add_input(corpus_path);
  manifest.add_input(lexicon_path);
  if (!init_weights.empty()) manifest.add_input(init_weights);
  if (!train_config_path.empty()) manifest.add_input(train_config_path);
  manifest.write(output + ".manifest.json");

  auto lexicon = gp::load_lexicon(lexicon_path);
  auto sentences = gp::parse_corpus(corpus_path, parse_format(format_name, corpus_path));

  gp::ScorerWeights weights =
      init_weights.empty()
          ? gp::ScorerWeights::random_init({dim, codes, vocab, max_len}, tc.seed)
          : gp::load_checkpoint(init_weights);

  gp::TrainResult result;
  if (finetune) {
    if (init_weights.empty())
      throw gp::ConfigError("--finetune requires --init-weights");
    auto cfg = flags.build();
    cfg.use_encoder_filter = true;
    auto examples = gp::build_finetune_set(weights, sentences, lexicon, cfg, tc.scorer_kind);
    result = gp::train_on_examples(std::move(weights), sentences, std::move(examples), tc);
  } else {
    result = gp::train(std::move(weights), sentences, lexicon, tc);
  }

  gp::save_checkpoint(result.best_weights, output);
  if (!metrics_path.empty()) gp::write_metrics_history(result.history, metrics_path);
  std::cout << json{{"best_epoch", result.best_epoch},
                    {"epochs", result.history.size()},
                    {"dev_sentences", result.dev_sentence_indices.size()}}
                   .dump()
            << "\n";
  return 0;
}

// --- wsd ---

int cmd_wsd(const std::string& input, const std::string& lexicon_path,
            const std::string& weights_path, const std::string& scorer_name,
            const std::string& format_name, const std::string& output) {
  auto kind = gp::scorer_kind_from_string(scorer_name.empty() ? "biencoder" : scorer_name);
  if (!kind) throw gp::ConfigError("unknown scorer '" + scorer_name + "'");

  gp::RunManifest manifest;
  manifest.command = "wsd";
  manifest.config["scorer"] = gp::scorer_kind_to_string(*kind);
  manifest.add_input(input);
  manifest.add_input(lexicon_path);
  manifest.add_input(weights_path);
  manifest.write(output + ".manifest.json");

  auto lexicon = gp::load_lexicon(lexicon_path);
  auto sentences = gp::parse_corpus(input, parse_format(format_name, input));
  auto weights = gp::load_checkpoint(weights_path);

  std::ofstream out(output);
  if (!out) throw gp::Error("cannot write predictions: " + output);
  std::size_t skipped = 0;
  for (const auto& inst : wsd_instances(sentences)) {
    gp::EntryPtr entry = lexicon.lookup(inst.lemma_key, inst.pos);
    if (!entry) {
      // gold instances name a lemma+POS; fall back to any POS before skipping
      auto all = lexicon.lookup_key(inst.lemma_key);
      if (!all.empty()) entry = all.front();
    }
    if (!entry) {
      ++skipped;
      std::cerr << "warning: lemma not in lexicon, skipping instance " << inst.id << "\n";
      continue;
    }
    const auto& sent = sentences[inst.sentence_index];
    // gold instances always need one of the listed senses, so the
    // not-an-MWE label never competes here
    gp::SenseScores scores =
        *kind == gp::ScorerKind::Biencoder
            ? gp::score_biencoder(weights, sent, inst.indices, entry->senses, /*is_mwe=*/false)
            : gp::score_polyencoder(weights, sent, inst.indices, entry->senses, false,
                                    *kind == gp::ScorerKind::PolyencoderDistinct);
    out << json{{"instance", inst.id}, {"sense", gp::predict_sense(scores)}}.dump() << "\n";
  }
  if (skipped > 0) std::cerr << "warning: skipped " << skipped << " instances\n";
  return 0;
}

// --- export-annotations ---

int cmd_export_annotations(const std::string& input, const std::string& lexicon_path,
                           const std::string& format_name, const std::string& output,
                           const PipelineFlags& flags) {
  auto cfg = flags.build();

  gp::RunManifest manifest;
  manifest.command = "export-annotations";
  flags.snapshot(manifest, cfg);
  manifest.add_input(input);
  manifest.add_input(lexicon_path);
  manifest.write(output + ".manifest.json");

  auto lexicon = gp::load_lexicon(lexicon_path);
  auto sentences = gp::parse_corpus(input, parse_format(format_name, input));

  std::ofstream out(output);
  if (!out) throw gp::Error("cannot write candidate export: " + output);
  for (const auto& s : sentences) {
    auto cands = gp::detect_exhaustive(s, lexicon, cfg, nullptr);
    cands = gp::filter_ordered(std::move(cands));
    cands = gp::filter_max_gappiness(std::move(cands), cfg.max_gap);
    for (const auto& c : cands) {
      json senses = json::array();
      for (const auto& sense : c.entry->senses)
        senses.push_back({{"id", sense.sense_id}, {"gloss", sense.gloss}});
      out << json{{"sent_id", s.sent_id},
                  {"indices", c.sorted_indices()},
                  {"key", c.entry->key},
                  {"senses", senses},
                  {"label", ""}}
                 .dump()
          << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lexicon-driven MWE identification and gloss-based sense scoring"};
  app.require_subcommand(1);

  // extract
  auto* extract = app.add_subcommand("extract", "run the MWE pipeline over a corpus");
  std::string ex_input, ex_lexicon, ex_output, ex_format, ex_weights, ex_scorer, ex_precomp;
  bool ex_encoder = false;
  PipelineFlags ex_flags;
  extract->add_option("--input", ex_input)->required();
  extract->add_option("--lexicon", ex_lexicon)->required();
  extract->add_option("--output", ex_output)->required();
  extract->add_option("--format", ex_format, "cupt, dimsum or json (default: by extension)");
  ex_flags.add_to(extract);
  extract->add_flag("--encoder-filter", ex_encoder, "apply the gloss-based encoder filter");
  extract->add_option("--weights", ex_weights, "scorer checkpoint");
  extract->add_option("--scorer", ex_scorer, "biencoder | polyencoder | polyencoder-distinct");
  extract->add_option("--precomputed", ex_precomp, "precomputed vectors file");

  // eval
  auto* eval = app.add_subcommand("eval", "score predictions against gold");
  std::string ev_gold, ev_pred, ev_metric, ev_format, ev_output;
  bool ev_strict = false;
  eval->add_option("--gold", ev_gold)->required();
  eval->add_option("--pred", ev_pred)->required();
  eval->add_option("--metric", ev_metric)
      ->required()
      ->check(CLI::IsMember({"mwe-based", "token-based", "dimsum-link", "wsd"}));
  eval->add_option("--format", ev_format);
  eval->add_option("--output", ev_output, "also write the JSON report here");
  eval->add_flag("--strict-missing", ev_strict, "error on missing WSD predictions");

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "mark MWEs, attach constituents, add negatives");
  std::string pp_input, pp_lexicon, pp_output, pp_format, pp_annotations, pp_report;
  double pp_ratio = 0.5;
  std::uint64_t pp_seed = 0;
  PipelineFlags pp_flags;
  prep->add_option("--input", pp_input)->required();
  prep->add_option("--lexicon", pp_lexicon)->required();
  prep->add_option("--output", pp_output)->required();
  prep->add_option("--format", pp_format);
  prep->add_option("--annotations", pp_annotations, "manual annotation file (JSON lines)");
  prep->add_option("--negative-ratio", pp_ratio, "target share of negatives (0 disables)");
  prep->add_option("--seed", pp_seed);
  prep->add_option("--report", pp_report, "write the stage-count report here");
  pp_flags.add_to(prep);

  // train
  auto* train = app.add_subcommand("train", "train or fine-tune the scorer");
  std::string tr_corpus, tr_lexicon, tr_output, tr_metrics, tr_format, tr_scorer = "biencoder";
  std::string tr_init, tr_dev_metric = "accuracy", tr_train_config;
  gp::TrainConfig tc;
  int tr_dim = 64, tr_codes = 16, tr_vocab = 16384, tr_max_len = 128;
  bool tr_finetune = false;
  PipelineFlags tr_flags;
  train->add_option("--corpus", tr_corpus)->required();
  train->add_option("--lexicon", tr_lexicon)->required();
  train->add_option("--output", tr_output)->required();
  train->add_option("--metrics", tr_metrics, "metrics history (JSON lines)");
  train->add_option("--format", tr_format);
  train->add_option("--epochs", tc.epochs);
  train->add_option("--learning-rate", tc.learning_rate);
  train->add_option("--batch-size", tc.batch_size);
  train->add_option("--seed", tc.seed);
  train->add_option("--dev-fraction", tc.dev_fraction);
  train->add_option("--scorer", tr_scorer, "biencoder | polyencoder | polyencoder-distinct");
  train->add_option("--dev-metric", tr_dev_metric)->check(CLI::IsMember({"accuracy", "mwe-f1"}));
  train->add_option("--dim", tr_dim);
  train->add_option("--codes", tr_codes);
  train->add_option("--vocab", tr_vocab);
  train->add_option("--max-len", tr_max_len);
  train->add_option("--init-weights", tr_init, "checkpoint to start from");
  train->add_flag("--finetune", tr_finetune, "fine-tune on binary MWE data");
  train->add_option("--train-config", tr_train_config,
                    "training config file (key = value lines); flags override it");
  tr_flags.add_to(train);

  // wsd
  auto* wsd = app.add_subcommand("wsd", "predict senses for gold instances");
  std::string ws_input, ws_lexicon, ws_weights, ws_scorer, ws_format, ws_output;
  wsd->add_option("--input", ws_input)->required();
  wsd->add_option("--lexicon", ws_lexicon)->required();
  wsd->add_option("--weights", ws_weights)->required();
  wsd->add_option("--scorer", ws_scorer);
  wsd->add_option("--format", ws_format);
  wsd->add_option("--output", ws_output)->required();

  // export-annotations
  auto* exp = app.add_subcommand("export-annotations",
                                 "dump rule-based candidates for offline labeling");
  std::string xa_input, xa_lexicon, xa_format, xa_output;
  PipelineFlags xa_flags;
  exp->add_option("--input", xa_input)->required();
  exp->add_option("--lexicon", xa_lexicon)->required();
  exp->add_option("--format", xa_format);
  exp->add_option("--output", xa_output)->required();
  xa_flags.add_to(exp);

  try {
    app.parse(argc, argv);
    if (extract->parsed())
      return cmd_extract(ex_input, ex_lexicon, ex_output, ex_format, ex_flags, ex_encoder,
                         ex_weights, ex_scorer, ex_precomp);
    if (eval->parsed())
      return cmd_eval(ev_gold, ev_pred, ev_metric, ev_format, ev_output, ev_strict);
    if (prep->parsed())
      return cmd_preprocess(pp_input, pp_lexicon, pp_output, pp_format, pp_annotations, pp_ratio,
                            pp_seed, pp_flags, pp_report);
    if (train->parsed()) {
      auto kind = gp::scorer_kind_from_string(tr_scorer);
      if (!kind) throw gp::ConfigError("unknown scorer '" + tr_scorer + "'");
      tc.scorer_kind = *kind;
      tc.dev_metric = tr_dev_metric;
      if (!tr_train_config.empty()) {
        auto file_cfg = gp::load_train_config(tr_train_config);
        if (!train->count("--epochs")) tc.epochs = file_cfg.epochs;
        if (!train->count("--learning-rate")) tc.learning_rate = file_cfg.learning_rate;
        if (!train->count("--batch-size")) tc.batch_size = file_cfg.batch_size;
        if (!train->count("--seed")) tc.seed = file_cfg.seed;
        if (!train->count("--dev-fraction")) tc.dev_fraction = file_cfg.dev_fraction;
        if (!train->count("--scorer")) tc.scorer_kind = file_cfg.scorer_kind;
        if (!train->count("--dev-metric")) tc.dev_metric = file_cfg.dev_metric;
        tc.negative_ratio = file_cfg.negative_ratio;
      }
      return cmd_train(tr_corpus, tr_lexicon, tr_output, tr_metrics, tr_format, tc, tr_dim,
                       tr_codes, tr_vocab, tr_max_len, tr_init, tr_finetune, tr_flags,
                       tr_train_config);
    }
    if (wsd->parsed())
      return cmd_wsd(ws_input, ws_lexicon, ws_weights, ws_scorer, ws_format, ws_output);
    if (exp->parsed())
      return cmd_export_annotations(xa_input, xa_lexicon, xa_format, xa_output, xa_flags);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // usage problems are input errors
  } catch (const gp::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
