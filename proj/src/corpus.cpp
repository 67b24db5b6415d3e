#include "glosspipe/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "glosspipe/errors.hpp"
#include "glosspipe/lexicon.hpp"

namespace glosspipe {

using nlohmann::json;

std::optional<std::string> validate_sentence(const Sentence& s) {
  const int n = static_cast<int>(s.tokens.size());
  for (int i = 0; i < n; ++i) {
    if (s.tokens[i].index != i)
      return "token index " + std::to_string(s.tokens[i].index) + " at position " + std::to_string(i);
    if (s.tokens[i].lemma.empty()) return "empty lemma at position " + std::to_string(i);
  }
  std::set<int> ids;
  for (const auto& m : s.gold_mwes) {
    if (!ids.insert(m.mwe_id).second)
      return "duplicate mwe id " + std::to_string(m.mwe_id);
    if (m.token_indices.size() < 2)
      return "mwe " + std::to_string(m.mwe_id) + " has fewer than 2 tokens";
    for (std::size_t k = 0; k < m.token_indices.size(); ++k) {
      int idx = m.token_indices[k];
      if (idx < 0 || idx >= n) return "mwe index out of bounds";
      if (k > 0 && m.token_indices[k - 1] >= idx) return "mwe indices not strictly increasing";
      if (!s.tokens[idx].gold_mwe_id || *s.tokens[idx].gold_mwe_id != m.mwe_id)
        return "token " + std::to_string(idx) + " does not carry mwe id " + std::to_string(m.mwe_id);
    }
  }
  for (const auto& t : s.tokens) {
    if (!t.gold_mwe_id) continue;
    auto it = std::find_if(s.gold_mwes.begin(), s.gold_mwes.end(),
                           [&](const MweAnnotation& m) { return m.mwe_id == *t.gold_mwe_id; });
    if (it == s.gold_mwes.end())
      return "token carries unknown mwe id " + std::to_string(*t.gold_mwe_id);
    if (!std::binary_search(it->token_indices.begin(), it->token_indices.end(), t.index))
      return "token " + std::to_string(t.index) + " not listed in its mwe group";
  }
  for (const auto& mk : s.mwe_marks) {
    if (mk.token_indices.empty()) return "empty mark";
    if (!std::is_sorted(mk.token_indices.begin(), mk.token_indices.end())) return "unsorted mark";
    for (int idx : mk.token_indices)
      if (idx < 0 || idx >= n) return "mark index out of bounds";
    if (mk.not_mwe && mk.gold_sense) return "negative mark with a gold sense";
  }
  return std::nullopt;
}

CorpusFormat format_from_path(const std::filesystem::path& path) {
  auto ext = to_lower_ascii(path.extension().string());
  if (ext == ".cupt" || ext == ".conllu") return CorpusFormat::Cupt;
  if (ext == ".dimsum" || ext == ".tsv") return CorpusFormat::Dimsum;
  return CorpusFormat::CanonicalJson;
}

std::vector<Sentence> parse_corpus(const std::filesystem::path& path, CorpusFormat format) {
  switch (format) {
    case CorpusFormat::Cupt: return parse_cupt(path);
    case CorpusFormat::Dimsum: return parse_dimsum(path);
    case CorpusFormat::CanonicalJson: return parse_canonical_json(path);
  }
  throw UnsupportedFormat("unknown");
}

std::vector<Sentence> parse_corpus(const std::filesystem::path& path) {
  return parse_corpus(path, format_from_path(path));
}

// --- canonical JSON-lines ---

std::vector<Sentence> parse_canonical_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open corpus file: " + path.string());

  std::vector<Sentence> sentences;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw MalformedLine(line_no, e.what());
    }
    Sentence s;
    try {
      s.sent_id = j.value("sent_id", "s" + std::to_string(sentences.size()));
      for (const auto& jt : j.at("tokens")) {
        Token t;
        t.index = static_cast<int>(s.tokens.size());
        t.form = jt.at("form").get<std::string>();
        t.lemma = jt.value("lemma", "");
        if (t.lemma.empty()) t.lemma = to_lower_ascii(t.form);
        t.upos = jt.value("upos", "_");
        if (jt.contains("sense") && !jt.at("sense").is_null())
          t.gold_sense = jt.at("sense").get<std::string>();
        if (jt.contains("mwe") && !jt.at("mwe").is_null())
          t.gold_mwe_id = jt.at("mwe").get<int>();
        s.tokens.push_back(std::move(t));
      }
      if (j.contains("mwes")) {
        for (const auto& jm : j.at("mwes")) {
          MweAnnotation m;
          m.mwe_id = jm.at("id").get<int>();
          m.token_indices = jm.at("indices").get<std::vector<int>>();
          std::sort(m.token_indices.begin(), m.token_indices.end());
          if (jm.contains("category") && !jm.at("category").is_null())
            m.category = jm.at("category").get<std::string>();
          s.gold_mwes.push_back(std::move(m));
        }
      }
      if (j.contains("marks")) {
        for (const auto& jm : j.at("marks")) {
          MweMark mk;
          mk.token_indices = jm.at("indices").get<std::vector<int>>();
          std::sort(mk.token_indices.begin(), mk.token_indices.end());
          mk.entry_key = jm.at("key").get<std::string>();
          if (jm.contains("sense") && !jm.at("sense").is_null())
            mk.gold_sense = jm.at("sense").get<std::string>();
          mk.not_mwe = jm.value("not_mwe", false);
          mk.unattached = jm.value("unattached", false);
          s.mwe_marks.push_back(std::move(mk));
        }
      }
    } catch (const json::exception& e) {
      throw MalformedLine(line_no, e.what());
    }
    // Token mwe ids and the mwes array are kept in sync; the array wins.
    for (const auto& m : s.gold_mwes)
      for (int idx : m.token_indices)
        if (idx >= 0 && idx < static_cast<int>(s.tokens.size()) && !s.tokens[idx].gold_mwe_id)
          s.tokens[idx].gold_mwe_id = m.mwe_id;
    sentences.push_back(std::move(s));
  }
  return sentences;
}

void write_canonical_json(const std::vector<Sentence>& sentences,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write corpus file: " + path.string());
  for (const auto& s : sentences) {
    json tokens = json::array();
    for (const auto& t : s.tokens) {
      json jt{{"form", t.form}, {"lemma", t.lemma}, {"upos", t.upos}};
      if (t.gold_sense) jt["sense"] = *t.gold_sense;
      if (t.gold_mwe_id) jt["mwe"] = *t.gold_mwe_id;
      tokens.push_back(std::move(jt));
    }
    json mwes = json::array();
    for (const auto& m : s.gold_mwes) {
      json jm{{"id", m.mwe_id}, {"indices", m.token_indices}};
      if (m.category) jm["category"] = *m.category;
      mwes.push_back(std::move(jm));
    }
    json j{{"sent_id", s.sent_id}, {"tokens", tokens}, {"mwes", mwes}};
    if (!s.mwe_marks.empty()) {
      json marks = json::array();
      for (const auto& mk : s.mwe_marks) {
        json jm{{"indices", mk.token_indices}, {"key", mk.entry_key}};
        if (mk.gold_sense) jm["sense"] = *mk.gold_sense;
        if (mk.not_mwe) jm["not_mwe"] = true;
        if (mk.unattached) jm["unattached"] = true;
        marks.push_back(std::move(jm));
      }
      j["marks"] = marks;
    }
    out << j.dump() << "\n";
  }
}

// --- prediction output ---

namespace {

// Returns copies of the sentences with gold annotations replaced by the given
// groups, renumbered 1..k per sentence in first-index order.
std::vector<Sentence> with_groups(const std::vector<Sentence>& sentences,
                                  const std::vector<std::vector<OutputGroup>>& groups) {
  if (sentences.size() != groups.size())
    throw Error("write_predictions: group list does not align with sentences");
  std::vector<Sentence> out = sentences;
  for (std::size_t i = 0; i < out.size(); ++i) {
    Sentence& s = out[i];
    for (auto& t : s.tokens) t.gold_mwe_id.reset();
    s.gold_mwes.clear();
    auto sorted = groups[i];
    std::sort(sorted.begin(), sorted.end(), [](const OutputGroup& a, const OutputGroup& b) {
      return a.token_indices < b.token_indices;
    });
    int next_id = 1;
    for (const auto& g : sorted) {
      MweAnnotation m;
      m.mwe_id = next_id++;
      m.token_indices = g.token_indices;
      std::sort(m.token_indices.begin(), m.token_indices.end());
      m.category = g.category.empty() ? "MWE" : g.category;
      for (int idx : m.token_indices) {
        if (idx < 0 || idx >= static_cast<int>(s.tokens.size()))
          throw Error("write_predictions: index out of range in sentence " + s.sent_id);
        if (!s.tokens[idx].gold_mwe_id) s.tokens[idx].gold_mwe_id = m.mwe_id;
      }
      s.gold_mwes.push_back(std::move(m));
    }
  }
  return out;
}

}  // namespace

void write_predictions(const std::vector<Sentence>& sentences,
                       const std::vector<std::vector<OutputGroup>>& groups,
                       CorpusFormat format, const std::filesystem::path& path) {
  auto rewritten = with_groups(sentences, groups);
  switch (format) {
    case CorpusFormat::Cupt: write_cupt(rewritten, path); return;
    case CorpusFormat::Dimsum: write_dimsum(rewritten, path); return;
    case CorpusFormat::CanonicalJson: write_canonical_json(rewritten, path); return;
  }
  throw UnsupportedFormat("unknown");
}

}  // namespace glosspipe
