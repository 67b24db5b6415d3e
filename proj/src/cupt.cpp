#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "glosspipe/corpus.hpp"
#include "glosspipe/errors.hpp"
#include "glosspipe/lexicon.hpp"

// CoNLL-U Plus reader/writer for the PARSEME:MWE column. Multiword-token
// range lines and empty nodes never take part in MWE indexing; range lines
// are preserved for output, empty nodes are dropped.

namespace glosspipe {

namespace {

constexpr int kNumStandardColumns = 11;
const char* kStandardColumns[kNumStandardColumns] = {
    "ID", "FORM", "LEMMA", "UPOS", "XPOS", "FEATS",
    "HEAD", "DEPREL", "DEPS", "MISC", "PARSEME:MWE"};

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

bool is_integer(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

struct ColumnLayout {
  int id = 0, form = 1, lemma = 2, upos = 3, mwe = 10;
  int total = kNumStandardColumns;
  std::vector<int> passthrough;  // positions mapped onto XPOS..MISC extras

  static ColumnLayout standard() {
    ColumnLayout l;
    l.passthrough = {4, 5, 6, 7, 8, 9};
    return l;
  }

  static ColumnLayout from_header(const std::string& names, std::size_t line_no) {
    ColumnLayout l;
    std::istringstream iss(names);
    std::vector<std::string> cols;
    std::string c;
    while (iss >> c) cols.push_back(c);
    l.total = static_cast<int>(cols.size());
    l.id = l.form = l.lemma = l.upos = l.mwe = -1;
    for (int i = 0; i < l.total; ++i) {
      if (cols[i] == "ID") l.id = i;
      else if (cols[i] == "FORM") l.form = i;
      else if (cols[i] == "LEMMA") l.lemma = i;
      else if (cols[i] == "UPOS") l.upos = i;
      else if (cols[i] == "PARSEME:MWE") l.mwe = i;
      else l.passthrough.push_back(i);
    }
    if (l.id < 0 || l.form < 0 || l.mwe < 0)
      throw MalformedLine(line_no, "global.columns must include ID, FORM and PARSEME:MWE");
    return l;
  }
};

struct MweTag {
  int id;
  std::optional<std::string> category;
};

std::vector<MweTag> parse_mwe_tags(const std::string& field, const std::string& sent_id,
                                   std::size_t line_no) {
  std::vector<MweTag> tags;
  if (field.empty() || field == "*" || field == "_") return tags;
  std::size_t start = 0;
  while (start <= field.size()) {
    std::size_t semi = field.find(';', start);
    std::string part = field.substr(start, semi == std::string::npos ? std::string::npos
                                                                     : semi - start);
    std::size_t colon = part.find(':');
    std::string id_part = colon == std::string::npos ? part : part.substr(0, colon);
    if (!is_integer(id_part))
      throw MalformedRow(sent_id, line_no, "bad MWE tag '" + field + "'");
    MweTag tag{std::stoi(id_part), std::nullopt};
    if (colon != std::string::npos) {
      std::string cat = part.substr(colon + 1);
      if (cat.empty()) throw MalformedRow(sent_id, line_no, "empty MWE category in '" + field + "'");
      tag.category = cat;
    }
    tags.push_back(std::move(tag));
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  return tags;
}

std::string comment_value(const std::string& comment, const std::string& key) {
  // comment is a full "# key = value" line
  std::size_t eq = comment.find('=');
  if (eq == std::string::npos) return "";
  std::string head = comment.substr(1, eq - 1);
  std::string k;
  for (char ch : head)
    if (!std::isspace(static_cast<unsigned char>(ch))) k += ch;
  if (k != key) return "";
  std::string v = comment.substr(eq + 1);
  std::size_t a = v.find_first_not_of(" \t");
  return a == std::string::npos ? "" : v.substr(a);
}

}  // namespace

std::vector<Sentence> parse_cupt(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open cupt file: " + path.string());

  ColumnLayout layout = ColumnLayout::standard();
  bool layout_seen = false;

  std::vector<Sentence> sentences;
  Sentence current;
  bool in_sentence = false;
  // open MWE groups of the current sentence: id -> (category, indices)
  std::map<int, MweAnnotation> open;

  std::string line;
  std::size_t line_no = 0;

  auto flush = [&]() {
    if (!in_sentence) return;
    if (current.sent_id.empty()) current.sent_id = "s" + std::to_string(sentences.size() + 1);
    for (auto& [id, ann] : open) {
      std::sort(ann.token_indices.begin(), ann.token_indices.end());
      current.gold_mwes.push_back(std::move(ann));
    }
    std::sort(current.gold_mwes.begin(), current.gold_mwes.end(),
              [](const MweAnnotation& a, const MweAnnotation& b) { return a.mwe_id < b.mwe_id; });
    open.clear();
    sentences.push_back(std::move(current));
    current = Sentence{};
    in_sentence = false;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      std::string v = comment_value(line, "global.columns");
      if (!v.empty()) {
        if (!layout_seen) {
          layout = ColumnLayout::from_header(v, line_no);
          layout_seen = true;
        }
        continue;  // re-emitted at the top on write
      }
      current.comments.push_back(line);
      if (current.sent_id.empty()) {
        std::string sid = comment_value(line, "source_sent_id");
        if (sid.empty()) sid = comment_value(line, "sent_id");
        if (!sid.empty()) {
          // source_sent_id is "uri path id"; the last field is the id proper
          std::size_t sp = sid.find_last_of(' ');
          current.sent_id = sp == std::string::npos ? sid : sid.substr(sp + 1);
        }
      }
      in_sentence = true;
      continue;
    }

    auto cols = split_tabs(line);
    if (static_cast<int>(cols.size()) < layout.total)
      throw MalformedRow(current.sent_id, line_no,
                         "expected " + std::to_string(layout.total) + " columns, got " +
                             std::to_string(cols.size()));
    in_sentence = true;

    const std::string& id_field = cols[layout.id];
    std::size_t dash = id_field.find('-');
    if (dash != std::string::npos) {
      // multiword token range: record, never index
      std::string a = id_field.substr(0, dash), b = id_field.substr(dash + 1);
      if (!is_integer(a) || !is_integer(b))
        throw MalformedRow(current.sent_id, line_no, "bad range id '" + id_field + "'");
      MwtRange r;
      r.first_token_index = std::stoi(a) - 1;
      r.last_token_index = std::stoi(b) - 1;
      r.form = cols[layout.form];
      for (int p : layout.passthrough)
        r.extras.push_back(p < static_cast<int>(cols.size()) ? cols[p] : "_");
      current.mwt_ranges.push_back(std::move(r));
      continue;
    }
    if (id_field.find('.') != std::string::npos) continue;  // empty node
    if (!is_integer(id_field))
      throw MalformedRow(current.sent_id, line_no, "bad token id '" + id_field + "'");

    Token t;
    t.index = static_cast<int>(current.tokens.size());
    if (std::stoi(id_field) != t.index + 1)
      throw MalformedRow(current.sent_id, line_no, "non-sequential token id '" + id_field + "'");
    t.form = cols[layout.form];
    t.lemma = layout.lemma >= 0 ? cols[layout.lemma] : "_";
    if (t.lemma.empty() || t.lemma == "_") t.lemma = to_lower_ascii(t.form);
    t.upos = layout.upos >= 0 ? cols[layout.upos] : "_";
    for (int p : layout.passthrough)
      t.extras.push_back(p < static_cast<int>(cols.size()) ? cols[p] : "_");

    for (const auto& tag : parse_mwe_tags(cols[layout.mwe], current.sent_id, line_no)) {
      auto it = open.find(tag.id);
      if (it == open.end()) {
        if (!tag.category) throw DanglingMweRef(current.sent_id, tag.id);
        MweAnnotation ann;
        ann.mwe_id = tag.id;
        ann.category = tag.category;
        ann.token_indices.push_back(t.index);
        open.emplace(tag.id, std::move(ann));
      } else {
        it->second.token_indices.push_back(t.index);
      }
      if (!t.gold_mwe_id) t.gold_mwe_id = tag.id;
    }
    current.tokens.push_back(std::move(t));
  }
  flush();
  return sentences;
}

void write_cupt(const std::vector<Sentence>& sentences, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write cupt file: " + path.string());

  out << "# global.columns =";
  for (const char* c : kStandardColumns) out << " " << c;
  out << "\n";

  for (const auto& s : sentences) {
    bool has_sent_id_comment = false;
    for (const auto& c : s.comments) {
      out << c << "\n";
      if (!comment_value(c, "source_sent_id").empty() || !comment_value(c, "sent_id").empty())
        has_sent_id_comment = true;
    }
    if (!has_sent_id_comment) out << "# source_sent_id = . . " << s.sent_id << "\n";

    // MWE column per token: first token of each group carries id:CAT
    std::vector<std::string> mwe_col(s.tokens.size(), "*");
    std::vector<std::vector<std::string>> tags(s.tokens.size());
    auto groups = s.gold_mwes;
    std::sort(groups.begin(), groups.end(),
              [](const MweAnnotation& a, const MweAnnotation& b) { return a.mwe_id < b.mwe_id; });
    for (const auto& g : groups) {
      for (std::size_t k = 0; k < g.token_indices.size(); ++k) {
        int idx = g.token_indices[k];
        std::string tag = std::to_string(g.mwe_id);
        if (k == 0) tag += ":" + g.category.value_or("MWE");
        tags[idx].push_back(std::move(tag));
      }
    }
    for (std::size_t i = 0; i < tags.size(); ++i) {
      if (tags[i].empty()) continue;
      std::string joined;
      for (std::size_t k = 0; k < tags[i].size(); ++k) {
        if (k > 0) joined += ";";
        joined += tags[i][k];
      }
      mwe_col[i] = std::move(joined);
    }

    std::size_t next_range = 0;
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      while (next_range < s.mwt_ranges.size() &&
             s.mwt_ranges[next_range].first_token_index == static_cast<int>(i)) {
        const auto& r = s.mwt_ranges[next_range];
        out << (r.first_token_index + 1) << "-" << (r.last_token_index + 1) << "\t" << r.form
            << "\t_\t_";  // range lines carry no lemma/upos
        for (int k = 0; k < 6; ++k)
          out << "\t" << (k < static_cast<int>(r.extras.size()) ? r.extras[k] : "_");
        out << "\t*\n";
        ++next_range;
      }
      const Token& t = s.tokens[i];
      out << (i + 1) << "\t" << t.form << "\t" << t.lemma << "\t" << t.upos;
      for (int k = 0; k < 6; ++k)
        out << "\t" << (k < static_cast<int>(t.extras.size()) ? t.extras[k] : "_");
      out << "\t" << mwe_col[i] << "\n";
    }
    out << "\n";
  }
}

}  // namespace glosspipe
