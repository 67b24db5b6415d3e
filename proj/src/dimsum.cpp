#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "glosspipe/corpus.hpp"
#include "glosspipe/errors.hpp"
#include "glosspipe/lexicon.hpp"

// DiMSUM 9-column TSV: offset, word, lemma, POS, MWE tag {O o B b I i},
// parent offset, strength, supersense, sent id. MWE groups are chains of
// parent offsets; weak and strong attachments both count as membership.

namespace glosspipe {

namespace {

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

struct Row {
  Token token;
  char tag = 'O';
  int parent = 0;  // 1-based offset, 0 = none
};

void finish_sentence(std::vector<Row>& rows, std::vector<Sentence>& sentences) {
  if (rows.empty()) return;
  Sentence s;
  for (auto& r : rows) {
    // sent id travels in the last column of each row
    if (s.sent_id.empty() && !r.token.extras.empty() && r.token.extras.size() >= 3 &&
        !r.token.extras[2].empty())
      s.sent_id = r.token.extras[2];
  }
  if (s.sent_id.empty()) s.sent_id = "s" + std::to_string(sentences.size() + 1);

  // Group by following parent chains; root = 0-based index of the chain head.
  std::vector<int> root(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    root[i] = rows[i].parent > 0 ? root[rows[i].parent - 1] : static_cast<int>(i);

  std::map<int, std::vector<int>> components;
  for (std::size_t i = 0; i < rows.size(); ++i) components[root[i]].push_back(static_cast<int>(i));

  int next_id = 1;
  for (auto& [r, members] : components) {
    if (members.size() < 2) continue;
    MweAnnotation ann;
    ann.mwe_id = next_id++;
    ann.token_indices = members;  // already sorted ascending
    for (int idx : members)
      if (!rows[idx].token.gold_mwe_id) rows[idx].token.gold_mwe_id = ann.mwe_id;
    s.gold_mwes.push_back(std::move(ann));
  }

  for (auto& r : rows) {
    r.token.extras.resize(2);  // keep strength + supersense only
    s.tokens.push_back(std::move(r.token));
  }
  rows.clear();
  sentences.push_back(std::move(s));
}

}  // namespace

std::vector<Sentence> parse_dimsum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open DiMSUM file: " + path.string());

  std::vector<Sentence> sentences;
  std::vector<Row> rows;
  std::string line;
  std::size_t line_no = 0;
  std::string current_id;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      finish_sentence(rows, sentences);
      current_id.clear();
      continue;
    }
    auto cols = split_tabs(line);
    if (cols.size() < 7)
      throw MalformedRow(current_id, line_no, "expected at least 7 columns, got " +
                                                  std::to_string(cols.size()));
    cols.resize(9);

    if (!is_integer(cols[0]))
      throw MalformedRow(current_id, line_no, "bad offset '" + cols[0] + "'");
    int offset = std::stoi(cols[0]);
    if (offset != static_cast<int>(rows.size()) + 1)
      throw MalformedRow(current_id, line_no, "non-sequential offset " + std::to_string(offset));
    if (!current_id.empty() && !cols[8].empty() && cols[8] != current_id)
      throw MalformedRow(current_id, line_no, "sentence id changed without blank line");
    if (!cols[8].empty()) current_id = cols[8];

    if (cols[4].size() != 1 || std::string("OoBbIi").find(cols[4][0]) == std::string::npos)
      throw MalformedRow(current_id, line_no, "bad MWE tag '" + cols[4] + "'");
    char tag = cols[4][0];

    if (!is_integer(cols[5]))
      throw MalformedRow(current_id, line_no, "bad parent offset '" + cols[5] + "'");
    int parent = std::stoi(cols[5]);
    if (parent == offset) throw CyclicParent(current_id, offset);
    if (parent > offset)
      throw MalformedRow(current_id, line_no, "parent offset must precede the token");
    if ((tag == 'I' || tag == 'i') && parent == 0)
      throw MalformedRow(current_id, line_no, "continuation tag without a parent");
    if ((tag == 'O' || tag == 'o') && parent != 0)
      throw MalformedRow(current_id, line_no, "non-MWE tag with a parent");

    Row r;
    r.token.index = offset - 1;
    r.token.form = cols[1];
    r.token.lemma = cols[2].empty() || cols[2] == "_" ? to_lower_ascii(cols[1]) : cols[2];
    r.token.upos = cols[3];
    r.token.extras = {cols[6], cols[7], cols[8]};
    r.tag = tag;
    r.parent = parent;
    rows.push_back(std::move(r));
  }
  finish_sentence(rows, sentences);
  return sentences;
}

void write_dimsum(const std::vector<Sentence>& sentences, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write DiMSUM file: " + path.string());

  for (const auto& s : sentences) {
    const int n = static_cast<int>(s.tokens.size());
    std::vector<char> tag(n, 'O');
    std::vector<int> parent(n, 0);

    // spans of each group, for gap (lowercase) marking
    std::vector<std::pair<int, int>> spans;
    for (const auto& g : s.gold_mwes) {
      if (g.token_indices.empty())
        spans.emplace_back(0, -1);
      else
        spans.emplace_back(g.token_indices.front(), g.token_indices.back());
    }

    auto inside_gap = [&](int idx, const MweAnnotation* self) {
      for (std::size_t k = 0; k < spans.size(); ++k) {
        if (self && &s.gold_mwes[k] == self) continue;
        if (spans[k].first < idx && idx < spans[k].second) return true;
      }
      return false;
    };

    for (const auto& g : s.gold_mwes) {
      for (std::size_t k = 0; k < g.token_indices.size(); ++k) {
        int idx = g.token_indices[k];
        bool gap = inside_gap(idx, &g);
        if (k == 0) {
          tag[idx] = gap ? 'b' : 'B';
          parent[idx] = 0;
        } else {
          tag[idx] = gap ? 'i' : 'I';
          parent[idx] = g.token_indices[k - 1] + 1;
        }
      }
    }
    for (int i = 0; i < n; ++i)
      if (tag[i] == 'O' && inside_gap(i, nullptr)) tag[i] = 'o';

    for (int i = 0; i < n; ++i) {
      const Token& t = s.tokens[i];
      std::string strength = parent[i] > 0 ? "_" : "";
      std::string supersense = t.extras.size() > 1 ? t.extras[1] : "";
      out << (i + 1) << "\t" << t.form << "\t" << t.lemma << "\t" << t.upos << "\t" << tag[i]
          << "\t" << parent[i] << "\t" << strength << "\t" << supersense << "\t" << s.sent_id
          << "\n";
    }
    out << "\n";
  }
}

}  // namespace glosspipe
