#include "glosspipe/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <json.hpp>

#include "glosspipe/errors.hpp"

namespace glosspipe {

using nlohmann::json;

std::string to_lower_ascii(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::optional<Pos> pos_from_char(char c) {
  switch (c) {
    case 'n': return Pos::Noun;
    case 'v': return Pos::Verb;
    case 'a': return Pos::Adjective;
    case 'r': return Pos::Adverb;
    case 'x': return Pos::Other;
    default: return std::nullopt;
  }
}

char pos_to_char(Pos p) { return static_cast<char>(p); }

Pos pos_from_upos(const std::string& upos) {
  if (upos == "NOUN" || upos == "PROPN") return Pos::Noun;
  if (upos == "VERB" || upos == "AUX") return Pos::Verb;
  if (upos == "ADJ") return Pos::Adjective;
  if (upos == "ADV") return Pos::Adverb;
  return Pos::Other;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_key(const std::string& key) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t us = key.find('_', start);
    if (us == std::string::npos) {
      parts.push_back(key.substr(start));
      break;
    }
    parts.push_back(key.substr(start, us - start));
    start = us + 1;
  }
  return parts;
}

}  // namespace

void Lexicon::add_entry(LexiconEntry entry, std::size_t line_no) {
  entry.key = to_lower_ascii(entry.key);
  if (entry.key.empty()) throw MalformedLine(line_no, "empty key");
  entry.constituents = split_key(entry.key);
  for (const auto& c : entry.constituents)
    if (c.empty()) throw MalformedLine(line_no, "empty constituent in key '" + entry.key + "'");
  if (entry.senses.empty()) throw EmptySenses(entry.key);
  for (std::size_t i = 0; i < entry.senses.size(); ++i) {
    Sense& s = entry.senses[i];
    s.rank = static_cast<int>(i);
    s.gloss = trim(s.gloss);
    if (s.gloss.empty())
      throw MalformedLine(line_no, "empty gloss for sense '" + s.sense_id + "' of '" + entry.key + "'");
    if (s.sense_id.empty()) throw MalformedLine(line_no, "empty sense id in '" + entry.key + "'");
    for (std::size_t j = 0; j < i; ++j)
      if (entry.senses[j].sense_id == s.sense_id)
        throw MalformedLine(line_no, "duplicate sense id '" + s.sense_id + "' in '" + entry.key + "'");
  }

  auto map_key = std::make_pair(entry.key, pos_to_char(entry.pos));
  if (by_key_pos_.count(map_key)) throw DuplicateEntry(entry.key, pos_to_char(entry.pos));

  auto ptr = std::make_shared<const LexiconEntry>(std::move(entry));
  by_key_pos_.emplace(map_key, ptr);

  auto at = std::upper_bound(entries_.begin(), entries_.end(), ptr,
                             [](const EntryPtr& a, const EntryPtr& b) {
                               return std::tie(a->key, a->pos) < std::tie(b->key, b->pos);
                             });
  entries_.insert(at, ptr);

  if (ptr->is_mwe()) {
    for (const auto& c : ptr->constituents) {
      auto& bucket = constituent_index_[c];
      if (std::find(bucket.begin(), bucket.end(), ptr) == bucket.end()) bucket.push_back(ptr);
    }
  }
}

EntryPtr Lexicon::lookup(const std::string& key, Pos pos) const {
  auto it = by_key_pos_.find(std::make_pair(to_lower_ascii(key), pos_to_char(pos)));
  return it == by_key_pos_.end() ? nullptr : it->second;
}

std::vector<EntryPtr> Lexicon::lookup_key(const std::string& key) const {
  std::vector<EntryPtr> out;
  for (Pos p : {Pos::Noun, Pos::Verb, Pos::Adjective, Pos::Adverb, Pos::Other})
    if (auto e = lookup(key, p)) out.push_back(std::move(e));
  return out;
}

std::vector<EntryPtr> Lexicon::entries_for_constituent(const std::string& lemma) const {
  auto it = constituent_index_.find(to_lower_ascii(lemma));
  if (it == constituent_index_.end()) return {};
  auto out = it->second;
  std::sort(out.begin(), out.end(), [](const EntryPtr& a, const EntryPtr& b) {
    return std::tie(a->key, a->pos) < std::tie(b->key, b->pos);
  });
  return out;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open lexicon file: " + path.string());

  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw MalformedLine(line_no, e.what());
    }
    if (!j.is_object() || !j.contains("key") || !j.contains("pos") || !j.contains("senses"))
      throw MalformedLine(line_no, "expected object with key/pos/senses");

    LexiconEntry entry;
    try {
      entry.key = j.at("key").get<std::string>();
      std::string pos_str = j.at("pos").get<std::string>();
      if (pos_str.size() != 1) throw MalformedLine(line_no, "pos must be one of n,v,a,r,x");
      auto pos = pos_from_char(pos_str[0]);
      if (!pos) throw MalformedLine(line_no, "pos must be one of n,v,a,r,x");
      entry.pos = *pos;
      if (!j.at("senses").is_array()) throw MalformedLine(line_no, "senses must be an array");
      for (const auto& js : j.at("senses")) {
        Sense s;
        s.sense_id = js.at("id").get<std::string>();
        s.gloss = js.at("gloss").get<std::string>();
        entry.senses.push_back(std::move(s));
      }
    } catch (const json::exception& e) {
      throw MalformedLine(line_no, e.what());
    }
    if (entry.senses.empty()) throw EmptySenses(to_lower_ascii(entry.key));
    lex.add_entry(std::move(entry), line_no);
  }
  return lex;
}

void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write lexicon file: " + path.string());
  for (const auto& e : lexicon.entries()) {
    json senses = json::array();
    for (const auto& s : e->senses) senses.push_back({{"id", s.sense_id}, {"gloss", s.gloss}});
    json j{{"key", e->key}, {"pos", std::string(1, pos_to_char(e->pos))}, {"senses", senses}};
    out << j.dump() << "\n";
  }
}

}  // namespace glosspipe
