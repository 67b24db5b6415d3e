#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace glosspipe {

// Coarse part-of-speech classes carried by lexicon entries: the four WordNet
// classes plus a catch-all for corpora with richer tag sets.
enum class Pos : char {
  Noun = 'n',
  Verb = 'v',
  Adjective = 'a',
  Adverb = 'r',
  Other = 'x',
};

std::optional<Pos> pos_from_char(char c);
char pos_to_char(Pos p);

// Maps a corpus UPOS tag ("NOUN", "VERB", ...) onto the coarse class.
Pos pos_from_upos(const std::string& upos);

// One glossed sense of a lexicon entry. rank is the 0-based position in the
// entry's sense list; rank 0 is the entry's first sense.
struct Sense {
  std::string sense_id;
  std::string gloss;
  int rank = 0;
};

struct LexiconEntry {
  std::string key;                         // constituents joined by "_", lowercase
  std::vector<std::string> constituents;   // key split on "_"
  Pos pos = Pos::Other;
  std::vector<Sense> senses;               // non-empty, ordered by rank

  bool is_mwe() const { return constituents.size() >= 2; }
};

using EntryPtr = std::shared_ptr<const LexiconEntry>;

// Immutable after load; safe for concurrent reads.
class Lexicon {
public:
  Lexicon() = default;

  // Adds a validated entry. Throws DuplicateEntry / EmptySenses / MalformedLine
  // (line_no used in error messages only).
  void add_entry(LexiconEntry entry, std::size_t line_no = 0);

  const std::vector<EntryPtr>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  // Exact (key, pos) lookup; nullptr when absent. Key is lowercased first.
  EntryPtr lookup(const std::string& key, Pos pos) const;

  // All entries sharing a key regardless of pos, ordered n,v,a,r,x.
  std::vector<EntryPtr> lookup_key(const std::string& key) const;

  // All MWE entries containing the lemma among their constituents, sorted by
  // key (then pos). Unknown lemma yields an empty list.
  std::vector<EntryPtr> entries_for_constituent(const std::string& lemma) const;

private:
  std::vector<EntryPtr> entries_;  // sorted by (key, pos)
  std::map<std::pair<std::string, char>, EntryPtr> by_key_pos_;
  std::unordered_map<std::string, std::vector<EntryPtr>> constituent_index_;
};

// Reads a JSON-lines lexicon file:
//   {"key": str, "pos": "n|v|a|r|x", "senses": [{"id": str, "gloss": str}, ...]}
// Sense order in the array defines first-sense rank. Keys are lowercased;
// blank lines are skipped.
Lexicon load_lexicon(const std::filesystem::path& path);

// Writes the same JSON-lines format; load(save(lex)) is structurally identical.
void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path);

std::string to_lower_ascii(std::string s);

}  // namespace glosspipe
