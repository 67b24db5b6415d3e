#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace glosspipe {

// Reserved label for the synthetic "this candidate is not an MWE" sense.
inline constexpr std::string_view kNotMweLabel = "<not-mwe>";

struct Token {
  int index = 0;             // 0-based position in the sentence
  std::string form;
  std::string lemma;         // non-empty; falls back to lowercased form
  std::string upos;
  std::optional<std::string> gold_sense;
  std::optional<int> gold_mwe_id;
  // Format-specific passthrough columns, preserved by parse -> write:
  //   cupt:   XPOS FEATS HEAD DEPREL DEPS MISC
  //   dimsum: strength, supersense
  std::vector<std::string> extras;
};

struct MweAnnotation {
  int mwe_id = 0;
  std::vector<int> token_indices;  // strictly increasing
  std::optional<std::string> category;
};

// A word or group of words singled out as a sense/MWE training example.
// Produced by SemCor-style preprocessing (underscore lemmas, stranded
// constituent attachment, synthetic negatives); not part of gold evaluation
// annotations.
struct MweMark {
  std::vector<int> token_indices;  // sorted, length >= 1
  std::string entry_key;           // underscore-joined lemma
  std::optional<std::string> gold_sense;
  bool not_mwe = false;            // gold label is the not-an-MWE sense
  bool unattached = false;         // stranded constituents could not be found
};

// cupt multiword-token range line (e.g. "3-4  don't ..."); kept for
// round-tripping, never part of MWE indexing.
struct MwtRange {
  int first_token_index = 0;  // 0-based index of the first covered word
  int last_token_index = 0;
  std::string form;
  std::vector<std::string> extras;  // columns after FORM except the MWE column
};

struct Sentence {
  std::string sent_id;
  std::vector<Token> tokens;
  std::vector<MweAnnotation> gold_mwes;
  std::vector<MweMark> mwe_marks;
  std::vector<std::string> comments;   // verbatim "# ..." lines (cupt)
  std::vector<MwtRange> mwt_ranges;

  std::size_t size() const { return tokens.size(); }
};

// Checks the documented invariants (index/position agreement, annotation index
// bounds and strict ordering, group sizes >= 2, unique mwe ids, token/group id
// agreement). Returns an error description or nullopt when valid.
std::optional<std::string> validate_sentence(const Sentence& s);

enum class CorpusFormat { Cupt, Dimsum, CanonicalJson };

// Guesses from the file extension (.cupt, .dimsum, .jsonl/.json); falls back
// to CanonicalJson.
CorpusFormat format_from_path(const std::filesystem::path& path);

// --- cupt (CoNLL-U Plus with a PARSEME:MWE column) ---
std::vector<Sentence> parse_cupt(const std::filesystem::path& path);
void write_cupt(const std::vector<Sentence>& sentences, const std::filesystem::path& path);

// --- DiMSUM 9-column TSV ---
std::vector<Sentence> parse_dimsum(const std::filesystem::path& path);
void write_dimsum(const std::vector<Sentence>& sentences, const std::filesystem::path& path);

// --- canonical JSON-lines sentence format ---
// {"sent_id": str,
//  "tokens": [{"form","lemma","upos","sense"?,"mwe"?}, ...],
//  "mwes":   [{"id": int, "indices": [int], "category"?: str}, ...],
//  "marks"?: [{"indices": [int], "key": str, "sense"?: str,
//              "not_mwe"?: bool, "unattached"?: bool}, ...]}
std::vector<Sentence> parse_canonical_json(const std::filesystem::path& path);
void write_canonical_json(const std::vector<Sentence>& sentences,
                          const std::filesystem::path& path);

std::vector<Sentence> parse_corpus(const std::filesystem::path& path, CorpusFormat format);
std::vector<Sentence> parse_corpus(const std::filesystem::path& path);

// One predicted or gold MWE group destined for an output file.
struct OutputGroup {
  std::vector<int> token_indices;  // sorted
  std::string category;            // cupt category column; predictions use "MWE"
};

// Rewrites the input sentences with the MWE columns replaced by the given
// groups (one list per sentence, aligned by position) and writes them in the
// requested format. Round-trips through the corresponding parser.
void write_predictions(const std::vector<Sentence>& sentences,
                       const std::vector<std::vector<OutputGroup>>& groups,
                       CorpusFormat format, const std::filesystem::path& path);

}  // namespace glosspipe
