#pragma once

#include <stdexcept>
#include <string>

namespace glosspipe {

// Base for every error the toolkit raises on bad input, bad config or a
// broken invariant. Catch this at the CLI boundary.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Bad input files, configs or label spaces; the CLI maps these to exit 2.
class InputError : public Error {
public:
  using Error::Error;
};

// --- lexicon ---

class MalformedLine : public InputError {
public:
  MalformedLine(std::size_t line_no, const std::string& detail)
      : InputError("malformed line " + std::to_string(line_no) + ": " + detail),
        line_no(line_no) {}
  std::size_t line_no;
};

class DuplicateEntry : public InputError {
public:
  DuplicateEntry(std::string key, char pos)
      : InputError("duplicate lexicon entry: key=" + key + " pos=" + std::string(1, pos)),
        key(std::move(key)), pos(pos) {}
  std::string key;
  char pos;
};

class EmptySenses : public InputError {
public:
  explicit EmptySenses(std::string key)
      : InputError("lexicon entry has no senses: " + key), key(std::move(key)) {}
  std::string key;
};

// --- corpus ---

class MalformedRow : public InputError {
public:
  MalformedRow(std::string sent_id, std::size_t line_no, const std::string& detail)
      : InputError("malformed row (sentence " + sent_id + ", line " +
              std::to_string(line_no) + "): " + detail),
        sent_id(std::move(sent_id)), line_no(line_no) {}
  std::string sent_id;
  std::size_t line_no;
};

class DanglingMweRef : public InputError {
public:
  DanglingMweRef(std::string sent_id, int mwe_id)
      : InputError("MWE continuation tag references unopened id " + std::to_string(mwe_id) +
              " in sentence " + sent_id),
        sent_id(std::move(sent_id)), mwe_id(mwe_id) {}
  std::string sent_id;
  int mwe_id;
};

class CyclicParent : public InputError {
public:
  CyclicParent(std::string sent_id, int offset)
      : InputError("token parent offset forms a cycle at offset " + std::to_string(offset) +
              " in sentence " + sent_id),
        sent_id(std::move(sent_id)), offset(offset) {}
  std::string sent_id;
  int offset;
};

class UnsupportedFormat : public InputError {
public:
  explicit UnsupportedFormat(const std::string& name)
      : InputError("unsupported corpus format: " + name) {}
};

// --- scorer ---

class SentenceTooLong : public InputError {
public:
  SentenceTooLong(std::size_t length, std::size_t max_len)
      : InputError("sentence of length " + std::to_string(length) +
              " exceeds encoder max_len " + std::to_string(max_len)) {}
};

class IndexOutOfRange : public Error {
public:
  IndexOutOfRange(int index, std::size_t count)
      : Error("token index " + std::to_string(index) + " out of range (n=" +
              std::to_string(count) + ")") {}
};

class MaskOverlap : public Error {
public:
  explicit MaskOverlap(int position)
      : Error("target/nontarget masks do not partition positions at " +
              std::to_string(position)) {}
};

// --- pipeline / training ---

class ConfigError : public InputError {
public:
  using InputError::InputError;
};

class GoldNotInLabelSpace : public InputError {
public:
  explicit GoldNotInLabelSpace(const std::string& gold)
      : InputError("gold label not in the example's label space: " + gold) {}
};

class DivergedLoss : public Error {
public:
  DivergedLoss(int epoch, std::size_t batch_index, double loss)
      : Error("training loss diverged (epoch " + std::to_string(epoch) + ", batch " +
              std::to_string(batch_index) + ", loss=" + std::to_string(loss) + ")") {}
};

// --- eval ---

class SentenceIdMismatch : public InputError {
public:
  explicit SentenceIdMismatch(const std::string& detail)
      : InputError("gold/predicted sentence ids do not match: " + detail) {}
};

class MissingPrediction : public InputError {
public:
  explicit MissingPrediction(std::string instance_id)
      : InputError("no prediction for instance " + instance_id),
        instance_id(std::move(instance_id)) {}
  std::string instance_id;
};

}  // namespace glosspipe
