#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "logptr/labels.hpp"

namespace logptr {

// One data row of a structured log CSV. In general mode every "<*>" in the
// template has already been rewritten to the single label token.
struct RawLogRecord {
  long line_id = 0;
  std::string content;
  std::string ground_truth_template;
};

// 1-based indices into the augmented input [C, T, EOS]: i <= m selects
// label c_i, m < i <= m+n selects word t_{i-m}, i == m+n+1 is EOS.
// A valid target always ends with the EOS index and contains nothing after.
struct PointerTarget {
  std::vector<int> indices;

  bool operator==(const PointerTarget&) const = default;
};

struct AnnotatedRecord {
  long line_id = 0;
  std::vector<std::string> message_tokens;
  std::vector<std::string> template_tokens;
  PointerTarget target;
};

struct DatasetSplit {
  std::vector<AnnotatedRecord> train;
  std::vector<AnnotatedRecord> validation;
  std::vector<AnnotatedRecord> test;
  uint64_t seed = 0;
};

// Maximal runs of non-whitespace characters, in order. Throws EmptyMessage
// when content is all whitespace.
std::vector<std::string> pre_tokenize(const std::string& content);

// Load a LogHub-style structured CSV (columns LineId, Content,
// EventTemplate; extra columns ignored). General mode rewrites "<*>" to the
// single label. Throws MissingColumn / MalformedRow / UnknownLabel.
std::vector<RawLogRecord> load_structured_csv(const std::string& path,
                                              const LabelSet& label_set);
std::vector<RawLogRecord> records_from_csv_text(const std::string& text,
                                                const LabelSet& label_set);

// Greedy left-to-right alignment of template tokens onto message tokens.
// Static tokens match exactly at the first position at or after the cursor;
// a label consumes the non-empty run of message tokens up to the next
// static match (or the end of the message). Appends the EOS index.
// Throws AlignmentFailure.
PointerTarget align_template(const std::vector<std::string>& message_tokens,
                             const std::vector<std::string>& template_tokens,
                             const LabelSet& label_set);

struct AlignmentError {
  std::string token;  // first template token that could not be placed
  int cursor = 0;     // 1-based message cursor at failure
  std::string reason;
};

std::optional<PointerTarget> try_align(const std::vector<std::string>& message_tokens,
                                       const std::vector<std::string>& template_tokens,
                                       const LabelSet& label_set,
                                       AlignmentError* error = nullptr);

// The message-token run each label occurrence consumes, in template order.
// begin/end are 1-based, half-open: tokens begin..end-1 belong to the label.
struct LabelRun {
  int label_index = 0;  // 1-based index into the label set
  int begin = 0;
  int end = 0;
};

std::optional<std::vector<LabelRun>> try_align_runs(
    const std::vector<std::string>& message_tokens,
    const std::vector<std::string>& template_tokens, const LabelSet& label_set,
    AlignmentError* error = nullptr);

// Decode a pointer target back into template tokens.
// Throws IndexOutOfRange.
std::vector<std::string> apply_target(const std::vector<std::string>& message_tokens,
                                      const PointerTarget& target,
                                      const LabelSet& label_set);

// Deterministic index split: SplitMix64-seeded Fisher-Yates permutation of
// 0..n-1, then 20% / 20% / 60% in shuffled order (sizes round(0.2*n),
// round(0.2*n), remainder). Throws TooFewRecords when n < 5.
struct SplitIndices {
  std::vector<size_t> train;
  std::vector<size_t> validation;
  std::vector<size_t> test;
};
SplitIndices split_indices(size_t n, uint64_t seed);

DatasetSplit split_dataset(const std::vector<AnnotatedRecord>& records, uint64_t seed);

}  // namespace logptr
