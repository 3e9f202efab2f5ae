#include "logptr/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "logptr/csv.hpp"
#include "logptr/error.hpp"
#include "logptr/rng.hpp"

namespace logptr {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
  size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

}  // namespace

std::vector<std::string> pre_tokenize(const std::string& content) {
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < content.size()) {
    while (i < content.size() && is_space(content[i])) ++i;
    size_t start = i;
    while (i < content.size() && !is_space(content[i])) ++i;
    if (i > start) tokens.emplace_back(content.substr(start, i - start));
  }
  if (tokens.empty()) raise(Errc::EmptyMessage, "message is empty or all whitespace");
  return tokens;
}

std::vector<RawLogRecord> records_from_csv_text(const std::string& text,
                                                const LabelSet& label_set) {
  CsvTable table = parse_csv(text);
  int col_line = table.column("LineId");
  int col_content = table.column("Content");
  int col_template = table.column("EventTemplate");
  if (col_line < 0) raise(Errc::MissingColumn, "LineId");
  if (col_content < 0) raise(Errc::MissingColumn, "Content");
  if (col_template < 0) raise(Errc::MissingColumn, "EventTemplate");

  size_t min_cols = static_cast<size_t>(std::max({col_line, col_content, col_template})) + 1;
  std::vector<RawLogRecord> records;
  records.reserve(table.rows.size());
  for (size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    long row_no = table.row_numbers[r];
    if (row.size() < min_cols)
      raise(Errc::MalformedRow, "row " + std::to_string(row_no) + " has " +
                                    std::to_string(row.size()) + " fields, expected at least " +
                                    std::to_string(min_cols));
    RawLogRecord rec;
    const std::string& id_text = row[col_line];
    try {
      size_t used = 0;
      rec.line_id = std::stol(id_text, &used);
      if (used != id_text.size() || rec.line_id <= 0) throw std::invalid_argument(id_text);
    } catch (const std::exception&) {
      raise(Errc::MalformedRow,
            "row " + std::to_string(row_no) + ": bad LineId '" + id_text + "'");
    }
    rec.content = row[col_content];
    bool blank = std::all_of(rec.content.begin(), rec.content.end(), is_space);
    if (blank)
      raise(Errc::MalformedRow, "row " + std::to_string(row_no) + ": empty Content");
    rec.ground_truth_template = row[col_template];
    if (label_set.mode == ParseMode::general)
      rec.ground_truth_template =
          replace_all(rec.ground_truth_template, "<*>", label_set.labels[0]);

    // Reject label-shaped tokens that are not part of the configured set.
    for (const auto& token : pre_tokenize(rec.ground_truth_template)) {
      if (LabelSet::label_shaped(token) && label_set.index_of(token) == 0)
        raise(Errc::UnknownLabel,
              "'" + token + "' in row " + std::to_string(row_no) + " is not a configured label");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<RawLogRecord> load_structured_csv(const std::string& path,
                                              const LabelSet& label_set) {
  FILE* f = fopen(path.c_str(), "rb");
  if (!f) raise(Errc::IoError, "cannot open CSV file: " + path);
  std::string text;
  char buf[1 << 16];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, got);
  fclose(f);
  return records_from_csv_text(text, label_set);
}

namespace {

bool align_impl(const std::vector<std::string>& message_tokens,
                const std::vector<std::string>& template_tokens, const LabelSet& label_set,
                PointerTarget* target, std::vector<LabelRun>* runs, AlignmentError* error) {
  const int m = label_set.count();
  const int n = static_cast<int>(message_tokens.size());
  auto fail = [&](const std::string& token, int cursor, const std::string& reason) {
    if (error) *error = {token, cursor, reason};
    return false;
  };

  if (target) target->indices.reserve(template_tokens.size() + 1);
  int cursor = 1;            // 1-based next unconsumed message position
  int pending_label = 0;     // label index awaiting its consumed run

  auto close_run = [&](int end) {
    if (runs && pending_label > 0) runs->push_back({pending_label, cursor, end});
  };

  for (size_t k = 0; k < template_tokens.size(); ++k) {
    const std::string& tok = template_tokens[k];
    int label_index = label_set.index_of(tok);
    if (label_index > 0) {
      if (pending_label > 0) {
        // Consecutive labels: the earlier one consumes exactly one token.
        if (cursor > n) return fail(tok, cursor, "label consumes zero message tokens");
        close_run(cursor + 1);
        ++cursor;
      }
      if (target) target->indices.push_back(label_index);
      pending_label = label_index;
      continue;
    }
    // Static token: first exact match at or after the cursor; a pending
    // label must consume at least one token, so search strictly after it.
    int from = pending_label > 0 ? cursor + 1 : cursor;
    int match = 0;
    for (int p = from; p <= n; ++p) {
      if (message_tokens[p - 1] == tok) {
        match = p;
        break;
      }
    }
    if (match == 0) {
      return fail(tok, cursor,
                  pending_label > 0 ? "no match leaving a non-empty variable run"
                                    : "static token not found");
    }
    close_run(match);
    if (target) target->indices.push_back(m + match);
    cursor = match + 1;
    pending_label = 0;
  }
  if (pending_label > 0) {
    if (cursor > n)
      return fail(template_tokens.back(), cursor, "label consumes zero message tokens");
    close_run(n + 1);
  }
  if (target) target->indices.push_back(m + n + 1);  // EOS
  return true;
}

}  // namespace

std::optional<PointerTarget> try_align(const std::vector<std::string>& message_tokens,
                                       const std::vector<std::string>& template_tokens,
                                       const LabelSet& label_set,
                                       AlignmentError* error) {
  PointerTarget target;
  if (!align_impl(message_tokens, template_tokens, label_set, &target, nullptr, error))
    return std::nullopt;
  return target;
}

std::optional<std::vector<LabelRun>> try_align_runs(
    const std::vector<std::string>& message_tokens,
    const std::vector<std::string>& template_tokens, const LabelSet& label_set,
    AlignmentError* error) {
  std::vector<LabelRun> runs;
  if (!align_impl(message_tokens, template_tokens, label_set, nullptr, &runs, error))
    return std::nullopt;
  return runs;
}

PointerTarget align_template(const std::vector<std::string>& message_tokens,
                             const std::vector<std::string>& template_tokens,
                             const LabelSet& label_set) {
  if (message_tokens.empty() || template_tokens.empty())
    raise(Errc::AlignmentFailure, "empty message or template");
  AlignmentError err;
  auto target = try_align(message_tokens, template_tokens, label_set, &err);
  if (!target)
    raise(Errc::AlignmentFailure, "template token '" + err.token + "' at cursor " +
                                      std::to_string(err.cursor) + ": " + err.reason);
  return *target;
}

std::vector<std::string> apply_target(const std::vector<std::string>& message_tokens,
                                      const PointerTarget& target,
                                      const LabelSet& label_set) {
  const int m = label_set.count();
  const int n = static_cast<int>(message_tokens.size());
  const int eos = m + n + 1;
  std::vector<std::string> out;
  out.reserve(target.indices.size());
  for (int index : target.indices) {
    if (index < 1 || index > eos)
      raise(Errc::IndexOutOfRange, "pointer index " + std::to_string(index) +
                                       " outside [1, " + std::to_string(eos) + "]");
    if (index == eos) break;
    if (index <= m)
      out.push_back(label_set.labels[index - 1]);
    else
      out.push_back(message_tokens[index - m - 1]);
  }
  return out;
}

SplitIndices split_indices(size_t n, uint64_t seed) {
  if (n < 5) raise(Errc::TooFewRecords, "need at least 5 records, got " + std::to_string(n));
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  SplitMix64 rng(seed);
  fisher_yates(order, rng);

  auto rounded = [](double x) { return static_cast<size_t>(std::llround(x)); };
  size_t n_train = rounded(0.2 * static_cast<double>(n));
  size_t n_val = rounded(0.2 * static_cast<double>(n));

  SplitIndices split;
  split.train.assign(order.begin(), order.begin() + n_train);
  split.validation.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  split.test.assign(order.begin() + n_train + n_val, order.end());
  return split;
}

DatasetSplit split_dataset(const std::vector<AnnotatedRecord>& records, uint64_t seed) {
  SplitIndices idx = split_indices(records.size(), seed);
  DatasetSplit split;
  split.seed = seed;
  auto gather = [&](const std::vector<size_t>& ids, std::vector<AnnotatedRecord>& out) {
    out.reserve(ids.size());
    for (size_t i : ids) out.push_back(records[i]);
  };
  gather(idx.train, split.train);
  gather(idx.validation, split.validation);
  gather(idx.test, split.test);
  return split;
}

}  // namespace logptr
