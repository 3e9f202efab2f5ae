#include "logptr/tokenizer.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "logptr/error.hpp"

namespace logptr {

namespace {

constexpr const char* kReserved[3] = {"[PAD]", "[UNK]", "[BOS]"};

// UTF-8 code point length from the lead byte; invalid leads are treated as
// single bytes so arbitrary log bytes still tokenize.
size_t cp_len(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

std::vector<std::string> split_code_points(const std::string& word) {
  std::vector<std::string> cps;
  size_t i = 0;
  while (i < word.size()) {
    size_t len = std::min(cp_len(static_cast<unsigned char>(word[i])), word.size() - i);
    cps.push_back(word.substr(i, len));
    i += len;
  }
  return cps;
}

bool is_continuation(const std::string& piece) {
  return piece.size() > 2 && piece.compare(0, 2, "##") == 0;
}

}  // namespace

SubwordVocab::SubwordVocab(std::vector<std::string> pieces) : pieces_(std::move(pieces)) {
  index_pieces();
}

void SubwordVocab::index_pieces() {
  if (pieces_.size() < 3 || pieces_[0] != kReserved[0] || pieces_[1] != kReserved[1] ||
      pieces_[2] != kReserved[2])
    raise(Errc::MalformedMetadata, "vocabulary must start with [PAD], [UNK], [BOS]");
  head_ids_.clear();
  cont_ids_.clear();
  max_head_bytes_ = 0;
  max_cont_bytes_ = 0;
  for (size_t id = 3; id < pieces_.size(); ++id) {
    const std::string& piece = pieces_[id];
    if (is_continuation(piece)) {
      std::string text = piece.substr(2);
      if (!cont_ids_.emplace(text, static_cast<int>(id)).second)
        raise(Errc::MalformedMetadata, "duplicate continuation piece '" + piece + "'");
      max_cont_bytes_ = std::max(max_cont_bytes_, text.size());
    } else {
      if (!head_ids_.emplace(piece, static_cast<int>(id)).second)
        raise(Errc::MalformedMetadata, "duplicate piece '" + piece + "'");
      max_head_bytes_ = std::max(max_head_bytes_, piece.size());
    }
  }
}

std::vector<int> SubwordVocab::encode_word(const std::string& word) const {
  if (word.empty()) raise(Errc::EmptyMessage, "cannot encode an empty word");
  std::vector<std::string> cps = split_code_points(word);
  // Byte offset of every code point boundary, plus the end.
  std::vector<size_t> bounds;
  bounds.reserve(cps.size() + 1);
  size_t off = 0;
  for (const auto& cp : cps) {
    bounds.push_back(off);
    off += cp.size();
  }
  bounds.push_back(off);

  std::vector<int> ids;
  size_t start_cp = 0;
  while (start_cp < cps.size()) {
    const bool head = start_cp == 0;
    const auto& table = head ? head_ids_ : cont_ids_;
    const size_t max_bytes = head ? max_head_bytes_ : max_cont_bytes_;
    size_t start = bounds[start_cp];
    int found = -1;
    size_t found_end_cp = 0;
    for (size_t end_cp = cps.size(); end_cp > start_cp; --end_cp) {
      size_t len = bounds[end_cp] - start;
      if (len > max_bytes) continue;
      auto it = table.find(word.substr(start, len));
      if (it != table.end()) {
        found = it->second;
        found_end_cp = end_cp;
        break;
      }
    }
    if (found < 0) return {kUnk};  // character outside the training alphabet
    ids.push_back(found);
    start_cp = found_end_cp;
  }
  return ids;
}

std::string SubwordVocab::decode(const std::vector<int>& ids) const {
  std::string out;
  for (int id : ids) {
    if (id < 0 || id >= size())
      raise(Errc::IndexOutOfRange, "piece id " + std::to_string(id));
    const std::string& piece = pieces_[id];
    out += is_continuation(piece) ? piece.substr(2) : piece;
  }
  return out;
}

void SubwordVocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(Errc::IoError, "cannot write vocabulary file: " + path);
  for (const auto& piece : pieces_) out << piece << '\n';
}

SubwordVocab SubwordVocab::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::IoError, "cannot read vocabulary file: " + path);
  std::vector<std::string> pieces;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pieces.push_back(line);
  }
  while (!pieces.empty() && pieces.back().empty()) pieces.pop_back();
  return SubwordVocab(std::move(pieces));
}

uint64_t SubwordVocab::content_hash() const {
  uint64_t h = 0xCBF29CE484222325ULL;
  auto mix = [&](unsigned char byte) {
    h ^= byte;
    h *= 0x100000001B3ULL;
  };
  for (const auto& piece : pieces_) {
    for (char c : piece) mix(static_cast<unsigned char>(c));
    mix('\n');
  }
  return h;
}

SubwordVocab train_vocab(const std::vector<std::string>& words, int target_size) {
  std::map<std::string, long> counts;
  for (const auto& w : words)
    if (!w.empty()) ++counts[w];
  return train_vocab(counts, target_size);
}

SubwordVocab train_vocab(const std::map<std::string, long>& word_counts, int target_size) {
  // Alphabet, in code point order.
  std::set<std::string> alphabet;
  for (const auto& [word, count] : word_counts)
    for (const auto& cp : split_code_points(word)) alphabet.insert(cp);

  int min_size = 3 + 2 * static_cast<int>(alphabet.size());
  if (target_size < min_size)
    raise(Errc::TargetTooSmall, "target size " + std::to_string(target_size) +
                                    " below reserved + alphabet size " +
                                    std::to_string(min_size));

  std::vector<std::string> pieces = {kReserved[0], kReserved[1], kReserved[2]};
  for (const auto& cp : alphabet) pieces.push_back(cp);
  for (const auto& cp : alphabet) pieces.push_back("##" + cp);
  std::set<std::string> piece_set(pieces.begin(), pieces.end());

  // Working corpus: each distinct word as its current piece sequence.
  struct Entry {
    std::vector<std::string> seq;
    long count;
  };
  std::vector<Entry> corpus;
  corpus.reserve(word_counts.size());
  for (const auto& [word, count] : word_counts) {
    Entry e;
    e.count = count;
    auto cps = split_code_points(word);
    for (size_t i = 0; i < cps.size(); ++i)
      e.seq.push_back(i == 0 ? cps[i] : "##" + cps[i]);
    corpus.push_back(std::move(e));
  }

  auto merged_string = [](const std::string& left, const std::string& right) {
    // The right side is always a continuation piece; the merge keeps the
    // left side's head/continuation form.
    return left + (is_continuation(right) ? right.substr(2) : right);
  };

  while (static_cast<int>(pieces.size()) < target_size) {
    // Count adjacent pairs (overlapping occurrences all count).
    std::map<std::pair<std::string, std::string>, long> pair_counts;
    for (const auto& entry : corpus)
      for (size_t i = 0; i + 1 < entry.seq.size(); ++i)
        pair_counts[{entry.seq[i], entry.seq[i + 1]}] += entry.count;

    // Best pair by count, ties by lexicographic order of the merged string.
    // Merges that would collide with an existing piece, a reserved token,
    // or that would forge a "##"-headed head piece are skipped.
    long best_count = 0;
    std::string best_merged;
    std::pair<std::string, std::string> best_pair;
    for (const auto& [pair, count] : pair_counts) {
      if (count < 2) continue;
      std::string merged = merged_string(pair.first, pair.second);
      if (piece_set.count(merged)) continue;
      if (!is_continuation(pair.first) && merged.compare(0, 2, "##") == 0) continue;
      if (merged == kReserved[0] || merged == kReserved[1] || merged == kReserved[2]) continue;
      if (count > best_count || (count == best_count && merged < best_merged)) {
        best_count = count;
        best_merged = merged;
        best_pair = pair;
      }
    }
    if (best_count < 2) break;

    pieces.push_back(best_merged);
    piece_set.insert(best_merged);

    // Apply the merge left-to-right, non-overlapping.
    for (auto& entry : corpus) {
      auto& seq = entry.seq;
      if (seq.size() < 2) continue;
      std::vector<std::string> next;
      next.reserve(seq.size());
      size_t i = 0;
      while (i < seq.size()) {
        if (i + 1 < seq.size() && seq[i] == best_pair.first && seq[i + 1] == best_pair.second) {
          next.push_back(best_merged);
          i += 2;
        } else {
          next.push_back(seq[i]);
          ++i;
        }
      }
      seq = std::move(next);
    }
  }

  return SubwordVocab(std::move(pieces));
}

}  // namespace logptr
