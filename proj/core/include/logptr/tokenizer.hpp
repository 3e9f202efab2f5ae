#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace logptr {

// Subword vocabulary with WordPiece-style greedy longest-match encoding.
// Ids 0..2 are reserved ([PAD], [UNK], [BOS]); continuation pieces carry a
// "##" prefix. Every character seen at training time is present both as a
// head piece and a continuation piece, so any word over the training
// alphabet encodes without falling back to [UNK].
class SubwordVocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;

  SubwordVocab() = default;
  explicit SubwordVocab(std::vector<std::string> pieces);

  int size() const { return static_cast<int>(pieces_.size()); }
  const std::vector<std::string>& pieces() const { return pieces_; }

  // Greedy longest-match-first. Total: a word containing a character
  // outside the training alphabet encodes as {kUnk}. Never empty.
  std::vector<int> encode_word(const std::string& word) const;

  // Inverse of a non-[UNK] encoding: concatenation of the matched pieces
  // with "##" stripped.
  std::string decode(const std::vector<int>& ids) const;

  void save(const std::string& path) const;
  static SubwordVocab load(const std::string& path);

  uint64_t content_hash() const;  // FNV-1a over the piece list

 private:
  void index_pieces();

  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> head_ids_;  // piece text -> id
  std::unordered_map<std::string, int> cont_ids_;  // text after "##" -> id
  size_t max_head_bytes_ = 0;
  size_t max_cont_bytes_ = 0;
};

// Build a vocabulary from the multiset of training-split word tokens:
// reserved ids + observed alphabet, then iterative highest-frequency
// pair merging (ties by lexicographic order of the merged string) until
// target_size is reached or no pair occurs at least twice.
SubwordVocab train_vocab(const std::vector<std::string>& words, int target_size);
SubwordVocab train_vocab(const std::map<std::string, long>& word_counts, int target_size);

}  // namespace logptr
