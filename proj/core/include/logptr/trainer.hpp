#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "logptr/ingest.hpp"
#include "logptr/model.hpp"
#include "logptr/tokenizer.hpp"

namespace logptr::train {

struct TrainConfig {
  int batch_size = 32;
  int epochs = 100;
  double lr = 0.001;
  uint64_t seed = 42;
  double clip_norm = 5.0;
  int patience = 0;  // early stop after this many epochs without a new best; 0 = off
  int length_buckets = 4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_pa = 0.0;
};

// A trained model plus everything needed to run it again: reloading a saved
// checkpoint reproduces inference outputs bit for bit.
struct Checkpoint {
  model::ModelParams params;  // carries the ModelConfig
  LabelSet label_set;
  std::string vocab_file;  // file name next to the checkpoint
  uint64_t vocab_hash = 0;
  int epoch = 0;        // epoch of the stored (best-validation) parameters
  double val_pa = 0.0;  // its validation parsing accuracy
  int total_epochs = 0;
  double final_val_pa = 0.0;  // last epoch, for comparison with the best
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochStats> log;
};

// Teacher-forced training with length-bucketed shuffled batches, padding
// masks, global-norm clipping and Adam. After every epoch the validation
// split is greedily decoded; the checkpoint with the highest validation
// parsing accuracy wins, ties going to the earlier epoch.
TrainResult train(const DatasetSplit& split, const SubwordVocab& vocab,
                  const LabelSet& label_set, const model::ModelConfig& model_config,
                  const TrainConfig& train_config);

// Epoch batch plan: records are bucketed by input length, shuffled within
// their bucket, concatenated bucket by bucket and cut into consecutive
// batches, so the batch count stays ceil(N / batch_size); finally the batch
// order itself is shuffled.
std::vector<std::vector<size_t>> make_epoch_batches(const std::vector<int>& lengths,
                                                    int batch_size, int buckets,
                                                    SplitMix64& rng);

// Index of the best epoch: highest validation PA, ties to the earliest.
size_t select_best(const std::vector<EpochStats>& log);

// Exact-match parsing accuracy of greedy decodes against gold templates.
double exact_match_accuracy(const model::ModelParams& params,
                            const std::vector<const model::EncodedMessage*>& messages,
                            const std::vector<const AnnotatedRecord*>& records,
                            const LabelSet& label_set, int batch_size);

// Greedy-decode a corpus, batching rows of similar length together.
std::vector<PointerTarget> decode_corpus(const model::ModelParams& params,
                                         const std::vector<const model::EncodedMessage*>& messages,
                                         int batch_size);

// Versioned binary model file: "LPTR" magic, u16 format version, CRC-32 of
// the tensor payload, length-prefixed JSON metadata (config, labels, vocab
// reference, epoch log summary, tensor directory), then the raw
// little-endian float payload in directory order.
void save_model(const Checkpoint& checkpoint, const std::string& path);
Checkpoint load_model(const std::string& path);

uint32_t crc32(const void* data, size_t size);

}  // namespace logptr::train
