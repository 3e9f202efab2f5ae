#include "logptr/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "logptr/error.hpp"
#include "logptr/optim.hpp"

namespace logptr::train {

void TrainConfig::validate() const {
  if (batch_size < 1) raise(Errc::ConfigError, "batch_size must be >= 1");
  if (epochs < 1) raise(Errc::ConfigError, "epochs must be >= 1");
  if (lr <= 0) raise(Errc::ConfigError, "learning rate must be positive");
  if (length_buckets < 1) raise(Errc::ConfigError, "length_buckets must be >= 1");
  if (clip_norm <= 0) raise(Errc::ConfigError, "clip_norm must be positive");
}

std::vector<std::vector<size_t>> make_epoch_batches(const std::vector<int>& lengths,
                                                    int batch_size, int buckets,
                                                    SplitMix64& rng) {
  const size_t n = lengths.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return lengths[a] < lengths[b]; });

  // Contiguous quantile buckets over the sorted order, shuffled within.
  const size_t bucket_count = std::min<size_t>(std::max(buckets, 1), std::max<size_t>(n, 1));
  std::vector<size_t> shuffled;
  shuffled.reserve(n);
  for (size_t b = 0; b < bucket_count; ++b) {
    size_t begin = n * b / bucket_count;
    size_t end = n * (b + 1) / bucket_count;
    std::vector<size_t> bucket(order.begin() + begin, order.begin() + end);
    fisher_yates(bucket, rng);
    shuffled.insert(shuffled.end(), bucket.begin(), bucket.end());
  }

  std::vector<std::vector<size_t>> batches;
  for (size_t at = 0; at < n; at += batch_size) {
    size_t end = std::min(n, at + static_cast<size_t>(batch_size));
    batches.emplace_back(shuffled.begin() + at, shuffled.begin() + end);
  }
  fisher_yates(batches, rng);
  return batches;
}

size_t select_best(const std::vector<EpochStats>& log) {
  size_t best = 0;
  for (size_t i = 1; i < log.size(); ++i)
    if (log[i].val_pa > log[best].val_pa) best = i;
  return best;
}

std::vector<PointerTarget> decode_corpus(const model::ModelParams& params,
                                         const std::vector<const model::EncodedMessage*>& messages,
                                         int batch_size) {
  const size_t n = messages.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return messages[a]->tokens.size() < messages[b]->tokens.size();
  });

  std::vector<PointerTarget> out(n);
  for (size_t at = 0; at < n; at += batch_size) {
    size_t end = std::min(n, at + static_cast<size_t>(batch_size));
    std::vector<const model::EncodedMessage*> rows;
    rows.reserve(end - at);
    for (size_t i = at; i < end; ++i) rows.push_back(messages[order[i]]);

    num::Tape tape;
    model::PointerNet net(tape, params, /*training=*/false);
    auto encoded = net.encode(rows);
    auto decoded = net.greedy_decode(encoded);
    for (size_t i = at; i < end; ++i) out[order[i]] = std::move(decoded[i - at]);
  }
  return out;
}

double exact_match_accuracy(const model::ModelParams& params,
                            const std::vector<const model::EncodedMessage*>& messages,
                            const std::vector<const AnnotatedRecord*>& records,
                            const LabelSet& label_set, int batch_size) {
  if (messages.empty()) return 0.0;
  auto decoded = decode_corpus(params, messages, batch_size);
  size_t hits = 0;
  for (size_t i = 0; i < decoded.size(); ++i) {
    auto predicted = apply_target(records[i]->message_tokens, decoded[i], label_set);
    if (predicted == records[i]->template_tokens) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(decoded.size());
}

TrainResult train(const DatasetSplit& split, const SubwordVocab& vocab,
                  const LabelSet& label_set, const model::ModelConfig& model_config,
                  const TrainConfig& train_config) {
  train_config.validate();
  if (split.train.empty()) raise(Errc::EmptyTrainSet, "training split is empty");

  model::ModelConfig config = model_config;
  config.vocab_size = vocab.size();
  config.label_count = label_set.count();
  config.validate();

  SplitMix64 master(train_config.seed);
  const uint64_t init_seed = master.next();
  const uint64_t shuffle_seed = master.next();
  const uint64_t dropout_seed = master.next();

  model::ModelParams params = model::init_params(config, init_seed);
  std::vector<num::Parameter*> learnable = params.all();
  num::AdamConfig adam{train_config.lr, train_config.beta1, train_config.beta2,
                       train_config.adam_eps};

  // Tokenize once; epochs reuse the encoded forms.
  std::vector<model::EncodedMessage> train_msgs;
  train_msgs.reserve(split.train.size());
  std::vector<int> train_lengths;
  for (const auto& rec : split.train) {
    train_msgs.push_back(model::encode_message(rec.message_tokens, vocab));
    train_lengths.push_back(static_cast<int>(rec.message_tokens.size()));
  }
  std::vector<model::EncodedMessage> val_msgs;
  std::vector<const model::EncodedMessage*> val_ptrs;
  std::vector<const AnnotatedRecord*> val_recs;
  val_msgs.reserve(split.validation.size());
  for (const auto& rec : split.validation) {
    val_msgs.push_back(model::encode_message(rec.message_tokens, vocab));
    val_recs.push_back(&rec);
  }
  for (const auto& msg : val_msgs) val_ptrs.push_back(&msg);

  SplitMix64 shuffle_rng(shuffle_seed);
  SplitMix64 dropout_rng(dropout_seed);

  TrainResult result;
  model::ModelParams best_params = params;
  double best_pa = -1.0;
  int best_epoch = 0;
  double best_pa_val = 0.0;

  for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
    auto batches = make_epoch_batches(train_lengths, train_config.batch_size,
                                      train_config.length_buckets, shuffle_rng);
    double loss_sum = 0.0;
    for (const auto& batch : batches) {
      num::Tape tape;
      model::PointerNet net(tape, params, /*training=*/true, &dropout_rng);
      std::vector<const model::EncodedMessage*> rows;
      std::vector<const PointerTarget*> targets;
      rows.reserve(batch.size());
      targets.reserve(batch.size());
      for (size_t i : batch) {
        rows.push_back(&train_msgs[i]);
        targets.push_back(&split.train[i].target);
      }
      auto encoded = net.encode(rows);
      auto loss = net.sequence_loss(encoded, targets);
      const double batch_loss = tape.val(loss).data[0];
      if (!std::isfinite(batch_loss))
        raise(Errc::NumericError,
              "non-finite loss at epoch " + std::to_string(epoch));
      loss_sum += batch_loss * static_cast<double>(batch.size());
      tape.backward(loss);
      clip_global_norm(learnable, train_config.clip_norm);
      adam_step(learnable, adam);
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(split.train.size());
    stats.val_pa = val_ptrs.empty()
                       ? 0.0
                       : exact_match_accuracy(params, val_ptrs, val_recs, label_set,
                                              train_config.batch_size);
    result.log.push_back(stats);

    if (stats.val_pa > best_pa) {
      best_pa = stats.val_pa;
      best_params = params;
      best_epoch = epoch;
      best_pa_val = stats.val_pa;
    }
    if (train_config.patience > 0 && epoch - best_epoch >= train_config.patience) break;
  }

  result.best.params = std::move(best_params);
  result.best.label_set = label_set;
  result.best.vocab_hash = vocab.content_hash();
  result.best.epoch = best_epoch;
  result.best.val_pa = best_pa_val;
  result.best.total_epochs = static_cast<int>(result.log.size());
  result.best.final_val_pa = result.log.empty() ? 0.0 : result.log.back().val_pa;
  return result;
}

}  // namespace logptr::train
