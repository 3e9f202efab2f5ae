#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "logptr/ingest.hpp"
#include "logptr/optim.hpp"
#include "logptr/tape.hpp"
#include "logptr/tokenizer.hpp"

namespace logptr::model {

struct ModelConfig {
  int embedding_dim = 256;  // E
  int hidden_dim = 256;     // H; the pointer attention width matches it
  float dropout = 0.2f;
  int label_count = 1;      // m: 1 in general mode, 10 in variable-aware mode
  int vocab_size = 0;       // V, taken from the trained vocabulary
  int max_decode_factor = 2;

  void validate() const;
};

template <typename T>
struct LstmParamsT {
  num::ParameterT<T> w_x;   // E x 4H
  num::ParameterT<T> w_h;   // H x 4H
  num::ParameterT<T> bias;  // 4H, gate order [i | f | g | o]
};

// Every learnable tensor of the parser. The label table carries one row per
// category label plus an EOS row (index m) and a BOS row (index m+1).
template <typename T>
struct ModelParamsT {
  ModelConfig config;
  num::ParameterT<T> subword_embedding;  // V x E
  num::ParameterT<T> label_embedding;    // (m+2) x E
  LstmParamsT<T> enc_fwd, enc_bwd;
  num::ParameterT<T> bridge_h_w, bridge_h_b;  // 2H x H, H
  num::ParameterT<T> bridge_c_w, bridge_c_b;
  LstmParamsT<T> dec;
  num::ParameterT<T> ptr_w1;  // 2H x H
  num::ParameterT<T> ptr_w2;  // H x H
  num::ParameterT<T> ptr_v;   // H

  std::vector<std::pair<std::string, num::ParameterT<T>*>> named();
  std::vector<num::ParameterT<T>*> all();

  int eos_row() const { return config.label_count; }
  int bos_row() const { return config.label_count + 1; }
};

using ModelParams = ModelParamsT<float>;

// Uniform(-0.08, 0.08) for matrices and embeddings, zero biases except the
// LSTM forget gates, which start at 1.
ModelParams init_params(const ModelConfig& config, uint64_t seed);
ModelParamsT<double> widen_params(const ModelParams& params);

// A message with per-word subword ids, ready for embedding.
struct EncodedMessage {
  std::vector<std::string> tokens;
  std::vector<std::vector<int>> subword_ids;
};
EncodedMessage encode_message(std::vector<std::string> tokens, const SubwordVocab& vocab);

// Plain (tape-free) embedding of one augmented input [C, T, EOS]: label
// rows, per-word means of subword embedding rows, then the EOS row.
template <typename T>
std::vector<num::TensorT<T>> embed_input(const EncodedMessage& message,
                                         const ModelParamsT<T>& params);

// LSTM scan over a position-major list of B x E inputs. States are returned
// aligned with input positions regardless of direction. keep_per_step, when
// given, zeroes masked rows after each step (used to isolate padded rows in
// the backward scan).
template <typename T>
std::vector<typename num::TapeT<T>::Value> lstm_scan(
    num::TapeT<T>& tape, const std::vector<typename num::TapeT<T>::Value>& inputs,
    const num::LstmGateValues<T>& weights, bool reverse,
    const std::vector<std::vector<uint8_t>>* keep_per_step = nullptr);

// The end-to-end parser over a tape: Bi-LSTM encoder, bridge-initialised
// decoder, pointer attention. One instance binds one tape, one parameter
// set, and one mode (training applies dropout; evaluation does not).
template <typename T>
class PointerNetT {
 public:
  using Tape = num::TapeT<T>;
  using Value = typename Tape::Value;

  PointerNetT(Tape& tape, const ModelParamsT<T>& params, bool training = false,
              SplitMix64* dropout_rng = nullptr);

  struct Encoded {
    int batch = 0;
    int label_count = 0;            // m
    int positions = 0;              // L = m + max_words + 1
    std::vector<int> word_counts;   // n_r
    std::vector<const EncodedMessage*> rows;
    Value we;                       // (L*B) x H, W1-projected encoder states
    Value h0, c0;                   // initial decoder state
    std::vector<Value> enc_states;  // e_p per position (B x 2H)
    std::vector<uint8_t> attn_mask; // B*L, live input positions per row

    int eos_index(int row) const { return label_count + word_counts[row] + 1; }
  };

  struct StepState {
    Value h, c;
  };

  Encoded encode(const std::vector<const EncodedMessage*>& rows);
  Encoded encode_single(const EncodedMessage& message);

  // Raw pointer logits over the m+n+1 input positions (no masking).
  Value pointer_scores(const Encoded& encoded, Value decoder_state);
  // Masked softmax over live positions of each row.
  Value pointer_distribution(const Encoded& encoded, Value scores,
                             const std::vector<uint8_t>& live_rows);

  // One decode step for a whole batch: prev holds the previous pointer
  // index per row (0 = BOS at t=1, -1 = dead row).
  std::pair<Value, StepState> decode_step(const Encoded& encoded,
                                          const std::vector<int>& prev, StepState state);
  std::pair<Value, StepState> decode_step(const Encoded& encoded, int prev, StepState state);

  StepState initial_state(const Encoded& encoded) const;

  // Teacher-forced negative log likelihood, summed over steps (including
  // the EOS step) per sequence, averaged over the batch. per_row, when
  // given, receives each sequence's summed loss.
  Value sequence_loss(const Encoded& encoded,
                      const std::vector<const PointerTarget*>& targets,
                      std::vector<double>* per_row = nullptr);
  Value sequence_loss(const Encoded& encoded, const PointerTarget& target);

  // Argmax decoding (ties to the lowest index), fed back until EOS or
  // max_decode_factor * (m+n+1) steps, when EOS is forced.
  std::vector<PointerTarget> greedy_decode(const Encoded& encoded);

  const ModelParamsT<T>& params() const { return *params_ext_; }
  int label_count() const { return m_; }

 private:
  Value embed_specs(std::vector<num::EmbedSpec> specs);
  std::vector<num::EmbedSpec> feedback_specs(const Encoded& encoded,
                                             const std::vector<int>& prev) const;
  Value maybe_dropout(Value x);

  Tape* tape_;
  const ModelParamsT<T>* params_ext_;
  bool training_;
  SplitMix64* dropout_rng_;
  int m_;
  // parameter leaves bound once per tape
  Value subword_table_, label_table_;
  num::LstmGateValues<T> enc_fwd_, enc_bwd_, dec_;
  Value bridge_h_w_, bridge_h_b_, bridge_c_w_, bridge_c_b_;
  Value ptr_w1_, ptr_w2_, ptr_v_;
};

using PointerNet = PointerNetT<float>;

// Full parse of one raw message with a trained model: template tokens plus
// the recovered message-token span for each emitted label. When the decoded
// template cannot be re-aligned to the message the spans are omitted and
// realigned is false.
struct VariableSpan {
  std::string label;
  std::vector<std::string> tokens;
};

struct ParseResult {
  std::vector<std::string> template_tokens;
  std::vector<bool> is_label;  // per template token
  std::vector<VariableSpan> variables;
  bool realigned = true;
};

ParseResult parse_message(const std::string& content, const SubwordVocab& vocab,
                          const ModelParams& params, const LabelSet& label_set);

}  // namespace logptr::model
