#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "logptr/rng.hpp"
#include "logptr/tensor.hpp"

namespace logptr::num {

// A learnable tensor: value, accumulated gradient, and Adam state.
// Gradient and moments always share the value's shape once touched.
template <typename T>
struct ParameterT {
  TensorT<T> value;
  TensorT<T> grad;
  TensorT<T> adam_m;
  TensorT<T> adam_v;
  long step = 0;

  ParameterT() = default;
  explicit ParameterT(TensorT<T> v) : value(std::move(v)) {}

  void zero_grad() {
    if (!grad.data.empty()) grad.fill(T(0));
  }
};

using Parameter = ParameterT<float>;

// Per-row instruction for embedding a batch position: a word (mean of its
// subword embedding rows), a row of the label table (labels, EOS, BOS), or
// padding (zeros).
struct EmbedSpec {
  enum class Kind { word, label, pad };
  Kind kind = Kind::pad;
  std::vector<int> subword_ids;  // kind == word
  int label_row = -1;            // kind == label

  static EmbedSpec word(std::vector<int> ids) {
    EmbedSpec s;
    s.kind = Kind::word;
    s.subword_ids = std::move(ids);
    return s;
  }
  static EmbedSpec label(int row) {
    EmbedSpec s;
    s.kind = Kind::label;
    s.label_row = row;
    return s;
  }
  static EmbedSpec pad() { return {}; }
};

// Reverse-mode tape over TensorT<T> values. Operations record a backward
// closure; backward() walks the tape once in reverse creation order and
// accumulates into parameter gradients. The double instantiation powers the
// finite-difference shadow path (forward only).
template <typename T>
class TapeT {
 public:
  struct Value {
    int idx = -1;
    bool valid() const { return idx >= 0; }
  };

  TapeT() = default;
  TapeT(const TapeT&) = delete;
  TapeT& operator=(const TapeT&) = delete;

  // ---- leaves ----
  Value leaf(TensorT<T> v);
  Value param(ParameterT<T>& p);

  // ---- primitives ----
  Value matmul(Value a, Value b);
  Value add(Value a, Value b);
  Value add_bias(Value x, Value bias);  // rows of x + rank-1 bias
  Value mul(Value a, Value b);          // elementwise
  Value scale(Value x, T factor);
  Value sigmoid(Value x);
  Value tanh(Value x);
  Value concat_cols(Value a, Value b);
  Value concat_rows(const std::vector<Value>& parts);
  Value slice_cols(Value x, int offset, int len);
  Value row_mask(Value x, std::vector<uint8_t> keep);
  Value dropout(Value x, double rate, SplitMix64& rng);
  Value dropout_with_mask(Value x, std::vector<uint8_t> keep, T inv_keep_prob);

  // Batched gather from the two embedding tables, one spec per row.
  Value embed_positions(Value subword_table, Value label_table,
                        std::vector<EmbedSpec> specs);

  // out.row(r) = states[pick[r]].row(r); all states share one shape.
  Value select_per_row(const std::vector<Value>& states, std::vector<int> pick);

  // Pointer attention scores: we holds L row-blocks of B rows (position-
  // major), wd is the decoder state block, v the scoring vector.
  // out[b, i] = sum_a v[a] * tanh(we[i*B+b, a] + wd[b, a]).
  Value attn_scores(Value we, Value wd, Value v);

  // Row-wise masked softmax. mask is row-major B*L bytes; rows with
  // live[r] == 0 are emitted as all zeros and skipped. A live row whose
  // mask is entirely false raises AllMasked.
  Value masked_softmax_rows(Value x, std::vector<uint8_t> mask, std::vector<uint8_t> live);
  Value softmax(Value x);  // every position live

  // Sum over live rows of -log(probs[r, target_r - 1] + eps); targets are
  // 1-based, 0 marks a dead row. Output is a 1x1 scalar.
  Value nll_rows(Value probs, std::vector<int> targets, double eps = 1e-12);

  // Single-distribution negative log likelihood with the documented
  // precondition checks (distribution sums to 1, index in range).
  Value nll_loss(Value dist, int target, double eps = 1e-12);

  // ---- access / control ----
  const TensorT<T>& val(Value v) const;
  void backward(Value root);
  void clear();
  size_t node_count() const { return nodes_.size(); }
  void set_check_finite(bool on) { check_finite_ = on; }

 private:
  struct Node {
    TensorT<T> value;
    const TensorT<T>* extern_value = nullptr;
    TensorT<T>* extern_grad = nullptr;
    TensorT<T> grad;
    bool grad_touched = false;
    std::function<void(TapeT&, int)> back;
  };

  Value push(TensorT<T> value, std::function<void(TapeT&, int)> back);
  const TensorT<T>& value_of(int idx) const;
  TensorT<T>& grad_of(int idx);  // allocates (zeros) on first touch
  bool grad_touched(int idx) const { return nodes_[idx].grad_touched; }
  void check_node(int idx) const;

  std::vector<Node> nodes_;
  bool check_finite_ = false;
};

using Tape = TapeT<float>;
using TapeD = TapeT<double>;

// LSTM cell weights bound onto a tape. Gate order along the 4H axis is
// [input | forget | candidate | output].
template <typename T>
struct LstmGateValues {
  typename TapeT<T>::Value w_x;  // E x 4H
  typename TapeT<T>::Value w_h;  // H x 4H
  typename TapeT<T>::Value bias; // 4H
};

// One LSTM step over a batch: x is B x E, h and c are B x H.
// Returns (h', c').
template <typename T>
std::pair<typename TapeT<T>::Value, typename TapeT<T>::Value> lstm_cell(
    TapeT<T>& tape, typename TapeT<T>::Value x, typename TapeT<T>::Value h,
    typename TapeT<T>::Value c, const LstmGateValues<T>& weights);

}  // namespace logptr::num
