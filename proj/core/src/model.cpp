#include "logptr/model.hpp"

#include <algorithm>
#include <cmath>

#include "logptr/error.hpp"

namespace logptr::model {

using num::EmbedSpec;
using num::ParameterT;
using num::TensorT;

void ModelConfig::validate() const {
  if (embedding_dim <= 0 || hidden_dim <= 0)
    raise(Errc::ConfigError, "embedding and hidden dimensions must be positive");
  if (label_count <= 0) raise(Errc::ConfigError, "label count must be positive");
  if (vocab_size < 3) raise(Errc::ConfigError, "vocabulary size must cover the reserved ids");
  if (!(dropout >= 0.0f && dropout < 1.0f))
    raise(Errc::ConfigError, "dropout must lie in [0, 1)");
  if (max_decode_factor < 1) raise(Errc::ConfigError, "max_decode_factor must be >= 1");
}

template <typename T>
std::vector<std::pair<std::string, ParameterT<T>*>> ModelParamsT<T>::named() {
  return {
      {"subword_embedding", &subword_embedding},
      {"label_embedding", &label_embedding},
      {"enc_fwd.w_x", &enc_fwd.w_x},
      {"enc_fwd.w_h", &enc_fwd.w_h},
      {"enc_fwd.bias", &enc_fwd.bias},
      {"enc_bwd.w_x", &enc_bwd.w_x},
      {"enc_bwd.w_h", &enc_bwd.w_h},
      {"enc_bwd.bias", &enc_bwd.bias},
      {"bridge_h.w", &bridge_h_w},
      {"bridge_h.b", &bridge_h_b},
      {"bridge_c.w", &bridge_c_w},
      {"bridge_c.b", &bridge_c_b},
      {"dec.w_x", &dec.w_x},
      {"dec.w_h", &dec.w_h},
      {"dec.bias", &dec.bias},
      {"ptr.w1", &ptr_w1},
      {"ptr.w2", &ptr_w2},
      {"ptr.v", &ptr_v},
  };
}

template <typename T>
std::vector<ParameterT<T>*> ModelParamsT<T>::all() {
  std::vector<ParameterT<T>*> out;
  for (auto& [name, p] : named()) out.push_back(p);
  return out;
}

namespace {

constexpr double kInitRange = 0.08;

void fill_uniform(num::Tensor& t, SplitMix64& rng) {
  for (float& v : t.data) v = static_cast<float>(rng.uniform(-kInitRange, kInitRange));
}

void init_lstm(LstmParamsT<float>& lstm, int input_dim, int hidden, SplitMix64& rng) {
  lstm.w_x = num::Parameter(num::Tensor({input_dim, 4 * hidden}));
  lstm.w_h = num::Parameter(num::Tensor({hidden, 4 * hidden}));
  lstm.bias = num::Parameter(num::Tensor({4 * hidden}));
  fill_uniform(lstm.w_x.value, rng);
  fill_uniform(lstm.w_h.value, rng);
  // Forget-gate bias starts at 1 so early cell state survives.
  for (int i = hidden; i < 2 * hidden; ++i) lstm.bias.value.data[i] = 1.0f;
}

}  // namespace

ModelParams init_params(const ModelConfig& config, uint64_t seed) {
  config.validate();
  const int E = config.embedding_dim;
  const int H = config.hidden_dim;
  const int m = config.label_count;
  SplitMix64 rng(seed);

  ModelParams params;
  params.config = config;
  params.subword_embedding = num::Parameter(num::Tensor({config.vocab_size, E}));
  fill_uniform(params.subword_embedding.value, rng);
  params.label_embedding = num::Parameter(num::Tensor({m + 2, E}));
  fill_uniform(params.label_embedding.value, rng);
  init_lstm(params.enc_fwd, E, H, rng);
  init_lstm(params.enc_bwd, E, H, rng);
  params.bridge_h_w = num::Parameter(num::Tensor({2 * H, H}));
  params.bridge_h_b = num::Parameter(num::Tensor({H}));
  params.bridge_c_w = num::Parameter(num::Tensor({2 * H, H}));
  params.bridge_c_b = num::Parameter(num::Tensor({H}));
  fill_uniform(params.bridge_h_w.value, rng);
  fill_uniform(params.bridge_c_w.value, rng);
  init_lstm(params.dec, E, H, rng);
  params.ptr_w1 = num::Parameter(num::Tensor({2 * H, H}));
  params.ptr_w2 = num::Parameter(num::Tensor({H, H}));
  params.ptr_v = num::Parameter(num::Tensor({H}));
  fill_uniform(params.ptr_w1.value, rng);
  fill_uniform(params.ptr_w2.value, rng);
  fill_uniform(params.ptr_v.value, rng);
  return params;
}

ModelParamsT<double> widen_params(const ModelParams& params) {
  ModelParamsT<double> out;
  out.config = params.config;
  auto src = const_cast<ModelParams&>(params).named();
  auto dst = out.named();
  for (size_t i = 0; i < src.size(); ++i) dst[i].second->value = num::widen(src[i].second->value);
  return out;
}

EncodedMessage encode_message(std::vector<std::string> tokens, const SubwordVocab& vocab) {
  EncodedMessage message;
  message.subword_ids.reserve(tokens.size());
  for (const auto& token : tokens) message.subword_ids.push_back(vocab.encode_word(token));
  message.tokens = std::move(tokens);
  return message;
}

template <typename T>
std::vector<TensorT<T>> embed_input(const EncodedMessage& message,
                                    const ModelParamsT<T>& params) {
  const int E = params.config.embedding_dim;
  const int m = params.config.label_count;
  std::vector<TensorT<T>> out;
  out.reserve(m + message.tokens.size() + 1);
  auto table_row = [&](const TensorT<T>& table, int row) {
    TensorT<T> v({E});
    std::copy_n(table.row_ptr(row), E, v.data.data());
    return v;
  };
  for (int j = 0; j < m; ++j) out.push_back(table_row(params.label_embedding.value, j));
  for (const auto& ids : message.subword_ids) {
    TensorT<T> v({E});
    const T inv = T(1) / static_cast<T>(ids.size());
    for (int id : ids) {
      const T* src = params.subword_embedding.value.row_ptr(id);
      for (int c = 0; c < E; ++c) v.data[c] += src[c] * inv;
    }
    out.push_back(std::move(v));
  }
  out.push_back(table_row(params.label_embedding.value, m));  // EOS
  return out;
}

template <typename T>
std::vector<typename num::TapeT<T>::Value> lstm_scan(
    num::TapeT<T>& tape, const std::vector<typename num::TapeT<T>::Value>& inputs,
    const num::LstmGateValues<T>& weights, bool reverse,
    const std::vector<std::vector<uint8_t>>* keep_per_step) {
  using Value = typename num::TapeT<T>::Value;
  const int steps = static_cast<int>(inputs.size());
  if (steps == 0) raise(Errc::ShapeMismatch, "lstm_scan needs at least one input");
  const int batch = tape.val(inputs[0]).rows();
  const int hidden = tape.val(weights.bias).cols() / 4;

  Value h = tape.leaf(TensorT<T>({batch, hidden}));
  Value c = tape.leaf(TensorT<T>({batch, hidden}));
  std::vector<Value> states(steps);
  for (int s = 0; s < steps; ++s) {
    const int p = reverse ? steps - 1 - s : s;
    auto [h2, c2] = num::lstm_cell(tape, inputs[p], h, c, weights);
    h = h2;
    c = c2;
    if (keep_per_step) {
      h = tape.row_mask(h, (*keep_per_step)[p]);
      c = tape.row_mask(c, (*keep_per_step)[p]);
    }
    states[p] = h;
  }
  return states;
}

// ------------------------------------------------------------ PointerNetT

template <typename T>
PointerNetT<T>::PointerNetT(Tape& tape, const ModelParamsT<T>& params, bool training,
                            SplitMix64* dropout_rng)
    : tape_(&tape),
      params_ext_(&params),
      training_(training),
      dropout_rng_(dropout_rng),
      m_(params.config.label_count) {
  if (training_ && params.config.dropout > 0 && dropout_rng_ == nullptr)
    raise(Errc::ConfigError, "training with dropout requires a dropout RNG");
  auto& p = const_cast<ModelParamsT<T>&>(params);
  subword_table_ = tape.param(p.subword_embedding);
  label_table_ = tape.param(p.label_embedding);
  auto bind = [&](LstmParamsT<T>& lstm) {
    return num::LstmGateValues<T>{tape.param(lstm.w_x), tape.param(lstm.w_h),
                                  tape.param(lstm.bias)};
  };
  enc_fwd_ = bind(p.enc_fwd);
  enc_bwd_ = bind(p.enc_bwd);
  dec_ = bind(p.dec);
  bridge_h_w_ = tape.param(p.bridge_h_w);
  bridge_h_b_ = tape.param(p.bridge_h_b);
  bridge_c_w_ = tape.param(p.bridge_c_w);
  bridge_c_b_ = tape.param(p.bridge_c_b);
  ptr_w1_ = tape.param(p.ptr_w1);
  ptr_w2_ = tape.param(p.ptr_w2);
  ptr_v_ = tape.param(p.ptr_v);
}

template <typename T>
typename PointerNetT<T>::Value PointerNetT<T>::embed_specs(std::vector<EmbedSpec> specs) {
  return tape_->embed_positions(subword_table_, label_table_, std::move(specs));
}

template <typename T>
typename PointerNetT<T>::Value PointerNetT<T>::maybe_dropout(Value x) {
  if (!training_ || params_ext_->config.dropout <= 0) return x;
  return tape_->dropout(x, params_ext_->config.dropout, *dropout_rng_);
}

template <typename T>
typename PointerNetT<T>::Encoded PointerNetT<T>::encode(
    const std::vector<const EncodedMessage*>& rows) {
  if (rows.empty()) raise(Errc::ShapeMismatch, "encode needs at least one row");
  const int batch = static_cast<int>(rows.size());
  const int m = m_;
  int max_words = 0;
  for (const auto* row : rows) {
    if (row->tokens.empty()) raise(Errc::EmptyMessage, "cannot encode an empty message");
    max_words = std::max(max_words, static_cast<int>(row->tokens.size()));
  }
  const int L = m + max_words + 1;

  Encoded encoded;
  encoded.batch = batch;
  encoded.label_count = m;
  encoded.positions = L;
  encoded.rows = rows;
  encoded.word_counts.reserve(batch);
  for (const auto* row : rows)
    encoded.word_counts.push_back(static_cast<int>(row->tokens.size()));

  // Per-position inputs. Position p (1-based) is, for row r: label p while
  // p <= m, word p-m while p <= m+n_r, EOS at m+n_r+1, padding beyond.
  std::vector<Value> inputs(L);
  std::vector<std::vector<uint8_t>> keep(L, std::vector<uint8_t>(batch));
  for (int p = 1; p <= L; ++p) {
    std::vector<EmbedSpec> specs(batch);
    for (int r = 0; r < batch; ++r) {
      const int n = encoded.word_counts[r];
      if (p <= m) specs[r] = EmbedSpec::label(p - 1);
      else if (p <= m + n) specs[r] = EmbedSpec::word(rows[r]->subword_ids[p - m - 1]);
      else if (p == m + n + 1) specs[r] = EmbedSpec::label(params_ext_->eos_row());
      else specs[r] = EmbedSpec::pad();
      keep[p - 1][r] = p <= m + n + 1 ? 1 : 0;
    }
    inputs[p - 1] = maybe_dropout(embed_specs(std::move(specs)));
  }

  // Forward scan: padded tail states are garbage for short rows but are
  // never read (mask + per-row final-state gather). Backward scan must be
  // masked so a row's states are those of a scan starting at its own EOS.
  std::vector<Value> fwd = lstm_scan(*tape_, inputs, enc_fwd_, false, nullptr);
  std::vector<Value> bwd = lstm_scan(*tape_, inputs, enc_bwd_, true, &keep);

  encoded.enc_states.resize(L);
  std::vector<Value> we_parts(L);
  for (int p = 0; p < L; ++p) {
    Value e = maybe_dropout(tape_->concat_cols(fwd[p], bwd[p]));
    encoded.enc_states[p] = e;
    we_parts[p] = tape_->matmul(e, ptr_w1_);
  }
  encoded.we = tape_->concat_rows(we_parts);

  std::vector<int> last_pick(batch);
  for (int r = 0; r < batch; ++r) last_pick[r] = m + encoded.word_counts[r];  // EOS position - 1
  Value fwd_last = tape_->select_per_row(fwd, last_pick);
  Value bwd_first = bwd[0];
  Value bridge_in = tape_->concat_cols(fwd_last, bwd_first);
  encoded.h0 = tape_->tanh(tape_->add_bias(tape_->matmul(bridge_in, bridge_h_w_), bridge_h_b_));
  encoded.c0 = tape_->tanh(tape_->add_bias(tape_->matmul(bridge_in, bridge_c_w_), bridge_c_b_));

  encoded.attn_mask.assign(static_cast<size_t>(batch) * L, 0);
  for (int r = 0; r < batch; ++r)
    for (int p = 1; p <= m + encoded.word_counts[r] + 1; ++p)
      encoded.attn_mask[static_cast<size_t>(r) * L + (p - 1)] = 1;
  return encoded;
}

template <typename T>
typename PointerNetT<T>::Encoded PointerNetT<T>::encode_single(const EncodedMessage& message) {
  return encode({&message});
}

template <typename T>
typename PointerNetT<T>::StepState PointerNetT<T>::initial_state(const Encoded& encoded) const {
  return {encoded.h0, encoded.c0};
}

template <typename T>
typename PointerNetT<T>::Value PointerNetT<T>::pointer_scores(const Encoded& encoded,
                                                              Value decoder_state) {
  Value wd = tape_->matmul(decoder_state, ptr_w2_);
  return tape_->attn_scores(encoded.we, wd, ptr_v_);
}

template <typename T>
typename PointerNetT<T>::Value PointerNetT<T>::pointer_distribution(
    const Encoded& encoded, Value scores, const std::vector<uint8_t>& live_rows) {
  return tape_->masked_softmax_rows(scores, encoded.attn_mask, live_rows);
}

template <typename T>
std::vector<EmbedSpec> PointerNetT<T>::feedback_specs(const Encoded& encoded,
                                                      const std::vector<int>& prev) const {
  const int m = m_;
  std::vector<EmbedSpec> specs(prev.size());
  for (size_t r = 0; r < prev.size(); ++r) {
    const int y = prev[r];
    const int n = encoded.word_counts[r];
    if (y < 0) {
      specs[r] = EmbedSpec::pad();  // dead row
    } else if (y == 0) {
      specs[r] = EmbedSpec::label(params_ext_->bos_row());
    } else if (y <= m) {
      specs[r] = EmbedSpec::label(y - 1);
    } else if (y <= m + n) {
      specs[r] = EmbedSpec::word(encoded.rows[r]->subword_ids[y - m - 1]);
    } else if (y == m + n + 1) {
      specs[r] = EmbedSpec::label(params_ext_->eos_row());
    } else {
      raise(Errc::IndexOutOfRange, "previous pointer index " + std::to_string(y) +
                                       " outside [0, " + std::to_string(m + n + 1) + "]");
    }
  }
  return specs;
}

template <typename T>
std::pair<typename PointerNetT<T>::Value, typename PointerNetT<T>::StepState>
PointerNetT<T>::decode_step(const Encoded& encoded, const std::vector<int>& prev,
                            StepState state) {
  std::vector<uint8_t> live(prev.size());
  for (size_t r = 0; r < prev.size(); ++r) live[r] = prev[r] >= 0 ? 1 : 0;

  Value x = maybe_dropout(embed_specs(feedback_specs(encoded, prev)));
  auto [h, c] = num::lstm_cell(*tape_, x, state.h, state.c, dec_);
  Value d = maybe_dropout(h);
  Value scores = pointer_scores(encoded, d);
  Value probs = pointer_distribution(encoded, scores, live);
  return {probs, StepState{h, c}};
}

template <typename T>
std::pair<typename PointerNetT<T>::Value, typename PointerNetT<T>::StepState>
PointerNetT<T>::decode_step(const Encoded& encoded, int prev, StepState state) {
  return decode_step(encoded, std::vector<int>{prev}, state);
}

template <typename T>
typename PointerNetT<T>::Value PointerNetT<T>::sequence_loss(
    const Encoded& encoded, const std::vector<const PointerTarget*>& targets,
    std::vector<double>* per_row) {
  const int batch = encoded.batch;
  if (static_cast<int>(targets.size()) != batch)
    raise(Errc::ShapeMismatch, "one target per encoded row required");
  int max_steps = 0;
  for (int r = 0; r < batch; ++r) {
    const auto& idx = targets[r]->indices;
    if (idx.empty() || idx.back() != m_ + encoded.word_counts[r] + 1)
      raise(Errc::IndexOutOfRange, "target must terminate with the EOS index");
    max_steps = std::max(max_steps, static_cast<int>(idx.size()));
  }
  if (per_row) per_row->assign(batch, 0.0);

  StepState state = initial_state(encoded);
  Value total;
  for (int t = 1; t <= max_steps; ++t) {
    std::vector<int> prev(batch);
    std::vector<int> gold(batch);
    for (int r = 0; r < batch; ++r) {
      const auto& idx = targets[r]->indices;
      const int len = static_cast<int>(idx.size());
      if (t > len) {
        prev[r] = -1;
        gold[r] = 0;
      } else {
        prev[r] = t == 1 ? 0 : idx[t - 2];
        gold[r] = idx[t - 1];
      }
    }
    auto [probs, next] = decode_step(encoded, prev, state);
    state = next;
    if (per_row) {
      const auto& P = tape_->val(probs);
      for (int r = 0; r < batch; ++r)
        if (gold[r] > 0)
          (*per_row)[r] += -std::log(static_cast<double>(P.at(r, gold[r] - 1)) + 1e-12);
    }
    Value step_loss = tape_->nll_rows(probs, std::move(gold));
    total = t == 1 ? step_loss : tape_->add(total, step_loss);
  }
  return tape_->scale(total, T(1) / static_cast<T>(batch));
}

template <typename T>
typename PointerNetT<T>::Value PointerNetT<T>::sequence_loss(const Encoded& encoded,
                                                             const PointerTarget& target) {
  return sequence_loss(encoded, std::vector<const PointerTarget*>{&target}, nullptr);
}

template <typename T>
std::vector<PointerTarget> PointerNetT<T>::greedy_decode(const Encoded& encoded) {
  const int batch = encoded.batch;
  std::vector<PointerTarget> out(batch);
  std::vector<int> caps(batch);
  std::vector<int> eos(batch);
  int global_cap = 0;
  for (int r = 0; r < batch; ++r) {
    eos[r] = m_ + encoded.word_counts[r] + 1;
    caps[r] = params_ext_->config.max_decode_factor * eos[r];
    global_cap = std::max(global_cap, caps[r]);
  }

  std::vector<int> prev(batch, 0);  // BOS
  std::vector<uint8_t> done(batch, 0);
  StepState state = initial_state(encoded);
  for (int t = 1; t <= global_cap; ++t) {
    bool any_live = false;
    std::vector<int> step_prev(batch);
    for (int r = 0; r < batch; ++r) {
      step_prev[r] = done[r] ? -1 : prev[r];
      any_live |= !done[r];
    }
    if (!any_live) break;
    auto [probs, next] = decode_step(encoded, step_prev, state);
    state = next;
    const auto& P = tape_->val(probs);
    for (int r = 0; r < batch; ++r) {
      if (done[r]) continue;
      // argmax over live positions, ties to the lowest index
      int best = 0;
      T best_p = P.at(r, 0);
      for (int c = 1; c < eos[r]; ++c) {
        if (P.at(r, c) > best_p) {
          best_p = P.at(r, c);
          best = c;
        }
      }
      const int pick = best + 1;
      out[r].indices.push_back(pick);
      if (pick == eos[r] || static_cast<int>(out[r].indices.size()) >= caps[r]) {
        if (pick != eos[r]) out[r].indices.push_back(eos[r]);  // forced EOS at the cap
        done[r] = 1;
      } else {
        prev[r] = pick;
      }
    }
  }
  for (int r = 0; r < batch; ++r)
    if (out[r].indices.empty() || out[r].indices.back() != eos[r])
      out[r].indices.push_back(eos[r]);
  return out;
}

ParseResult parse_message(const std::string& content, const SubwordVocab& vocab,
                          const ModelParams& params, const LabelSet& label_set) {
  ParseResult result;
  std::vector<std::string> tokens = pre_tokenize(content);
  EncodedMessage message = encode_message(tokens, vocab);

  num::Tape tape;
  PointerNet net(tape, params, /*training=*/false);
  auto encoded = net.encode_single(message);
  PointerTarget target = net.greedy_decode(encoded)[0];
  result.template_tokens = apply_target(tokens, target, label_set);
  result.is_label.reserve(result.template_tokens.size());
  for (const auto& token : result.template_tokens)
    result.is_label.push_back(label_set.index_of(token) > 0);

  auto runs = try_align_runs(tokens, result.template_tokens, label_set);
  if (!runs) {
    result.realigned = false;
    return result;
  }
  result.realigned = true;
  for (const auto& run : *runs) {
    VariableSpan span;
    span.label = label_set.labels[run.label_index - 1];
    for (int p = run.begin; p < run.end; ++p) span.tokens.push_back(tokens[p - 1]);
    result.variables.push_back(std::move(span));
  }
  return result;
}

template struct ModelParamsT<float>;
template struct ModelParamsT<double>;
template std::vector<TensorT<float>> embed_input<float>(const EncodedMessage&,
                                                        const ModelParamsT<float>&);
template std::vector<TensorT<double>> embed_input<double>(const EncodedMessage&,
                                                          const ModelParamsT<double>&);
template std::vector<num::TapeT<float>::Value> lstm_scan<float>(
    num::TapeT<float>&, const std::vector<num::TapeT<float>::Value>&,
    const num::LstmGateValues<float>&, bool, const std::vector<std::vector<uint8_t>>*);
template std::vector<num::TapeT<double>::Value> lstm_scan<double>(
    num::TapeT<double>&, const std::vector<num::TapeT<double>::Value>&,
    const num::LstmGateValues<double>&, bool, const std::vector<std::vector<uint8_t>>*);
template class PointerNetT<float>;
template class PointerNetT<double>;

}  // namespace logptr::model
