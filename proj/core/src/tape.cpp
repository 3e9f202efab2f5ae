#include "logptr/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "logptr/error.hpp"
#include "logptr/kernels.hpp"

namespace logptr::num {

namespace {

template <typename T>
void require(bool ok, const char* what) {
  if (!ok) raise(Errc::ShapeMismatch, what);
}

}  // namespace

template <typename T>
typename TapeT<T>::Value TapeT<T>::push(TensorT<T> value,
                                        std::function<void(TapeT&, int)> back) {
  Node node;
  node.value = std::move(value);
  node.back = std::move(back);
  nodes_.push_back(std::move(node));
  int idx = static_cast<int>(nodes_.size()) - 1;
  if (check_finite_) check_node(idx);
  return Value{idx};
}

template <typename T>
void TapeT<T>::check_node(int idx) const {
  const TensorT<T>& v = value_of(idx);
  if (!v.all_finite())
    raise(Errc::NumericError, "non-finite value produced at tape node " + std::to_string(idx));
}

template <typename T>
const TensorT<T>& TapeT<T>::value_of(int idx) const {
  const Node& n = nodes_[idx];
  return n.extern_value ? *n.extern_value : n.value;
}

template <typename T>
const TensorT<T>& TapeT<T>::val(Value v) const {
  return value_of(v.idx);
}

template <typename T>
TensorT<T>& TapeT<T>::grad_of(int idx) {
  Node& n = nodes_[idx];
  n.grad_touched = true;
  if (n.extern_grad) {
    if (n.extern_grad->data.empty()) *n.extern_grad = TensorT<T>(value_of(idx).shape);
    return *n.extern_grad;
  }
  if (n.grad.data.empty()) n.grad = TensorT<T>(value_of(idx).shape);
  return n.grad;
}

template <typename T>
void TapeT<T>::clear() {
  nodes_.clear();
}

template <typename T>
typename TapeT<T>::Value TapeT<T>::leaf(TensorT<T> v) {
  return push(std::move(v), nullptr);
}

template <typename T>
typename TapeT<T>::Value TapeT<T>::param(ParameterT<T>& p) {
  Node node;
  node.extern_value = &p.value;
  node.extern_grad = &p.grad;
  nodes_.push_back(std::move(node));
  return Value{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
void TapeT<T>::backward(Value root) {
  require<T>(root.valid() && value_of(root.idx).numel() == 1,
             "backward root must be a scalar");
  grad_of(root.idx).data[0] = T(1);
  for (int i = root.idx; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.grad_touched || !n.back) continue;
    n.back(*this, i);
  }
}

// ---------------------------------------------------------------- matmul

template <typename T>
typename TapeT<T>::Value TapeT<T>::matmul(Value a, Value b) {
  const TensorT<T>& A = value_of(a.idx);
  const TensorT<T>& B = value_of(b.idx);
  require<T>(A.rank() == 2 && B.rank() == 2, "matmul expects rank-2 tensors");
  require<T>(A.cols() == B.rows(), "matmul inner dimensions disagree");
  TensorT<T> out({A.rows(), B.cols()});
  kernels::gemm(A, B, out);
  return push(std::move(out), [ai = a.idx, bi = b.idx](TapeT& t, int self) {
    const TensorT<T>& g = t.grad_of(self);
    kernels::gemm_nt_acc(g, t.value_of(bi), t.grad_of(ai));
    kernels::gemm_tn_acc(t.value_of(ai), g, t.grad_of(bi));
  });
}

// -----------------------------------------------------------Elementwise

template <typename T>
typename TapeT<T>::Value TapeT<T>::add(Value a, Value b) {
  const TensorT<T>& A = value_of(a.idx);
  const TensorT<T>& B = value_of(b.idx);
  require<T>(A.same_shape(B), "add operands differ in shape");
  TensorT<T> out(A.shape);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = A.data[i] + B.data[i];
  return push(std::move(out), [ai = a.idx, bi = b.idx](TapeT& t, int self) {
    const TensorT<T>& g = t.grad_of(self);
    TensorT<T>& ga = t.grad_of(ai);
    TensorT<T>& gb = t.grad_of(bi);
    for (size_t i = 0; i < g.data.size(); ++i) {
      ga.data[i] += g.data[i];
      gb.data[i] += g.data[i];
    }
  });
}

template <typename T>
typename TapeT<T>::Value TapeT<T>::add_bias(Value x, Value bias) {
  const TensorT<T>& X = value_of(x.idx);
  const TensorT<T>& B = value_of(bias.idx);
  require<T>(B.rank() == 1 && B.cols() == X.cols(), "bias shape does not match columns");
  TensorT<T> out(X.shape);
  const int rows = X.rows(), cols = X.cols();
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out.at(r, c) = X.at(r, c) + B.data[c];
  return push(std::move(out), [xi = x.idx, bi = bias.idx](TapeT& t, int self) {
    const TensorT<T>& g = t.grad_of(self);
    TensorT<T>& gx = t.grad_of(xi);
    TensorT<T>& gb = t.grad_of(bi);
    const int rows = g.rows(), cols = g.cols();
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        gx.at(r, c) += g.at(r, c);
        gb.data[c] += g.at(r, c);
      }
  });
}

template <typename T>
typename TapeT<T>::Value TapeT<T>::mul(Value a, Value b) {
  const TensorT<T>& A = value_of(a.idx);
  const TensorT<T>& B = value_of(b.idx);
  require<T>(A.same_shape(B), "mul operands differ in shape");
  TensorT<T> out(A.shape);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = A.data[i] * B.data[i];
  return push(std::move(out), [ai = a.idx, bi = b.idx](TapeT& t, int self) {
    const TensorT<T>& g = t.grad_of(self);
    const TensorT<T>& A = t.value_of(ai);
    const TensorT<T>& B = t.value_of(bi);
    TensorT<T>& ga = t.grad_of(ai);
    TensorT<T>& gb = t.grad_of(bi);
    for (size_t i = 0; i < g.data.size(); ++i) {
      ga.data[i] += g.data[i] * B.data[i];
      gb.data[i] += g.data[i] * A.data[i];
    }
  });
}

template <typename T>
typename TapeT<T>::Value TapeT<T>::scale(Value x, T factor) {
  const TensorT<T>& X = value_of(x.idx);
  TensorT<T> out(X.shape);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = X.data[i] * factor;
  return push(std::move(out), [xi = x.idx, factor](TapeT& t, int self) {
    const TensorT<T>& g = t.grad_of(self);
    TensorT<T>& gx = t.grad_of(xi);
    for (size_t i = 0; i < g.data.size(); ++i) gx.data[i] += g.data[i] * factor;
  });
}

template <typename T>
typename TapeT<T>::Value TapeT<T>::sigmoid(Value x) {
  const TensorT<T>& X = value_of(x.idx);
  TensorT<T> out(X.shape);
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = T(1) / (T(1) + std::exp(-X.data[i]));
  return push(std::move(out), [xi = x.idx](TapeT& t, int self) {
    const TensorT<T>& g = t.grad_of(self);
    const TensorT<T>& s = t.value_of(self);
    TensorT<T>& gx = t.grad_of(xi);
    for (size_t i = 0; i < g.data.size(); ++i)
      gx.data[i] += g.data[i] * s.data[i] * (T(1) - s.data[i]);
  });
}

template <typename T>
typename TapeT<T>::Value TapeT<T>::tanh(Value x) {
  const TensorT<T>& X = value_of(x.idx);
  TensorT<T> out(X.shape);
  for (size_t i = 0; i < out.data.size(); ++i) out.data[i] = std::tanh(X.data[i]);
  return push(std::move(out), [xi = x.idx](TapeT& t, int self) {
    const TensorT<T>& g = t.grad_of(self);
    const TensorT<T>& y = t.value_of(self);
    TensorT<T>& gx = t.grad_of(xi);
    for (size_t i = 0; i < g.data.size(); ++i)
      gx.data[i] += g.data[i] * (T(1) - y.data[i] * y.data[i]);
  });
}

// ------------------------------------------------------ Shape surgery

template <typename T>
typename TapeT<T>::Value TapeT<T>::concat_cols(Value a, Value b) {
  const TensorT<T>& A = value_of(a.idx);
  const TensorT<T>& B = value_of(b.idx);
  require<T>(A.rank() == 2 && B.rank() == 2 && A.rows() == B.rows(),
             "concat_cols expects matching row counts");
  const int rows = A.rows(), ca = A.cols(), cb = B.cols();
  TensorT<T> out({rows, ca + cb});
  for (int r = 0; r < rows; ++r) {
    std::copy_n(A.row_ptr(r), ca, out.row_ptr(r));
    std::copy_n(B.row_ptr(r), cb, out.row_ptr(r) + ca);
  }
  return push(std::move(out), [ai = a.idx, bi = b.idx, ca, cb](TapeT& t, int self) {
    const TensorT<T>& g = t.grad_of(self);
    TensorT<T>& ga = t.grad_of(ai);
    TensorT<T>& gb = t.grad_of(bi);
    for (int r = 0; r < g.rows(); ++r)
      for (int c = 0; c < ca + cb; ++c) {
        if (c < ca) ga.at(r, c) += g.at(r, c);
        else gb.at(r, c - ca) += g.at(r, c);
      }
  });
}

template <typename T>
typename TapeT<T>::Value TapeT<T>::concat_rows(const std::vector<Value>& parts) {
  require<T>(!parts.empty(), "concat_rows needs at least one part");
  const int cols = value_of(parts[0].idx).cols();
  int rows = 0;
  for (Value p : parts) {
    const TensorT<T>& P = value_of(p.idx);
    require<T>(P.rank() == 2 && P.cols() == cols, "concat_rows expects equal column counts");
    rows += P.rows();
  }
  TensorT<T> out({rows, cols});
  int at = 0;
  std::vector<int> parents;
  std::vector<int> offsets;
  for (Value p : parts) {
    const TensorT<T>& P = value_of(p.idx);
    std::copy_n(P.data.data(), P.numel(), out.row_ptr(at));
    parents.push_back(p.idx);
    offsets.push_back(at);
    at += P.rows();
  }
  return push(std::move(out),
              [parents, offsets](TapeT& t, int self) {
                const TensorT<T>& g = t.grad_of(self);
                for (size_t k = 0; k < parents.size(); ++k) {
                  TensorT<T>& gp = t.grad_of(parents[k]);
                  const T* src = g.row_ptr(offsets[k]);
                  for (size_t i = 0; i < gp.numel(); ++i) gp.data[i] += src[i];
                }
              });
}

template <typename T>
typename TapeT<T>::Value TapeT<T>::slice_cols(Value x, int offset, int len) {
  const TensorT<T>& X = value_of(x.idx);
  require<T>(X.rank() == 2 && offset >= 0 && len > 0 && offset + len <= X.cols(),
             "slice_cols out of range");
  const int rows = X.rows();
  TensorT<T> out({rows, len});
  for (int r = 0; r < rows; ++r) std::copy_n(X.row_ptr(r) + offset, len, out.row_ptr(r));
  return push(std::move(out), [xi = x.idx, offset, len](TapeT& t, int self) {
    const TensorT<T>& g = t.grad_of(self);
    TensorT<T>& gx = t.grad_of(xi);
    for (int r = 0; r < g.rows(); ++r)
      for (int c = 0; c < len; ++c) gx.at(r, offset + c) += g.at(r, c);
  });
}

template <typename T>
typename TapeT<T>::Value TapeT<T>::row_mask(Value x, std::vector<uint8_t> keep) {
  const TensorT<T>& X = value_of(x.idx);
  require<T>(static_cast<int>(keep.size()) == X.rows(), "row_mask size mismatch");
  TensorT<T> out(X.shape);
  for (int r = 0; r < X.rows(); ++r)
    if (keep[r]) std::copy_n(X.row_ptr(r), X.cols(), out.row_ptr(r));
  return push(std::move(out), [xi = x.idx, keep = std::move(keep)](TapeT& t, int self) {
    const TensorT<T>& g = t.grad_of(self);
    TensorT<T>& gx = t.grad_of(xi);
    for (int r = 0; r < g.rows(); ++r) {
      if (!keep[r]) continue;
      for (int c = 0; c < g.cols(); ++c) gx.at(r, c) += g.at(r, c);
    }
  });
}

// ---------------------------------------------------------------- Dropout

template <typename T>
typename TapeT<T>::Value TapeT<T>::dropout(Value x, double rate, SplitMix64& rng) {
  const TensorT<T>& X = value_of(x.idx);
  if (rate <= 0.0) return x;
  require<T>(rate < 1.0, "dropout rate must be below 1");
  std::vector<uint8_t> keep(X.numel());
  for (size_t i = 0; i < keep.size(); ++i) keep[i] = rng.next_double() >= rate ? 1 : 0;
  return dropout_with_mask(x, std::move(keep), static_cast<T>(1.0 / (1.0 - rate)));
}

template <typename T>
typename TapeT<T>::Value TapeT<T>::dropout_with_mask(Value x, std::vector<uint8_t> keep,
                                                     T inv_keep_prob) {
  const TensorT<T>& X = value_of(x.idx);
  require<T>(keep.size() == X.numel(), "dropout mask size mismatch");
  TensorT<T> out(X.shape);
  for (size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = keep[i] ? X.data[i] * inv_keep_prob : T(0);
  return push(std::move(out),
              [xi = x.idx, keep = std::move(keep), inv_keep_prob](TapeT& t, int self) {
                const TensorT<T>& g = t.grad_of(self);
                TensorT<T>& gx = t.grad_of(xi);
                for (size_t i = 0; i < g.data.size(); ++i)
                  if (keep[i]) gx.data[i] += g.data[i] * inv_keep_prob;
              });
}

// ------------------------------------------------------------- Embedding

template <typename T>
typename TapeT<T>::Value TapeT<T>::embed_positions(Value subword_table, Value label_table,
                                                   std::vector<EmbedSpec> specs) {
  const TensorT<T>& sub = value_of(subword_table.idx);
  const TensorT<T>& lab = value_of(label_table.idx);
  require<T>(sub.rank() == 2 && lab.rank() == 2 && sub.cols() == lab.cols(),
             "embedding tables must share the embedding width");
  const int dim = sub.cols();
  const int batch = static_cast<int>(specs.size());
  TensorT<T> out({batch, dim});
  for (int r = 0; r < batch; ++r) {
    const EmbedSpec& spec = specs[r];
    T* dst = out.row_ptr(r);
    switch (spec.kind) {
      case EmbedSpec::Kind::pad:
        break;
      case EmbedSpec::Kind::label: {
        require<T>(spec.label_row >= 0 && spec.label_row < lab.rows(),
                   "label row out of range");
        const T* src = lab.row_ptr(spec.label_row);
        std::copy_n(src, dim, dst);
        break;
      }
      case EmbedSpec::Kind::word: {
        require<T>(!spec.subword_ids.empty(), "word embedding needs at least one subword");
        const T inv = T(1) / static_cast<T>(spec.subword_ids.size());
        for (int id : spec.subword_ids) {
          require<T>(id >= 0 && id < sub.rows(), "subword id out of range");
          const T* src = sub.row_ptr(id);
          for (int c = 0; c < dim; ++c) dst[c] += src[c] * inv;
        }
        break;
      }
    }
  }
  return push(std::move(out), [si = subword_table.idx, li = label_table.idx,
                               specs = std::move(specs)](TapeT& t, int self) {
    const TensorT<T>& g = t.grad_of(self);
    const int dim = g.cols();
    TensorT<T>& gsub = t.grad_of(si);
    TensorT<T>& glab = t.grad_of(li);
    for (size_t r = 0; r < specs.size(); ++r) {
      const EmbedSpec& spec = specs[r];
      const T* src = g.row_ptr(static_cast<int>(r));
      switch (spec.kind) {
        case EmbedSpec::Kind::pad:
          break;
        case EmbedSpec::Kind::label: {
          T* dst = glab.row_ptr(spec.label_row);
          for (int c = 0; c < dim; ++c) dst[c] += src[c];
          break;
        }
        case EmbedSpec::Kind::word: {
          const T inv = T(1) / static_cast<T>(spec.subword_ids.size());
          for (int id : spec.subword_ids) {
            T* dst = gsub.row_ptr(id);
            for (int c = 0; c < dim; ++c) dst[c] += src[c] * inv;
          }
          break;
        }
      }
    }
  });
}

template <typename T>
typename TapeT<T>::Value TapeT<T>::select_per_row(const std::vector<Value>& states,
                                                  std::vector<int> pick) {
  require<T>(!states.empty(), "select_per_row needs at least one state");
  const TensorT<T>& first = value_of(states[0].idx);
  const int rows = first.rows(), cols = first.cols();
  require<T>(static_cast<int>(pick.size()) == rows, "pick size must equal row count");
  std::vector<int> parents;
  parents.reserve(states.size());
  for (Value s : states) {
    require<T>(value_of(s.idx).same_shape(first), "select_per_row states differ in shape");
    parents.push_back(s.idx);
  }
  TensorT<T> out({rows, cols});
  for (int r = 0; r < rows; ++r) {
    int which = pick[r];
    require<T>(which >= 0 && which < static_cast<int>(parents.size()),
               "select_per_row pick out of range");
    std::copy_n(value_of(parents[which]).row_ptr(r), cols, out.row_ptr(r));
  }
  return push(std::move(out),
              [parents, pick = std::move(pick)](TapeT& t, int self) {
                const TensorT<T>& g = t.grad_of(self);
                for (int r = 0; r < g.rows(); ++r) {
                  TensorT<T>& gp = t.grad_of(parents[pick[r]]);
                  for (int c = 0; c < g.cols(); ++c) gp.at(r, c) += g.at(r, c);
                }
              });
}

// ------------------------------------------------------------- Attention

template <typename T>
typename TapeT<T>::Value TapeT<T>::attn_scores(Value we, Value wd, Value v) {
  const TensorT<T>& WE = value_of(we.idx);
  const TensorT<T>& WD = value_of(wd.idx);
  const TensorT<T>& V = value_of(v.idx);
  require<T>(WE.rank() == 2 && WD.rank() == 2 && V.rank() == 1, "attn_scores rank mismatch");
  const int width = WD.cols();
  require<T>(WE.cols() == width && V.cols() == width, "attention width disagrees");
  const int batch = WD.rows();
  require<T>(batch > 0 && WE.rows() % batch == 0, "we rows must be a multiple of batch");
  const int positions = WE.rows() / batch;

  TensorT<T> activ({WE.rows(), width});  // cached tanh values for backward
  TensorT<T> out({batch, positions});
  for (int i = 0; i < positions; ++i) {
    for (int b = 0; b < batch; ++b) {
      const T* e_row = WE.row_ptr(i * batch + b);
      const T* d_row = WD.row_ptr(b);
      T* t_row = activ.row_ptr(i * batch + b);
      T acc = 0;
      for (int a = 0; a < width; ++a) {
        T th = std::tanh(e_row[a] + d_row[a]);
        t_row[a] = th;
        acc += V.data[a] * th;
      }
      out.at(b, i) = acc;
    }
  }
  return push(std::move(out), [wei = we.idx, wdi = wd.idx, vi = v.idx,
                               activ = std::move(activ), batch,
                               positions, width](TapeT& t, int self) {
    const TensorT<T>& g = t.grad_of(self);
    const TensorT<T>& V = t.value_of(vi);
    TensorT<T>& gwe = t.grad_of(wei);
    TensorT<T>& gwd = t.grad_of(wdi);
    TensorT<T>& gv = t.grad_of(vi);
    for (int i = 0; i < positions; ++i) {
      for (int b = 0; b < batch; ++b) {
        const T gs = g.at(b, i);
        if (gs == T(0)) continue;
        const T* t_row = activ.row_ptr(i * batch + b);
        T* ge_row = gwe.row_ptr(i * batch + b);
        T* gd_row = gwd.row_ptr(b);
        for (int a = 0; a < width; ++a) {
          const T th = t_row[a];
          const T common = gs * V.data[a] * (T(1) - th * th);
          ge_row[a] += common;
          gd_row[a] += common;
          gv.data[a] += gs * th;
        }
      }
    }
  });
}

// --------------------------------------------------------------- Softmax

template <typename T>
typename TapeT<T>::Value TapeT<T>::masked_softmax_rows(Value x, std::vector<uint8_t> mask,
                                                       std::vector<uint8_t> live) {
  const TensorT<T>& X = value_of(x.idx);
  const int rows = X.rows(), cols = X.cols();
  require<T>(static_cast<int>(mask.size()) == rows * cols, "softmax mask size mismatch");
  require<T>(static_cast<int>(live.size()) == rows, "softmax live size mismatch");
  TensorT<T> out(X.shape);
  for (int r = 0; r < rows; ++r) {
    if (!live[r]) continue;
    const T* xr = X.row_ptr(r);
    const uint8_t* mr = mask.data() + static_cast<size_t>(r) * cols;
    T max_val = -std::numeric_limits<T>::infinity();
    for (int c = 0; c < cols; ++c)
      if (mr[c] && xr[c] > max_val) max_val = xr[c];
    if (max_val == -std::numeric_limits<T>::infinity())
      raise(Errc::AllMasked, "softmax row " + std::to_string(r) + " has no live positions");
    T* yr = out.row_ptr(r);
    T sum = 0;
    for (int c = 0; c < cols; ++c) {
      if (!mr[c]) continue;
      T e = std::exp(xr[c] - max_val);
      yr[c] = e;
      sum += e;
    }
    const T inv = T(1) / sum;
    for (int c = 0; c < cols; ++c) yr[c] *= inv;
  }
  return push(std::move(out), [xi = x.idx, mask = std::move(mask),
                               live = std::move(live)](TapeT& t, int self) {
    const TensorT<T>& g = t.grad_of(self);
    const TensorT<T>& p = t.value_of(self);
    TensorT<T>& gx = t.grad_of(xi);
    const int rows = g.rows(), cols = g.cols();
    for (int r = 0; r < rows; ++r) {
      if (!live[r]) continue;
      const T* pr = p.row_ptr(r);
      const T* gr = g.row_ptr(r);
      T dot = 0;
      for (int c = 0; c < cols; ++c) dot += pr[c] * gr[c];
      T* gxr = gx.row_ptr(r);
      for (int c = 0; c < cols; ++c) gxr[c] += pr[c] * (gr[c] - dot);
    }
  });
}

template <typename T>
typename TapeT<T>::Value TapeT<T>::softmax(Value x) {
  const TensorT<T>& X = value_of(x.idx);
  std::vector<uint8_t> mask(X.numel(), 1);
  std::vector<uint8_t> live(X.rows(), 1);
  return masked_softmax_rows(x, std::move(mask), std::move(live));
}

// -------------------------------------------------------------------- NLL

template <typename T>
typename TapeT<T>::Value TapeT<T>::nll_rows(Value probs, std::vector<int> targets, double eps) {
  const TensorT<T>& P = value_of(probs.idx);
  const int rows = P.rows(), cols = P.cols();
  require<T>(static_cast<int>(targets.size()) == rows, "nll target count mismatch");
  double total = 0;
  for (int r = 0; r < rows; ++r) {
    int tgt = targets[r];
    if (tgt == 0) continue;  // dead row
    if (tgt < 1 || tgt > cols)
      raise(Errc::IndexOutOfRange, "nll target " + std::to_string(tgt) + " outside [1, " +
                                       std::to_string(cols) + "]");
    total += -std::log(static_cast<double>(P.at(r, tgt - 1)) + eps);
  }
  TensorT<T> out({1, 1});
  out.data[0] = static_cast<T>(total);
  return push(std::move(out),
              [pi = probs.idx, targets = std::move(targets), eps](TapeT& t, int self) {
                const T g = t.grad_of(self).data[0];
                const TensorT<T>& P = t.value_of(pi);
                TensorT<T>& gp = t.grad_of(pi);
                for (int r = 0; r < P.rows(); ++r) {
                  int tgt = targets[r];
                  if (tgt == 0) continue;
                  gp.at(r, tgt - 1) +=
                      -g / static_cast<T>(static_cast<double>(P.at(r, tgt - 1)) + eps);
                }
              });
}

template <typename T>
typename TapeT<T>::Value TapeT<T>::nll_loss(Value dist, int target, double eps) {
  const TensorT<T>& D = value_of(dist.idx);
  require<T>(D.rows() == 1, "nll_loss expects a single distribution");
  double sum = 0;
  for (T v : D.data) sum += static_cast<double>(v);
  if (std::abs(sum - 1.0) > 1e-5)
    raise(Errc::NumericError, "nll_loss input does not sum to 1 (sum = " +
                                  std::to_string(sum) + ")");
  if (target < 1 || target > D.cols())
    raise(Errc::IndexOutOfRange, "nll_loss target " + std::to_string(target) + " outside [1, " +
                                     std::to_string(D.cols()) + "]");
  return nll_rows(dist, {target}, eps);
}

// --------------------------------------------------------------- helpers

template <typename T>
std::pair<typename TapeT<T>::Value, typename TapeT<T>::Value> lstm_cell(
    TapeT<T>& tape, typename TapeT<T>::Value x, typename TapeT<T>::Value h,
    typename TapeT<T>::Value c, const LstmGateValues<T>& weights) {
  using Value = typename TapeT<T>::Value;
  const int gates = tape.val(weights.bias).cols();
  if (gates % 4 != 0) raise(Errc::ShapeMismatch, "LSTM bias length must be 4*H");
  const int hidden = gates / 4;

  Value pre = tape.add_bias(tape.add(tape.matmul(x, weights.w_x), tape.matmul(h, weights.w_h)),
                            weights.bias);
  Value gate_i = tape.sigmoid(tape.slice_cols(pre, 0, hidden));
  Value gate_f = tape.sigmoid(tape.slice_cols(pre, hidden, hidden));
  Value gate_g = tape.tanh(tape.slice_cols(pre, 2 * hidden, hidden));
  Value gate_o = tape.sigmoid(tape.slice_cols(pre, 3 * hidden, hidden));
  Value c_next = tape.add(tape.mul(gate_f, c), tape.mul(gate_i, gate_g));
  Value h_next = tape.mul(gate_o, tape.tanh(c_next));
  return {h_next, c_next};
}

template class TapeT<float>;
template class TapeT<double>;
template std::pair<TapeT<float>::Value, TapeT<float>::Value> lstm_cell<float>(
    TapeT<float>&, TapeT<float>::Value, TapeT<float>::Value, TapeT<float>::Value,
    const LstmGateValues<float>&);
template std::pair<TapeT<double>::Value, TapeT<double>::Value> lstm_cell<double>(
    TapeT<double>&, TapeT<double>::Value, TapeT<double>::Value, TapeT<double>::Value,
    const LstmGateValues<double>&);

}  // namespace logptr::num
