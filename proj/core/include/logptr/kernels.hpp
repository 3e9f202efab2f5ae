#pragma once

#include "logptr/tensor.hpp"

namespace logptr::num::kernels {

// c = a[p x q] * b[q x r]            (assign)
// c += ...                           (accumulate variants, used by backward)
template <typename T>
void gemm(const TensorT<T>& a, const TensorT<T>& b, TensorT<T>& c);
template <typename T>
void gemm_acc(const TensorT<T>& a, const TensorT<T>& b, TensorT<T>& c);
// c += a * b^T
template <typename T>
void gemm_nt_acc(const TensorT<T>& a, const TensorT<T>& b, TensorT<T>& c);
// c += a^T * b
template <typename T>
void gemm_tn_acc(const TensorT<T>& a, const TensorT<T>& b, TensorT<T>& c);

}  // namespace logptr::num::kernels
