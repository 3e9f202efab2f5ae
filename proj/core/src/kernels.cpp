#include "logptr/kernels.hpp"

#include <Eigen/Core>

namespace logptr::num::kernels {

namespace {

template <typename T>
using MatMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using ConstMatMap =
    Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

template <typename T>
ConstMatMap<T> cmap(const TensorT<T>& t) {
  return ConstMatMap<T>(t.data.data(), t.rows(), t.cols());
}
template <typename T>
MatMap<T> map(TensorT<T>& t) {
  return MatMap<T>(t.data.data(), t.rows(), t.cols());
}

}  // namespace

template <typename T>
void gemm(const TensorT<T>& a, const TensorT<T>& b, TensorT<T>& c) {
  map(c).noalias() = cmap(a) * cmap(b);
}

template <typename T>
void gemm_acc(const TensorT<T>& a, const TensorT<T>& b, TensorT<T>& c) {
  map(c).noalias() += cmap(a) * cmap(b);
}

template <typename T>
void gemm_nt_acc(const TensorT<T>& a, const TensorT<T>& b, TensorT<T>& c) {
  map(c).noalias() += cmap(a) * cmap(b).transpose();
}

template <typename T>
void gemm_tn_acc(const TensorT<T>& a, const TensorT<T>& b, TensorT<T>& c) {
  map(c).noalias() += cmap(a).transpose() * cmap(b);
}

template void gemm<float>(const TensorT<float>&, const TensorT<float>&, TensorT<float>&);
template void gemm<double>(const TensorT<double>&, const TensorT<double>&, TensorT<double>&);
template void gemm_acc<float>(const TensorT<float>&, const TensorT<float>&, TensorT<float>&);
template void gemm_acc<double>(const TensorT<double>&, const TensorT<double>&, TensorT<double>&);
template void gemm_nt_acc<float>(const TensorT<float>&, const TensorT<float>&, TensorT<float>&);
template void gemm_nt_acc<double>(const TensorT<double>&, const TensorT<double>&,
                                  TensorT<double>&);
template void gemm_tn_acc<float>(const TensorT<float>&, const TensorT<float>&, TensorT<float>&);
template void gemm_tn_acc<double>(const TensorT<double>&, const TensorT<double>&,
                                  TensorT<double>&);

}  // namespace logptr::num::kernels
