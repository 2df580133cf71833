#pragma once

#include <cstddef>
#include <vector>

#include "dualcap/tensor/tape.hpp"
#include "dualcap/tensor/tensor.hpp"

namespace dualcap {

// Differentiable primitives. Every operation validates operand shapes and
// raises ShapeError naming the operation and the offending shapes. When a
// tape is active and any input is grad-connected, the result is recorded so
// backward() can reach it.
//
// Supported shapes per operation:
//   matmul        [m,k]x[k,n] -> [m,n];  [k]x[k,n] -> [n];  [m,k]x[k] -> [m]
//   add           same shape; [m,n]+[n] adds the vector to each row;
//                 [n]+[1] adds the scalar to each element
//   mul           elementwise, same shape
//   concat        rank-1 parts joined into one vector
//   slice         contiguous range along dim 0 (vector elements, matrix rows)
//   mean_rows     [m,n] -> [n]
//   tanh/sigmoid/relu/log  elementwise
//   softmax_lastdim  rank-1 whole vector; rank-2 per row (max-subtracted)
//   sum           all elements -> [1]
//   scalar_mul    multiply by a compile-time constant

template <typename T> TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b);
template <typename T> TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b);
template <typename T> TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b);
template <typename T> TensorT<T> concat(const std::vector<TensorT<T>>& parts);
template <typename T> TensorT<T> concat(std::initializer_list<TensorT<T>> parts) {
  return concat(std::vector<TensorT<T>>(parts));
}
template <typename T> TensorT<T> slice(const TensorT<T>& x, int start, int len);
template <typename T> TensorT<T> mean_rows(const TensorT<T>& x);
template <typename T> TensorT<T> tanh(const TensorT<T>& x);
template <typename T> TensorT<T> sigmoid(const TensorT<T>& x);
template <typename T> TensorT<T> relu(const TensorT<T>& x);
template <typename T> TensorT<T> softmax_lastdim(const TensorT<T>& x);
template <typename T> TensorT<T> log(const TensorT<T>& x);
template <typename T> TensorT<T> sum(const TensorT<T>& x);
template <typename T> TensorT<T> scalar_mul(const TensorT<T>& x, T c);

// Accumulates d(loss)/d(leaf) into every grad-connected leaf reachable from
// the loss, replaying the active tape in reverse and discarding it. The loss
// must be a single-element tensor. Returns the number of nodes replayed.
template <typename T> std::size_t backward(const TensorT<T>& loss);

}  // namespace dualcap
