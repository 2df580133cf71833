#pragma once

#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dualcap/common/error.hpp"

namespace dualcap {

// Dense row-major tensor shape. Scalars use shape {1}.
using Shape = std::vector<int>;

inline std::int64_t shape_numel(const Shape& shape) {
  std::int64_t n = 1;
  for (int e : shape) n *= e;
  return n;
}

inline std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

// Dense tensor with optional gradient buffer. Copies share storage; tensors
// are treated as immutable once produced by an operation, so sharing is safe.
// Leaves created with requires_grad accumulate gradients across backward
// passes until zero_grad() is called.
template <typename T>
class TensorT {
 public:
  struct Impl {
    Shape shape;
    std::vector<T> values;
    std::vector<T> grad;
    bool requires_grad = false;   // leaf flag
    bool grad_connected = false;  // leaf requires_grad, or produced on a tape
  };

  TensorT() = default;

  static TensorT zeros(Shape shape, bool requires_grad = false) {
    return filled(std::move(shape), T(0), requires_grad);
  }

  static TensorT filled(Shape shape, T value, bool requires_grad = false) {
    TensorT t;
    t.impl_ = std::make_shared<Impl>();
    t.impl_->shape = std::move(shape);
    check_shape(t.impl_->shape);
    t.impl_->values.assign(static_cast<std::size_t>(shape_numel(t.impl_->shape)), value);
    t.set_requires_grad(requires_grad);
    return t;
  }

  static TensorT scalar(T value, bool requires_grad = false) {
    return from_data({1}, {value}, requires_grad);
  }

  static TensorT from_data(Shape shape, std::vector<T> values, bool requires_grad = false) {
    TensorT t;
    t.impl_ = std::make_shared<Impl>();
    check_shape(shape);
    if (static_cast<std::int64_t>(values.size()) != shape_numel(shape)) {
      throw ShapeError("tensor: data length " + std::to_string(values.size()) +
                       " does not match shape " + shape_str(shape));
    }
    t.impl_->shape = std::move(shape);
    t.impl_->values = std::move(values);
    t.set_requires_grad(requires_grad);
    return t;
  }

  static TensorT uniform(Shape shape, T lo, T hi, std::mt19937_64& rng,
                         bool requires_grad = false) {
    TensorT t = zeros(std::move(shape), requires_grad);
    std::uniform_real_distribution<T> dist(lo, hi);
    for (auto& v : t.impl_->values) v = dist(rng);
    return t;
  }

  static TensorT one_hot(int size, int index) {
    TensorT t = zeros({size});
    t.impl_->values[static_cast<std::size_t>(index)] = T(1);
    return t;
  }

  bool defined() const { return impl_ != nullptr; }

  const Shape& shape() const { return impl_->shape; }
  int rank() const { return static_cast<int>(impl_->shape.size()); }
  int extent(int dim) const { return impl_->shape[static_cast<std::size_t>(dim)]; }
  std::int64_t numel() const { return static_cast<std::int64_t>(impl_->values.size()); }

  std::vector<T>& values() { return impl_->values; }
  const std::vector<T>& values() const { return impl_->values; }

  bool requires_grad() const { return impl_->requires_grad; }
  bool grad_connected() const { return impl_ && impl_->grad_connected; }
  bool has_grad() const { return impl_ && !impl_->grad.empty(); }

  std::vector<T>& grad() {
    ensure_grad_buffer();
    return impl_->grad;
  }
  const std::vector<T>& grad() const {
    if (impl_->grad.empty()) {
      throw Error("tensor: gradient buffer not allocated");
    }
    return impl_->grad;
  }

  void zero_grad() {
    if (has_grad()) {
      std::fill(impl_->grad.begin(), impl_->grad.end(), T(0));
    }
  }

  T item() const {
    if (numel() != 1) {
      throw ShapeError("tensor: item() on non-scalar shape " + shape_str(impl_->shape));
    }
    return impl_->values[0];
  }

  T operator()(int i) const { return impl_->values[static_cast<std::size_t>(i)]; }
  T operator()(int i, int j) const {
    return impl_->values[static_cast<std::size_t>(i) * extent(1) + static_cast<std::size_t>(j)];
  }

  // Deep copy of the values as a fresh leaf.
  TensorT clone(bool requires_grad = false) const {
    return from_data(impl_->shape, impl_->values, requires_grad);
  }

  bool same_storage(const TensorT& other) const { return impl_ == other.impl_; }

  std::shared_ptr<Impl> impl() const { return impl_; }

  void ensure_grad_buffer() {
    if (impl_->grad.empty()) {
      impl_->grad.assign(impl_->values.size(), T(0));
    }
  }

  void mark_grad_connected() {
    impl_->grad_connected = true;
    ensure_grad_buffer();
  }

 private:
  static void check_shape(const Shape& shape) {
    if (shape.empty()) {
      throw ShapeError("tensor: shape must have at least one extent; scalars use [1]");
    }
    for (int e : shape) {
      if (e <= 0) {
        throw ShapeError("tensor: non-positive extent in shape " + shape_str(shape));
      }
    }
  }

  void set_requires_grad(bool requires_grad) {
    impl_->requires_grad = requires_grad;
    if (requires_grad) mark_grad_connected();
  }

  std::shared_ptr<Impl> impl_;
};

using Tensor = TensorT<double>;
using TensorF = TensorT<float>;

}  // namespace dualcap
