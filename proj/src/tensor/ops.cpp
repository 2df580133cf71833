#include "dualcap/tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace dualcap {

namespace {

template <typename T>
bool recording(std::initializer_list<const TensorT<T>*> inputs) {
  if (Tape::active() == nullptr) return false;
  for (const auto* t : inputs) {
    if (t->grad_connected()) return true;
  }
  return false;
}

template <typename T>
void record(TensorT<T> out, std::function<void()> backprop) {
  out.mark_grad_connected();
  auto out_impl = out.impl();
  Tape::active()->push(Tape::Node{
      [out_impl]() { std::fill(out_impl->grad.begin(), out_impl->grad.end(), T(0)); },
      std::move(backprop)});
}

template <typename T>
void axpy(std::vector<T>& dst, const std::vector<T>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

template <typename T>
[[noreturn]] void shape_fail(const char* op, const TensorT<T>& a, const TensorT<T>& b) {
  throw ShapeError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " +
                   shape_str(b.shape()) + " do not conform");
}

}  // namespace

template <typename T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
  const int ra = a.rank();
  const int rb = b.rank();
  TensorT<T> out;
  if (ra == 2 && rb == 2) {
    const int m = a.extent(0), k = a.extent(1), n = b.extent(1);
    if (b.extent(0) != k) shape_fail("matmul", a, b);
    out = TensorT<T>::zeros({m, n});
    const auto& av = a.values();
    const auto& bv = b.values();
    auto& ov = out.values();
    for (int i = 0; i < m; ++i) {
      for (int p = 0; p < k; ++p) {
        const T aip = av[static_cast<std::size_t>(i) * k + p];
        if (aip == T(0)) continue;
        const std::size_t brow = static_cast<std::size_t>(p) * n;
        const std::size_t orow = static_cast<std::size_t>(i) * n;
        for (int j = 0; j < n; ++j) ov[orow + j] += aip * bv[brow + j];
      }
    }
  } else if (ra == 1 && rb == 2) {
    const int k = a.extent(0), n = b.extent(1);
    if (b.extent(0) != k) shape_fail("matmul", a, b);
    out = TensorT<T>::zeros({n});
    const auto& av = a.values();
    const auto& bv = b.values();
    auto& ov = out.values();
    for (int p = 0; p < k; ++p) {
      const T vp = av[static_cast<std::size_t>(p)];
      if (vp == T(0)) continue;
      const std::size_t brow = static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j) ov[static_cast<std::size_t>(j)] += vp * bv[brow + j];
    }
  } else if (ra == 2 && rb == 1) {
    const int m = a.extent(0), k = a.extent(1);
    if (b.extent(0) != k) shape_fail("matmul", a, b);
    out = TensorT<T>::zeros({m});
    const auto& av = a.values();
    const auto& bv = b.values();
    auto& ov = out.values();
    for (int i = 0; i < m; ++i) {
      T acc = T(0);
      const std::size_t arow = static_cast<std::size_t>(i) * k;
      for (int p = 0; p < k; ++p) acc += av[arow + p] * bv[static_cast<std::size_t>(p)];
      ov[static_cast<std::size_t>(i)] = acc;
    }
  } else {
    shape_fail("matmul", a, b);
  }

  if (recording<T>({&a, &b})) {
    record(out, [a, b, out]() {
      const auto& g = out.impl()->grad;
      const int ra = a.rank(), rb = b.rank();
      if (ra == 2 && rb == 2) {
        const int m = a.extent(0), k = a.extent(1), n = b.extent(1);
        if (a.grad_connected()) {
          auto& ga = a.impl()->grad;
          const auto& bv = b.values();
          for (int i = 0; i < m; ++i)
            for (int p = 0; p < k; ++p) {
              T acc = T(0);
              for (int j = 0; j < n; ++j)
                acc += g[static_cast<std::size_t>(i) * n + j] * bv[static_cast<std::size_t>(p) * n + j];
              ga[static_cast<std::size_t>(i) * k + p] += acc;
            }
        }
        if (b.grad_connected()) {
          auto& gb = b.impl()->grad;
          const auto& av = a.values();
          for (int p = 0; p < k; ++p)
            for (int i = 0; i < m; ++i) {
              const T aip = av[static_cast<std::size_t>(i) * k + p];
              if (aip == T(0)) continue;
              for (int j = 0; j < n; ++j)
                gb[static_cast<std::size_t>(p) * n + j] += aip * g[static_cast<std::size_t>(i) * n + j];
            }
        }
      } else if (ra == 1 && rb == 2) {
        const int k = a.extent(0), n = b.extent(1);
        if (a.grad_connected()) {
          auto& ga = a.impl()->grad;
          const auto& bv = b.values();
          for (int p = 0; p < k; ++p) {
            T acc = T(0);
            for (int j = 0; j < n; ++j)
              acc += g[static_cast<std::size_t>(j)] * bv[static_cast<std::size_t>(p) * n + j];
            ga[static_cast<std::size_t>(p)] += acc;
          }
        }
        if (b.grad_connected()) {
          auto& gb = b.impl()->grad;
          const auto& av = a.values();
          for (int p = 0; p < k; ++p) {
            const T vp = av[static_cast<std::size_t>(p)];
            if (vp == T(0)) continue;
            for (int j = 0; j < n; ++j)
              gb[static_cast<std::size_t>(p) * n + j] += vp * g[static_cast<std::size_t>(j)];
          }
        }
      } else {  // ra == 2 && rb == 1
        const int m = a.extent(0), k = a.extent(1);
        if (a.grad_connected()) {
          auto& ga = a.impl()->grad;
          const auto& bv = b.values();
          for (int i = 0; i < m; ++i) {
            const T gi = g[static_cast<std::size_t>(i)];
            if (gi == T(0)) continue;
            for (int p = 0; p < k; ++p)
              ga[static_cast<std::size_t>(i) * k + p] += gi * bv[static_cast<std::size_t>(p)];
          }
        }
        if (b.grad_connected()) {
          auto& gb = b.impl()->grad;
          const auto& av = a.values();
          for (int i = 0; i < m; ++i) {
            const T gi = g[static_cast<std::size_t>(i)];
            if (gi == T(0)) continue;
            for (int p = 0; p < k; ++p)
              gb[static_cast<std::size_t>(p)] += gi * av[static_cast<std::size_t>(i) * k + p];
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
  enum class Mode { same, row_bias, elem_bias };
  Mode mode;
  if (a.shape() == b.shape()) {
    mode = Mode::same;
  } else if (a.rank() == 2 && b.rank() == 1 && a.extent(1) == b.extent(0)) {
    mode = Mode::row_bias;
  } else if (a.rank() == 1 && b.rank() == 1 && b.extent(0) == 1) {
    mode = Mode::elem_bias;
  } else {
    shape_fail("add", a, b);
  }

  TensorT<T> out = a.clone();
  auto& ov = out.values();
  const auto& bv = b.values();
  switch (mode) {
    case Mode::same:
      axpy(ov, bv);
      break;
    case Mode::row_bias: {
      const int m = a.extent(0), n = a.extent(1);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) ov[static_cast<std::size_t>(i) * n + j] += bv[static_cast<std::size_t>(j)];
      break;
    }
    case Mode::elem_bias:
      for (auto& v : ov) v += bv[0];
      break;
  }

  if (recording<T>({&a, &b})) {
    record(out, [a, b, out, mode]() {
      const auto& g = out.impl()->grad;
      if (a.grad_connected()) axpy(a.impl()->grad, g);
      if (b.grad_connected()) {
        auto& gb = b.impl()->grad;
        switch (mode) {
          case Mode::same:
            axpy(gb, g);
            break;
          case Mode::row_bias: {
            const int m = a.extent(0), n = a.extent(1);
            for (int i = 0; i < m; ++i)
              for (int j = 0; j < n; ++j)
                gb[static_cast<std::size_t>(j)] += g[static_cast<std::size_t>(i) * n + j];
            break;
          }
          case Mode::elem_bias:
            for (const T gv : g) gb[0] += gv;
            break;
        }
      }
    });
  }
  return out;
}

template <typename T>
TensorT<T> mul(const TensorT<T>& a, const TensorT<T>& b) {
  if (a.shape() != b.shape()) shape_fail("mul", a, b);
  TensorT<T> out = a.clone();
  auto& ov = out.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < ov.size(); ++i) ov[i] *= bv[i];

  if (recording<T>({&a, &b})) {
    record(out, [a, b, out]() {
      const auto& g = out.impl()->grad;
      if (a.grad_connected()) {
        auto& ga = a.impl()->grad;
        const auto& bv2 = b.values();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv2[i];
      }
      if (b.grad_connected()) {
        auto& gb = b.impl()->grad;
        const auto& av = a.values();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
      }
    });
  }
  return out;
}

template <typename T>
TensorT<T> concat(const std::vector<TensorT<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  int total = 0;
  for (const auto& p : parts) {
    if (p.rank() != 1) {
      throw ShapeError("concat: expected rank-1 inputs, got shape " + shape_str(p.shape()));
    }
    total += p.extent(0);
  }
  TensorT<T> out = TensorT<T>::zeros({total});
  auto& ov = out.values();
  std::size_t off = 0;
  for (const auto& p : parts) {
    const auto& pv = p.values();
    std::copy(pv.begin(), pv.end(), ov.begin() + static_cast<std::ptrdiff_t>(off));
    off += pv.size();
  }

  bool rec = false;
  for (const auto& p : parts) rec = rec || p.grad_connected();
  if (Tape::active() != nullptr && rec) {
    record(out, [parts, out]() {
      const auto& g = out.impl()->grad;
      std::size_t off2 = 0;
      for (const auto& p : parts) {
        if (p.grad_connected()) {
          auto& gp = p.impl()->grad;
          for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[off2 + i];
        }
        off2 += p.values().size();
      }
    });
  }
  return out;
}

template <typename T>
TensorT<T> slice(const TensorT<T>& x, int start, int len) {
  const int dim0 = x.extent(0);
  if (len <= 0 || start < 0 || start + len > dim0) {
    throw ShapeError("slice: range [" + std::to_string(start) + ", " +
                     std::to_string(start + len) + ") out of bounds for shape " +
                     shape_str(x.shape()));
  }
  const std::size_t row = x.rank() == 2 ? static_cast<std::size_t>(x.extent(1)) : 1;
  Shape out_shape = x.shape();
  out_shape[0] = len;
  TensorT<T> out = TensorT<T>::zeros(out_shape);
  const auto& xv = x.values();
  auto& ov = out.values();
  std::copy(xv.begin() + static_cast<std::ptrdiff_t>(start * row),
            xv.begin() + static_cast<std::ptrdiff_t>((start + len) * row), ov.begin());

  if (recording<T>({&x})) {
    record(out, [x, out, start, row]() {
      const auto& g = out.impl()->grad;
      auto& gx = x.impl()->grad;
      const std::size_t off = static_cast<std::size_t>(start) * row;
      for (std::size_t i = 0; i < g.size(); ++i) gx[off + i] += g[i];
    });
  }
  return out;
}

template <typename T>
TensorT<T> mean_rows(const TensorT<T>& x) {
  if (x.rank() != 2) {
    throw ShapeError("mean_rows: expected rank-2 input, got shape " + shape_str(x.shape()));
  }
  const int m = x.extent(0), n = x.extent(1);
  TensorT<T> out = TensorT<T>::zeros({n});
  const auto& xv = x.values();
  auto& ov = out.values();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) ov[static_cast<std::size_t>(j)] += xv[static_cast<std::size_t>(i) * n + j];
  for (auto& v : ov) v /= static_cast<T>(m);

  if (recording<T>({&x})) {
    record(out, [x, out, m, n]() {
      const auto& g = out.impl()->grad;
      auto& gx = x.impl()->grad;
      const T inv = T(1) / static_cast<T>(m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
          gx[static_cast<std::size_t>(i) * n + j] += g[static_cast<std::size_t>(j)] * inv;
    });
  }
  return out;
}

namespace {

template <typename T, typename Fwd, typename Bwd>
TensorT<T> elementwise(const char* /*op*/, const TensorT<T>& x, Fwd fwd, Bwd bwd) {
  TensorT<T> out = x.clone();
  for (auto& v : out.values()) v = fwd(v);
  if (recording<T>({&x})) {
    record(out, [x, out, bwd]() {
      const auto& g = out.impl()->grad;
      const auto& xv = x.values();
      const auto& yv = out.values();
      auto& gx = x.impl()->grad;
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * bwd(xv[i], yv[i]);
    });
  }
  return out;
}

}  // namespace

template <typename T>
TensorT<T> tanh(const TensorT<T>& x) {
  return elementwise<T>(
      "tanh", x, [](T v) { return std::tanh(v); },
      [](T, T y) { return T(1) - y * y; });
}

template <typename T>
TensorT<T> sigmoid(const TensorT<T>& x) {
  return elementwise<T>(
      "sigmoid", x,
      [](T v) {
        if (v >= T(0)) {
          const T e = std::exp(-v);
          return T(1) / (T(1) + e);
        }
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
TensorT<T> relu(const TensorT<T>& x) {
  return elementwise<T>(
      "relu", x, [](T v) { return v > T(0) ? v : T(0); },
      [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
TensorT<T> log(const TensorT<T>& x) {
  return elementwise<T>(
      "log", x, [](T v) { return std::log(v); },
      [](T v, T) { return T(1) / v; });
}

template <typename T>
TensorT<T> softmax_lastdim(const TensorT<T>& x) {
  if (x.rank() != 1 && x.rank() != 2) {
    throw ShapeError("softmax_lastdim: expected rank 1 or 2, got shape " + shape_str(x.shape()));
  }
  const int rows = x.rank() == 2 ? x.extent(0) : 1;
  const int n = x.rank() == 2 ? x.extent(1) : x.extent(0);
  TensorT<T> out = x.clone();
  auto& ov = out.values();
  for (int r = 0; r < rows; ++r) {
    T* row = ov.data() + static_cast<std::size_t>(r) * n;
    T mx = row[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    T denom = T(0);
    for (int j = 0; j < n; ++j) {
      row[j] = std::exp(row[j] - mx);
      denom += row[j];
    }
    for (int j = 0; j < n; ++j) row[j] /= denom;
  }

  if (recording<T>({&x})) {
    record(out, [x, out, rows, n]() {
      const auto& g = out.impl()->grad;
      const auto& p = out.values();
      auto& gx = x.impl()->grad;
      for (int r = 0; r < rows; ++r) {
        const std::size_t off = static_cast<std::size_t>(r) * n;
        T dot = T(0);
        for (int j = 0; j < n; ++j) dot += g[off + j] * p[off + j];
        for (int j = 0; j < n; ++j) gx[off + j] += p[off + j] * (g[off + j] - dot);
      }
    });
  }
  return out;
}

template <typename T>
TensorT<T> sum(const TensorT<T>& x) {
  T acc = T(0);
  for (const T v : x.values()) acc += v;
  TensorT<T> out = TensorT<T>::scalar(acc);
  if (recording<T>({&x})) {
    record(out, [x, out]() {
      const T g = out.impl()->grad[0];
      auto& gx = x.impl()->grad;
      for (auto& v : gx) v += g;
    });
  }
  return out;
}

template <typename T>
TensorT<T> scalar_mul(const TensorT<T>& x, T c) {
  TensorT<T> out = x.clone();
  for (auto& v : out.values()) v *= c;
  if (recording<T>({&x})) {
    record(out, [x, out, c]() {
      const auto& g = out.impl()->grad;
      auto& gx = x.impl()->grad;
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * c;
    });
  }
  return out;
}

template <typename T>
std::size_t backward(const TensorT<T>& loss) {
  if (loss.numel() != 1) {
    throw ShapeError("backward: loss must be a single element, got shape " +
                     shape_str(loss.shape()));
  }
  Tape* tape = Tape::active();
  if (tape == nullptr) {
    throw Error("backward: no active tape");
  }
  if (!loss.grad_connected()) {
    throw Error("backward: loss was not produced by recorded operations");
  }
  tape->zero_intermediate_grads();
  loss.impl()->grad[0] += T(1);
  return tape->replay_reverse_preseeded();
}

#define DUALCAP_INSTANTIATE_OPS(T)                                             \
  template TensorT<T> matmul<T>(const TensorT<T>&, const TensorT<T>&);         \
  template TensorT<T> add<T>(const TensorT<T>&, const TensorT<T>&);            \
  template TensorT<T> mul<T>(const TensorT<T>&, const TensorT<T>&);            \
  template TensorT<T> concat<T>(const std::vector<TensorT<T>>&);               \
  template TensorT<T> slice<T>(const TensorT<T>&, int, int);                   \
  template TensorT<T> mean_rows<T>(const TensorT<T>&);                         \
  template TensorT<T> tanh<T>(const TensorT<T>&);                              \
  template TensorT<T> sigmoid<T>(const TensorT<T>&);                           \
  template TensorT<T> relu<T>(const TensorT<T>&);                              \
  template TensorT<T> softmax_lastdim<T>(const TensorT<T>&);                   \
  template TensorT<T> log<T>(const TensorT<T>&);                               \
  template TensorT<T> sum<T>(const TensorT<T>&);                               \
  template TensorT<T> scalar_mul<T>(const TensorT<T>&, T);                     \
  template std::size_t backward<T>(const TensorT<T>&);

DUALCAP_INSTANTIATE_OPS(double)
DUALCAP_INSTANTIATE_OPS(float)

#undef DUALCAP_INSTANTIATE_OPS

}  // namespace dualcap
