#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pyrfuse/errors.hpp"
#include "pyrfuse/image.hpp"
#include "pyrfuse/pyramid.hpp"
#include "pyrfuse/rng.hpp"

namespace pyrfuse {

/// 4-axis array in (batch, channels, height, width) order, row-major.
/// tape_serial/tape_id tie a value to the tape that produced it; they are
/// bookkeeping only and never influence arithmetic.
template <typename T>
struct TensorT {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<T> data;

  mutable std::int64_t tape_serial = -1;
  mutable int tape_id = -1;

  TensorT() = default;
  TensorT(int n_, int c_, int h_, int w_, T fill = T(0))
      : n(n_),
        c(c_),
        h(h_),
        w(w_),
        data(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {
    if (n_ < 1 || c_ < 1 || h_ < 1 || w_ < 1) throw ShapeError("tensor axes must be positive");
  }

  std::size_t numel() const { return data.size(); }
  std::size_t plane_size() const { return static_cast<std::size_t>(h) * w; }

  T* plane(int ni, int ci) {
    return data.data() + (static_cast<std::size_t>(ni) * c + ci) * plane_size();
  }
  const T* plane(int ni, int ci) const {
    return data.data() + (static_cast<std::size_t>(ni) * c + ci) * plane_size();
  }

  bool same_shape(const TensorT& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }

  bool all_finite() const {
    for (const T& v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  /// Single image (bands -> channels) as a batch-of-one tensor.
  static TensorT from_image(const ImageT<T>& img) {
    TensorT t(1, img.bands, img.height, img.width);
    t.data = img.data;
    return t;
  }

  ImageT<T> to_image() const {
    if (n != 1) throw ShapeError("to_image requires batch size 1");
    ImageT<T> img(c, h, w);
    img.data = data;
    return img;
  }
};

using Tensor = TensorT<float>;

/// Dense convolution parameters: weights (C_out, C_in, k_h, k_w), bias (C_out).
template <typename T>
struct ConvParamsT {
  int out_channels = 0, in_channels = 0, kh = 0, kw = 0;
  std::vector<T> weights;
  std::vector<T> bias;

  ConvParamsT() = default;
  ConvParamsT(int co, int ci, int kh_, int kw_)
      : out_channels(co),
        in_channels(ci),
        kh(kh_),
        kw(kw_),
        weights(static_cast<std::size_t>(co) * ci * kh_ * kw_, T(0)),
        bias(static_cast<std::size_t>(co), T(0)) {
    if (co < 1 || ci < 1) throw ShapeError("conv channel counts must be positive");
    if (kh_ < 1 || kw_ < 1 || kh_ % 2 == 0 || kw_ % 2 == 0)
      throw ShapeError("conv kernel sides must be odd");
  }

  std::size_t param_count() const { return weights.size() + bias.size(); }

  T& weight(int co, int ci, int u, int v) {
    return weights[((static_cast<std::size_t>(co) * in_channels + ci) * kh + u) * kw + v];
  }
  T weight(int co, int ci, int u, int v) const {
    return weights[((static_cast<std::size_t>(co) * in_channels + ci) * kh + u) * kw + v];
  }
};

using ConvParams = ConvParamsT<float>;

/// Gradient buffers for one ConvParamsT, same layout as the parameters.
template <typename T>
struct ConvGradT {
  std::vector<T> weights;
  std::vector<T> bias;

  static ConvGradT zeros_like(const ConvParamsT<T>& p) {
    ConvGradT g;
    g.weights.assign(p.weights.size(), T(0));
    g.bias.assign(p.bias.size(), T(0));
    return g;
  }

  void accumulate(const ConvGradT& o) {
    for (std::size_t i = 0; i < weights.size(); ++i) weights[i] += o.weights[i];
    for (std::size_t i = 0; i < bias.size(); ++i) bias[i] += o.bias[i];
  }
  void scale(T s) {
    for (auto& v : weights) v *= s;
    for (auto& v : bias) v *= s;
  }
};

using ConvGrad = ConvGradT<float>;

enum class OpKind { kLeaf, kConv2d, kLeakyRelu, kConcatChannels, kAdd, kUpsample2x };

namespace internal {

inline std::int64_t next_tape_serial() {
  static std::atomic<std::int64_t> counter{1};
  return counter.fetch_add(1);
}

// Materialized whole-sample mirror border. dst is (h + 2*rh) x (w + 2*rw).
template <typename T>
void mirror_pad_plane(const T* src, int h, int w, int rh, int rw, T* dst) {
  const int pw = w + 2 * rw;
  for (int a = 0; a < h + 2 * rh; ++a) {
    const T* srow = src + static_cast<std::size_t>(mirror_index(a - rh, h)) * w;
    T* drow = dst + static_cast<std::size_t>(a) * pw;
    for (int b = 0; b < pw; ++b) drow[b] = srow[mirror_index(b - rw, w)];
  }
}

// Adjoint of mirror_pad_plane: folds padded-cell gradients back onto their
// source cells (accumulates into gsrc).
template <typename T>
void mirror_pad_adjoint_plane(const T* gpad, int h, int w, int rh, int rw, T* gsrc) {
  const int pw = w + 2 * rw;
  for (int a = 0; a < h + 2 * rh; ++a) {
    T* srow = gsrc + static_cast<std::size_t>(mirror_index(a - rh, h)) * w;
    const T* grow = gpad + static_cast<std::size_t>(a) * pw;
    for (int b = 0; b < pw; ++b) srow[mirror_index(b - rw, w)] += grow[b];
  }
}

}  // namespace internal

/// Ordered record of executed tensor operations, sufficient to replay the
/// forward pass and to run the reverse-mode chain rule. Value ids are node
/// indices; every node produces exactly one output tensor.
template <typename T>
class TapeT {
 public:
  struct Node {
    OpKind kind = OpKind::kLeaf;
    std::vector<int> inputs;
    const ConvParamsT<T>* conv = nullptr;  // kConv2d
    T slope = T(0);                        // kLeakyRelu
    TensorT<T> output;                     // recorded forward value
  };

  TapeT() : serial_(internal::next_tape_serial()) {}

  std::int64_t serial() const { return serial_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  bool empty() const { return nodes_.empty(); }
  const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const Node& last() const {
    if (nodes_.empty()) throw LookupError("tape is empty");
    return nodes_.back();
  }

  /// Registers t as a leaf (constant input) if it is not already a value of
  /// this tape. Returns its value id.
  int ensure_value(const TensorT<T>& t) {
    if (t.tape_serial == serial_ && t.tape_id >= 0 && t.tape_id < size()) return t.tape_id;
    Node leaf;
    leaf.kind = OpKind::kLeaf;
    leaf.output = t;
    nodes_.push_back(std::move(leaf));
    const int id = size() - 1;
    t.tape_serial = serial_;
    t.tape_id = id;
    return id;
  }

  int record(Node node, TensorT<T>& out) {
    nodes_.push_back(std::move(node));
    const int id = size() - 1;
    out.tape_serial = serial_;
    out.tape_id = id;
    nodes_.back().output = out;
    return id;
  }

 private:
  std::int64_t serial_;
  std::vector<Node> nodes_;
};

using Tape = TapeT<float>;

/// Gradients produced by one backward sweep: per-parameter buffers plus the
/// gradient of every value on the tape.
template <typename T>
class GradStoreT {
 public:
  GradStoreT(std::int64_t tape_serial, int value_count)
      : tape_serial_(tape_serial), value_grads_(static_cast<std::size_t>(value_count)) {}

  bool has_conv_grad(const ConvParamsT<T>& p) const {
    return conv_grads_.count(&p) != 0;
  }
  const ConvGradT<T>& conv_grad(const ConvParamsT<T>& p) const {
    auto it = conv_grads_.find(&p);
    if (it == conv_grads_.end()) throw LookupError("no gradient recorded for these parameters");
    return it->second;
  }
  std::size_t conv_grad_count() const { return conv_grads_.size(); }

  /// Gradient of a recorded value. Throws LookupError for tensors that are
  /// not values of the tape this store was built from.
  const TensorT<T>& value_grad(const TensorT<T>& t) const {
    if (t.tape_serial != tape_serial_ || t.tape_id < 0 ||
        t.tape_id >= static_cast<int>(value_grads_.size()))
      throw LookupError("tensor is not on the tape");
    return value_grad_by_id(t.tape_id);
  }
  const TensorT<T>& value_grad_by_id(int id) const {
    if (id < 0 || id >= static_cast<int>(value_grads_.size()))
      throw LookupError("value id is not on the tape");
    const auto& g = value_grads_[static_cast<std::size_t>(id)];
    if (g.numel() == 0) throw LookupError("no gradient flowed to this value");
    return g;
  }

  ConvGradT<T>& conv_grad_mutable(const ConvParamsT<T>* p) {
    auto it = conv_grads_.find(p);
    if (it == conv_grads_.end())
      it = conv_grads_.emplace(p, ConvGradT<T>::zeros_like(*p)).first;
    return it->second;
  }
  TensorT<T>& value_grad_slot(int id) { return value_grads_[static_cast<std::size_t>(id)]; }

 private:
  std::int64_t tape_serial_;
  std::unordered_map<const ConvParamsT<T>*, ConvGradT<T>> conv_grads_;
  std::vector<TensorT<T>> value_grads_;
};

using GradStore = GradStoreT<float>;

// ---------------------------------------------------------------------------
// Forward kernels
// ---------------------------------------------------------------------------

namespace internal {

template <typename T>
void conv2d_forward(const TensorT<T>& x, const ConvParamsT<T>& p, TensorT<T>& out) {
  const int rh = (p.kh - 1) / 2, rw = (p.kw - 1) / 2;
  const int ph = x.h + 2 * rh, pw = x.w + 2 * rw;
  std::vector<T> padded(static_cast<std::size_t>(x.c) * ph * pw);
  for (int ni = 0; ni < x.n; ++ni) {
    for (int ci = 0; ci < x.c; ++ci)
      mirror_pad_plane(x.plane(ni, ci), x.h, x.w, rh, rw,
                       padded.data() + static_cast<std::size_t>(ci) * ph * pw);
    for (int co = 0; co < p.out_channels; ++co) {
      T* oplane = out.plane(ni, co);
      const T b = p.bias[static_cast<std::size_t>(co)];
      for (std::size_t i = 0; i < out.plane_size(); ++i) oplane[i] = b;
      for (int ci = 0; ci < x.c; ++ci) {
        const T* pplane = padded.data() + static_cast<std::size_t>(ci) * ph * pw;
        for (int u = 0; u < p.kh; ++u) {
          for (int v = 0; v < p.kw; ++v) {
            const T wv = p.weight(co, ci, u, v);
            for (int i = 0; i < x.h; ++i) {
              const T* prow = pplane + static_cast<std::size_t>(i + u) * pw + v;
              T* orow = oplane + static_cast<std::size_t>(i) * x.w;
              for (int j = 0; j < x.w; ++j) orow[j] += wv * prow[j];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_backward(const TensorT<T>& x, const ConvParamsT<T>& p, const TensorT<T>& gout,
                     TensorT<T>& gin, ConvGradT<T>& gparams) {
  const int rh = (p.kh - 1) / 2, rw = (p.kw - 1) / 2;
  const int ph = x.h + 2 * rh, pw = x.w + 2 * rw;
  std::vector<T> padded(static_cast<std::size_t>(x.c) * ph * pw);
  std::vector<T> gpadded(static_cast<std::size_t>(x.c) * ph * pw);
  for (int ni = 0; ni < x.n; ++ni) {
    for (int ci = 0; ci < x.c; ++ci)
      mirror_pad_plane(x.plane(ni, ci), x.h, x.w, rh, rw,
                       padded.data() + static_cast<std::size_t>(ci) * ph * pw);
    std::fill(gpadded.begin(), gpadded.end(), T(0));
    for (int co = 0; co < p.out_channels; ++co) {
      const T* gplane = gout.plane(ni, co);
      T gb = T(0);
      for (std::size_t i = 0; i < gout.plane_size(); ++i) gb += gplane[i];
      gparams.bias[static_cast<std::size_t>(co)] += gb;
      for (int ci = 0; ci < x.c; ++ci) {
        const T* pplane = padded.data() + static_cast<std::size_t>(ci) * ph * pw;
        T* gpplane = gpadded.data() + static_cast<std::size_t>(ci) * ph * pw;
        for (int u = 0; u < p.kh; ++u) {
          for (int v = 0; v < p.kw; ++v) {
            const T wv = p.weight(co, ci, u, v);
            T gw = T(0);
            for (int i = 0; i < x.h; ++i) {
              const T* prow = pplane + static_cast<std::size_t>(i + u) * pw + v;
              T* gprow = gpplane + static_cast<std::size_t>(i + u) * pw + v;
              const T* grow = gplane + static_cast<std::size_t>(i) * x.w;
              for (int j = 0; j < x.w; ++j) {
                gw += grow[j] * prow[j];
                gprow[j] += wv * grow[j];
              }
            }
            gparams.weights[((static_cast<std::size_t>(co) * x.c + ci) * p.kh + u) * p.kw + v] +=
                gw;
          }
        }
      }
    }
    for (int ci = 0; ci < x.c; ++ci)
      mirror_pad_adjoint_plane(gpadded.data() + static_cast<std::size_t>(ci) * ph * pw, x.h, x.w,
                               rh, rw, gin.plane(ni, ci));
  }
}

}  // namespace internal

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Same-size cross-correlation with whole-sample symmetric padding, plus bias.
template <typename T>
TensorT<T> conv2d(const TensorT<T>& x, const ConvParamsT<T>& p, TapeT<T>* tape = nullptr) {
  if (x.c != p.in_channels)
    throw ShapeError("conv2d: input has " + std::to_string(x.c) + " channels, parameters expect " +
                     std::to_string(p.in_channels));
  TensorT<T> out(x.n, p.out_channels, x.h, x.w);
  internal::conv2d_forward(x, p, out);
  if (tape) {
    typename TapeT<T>::Node node;
    node.kind = OpKind::kConv2d;
    node.inputs = {tape->ensure_value(x)};
    node.conv = &p;
    tape->record(std::move(node), out);
  }
  return out;
}

/// Elementwise max(x, slope * x). slope must lie in (0, 1).
template <typename T>
TensorT<T> leaky_relu(const TensorT<T>& x, T slope, TapeT<T>* tape = nullptr) {
  if (!(slope > T(0) && slope < T(1))) throw ValueError("leaky_relu slope must be in (0, 1)");
  TensorT<T> out = x;
  out.tape_serial = -1;
  out.tape_id = -1;
  for (auto& v : out.data)
    if (v < T(0)) v *= slope;
  if (tape) {
    typename TapeT<T>::Node node;
    node.kind = OpKind::kLeakyRelu;
    node.inputs = {tape->ensure_value(x)};
    node.slope = slope;
    tape->record(std::move(node), out);
  }
  return out;
}

/// Channel-wise concatenation; blocks appear in argument order.
template <typename T>
TensorT<T> concat_channels(const std::vector<const TensorT<T>*>& xs, TapeT<T>* tape = nullptr) {
  if (xs.empty()) throw ShapeError("concat_channels: no inputs");
  const TensorT<T>& first = *xs.front();
  int total_c = 0;
  for (const TensorT<T>* x : xs) {
    if (x->n != first.n || x->h != first.h || x->w != first.w)
      throw ShapeError("concat_channels: batch/spatial dims must match");
    total_c += x->c;
  }
  TensorT<T> out(first.n, total_c, first.h, first.w);
  for (int ni = 0; ni < first.n; ++ni) {
    int co = 0;
    for (const TensorT<T>* x : xs) {
      for (int ci = 0; ci < x->c; ++ci, ++co) {
        const T* src = x->plane(ni, ci);
        T* dst = out.plane(ni, co);
        std::copy(src, src + x->plane_size(), dst);
      }
    }
  }
  if (tape) {
    typename TapeT<T>::Node node;
    node.kind = OpKind::kConcatChannels;
    for (const TensorT<T>* x : xs) node.inputs.push_back(tape->ensure_value(*x));
    tape->record(std::move(node), out);
  }
  return out;
}

template <typename T>
TensorT<T> concat_channels(const TensorT<T>& a, const TensorT<T>& b, TapeT<T>* tape = nullptr) {
  return concat_channels<T>({&a, &b}, tape);
}

/// Elementwise sum of two same-shape tensors.
template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b, TapeT<T>* tape = nullptr) {
  if (!a.same_shape(b)) throw ShapeError("add: shapes must match");
  TensorT<T> out = a;
  out.tape_serial = -1;
  out.tape_id = -1;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.data[i];
  if (tape) {
    typename TapeT<T>::Node node;
    node.kind = OpKind::kAdd;
    node.inputs = {tape->ensure_value(a), tape->ensure_value(b)};
    tape->record(std::move(node), out);
  }
  return out;
}

/// Per-channel pyramid interpolation (zero insertion + gain-2 Burt filter),
/// doubling both spatial axes. Differentiable; used for the cross-scale
/// hand-off.
template <typename T>
TensorT<T> upsample2x(const TensorT<T>& x, TapeT<T>* tape = nullptr) {
  const auto taps2 = internal::taps_as<T>(burt_kernel(), T(2));
  TensorT<T> out(x.n, x.c, x.h * 2, x.w * 2);
  for (int ni = 0; ni < x.n; ++ni)
    for (int ci = 0; ci < x.c; ++ci)
      internal::expand_plane(x.plane(ni, ci), x.h, x.w, taps2, out.plane(ni, ci));
  if (tape) {
    typename TapeT<T>::Node node;
    node.kind = OpKind::kUpsample2x;
    node.inputs = {tape->ensure_value(x)};
    tape->record(std::move(node), out);
  }
  return out;
}

/// View of channels [c0, c1) as a new tensor.
template <typename T>
TensorT<T> slice_channels(const TensorT<T>& x, int c0, int c1) {
  if (c0 < 0 || c1 > x.c || c0 >= c1) throw ShapeError("slice_channels: bad channel range");
  TensorT<T> out(x.n, c1 - c0, x.h, x.w);
  for (int ni = 0; ni < x.n; ++ni)
    for (int ci = c0; ci < c1; ++ci) {
      const T* src = x.plane(ni, ci);
      std::copy(src, src + x.plane_size(), out.plane(ni, ci - c0));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Reverse pass
// ---------------------------------------------------------------------------

/// Reverse-mode sweep seeded at specific value ids. Gradients accumulate by
/// summation wherever a value fans out.
template <typename T>
GradStoreT<T> backward(const TapeT<T>& tape,
                       const std::vector<std::pair<int, TensorT<T>>>& seeds) {
  if (tape.empty()) throw LookupError("cannot run backward on an empty tape");
  GradStoreT<T> store(tape.serial(), tape.size());

  auto grad_slot = [&](int id) -> TensorT<T>& {
    TensorT<T>& g = store.value_grad_slot(id);
    if (g.numel() == 0) {
      const TensorT<T>& v = tape.node(id).output;
      g = TensorT<T>(v.n, v.c, v.h, v.w, T(0));
    }
    return g;
  };

  for (const auto& [id, seed] : seeds) {
    if (id < 0 || id >= tape.size()) throw LookupError("seed id is not on the tape");
    if (!seed.same_shape(tape.node(id).output))
      throw ShapeError("seed gradient shape does not match the recorded value");
    TensorT<T>& g = grad_slot(id);
    for (std::size_t i = 0; i < g.data.size(); ++i) g.data[i] += seed.data[i];
  }

  for (int id = tape.size() - 1; id >= 0; --id) {
    const auto& node = tape.node(id);
    const TensorT<T>& gout = store.value_grad_slot(id);
    if (gout.numel() == 0) continue;  // no gradient flowed here
    switch (node.kind) {
      case OpKind::kLeaf:
        break;
      case OpKind::kConv2d: {
        const TensorT<T>& x = tape.node(node.inputs[0]).output;
        internal::conv2d_backward(x, *node.conv, gout, grad_slot(node.inputs[0]),
                                  store.conv_grad_mutable(node.conv));
        break;
      }
      case OpKind::kLeakyRelu: {
        const TensorT<T>& x = tape.node(node.inputs[0]).output;
        TensorT<T>& gin = grad_slot(node.inputs[0]);
        for (std::size_t i = 0; i < gin.data.size(); ++i)
          gin.data[i] += (x.data[i] > T(0) ? gout.data[i] : node.slope * gout.data[i]);
        break;
      }
      case OpKind::kConcatChannels: {
        int co = 0;
        for (int input : node.inputs) {
          TensorT<T>& gin = grad_slot(input);
          for (int ni = 0; ni < gin.n; ++ni)
            for (int ci = 0; ci < gin.c; ++ci) {
              const T* src = gout.plane(ni, co + ci);
              T* dst = gin.plane(ni, ci);
              for (std::size_t i = 0; i < gin.plane_size(); ++i) dst[i] += src[i];
            }
          co += gin.c;
        }
        break;
      }
      case OpKind::kAdd: {
        for (int input : node.inputs) {
          TensorT<T>& gin = grad_slot(input);
          for (std::size_t i = 0; i < gin.data.size(); ++i) gin.data[i] += gout.data[i];
        }
        break;
      }
      case OpKind::kUpsample2x: {
        const TensorT<T>& x = tape.node(node.inputs[0]).output;
        TensorT<T>& gin = grad_slot(node.inputs[0]);
        const auto taps2 = internal::taps_as<T>(burt_kernel(), T(2));
        for (int ni = 0; ni < x.n; ++ni)
          for (int ci = 0; ci < x.c; ++ci)
            internal::expand_plane_adjoint(gout.plane(ni, ci), x.h, x.w, taps2,
                                           gin.plane(ni, ci));
        break;
      }
    }
  }
  return store;
}

/// Reverse-mode sweep seeded at the tape's final value.
template <typename T>
GradStoreT<T> backward(const TapeT<T>& tape, const TensorT<T>& loss_grad) {
  if (tape.empty()) throw LookupError("cannot run backward on an empty tape");
  return backward(tape, {{tape.size() - 1, loss_grad}});
}

/// Re-executes every recorded op from its recorded inputs and checks the
/// recomputed outputs bitwise against the recorded ones.
template <typename T>
bool replay_matches(const TapeT<T>& tape) {
  for (int id = 0; id < tape.size(); ++id) {
    const auto& node = tape.node(id);
    TensorT<T> redo;
    switch (node.kind) {
      case OpKind::kLeaf:
        continue;
      case OpKind::kConv2d:
        redo = conv2d(tape.node(node.inputs[0]).output, *node.conv);
        break;
      case OpKind::kLeakyRelu:
        redo = leaky_relu(tape.node(node.inputs[0]).output, node.slope);
        break;
      case OpKind::kConcatChannels: {
        std::vector<const TensorT<T>*> xs;
        for (int input : node.inputs) xs.push_back(&tape.node(input).output);
        redo = concat_channels(xs);
        break;
      }
      case OpKind::kAdd:
        redo = add(tape.node(node.inputs[0]).output, tape.node(node.inputs[1]).output);
        break;
      case OpKind::kUpsample2x:
        redo = upsample2x(tape.node(node.inputs[0]).output);
        break;
    }
    if (redo.data != node.output.data) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

/// Uniform Xavier/Glorot initialization: weights in +-sqrt(6/(fan_in+fan_out))
/// with fan counts over the full receptive field, biases zero.
template <typename T>
ConvParamsT<T> xavier_init(int out_channels, int in_channels, int kh, int kw, Rng& rng) {
  ConvParamsT<T> p(out_channels, in_channels, kh, kw);
  const double fan_in = static_cast<double>(in_channels) * kh * kw;
  const double fan_out = static_cast<double>(out_channels) * kh * kw;
  const T limit = static_cast<T>(std::sqrt(6.0 / (fan_in + fan_out)));
  for (auto& w : p.weights) w = static_cast<T>(rng.uniform(-1.0f, 1.0f)) * limit;
  return p;
}

}  // namespace pyrfuse
