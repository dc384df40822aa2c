#pragma once

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "pyrfuse/errors.hpp"
#include "pyrfuse/image.hpp"

namespace pyrfuse {

/// Symmetric, normalized 1-D low-pass filter (odd tap count).
struct Kernel1D {
  std::vector<float> taps;

  explicit Kernel1D(std::vector<float> t) : taps(std::move(t)) {
    if (taps.empty() || taps.size() % 2 == 0)
      throw ValueError("kernel must have an odd number of taps");
    double sum = 0.0;
    for (float v : taps) sum += v;
    if (std::abs(sum - 1.0) > 1e-7) throw ValueError("kernel taps must sum to 1");
    for (std::size_t i = 0; i < taps.size(); ++i)
      if (taps[i] != taps[taps.size() - 1 - i]) throw ValueError("kernel must be symmetric");
  }

  int radius() const { return (static_cast<int>(taps.size()) - 1) / 2; }
};

/// The Burt-Adelson 5-tap binomial-like filter, (1/16)[1 4 6 4 1].
inline const Kernel1D& burt_kernel() {
  static const Kernel1D k({1.0f / 16, 4.0f / 16, 6.0f / 16, 4.0f / 16, 1.0f / 16});
  return k;
}

/// Whole-sample symmetric extension: the edge sample is not repeated.
/// mirror_index(-1, n) == 1, mirror_index(n, n) == n - 2.
inline int mirror_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = std::abs(i) % period;
  return i < n ? i : period - i;
}

namespace internal {

template <typename T>
std::vector<T> taps_as(const Kernel1D& k, T gain = T(1)) {
  std::vector<T> out(k.taps.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<T>(k.taps[i]) * gain;
  return out;
}

// dst[i][j] = sum_t taps[t] * src[i][mirror(j + t - r)]
template <typename T>
void correlate_rows(const T* src, int h, int w, const std::vector<T>& taps, T* dst) {
  const int r = static_cast<int>(taps.size() - 1) / 2;
  for (int i = 0; i < h; ++i) {
    const T* srow = src + static_cast<std::size_t>(i) * w;
    T* drow = dst + static_cast<std::size_t>(i) * w;
    for (int j = 0; j < w; ++j) {
      T acc = T(0);
      for (int t = 0; t < static_cast<int>(taps.size()); ++t)
        acc += taps[t] * srow[mirror_index(j + t - r, w)];
      drow[j] = acc;
    }
  }
}

// dst[i][j] = sum_t taps[t] * src[mirror(i + t - r)][j]
template <typename T>
void correlate_cols(const T* src, int h, int w, const std::vector<T>& taps, T* dst) {
  const int r = static_cast<int>(taps.size() - 1) / 2;
  for (int i = 0; i < h; ++i) {
    T* drow = dst + static_cast<std::size_t>(i) * w;
    for (int j = 0; j < w; ++j) drow[j] = T(0);
    for (int t = 0; t < static_cast<int>(taps.size()); ++t) {
      const T* srow = src + static_cast<std::size_t>(mirror_index(i + t - r, h)) * w;
      const T tap = taps[t];
      for (int j = 0; j < w; ++j) drow[j] += tap * srow[j];
    }
  }
}

// Adjoint of correlate_rows: gin[i][mirror(j + t - r)] += taps[t] * gout[i][j]
template <typename T>
void correlate_rows_adjoint(const T* gout, int h, int w, const std::vector<T>& taps, T* gin) {
  const int r = static_cast<int>(taps.size() - 1) / 2;
  for (int i = 0; i < h; ++i) {
    const T* grow = gout + static_cast<std::size_t>(i) * w;
    T* irow = gin + static_cast<std::size_t>(i) * w;
    for (int j = 0; j < w; ++j) {
      const T g = grow[j];
      for (int t = 0; t < static_cast<int>(taps.size()); ++t)
        irow[mirror_index(j + t - r, w)] += taps[t] * g;
    }
  }
}

// Adjoint of correlate_cols: gin[mirror(i + t - r)][j] += taps[t] * gout[i][j]
template <typename T>
void correlate_cols_adjoint(const T* gout, int h, int w, const std::vector<T>& taps, T* gin) {
  const int r = static_cast<int>(taps.size() - 1) / 2;
  for (int i = 0; i < h; ++i) {
    const T* grow = gout + static_cast<std::size_t>(i) * w;
    for (int t = 0; t < static_cast<int>(taps.size()); ++t) {
      T* irow = gin + static_cast<std::size_t>(mirror_index(i + t - r, h)) * w;
      const T tap = taps[t];
      for (int j = 0; j < w; ++j) irow[j] += tap * grow[j];
    }
  }
}

// Low-pass with the separable kernel, then keep even-indexed samples.
// dst is (h/2) x (w/2); h and w must be even.
template <typename T>
void reduce_plane(const T* src, int h, int w, const std::vector<T>& taps, T* dst) {
  const int r = static_cast<int>(taps.size() - 1) / 2;
  std::vector<T> rowf(static_cast<std::size_t>(h) * w);
  correlate_rows(src, h, w, taps, rowf.data());
  const int oh = h / 2, ow = w / 2;
  for (int io = 0; io < oh; ++io) {
    T* drow = dst + static_cast<std::size_t>(io) * ow;
    for (int jo = 0; jo < ow; ++jo) drow[jo] = T(0);
    for (int t = 0; t < static_cast<int>(taps.size()); ++t) {
      const T* srow = rowf.data() + static_cast<std::size_t>(mirror_index(2 * io + t - r, h)) * w;
      const T tap = taps[t];
      for (int jo = 0; jo < ow; ++jo) drow[jo] += tap * srow[2 * jo];
    }
  }
}

// Zero-insertion upsample followed by the gain-compensated (2h) separable
// filter. dst is (2h) x (2w). taps2 must already carry the factor-2 gain.
template <typename T>
void expand_plane(const T* src, int h, int w, const std::vector<T>& taps2, T* dst) {
  const int oh = 2 * h, ow = 2 * w;
  std::vector<T> z(static_cast<std::size_t>(oh) * ow, T(0));
  for (int i = 0; i < h; ++i) {
    const T* srow = src + static_cast<std::size_t>(i) * w;
    T* zrow = z.data() + static_cast<std::size_t>(2 * i) * ow;
    for (int j = 0; j < w; ++j) zrow[2 * j] = srow[j];
  }
  std::vector<T> tmp(static_cast<std::size_t>(oh) * ow);
  correlate_rows(z.data(), oh, ow, taps2, tmp.data());
  correlate_cols(tmp.data(), oh, ow, taps2, dst);
}

// Exact adjoint of expand_plane. gout is (2h) x (2w), gin is h x w (accumulated).
template <typename T>
void expand_plane_adjoint(const T* gout, int h, int w, const std::vector<T>& taps2, T* gin) {
  const int oh = 2 * h, ow = 2 * w;
  std::vector<T> gcols(static_cast<std::size_t>(oh) * ow, T(0));
  correlate_cols_adjoint(gout, oh, ow, taps2, gcols.data());
  std::vector<T> gz(static_cast<std::size_t>(oh) * ow, T(0));
  correlate_rows_adjoint(gcols.data(), oh, ow, taps2, gz.data());
  for (int i = 0; i < h; ++i) {
    const T* zrow = gz.data() + static_cast<std::size_t>(2 * i) * ow;
    T* grow = gin + static_cast<std::size_t>(i) * w;
    for (int j = 0; j < w; ++j) grow[j] += zrow[2 * j];
  }
}

}  // namespace internal

/// Low-pass filter and decimate by 2. Width and height must be even.
template <typename T>
ImageT<T> reduce(const ImageT<T>& img, const Kernel1D& kernel = burt_kernel()) {
  if (img.width % 2 != 0 || img.height % 2 != 0)
    throw ShapeError("reduce requires even width and height, got " + std::to_string(img.width) +
                     "x" + std::to_string(img.height));
  const auto taps = internal::taps_as<T>(kernel);
  ImageT<T> out(img.bands, img.height / 2, img.width / 2);
  for (int b = 0; b < img.bands; ++b)
    internal::reduce_plane(img.band(b), img.height, img.width, taps, out.band(b));
  return out;
}

/// Upsample by 2 via zero insertion plus the gain-2 interpolation filter.
template <typename T>
ImageT<T> expand(const ImageT<T>& img, const Kernel1D& kernel = burt_kernel()) {
  const auto taps2 = internal::taps_as<T>(kernel, T(2));
  ImageT<T> out(img.bands, img.height * 2, img.width * 2);
  for (int b = 0; b < img.bands; ++b)
    internal::expand_plane(img.band(b), img.height, img.width, taps2, out.band(b));
  return out;
}

/// High-frequency residual: prev - expand(reduced).
template <typename T>
ImageT<T> detail(const ImageT<T>& prev, const ImageT<T>& reduced,
                 const Kernel1D& kernel = burt_kernel()) {
  if (reduced.bands != prev.bands || reduced.height * 2 != prev.height ||
      reduced.width * 2 != prev.width)
    throw ShapeError("detail: reduced image must be half the size of prev");
  ImageT<T> up = expand(reduced, kernel);
  ImageT<T> out = prev;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= up.data[i];
  return out;
}

/// Laplacian pyramid of one image: lowpass[0] is the input, lowpass[j] the
/// j-th decimated approximation, and detail level j the residual at the
/// resolution of lowpass[j-1]. Synthesis is exact by construction.
template <typename T>
struct PyramidStackT {
  std::vector<ImageT<T>> lowpass;  // levels 0..J
  std::vector<ImageT<T>> details;  // levels 1..J stored at index j-1

  int levels() const { return static_cast<int>(details.size()); }

  /// Detail at level j (1-based, matching the decomposition recurrence).
  const ImageT<T>& detail_level(int j) const {
    if (j < 1 || j > levels()) throw ShapeError("detail level out of range");
    return details[static_cast<std::size_t>(j - 1)];
  }
};

using PyramidStack = PyramidStackT<float>;

template <typename T>
PyramidStackT<T> decompose(const ImageT<T>& img, int levels,
                           const Kernel1D& kernel = burt_kernel()) {
  if (levels < 0) throw ValueError("level count must be >= 0");
  const int div = 1 << levels;
  if (img.width % div != 0 || img.height % div != 0)
    throw ShapeError("decompose: dimensions must be divisible by 2^levels");
  PyramidStackT<T> stack;
  stack.lowpass.push_back(img);
  for (int j = 1; j <= levels; ++j) {
    ImageT<T> next = reduce(stack.lowpass.back(), kernel);
    stack.details.push_back(detail(stack.lowpass.back(), next, kernel));
    stack.lowpass.push_back(std::move(next));
  }
  return stack;
}

/// Inverse of decompose: iterated expand + detail addition.
template <typename T>
ImageT<T> reconstruct(const PyramidStackT<T>& stack, const Kernel1D& kernel = burt_kernel()) {
  if (stack.lowpass.empty()) throw ShapeError("empty pyramid");
  ImageT<T> img = stack.lowpass.back();
  for (int j = stack.levels(); j >= 1; --j) {
    ImageT<T> up = expand(img, kernel);
    const ImageT<T>& det = stack.detail_level(j);
    for (std::size_t i = 0; i < up.data.size(); ++i) up.data[i] += det.data[i];
    img = std::move(up);
  }
  return img;
}

/// Per-scale targets for the multi-scale loss: the low-pass ladder of the
/// ground truth, finest first. Entry j is the ground truth decimated j times,
/// i.e. the reference for the fusion stage whose output lives at that
/// resolution.
template <typename T>
std::vector<ImageT<T>> gt_scale_approx(const ImageT<T>& gt, int levels,
                                       const Kernel1D& kernel = burt_kernel()) {
  const int div = 1 << levels;
  if (gt.width % div != 0 || gt.height % div != 0)
    throw ShapeError("gt_scale_approx: dimensions must be divisible by 2^levels");
  std::vector<ImageT<T>> ladder;
  ladder.push_back(gt);
  for (int j = 1; j <= levels; ++j) ladder.push_back(reduce(ladder.back(), kernel));
  return ladder;
}

}  // namespace pyrfuse
