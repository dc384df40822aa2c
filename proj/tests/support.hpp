// Shared test helpers: independent oracles (direct convolution, naive window
// statistics), random data, and synthetic scene generation. Oracles here stay
// deliberately naive; they must not share code paths with the library.
#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "pyrfuse/image.hpp"
#include "pyrfuse/rng.hpp"
#include "pyrfuse/tensor.hpp"
#include "pyrfuse/training.hpp"

namespace testsupport {

using pyrfuse::Image;
using pyrfuse::ImageT;
using pyrfuse::Rng;
using pyrfuse::TensorT;

using Tape64 = pyrfuse::TapeT<double>;

// Whole-sample reflection, written as iterated folding rather than the
// modular form the library uses.
inline int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

inline Image random_image(Rng& rng, int bands, int h, int w, float lo = 0.0f, float hi = 1.0f) {
  Image img(bands, h, w);
  for (auto& v : img.data) v = rng.uniform(lo, hi);
  return img;
}

template <typename T>
TensorT<T> random_tensor(Rng& rng, int n, int c, int h, int w, float lo = -1.0f,
                         float hi = 1.0f) {
  TensorT<T> t(n, c, h, w);
  for (auto& v : t.data) v = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

inline double max_abs_diff(const std::vector<float>& a, const std::vector<float>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i])));
  return m;
}

// --------------------------------------------------------------------------
// Direct 2-D convolution oracles (outer-product kernel, no separability).
// --------------------------------------------------------------------------

// Full-resolution correlation of one plane with the outer product of a 1-D
// tap vector, symmetric extension per axis. Double precision throughout.
inline std::vector<double> oracle_filter2d(const std::vector<double>& src, int h, int w,
                                           const std::vector<double>& taps) {
  const int r = static_cast<int>(taps.size() - 1) / 2;
  std::vector<double> out(static_cast<std::size_t>(h) * w, 0.0);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      double acc = 0.0;
      for (int u = 0; u < static_cast<int>(taps.size()); ++u)
        for (int v = 0; v < static_cast<int>(taps.size()); ++v)
          acc += taps[u] * taps[v] *
                 src[static_cast<std::size_t>(reflect(i + u - r, h)) * w + reflect(j + v - r, w)];
      out[static_cast<std::size_t>(i) * w + j] = acc;
    }
  return out;
}

inline std::vector<double> plane_as_double(const Image& img, int band) {
  const float* p = img.band(band);
  return std::vector<double>(p, p + img.plane_size());
}

inline std::vector<double> burt_taps_double(double gain = 1.0) {
  return {gain * 1 / 16.0, gain * 4 / 16.0, gain * 6 / 16.0, gain * 4 / 16.0, gain * 1 / 16.0};
}

// reduce = dense filter then keep even samples.
inline std::vector<double> oracle_reduce_plane(const std::vector<double>& src, int h, int w) {
  const auto full = oracle_filter2d(src, h, w, burt_taps_double());
  std::vector<double> out(static_cast<std::size_t>(h / 2) * (w / 2));
  for (int i = 0; i < h / 2; ++i)
    for (int j = 0; j < w / 2; ++j)
      out[static_cast<std::size_t>(i) * (w / 2) + j] =
          full[static_cast<std::size_t>(2 * i) * w + 2 * j];
  return out;
}

// expand = zero insertion then dense filtering with the gain-2 taps.
inline std::vector<double> oracle_expand_plane(const std::vector<double>& src, int h, int w) {
  const int oh = 2 * h, ow = 2 * w;
  std::vector<double> z(static_cast<std::size_t>(oh) * ow, 0.0);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      z[static_cast<std::size_t>(2 * i) * ow + 2 * j] = src[static_cast<std::size_t>(i) * w + j];
  return oracle_filter2d(z, oh, ow, burt_taps_double(2.0));
}

// Naive same-size cross-correlation for tensors: direct mirror indexing,
// no padded buffer, double accumulation.
template <typename T>
TensorT<double> oracle_conv2d(const TensorT<T>& x, const pyrfuse::ConvParamsT<T>& p) {
  const int rh = (p.kh - 1) / 2, rw = (p.kw - 1) / 2;
  TensorT<double> out(x.n, p.out_channels, x.h, x.w);
  for (int ni = 0; ni < x.n; ++ni)
    for (int co = 0; co < p.out_channels; ++co)
      for (int i = 0; i < x.h; ++i)
        for (int j = 0; j < x.w; ++j) {
          double acc = static_cast<double>(p.bias[static_cast<std::size_t>(co)]);
          for (int ci = 0; ci < x.c; ++ci)
            for (int u = 0; u < p.kh; ++u)
              for (int v = 0; v < p.kw; ++v)
                acc += static_cast<double>(p.weight(co, ci, u, v)) *
                       static_cast<double>(
                           x.plane(ni, ci)[static_cast<std::size_t>(reflect(i + u - rh, x.h)) *
                                               x.w +
                                           reflect(j + v - rw, x.w)]);
          out.plane(ni, co)[static_cast<std::size_t>(i) * x.w + j] = acc;
        }
  return out;
}

// --------------------------------------------------------------------------
// Naive window-statistics oracle for the universal quality index.
// --------------------------------------------------------------------------

// Double loop over windows with centered two-pass moments. Mirrors the
// documented convention: flat windows skipped, zero-mean windows keep the
// correlation-contrast part.
inline double oracle_q_index(const Image& x, const Image& y, int window) {
  const int h = x.height, w = x.width;
  const float* xa = x.band(0);
  const float* ya = y.band(0);
  double acc = 0.0;
  long used = 0;
  for (int i0 = 0; i0 + window <= h; ++i0)
    for (int j0 = 0; j0 + window <= w; ++j0) {
      const double n = static_cast<double>(window) * window;
      double mx = 0.0, my = 0.0;
      for (int i = 0; i < window; ++i)
        for (int j = 0; j < window; ++j) {
          mx += xa[static_cast<std::size_t>(i0 + i) * w + (j0 + j)];
          my += ya[static_cast<std::size_t>(i0 + i) * w + (j0 + j)];
        }
      mx /= n;
      my /= n;
      double vx = 0.0, vy = 0.0, cxy = 0.0;
      for (int i = 0; i < window; ++i)
        for (int j = 0; j < window; ++j) {
          const double dx = xa[static_cast<std::size_t>(i0 + i) * w + (j0 + j)] - mx;
          const double dy = ya[static_cast<std::size_t>(i0 + i) * w + (j0 + j)] - my;
          vx += dx * dx;
          vy += dy * dy;
          cxy += dx * dy;
        }
      vx /= n;
      vy /= n;
      cxy /= n;
      const double den1 = vx + vy;
      if (den1 <= 0.0) continue;
      const double den2 = mx * mx + my * my;
      acc += den2 == 0.0 ? 2.0 * cxy / den1 : 4.0 * cxy * mx * my / (den1 * den2);
      ++used;
    }
  return used == 0 ? 0.0 : acc / static_cast<double>(used);
}

// --------------------------------------------------------------------------
// Finite differences
// --------------------------------------------------------------------------

// Central difference of eval() with respect to one scalar slot.
template <typename T, typename F>
double central_diff(T* slot, double h, F&& eval) {
  const T orig = *slot;
  *slot = static_cast<T>(static_cast<double>(orig) + h);
  const double f_plus = eval();
  *slot = static_cast<T>(static_cast<double>(orig) - h);
  const double f_minus = eval();
  *slot = orig;
  return (f_plus - f_minus) / (2.0 * h);
}

inline double rel_error(double a, double b, double floor = 1e-12) {
  const double scale = std::max(floor, std::abs(a) + std::abs(b));
  return std::abs(a - b) / scale;
}

// --------------------------------------------------------------------------
// Synthetic scenes: procedural texture with band-correlated colorization.
// --------------------------------------------------------------------------

// Returns a (pan, ms) pair at 4:1 resolution. Every band is an affine recolor
// of one shared texture plus a slow per-band field, so pan detail genuinely
// predicts band detail. Values stay within [0, 1].
inline std::pair<Image, Image> synthetic_scene(int pan_size, int bands, std::uint32_t seed) {
  Rng rng(seed);
  const int n = pan_size;

  std::vector<float> texture(static_cast<std::size_t>(n) * n, 0.0f);
  struct Wave {
    float fx, fy, phase, amp;
  };
  std::vector<Wave> waves;
  for (int k = 0; k < 8; ++k)
    waves.push_back({rng.uniform(2.0f, 14.0f), rng.uniform(2.0f, 14.0f),
                     rng.uniform(0.0f, 6.2831853f), rng.uniform(0.4f, 1.0f)});
  float peak = 1e-6f;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      float t = 0.0f;
      for (const Wave& wv : waves)
        t += wv.amp * std::sin(6.2831853f * (wv.fx * x + wv.fy * y) / n + wv.phase);
      texture[static_cast<std::size_t>(y) * n + x] = t;
      peak = std::max(peak, std::abs(t));
    }
  for (auto& t : texture) t /= peak;

  Image hr(bands, n, n);
  for (int b = 0; b < bands; ++b) {
    const float alpha = rng.uniform(0.5f, 1.0f);
    const float fu = rng.uniform(0.5f, 1.5f), fv = rng.uniform(0.5f, 1.5f);
    const float phase = rng.uniform(0.0f, 6.2831853f);
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        const float slow = std::sin(6.2831853f * (fu * x + fv * y) / n + phase);
        const float t = texture[static_cast<std::size_t>(y) * n + x];
        hr.at(b, y, x) = 0.5f + 0.35f * (alpha * t + 0.3f * slow) / 1.3f;
      }
  }

  Image pan(1, n, n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      float acc = 0.0f;
      for (int b = 0; b < bands; ++b) acc += hr.at(b, y, x);
      pan.at(0, y, x) = acc / static_cast<float>(bands);
    }

  Image ms = pyrfuse::wald_degrade(hr, 4);
  return {std::move(pan), std::move(ms)};
}

}  // namespace testsupport
