#pragma once

#include <vector>

#include "pyrfuse/fusenet.hpp"
#include "pyrfuse/pyramid.hpp"
#include "pyrfuse/tensor.hpp"

namespace pyrfuse {

/// Outputs of one coarse-to-fine fusion run. Stage s (1-based) lives at
/// pan resolution / 2^(levels - s); the last stage is the fused product.
template <typename T>
struct FusionTraceT {
  std::vector<ImageT<T>> per_stage_outputs;
  ImageT<T> final;
  std::vector<int> stage_ids;  // tape value ids of each stage output; -1 when untaped
};

using FusionTrace = FusionTraceT<float>;

/// Stacks a single-band detail plane in channel 0 with the multispectral
/// approximation in channels 1..B, the per-stage network input.
template <typename T>
TensorT<T> build_stack(const TensorT<T>& pan_detail, const TensorT<T>& ms_approx,
                       TapeT<T>* tape = nullptr) {
  if (pan_detail.c != 1) throw ShapeError("build_stack: pan detail must be single-channel");
  if (pan_detail.h != ms_approx.h || pan_detail.w != ms_approx.w ||
      pan_detail.n != ms_approx.n)
    throw ShapeError("build_stack: detail and approximation dimensions must match");
  return concat_channels(pan_detail, ms_approx, tape);
}

/// Plain pyramid interpolation of the multispectral input: the fused output
/// of an all-zero network, and the baseline the network must beat.
template <typename T>
ImageT<T> pyramid_interpolate(const ImageT<T>& ms, int levels,
                              const Kernel1D& kernel = burt_kernel()) {
  if (levels < 1) throw ValueError("levels must be >= 1");
  ImageT<T> out = expand(ms, kernel);
  for (int s = 1; s < levels; ++s) out = expand(out, kernel);
  return out;
}

/// Recursive cross-scale fusion. The panchromatic image is decomposed into
/// `levels` pyramid levels; at each stage the detail band at the current
/// resolution is stacked with the running multispectral approximation, passed
/// through the network, and added back as a residual. The same parameter
/// object serves every stage.
template <typename T>
FusionTraceT<T> fuse(const ImageT<T>& pan, const ImageT<T>& ms, const FuseNetParamsT<T>& params,
                     int levels = 2, TapeT<T>* tape = nullptr,
                     BlockChaining chaining = BlockChaining::kResidual) {
  if (levels < 1) throw ValueError("levels must be >= 1");
  if (pan.bands != 1) throw ShapeError("fuse: pan must be single-band");
  if (ms.bands != params.bands)
    throw ShapeError("fuse: parameters expect " + std::to_string(params.bands) +
                     " bands, multispectral input has " + std::to_string(ms.bands));
  const int ratio = 1 << levels;
  if (pan.width != ms.width * ratio || pan.height != ms.height * ratio)
    throw ShapeError("fuse: pan dimensions must be 2^levels times the multispectral dimensions");
  if (pan.width % ratio != 0 || pan.height % ratio != 0)
    throw ShapeError("fuse: pan dimensions must be divisible by 2^levels");

  PyramidStackT<T> pan_pyr = decompose(pan, levels);

  FusionTraceT<T> trace;
  TensorT<T> approx = TensorT<T>::from_image(expand(ms));
  for (int s = 1; s <= levels; ++s) {
    const ImageT<T>& pan_detail = pan_pyr.detail_level(levels - s + 1);
    TensorT<T> detail_t = TensorT<T>::from_image(pan_detail);
    TensorT<T> stack = build_stack(detail_t, approx, tape);
    TensorT<T> residual = fusenet_forward(stack, params, tape, chaining);
    TensorT<T> out = add(residual, approx, tape);
    trace.per_stage_outputs.push_back(out.to_image());
    trace.stage_ids.push_back(out.tape_id);
    if (s < levels) approx = upsample2x(out, tape);
  }
  trace.final = trace.per_stage_outputs.back();
  return trace;
}

}  // namespace pyrfuse
