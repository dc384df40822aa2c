#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "pyrfuse/fusion.hpp"
#include "pyrfuse/raster.hpp"
#include "pyrfuse/rng.hpp"

namespace pyrfuse {

struct TrainConfig {
  float learning_rate = 1e-3f;
  int batch_size = 20;
  int patch_size = 192;  // at the degraded-pan (ground truth) scale
  int iterations = 1000;
  std::uint64_t seed = 0;
  int K = 4;  // shared-block applications
  int J = 2;  // pyramid stages
  float adam_beta1 = 0.9f;
  float adam_beta2 = 0.999f;
  float adam_eps = 1e-8f;

  void validate() const;
};

/// Parses a flat "key = value" config file. Keys must match TrainConfig field
/// names exactly; anything else is an error. Blank lines and lines starting
/// with '#' are skipped.
TrainConfig parse_config(const std::filesystem::path& path);

/// log2(factor) pyramid reductions; factor must be a power of two >= 2 and
/// divide both dimensions.
template <typename T>
ImageT<T> wald_degrade(const ImageT<T>& img, int factor) {
  if (factor < 2 || (factor & (factor - 1)) != 0)
    throw ValueError("degradation factor must be a power of two >= 2");
  if (img.width % factor != 0 || img.height % factor != 0)
    throw ShapeError("wald_degrade: dimensions must be divisible by the factor");
  ImageT<T> out = img;
  for (int f = factor; f > 1; f /= 2) out = reduce(out);
  return out;
}

/// One training example under the reduced-scale protocol: the degraded pan,
/// the doubly degraded multispectral patch, and the original multispectral
/// patch serving as ground truth.
struct TrainSample {
  Image pan_lr;  // 1 band, patch x patch
  Image ms_lr;   // B bands, patch/4 x patch/4
  Image gt;      // B bands, patch x patch
};

/// Draws aligned random crops from one degraded scene. Crop origins at the
/// ground-truth scale are multiples of 4 so the quarter-scale multispectral
/// crop lands on whole pixels.
class SampleStream {
 public:
  SampleStream(const Image& pan, const Image& ms, const TrainConfig& cfg);

  TrainSample next(Rng& rng) const;
  int bands() const { return gt_.bands; }

 private:
  Image pan_lr_, ms_lr_, gt_;
  int patch_;
};

/// Multi-scale loss value plus the gradient seeds of each recorded stage
/// output (d loss / d stage output).
template <typename T>
struct LossResultT {
  double value = 0.0;
  std::vector<std::pair<int, TensorT<T>>> seeds;
};

/// Sum over stages of the per-stage mean squared error against the
/// ground-truth low-pass ladder. Stage s (1-based) is compared with the
/// ladder entry at its own resolution.
template <typename T>
LossResultT<T> multiscale_loss(const FusionTraceT<T>& trace, const ImageT<T>& gt) {
  const int stages = static_cast<int>(trace.per_stage_outputs.size());
  if (stages == 0) throw ShapeError("multiscale_loss: empty trace");
  if (!trace.final.same_shape(gt))
    throw ShapeError("multiscale_loss: final output and ground truth must share shape");
  // ladder[j] is gt reduced j times; stage s sits at ladder index (stages - s).
  std::vector<ImageT<T>> ladder = gt_scale_approx(gt, stages - 1);
  LossResultT<T> result;
  for (int s = 1; s <= stages; ++s) {
    const ImageT<T>& out = trace.per_stage_outputs[static_cast<std::size_t>(s - 1)];
    const ImageT<T>& target = ladder[static_cast<std::size_t>(stages - s)];
    if (!out.same_shape(target))
      throw ShapeError("multiscale_loss: stage output does not match its target resolution");
    const double inv_n = 1.0 / static_cast<double>(out.size());
    double acc = 0.0;
    TensorT<T> seed(1, out.bands, out.height, out.width);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
      const double d = static_cast<double>(out.data[i]) - static_cast<double>(target.data[i]);
      acc += d * d;
      seed.data[i] = static_cast<T>(2.0 * d * inv_n);
    }
    result.value += acc * inv_n;
    result.seeds.emplace_back(trace.stage_ids[static_cast<std::size_t>(s - 1)], std::move(seed));
  }
  return result;
}

/// Gradients of the full parameter set in fixed layer order.
template <typename T>
struct FuseNetGradsT {
  std::vector<ConvGradT<T>> layers;  // head, bc1, bc2, bfuse, gfuse, tail

  static FuseNetGradsT zeros_like(const FuseNetParamsT<T>& p) {
    FuseNetGradsT g;
    for (const ConvParamsT<T>* layer : p.layers())
      g.layers.push_back(ConvGradT<T>::zeros_like(*layer));
    return g;
  }
  void accumulate(const FuseNetGradsT& o) {
    for (std::size_t i = 0; i < layers.size(); ++i) layers[i].accumulate(o.layers[i]);
  }
  void scale(T s) {
    for (auto& l : layers) l.scale(s);
  }
};

using FuseNetGrads = FuseNetGradsT<float>;

/// Pulls the six per-layer gradients out of a backward sweep.
template <typename T>
FuseNetGradsT<T> collect_grads(const FuseNetParamsT<T>& params, const GradStoreT<T>& store) {
  FuseNetGradsT<T> g;
  for (const ConvParamsT<T>* layer : params.layers()) {
    if (store.has_conv_grad(*layer))
      g.layers.push_back(store.conv_grad(*layer));
    else
      g.layers.push_back(ConvGradT<T>::zeros_like(*layer));
  }
  return g;
}

/// Bias-corrected first/second moment accumulators, one pair per layer array.
struct AdamState {
  struct Slot {
    std::vector<float> m, v;
  };
  std::vector<Slot> weight_slots, bias_slots;
  long t = 0;

  static AdamState init_for(const FuseNetParams& params);
};

/// One bias-corrected step; t advances by exactly 1.
void adam_step(FuseNetParams& params, const FuseNetGrads& grads, AdamState& state,
               const TrainConfig& cfg);

/// In-memory training core: Xavier init, then iterations of sample -> fuse ->
/// loss -> backward -> adam over the supplied (pan, ms) scenes. Returns the
/// trained parameters and the per-iteration mean batch loss.
struct TrainResult {
  FuseNetParams params;
  std::vector<double> loss_log;
};
TrainResult train_on_images(const std::vector<std::pair<Image, Image>>& scenes,
                            const TrainConfig& cfg);

/// File-based entry point: loads MBR pairs, crops each to the largest size
/// the protocol can consume, trains, and writes the checkpoint and the
/// "iteration,loss" CSV log.
void train(const std::vector<std::pair<std::filesystem::path, std::filesystem::path>>& dataset,
           const TrainConfig& cfg, const std::filesystem::path& checkpoint_path,
           const std::filesystem::path& loss_log_path);

/// Largest top-left crop whose dimensions are multiples of `multiple`.
Image crop_to_multiple(const Image& img, int multiple);

/// Serializes a loss log as "iteration,loss" CSV (header row always present).
std::string loss_log_csv(const std::vector<double>& losses);

}  // namespace pyrfuse
