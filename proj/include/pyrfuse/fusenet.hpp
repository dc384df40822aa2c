#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "pyrfuse/tensor.hpp"

namespace pyrfuse {

/// Feature width of every hidden layer.
inline constexpr int kFeatureChannels = 48;

/// Negative slope of the leaky rectifier used throughout the network.
inline constexpr float kLeakyReluSlope = 0.2f;

/// How block k >= 2 receives its input. kResidual chains each block on the
/// previous block's output plus the shallow skip; kAsPrinted feeds every
/// block the accumulated shallow features only, leaving block outputs to the
/// global concatenation alone.
enum class BlockChaining { kResidual, kAsPrinted };

/// Complete learnable state. One local-fusion block parameter set exists and
/// is applied at every block position; the same object also serves every
/// pyramid scale.
template <typename T>
struct FuseNetParamsT {
  int bands = 0;   // B: multispectral band count (input stack carries B+1)
  int blocks = 0;  // K: number of applications of the shared block

  ConvParamsT<T> head;         // 5x5, B+1 -> 48
  ConvParamsT<T> block_conv1;  // 5x5, 48 -> 48
  ConvParamsT<T> block_conv2;  // 5x5, 48 -> 48
  ConvParamsT<T> block_fuse;   // 1x1, 3*48 -> 48, linear
  ConvParamsT<T> global_fuse;  // 1x1, K*48 -> 48, linear
  ConvParamsT<T> tail;         // 5x5, 48 -> B, linear

  FuseNetParamsT() = default;

  static FuseNetParamsT zeros(int bands, int blocks) {
    if (bands < 1) throw ShapeError("band count must be >= 1");
    if (blocks < 1) throw ShapeError("block count must be >= 1");
    FuseNetParamsT p;
    p.bands = bands;
    p.blocks = blocks;
    p.head = ConvParamsT<T>(kFeatureChannels, bands + 1, 5, 5);
    p.block_conv1 = ConvParamsT<T>(kFeatureChannels, kFeatureChannels, 5, 5);
    p.block_conv2 = ConvParamsT<T>(kFeatureChannels, kFeatureChannels, 5, 5);
    p.block_fuse = ConvParamsT<T>(kFeatureChannels, 3 * kFeatureChannels, 1, 1);
    p.global_fuse = ConvParamsT<T>(kFeatureChannels, blocks * kFeatureChannels, 1, 1);
    p.tail = ConvParamsT<T>(bands, kFeatureChannels, 5, 5);
    return p;
  }

  /// Xavier-initialized parameters; draw order is the fixed layer order, so a
  /// given seed always yields the same network.
  static FuseNetParamsT xavier(int bands, int blocks, Rng& rng) {
    FuseNetParamsT p = zeros(bands, blocks);
    for (ConvParamsT<T>* layer : p.layers())
      *layer = xavier_init<T>(layer->out_channels, layer->in_channels, layer->kh, layer->kw, rng);
    return p;
  }

  std::array<ConvParamsT<T>*, 6> layers() {
    return {&head, &block_conv1, &block_conv2, &block_fuse, &global_fuse, &tail};
  }
  std::array<const ConvParamsT<T>*, 6> layers() const {
    return {&head, &block_conv1, &block_conv2, &block_fuse, &global_fuse, &tail};
  }

  std::size_t param_count() const {
    std::size_t total = 0;
    for (const ConvParamsT<T>* layer : layers()) total += layer->param_count();
    return total;
  }
};

using FuseNetParams = FuseNetParamsT<float>;

template <typename To, typename From>
FuseNetParamsT<To> params_cast(const FuseNetParamsT<From>& src) {
  FuseNetParamsT<To> dst = FuseNetParamsT<To>::zeros(src.bands, src.blocks);
  auto dl = dst.layers();
  auto sl = src.layers();
  for (std::size_t i = 0; i < dl.size(); ++i) {
    for (std::size_t j = 0; j < sl[i]->weights.size(); ++j)
      dl[i]->weights[j] = static_cast<To>(sl[i]->weights[j]);
    for (std::size_t j = 0; j < sl[i]->bias.size(); ++j)
      dl[i]->bias[j] = static_cast<To>(sl[i]->bias[j]);
  }
  return dst;
}

/// One local feature fusion block: two activated 5x5 convolutions, channel
/// concatenation with the block input, and a linear 1x1 reweighting back to
/// the feature width.
template <typename T>
TensorT<T> block_forward(const TensorT<T>& x, const FuseNetParamsT<T>& p,
                         TapeT<T>* tape = nullptr) {
  if (x.c != kFeatureChannels) throw ShapeError("block_forward expects 48-channel input");
  const T slope = static_cast<T>(kLeakyReluSlope);
  TensorT<T> f1 = leaky_relu(conv2d(x, p.block_conv1, tape), slope, tape);
  TensorT<T> f2 = leaky_relu(conv2d(f1, p.block_conv2, tape), slope, tape);
  TensorT<T> cat = concat_channels<T>({&x, &f1, &f2}, tape);
  return conv2d(cat, p.block_fuse, tape);
}

/// Full network: activated head, K applications of the shared block, global
/// 1x1 fusion of all block outputs, linear 5x5 tail back to B bands.
template <typename T>
TensorT<T> fusenet_forward(const TensorT<T>& stack, const FuseNetParamsT<T>& p,
                           TapeT<T>* tape = nullptr,
                           BlockChaining chaining = BlockChaining::kResidual) {
  if (stack.c != p.bands + 1)
    throw ShapeError("fusenet_forward: stack must carry " + std::to_string(p.bands + 1) +
                     " channels, got " + std::to_string(stack.c));
  const T slope = static_cast<T>(kLeakyReluSlope);
  TensorT<T> shallow = leaky_relu(conv2d(stack, p.head, tape), slope, tape);

  std::vector<TensorT<T>> block_outs;
  block_outs.reserve(static_cast<std::size_t>(p.blocks));
  TensorT<T> block_in = shallow;
  for (int k = 0; k < p.blocks; ++k) {
    block_outs.push_back(block_forward(block_in, p, tape));
    if (k + 1 < p.blocks) {
      block_in = (chaining == BlockChaining::kResidual) ? add(block_outs.back(), shallow, tape)
                                                        : add(block_in, shallow, tape);
    }
  }

  std::vector<const TensorT<T>*> outs;
  for (const auto& t : block_outs) outs.push_back(&t);
  TensorT<T> global = conv2d(concat_channels(outs, tape), p.global_fuse, tape);
  return conv2d(global, p.tail, tape);
}

/// Checkpoint I/O ("FNET" container). Round trips are bitwise.
void save_checkpoint(const FuseNetParams& params, const std::filesystem::path& path);
FuseNetParams load_checkpoint(const std::filesystem::path& path);

}  // namespace pyrfuse
