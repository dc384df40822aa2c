#include "pyrfuse/training.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "pyrfuse/parallel.hpp"

namespace pyrfuse {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0f)) throw ValueError("learning_rate must be positive");
  if (batch_size < 1) throw ValueError("batch_size must be >= 1");
  if (iterations < 0) throw ValueError("iterations must be >= 0");
  if (K < 1) throw ValueError("K must be >= 1");
  if (J < 1) throw ValueError("J must be >= 1");
  if (patch_size < (1 << J) || patch_size % (1 << J) != 0)
    throw ValueError("patch_size must be a positive multiple of 2^J");
  if (!(adam_beta1 > 0.0f && adam_beta1 < 1.0f) || !(adam_beta2 > 0.0f && adam_beta2 < 1.0f))
    throw ValueError("adam betas must lie in (0, 1)");
  if (!(adam_eps > 0.0f)) throw ValueError("adam_eps must be positive");
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text);

template <>
float parse_number<float>(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  float v;
  try {
    v = std::stof(text, &used);
  } catch (const std::exception&) {
    throw ValueError("config value for \"" + key + "\" is not a number: \"" + text + "\"");
  }
  if (used != text.size())
    throw ValueError("config value for \"" + key + "\" has trailing characters: \"" + text + "\"");
  return v;
}

template <>
int parse_number<int>(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  long v;
  try {
    v = std::stol(text, &used);
  } catch (const std::exception&) {
    throw ValueError("config value for \"" + key + "\" is not an integer: \"" + text + "\"");
  }
  if (used != text.size())
    throw ValueError("config value for \"" + key + "\" has trailing characters: \"" + text + "\"");
  return static_cast<int>(v);
}

template <>
std::uint64_t parse_number<std::uint64_t>(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  unsigned long long v;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    throw ValueError("config value for \"" + key + "\" is not an unsigned integer: \"" + text +
                     "\"");
  }
  if (used != text.size())
    throw ValueError("config value for \"" + key + "\" has trailing characters: \"" + text + "\"");
  return v;
}

}  // namespace

TrainConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  TrainConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ValueError("config line " + std::to_string(lineno) + " is not \"key = value\": \"" +
                       stripped + "\"");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key == "learning_rate")
      cfg.learning_rate = parse_number<float>(key, value);
    else if (key == "batch_size")
      cfg.batch_size = parse_number<int>(key, value);
    else if (key == "patch_size")
      cfg.patch_size = parse_number<int>(key, value);
    else if (key == "iterations")
      cfg.iterations = parse_number<int>(key, value);
    else if (key == "seed")
      cfg.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "K")
      cfg.K = parse_number<int>(key, value);
    else if (key == "J")
      cfg.J = parse_number<int>(key, value);
    else if (key == "adam_beta1")
      cfg.adam_beta1 = parse_number<float>(key, value);
    else if (key == "adam_beta2")
      cfg.adam_beta2 = parse_number<float>(key, value);
    else if (key == "adam_eps")
      cfg.adam_eps = parse_number<float>(key, value);
    else
      throw ValueError("unknown config key \"" + key + "\" (line " + std::to_string(lineno) + ")");
  }
  cfg.validate();
  return cfg;
}

Image crop_to_multiple(const Image& img, int multiple) {
  const int w = (img.width / multiple) * multiple;
  const int h = (img.height / multiple) * multiple;
  if (w < multiple || h < multiple)
    throw ShapeError("image " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                     " too small to crop to a multiple of " + std::to_string(multiple));
  if (w == img.width && h == img.height) return img;
  Image out(img.bands, h, w);
  for (int b = 0; b < img.bands; ++b)
    for (int y = 0; y < h; ++y) {
      const float* src = img.band(b) + static_cast<std::size_t>(y) * img.width;
      std::copy(src, src + w, out.band(b) + static_cast<std::size_t>(y) * w);
    }
  return out;
}

namespace {

Image crop(const Image& img, int y0, int x0, int h, int w) {
  Image out(img.bands, h, w);
  for (int b = 0; b < img.bands; ++b)
    for (int y = 0; y < h; ++y) {
      const float* src = img.band(b) + static_cast<std::size_t>(y0 + y) * img.width + x0;
      std::copy(src, src + w, out.band(b) + static_cast<std::size_t>(y) * w);
    }
  return out;
}

constexpr int kWaldFactor = 4;

}  // namespace

SampleStream::SampleStream(const Image& pan, const Image& ms, const TrainConfig& cfg)
    : patch_(cfg.patch_size) {
  if (pan.bands != 1) throw ShapeError("pan image must be single-band");
  if (pan.width != ms.width * kWaldFactor || pan.height != ms.height * kWaldFactor)
    throw ShapeError("pan/ms resolution ratio must be 4");
  pan_lr_ = wald_degrade(pan, kWaldFactor);
  ms_lr_ = wald_degrade(ms, kWaldFactor);
  gt_ = ms;
  if (gt_.width < patch_ || gt_.height < patch_)
    throw ShapeError("scene smaller than the " + std::to_string(patch_) + "-pixel patch");
}

TrainSample SampleStream::next(Rng& rng) const {
  // Origins are multiples of 4 at the ground-truth scale so the quarter-scale
  // crop origin is exact.
  const std::uint32_t ny = static_cast<std::uint32_t>((gt_.height - patch_) / 4 + 1);
  const std::uint32_t nx = static_cast<std::uint32_t>((gt_.width - patch_) / 4 + 1);
  const int y0 = 4 * static_cast<int>(rng.below(ny));
  const int x0 = 4 * static_cast<int>(rng.below(nx));
  TrainSample s;
  s.pan_lr = crop(pan_lr_, y0, x0, patch_, patch_);
  s.gt = crop(gt_, y0, x0, patch_, patch_);
  s.ms_lr = crop(ms_lr_, y0 / 4, x0 / 4, patch_ / 4, patch_ / 4);
  return s;
}

AdamState AdamState::init_for(const FuseNetParams& params) {
  AdamState state;
  for (const ConvParams* layer : params.layers()) {
    state.weight_slots.push_back({std::vector<float>(layer->weights.size(), 0.0f),
                                  std::vector<float>(layer->weights.size(), 0.0f)});
    state.bias_slots.push_back({std::vector<float>(layer->bias.size(), 0.0f),
                                std::vector<float>(layer->bias.size(), 0.0f)});
  }
  return state;
}

namespace {

void adam_update_array(std::vector<float>& theta, const std::vector<float>& grad,
                       AdamState::Slot& slot, float lr, float b1, float b2, float eps,
                       double bias1, double bias2) {
  if (theta.size() != grad.size()) throw ShapeError("adam: gradient/parameter size mismatch");
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const float g = grad[i];
    slot.m[i] = b1 * slot.m[i] + (1.0f - b1) * g;
    slot.v[i] = b2 * slot.v[i] + (1.0f - b2) * g * g;
    const float mhat = static_cast<float>(slot.m[i] / bias1);
    const float vhat = static_cast<float>(slot.v[i] / bias2);
    theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

}  // namespace

void adam_step(FuseNetParams& params, const FuseNetGrads& grads, AdamState& state,
               const TrainConfig& cfg) {
  auto layers = params.layers();
  if (grads.layers.size() != layers.size() || state.weight_slots.size() != layers.size())
    throw ShapeError("adam: layer count mismatch");
  state.t += 1;
  const double bias1 = 1.0 - std::pow(static_cast<double>(cfg.adam_beta1), state.t);
  const double bias2 = 1.0 - std::pow(static_cast<double>(cfg.adam_beta2), state.t);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    adam_update_array(layers[l]->weights, grads.layers[l].weights, state.weight_slots[l],
                      cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, bias1,
                      bias2);
    adam_update_array(layers[l]->bias, grads.layers[l].bias, state.bias_slots[l],
                      cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, bias1,
                      bias2);
  }
}

TrainResult train_on_images(const std::vector<std::pair<Image, Image>>& scenes,
                            const TrainConfig& cfg) {
  cfg.validate();
  if (scenes.empty()) throw ValueError("training needs at least one (pan, ms) pair");
  if ((1 << cfg.J) != kWaldFactor)
    throw ValueError("the factor-4 degradation protocol requires J = 2");
  const int bands = scenes.front().second.bands;
  std::vector<SampleStream> streams;
  streams.reserve(scenes.size());
  for (const auto& [pan, ms] : scenes) {
    if (ms.bands != bands) throw ShapeError("all scenes must share the same band count");
    streams.emplace_back(pan, ms, cfg);
  }

  Rng rng(cfg.seed);
  TrainResult result;
  result.params = FuseNetParams::xavier(bands, cfg.K, rng);
  AdamState state = AdamState::init_for(result.params);
  result.loss_log.reserve(static_cast<std::size_t>(cfg.iterations));

  struct ItemResult {
    double loss = 0.0;
    FuseNetGrads grads;
  };

  for (int it = 0; it < cfg.iterations; ++it) {
    // Crops are drawn serially so the random sequence is independent of the
    // worker count.
    std::vector<TrainSample> batch;
    batch.reserve(static_cast<std::size_t>(cfg.batch_size));
    for (int i = 0; i < cfg.batch_size; ++i) {
      const std::size_t scene = rng.below(static_cast<std::uint32_t>(streams.size()));
      batch.push_back(streams[scene].next(rng));
    }

    std::vector<ItemResult> items(batch.size());
    parallel_for_index(static_cast<int>(batch.size()), 8, [&](int i) {
      const TrainSample& s = batch[static_cast<std::size_t>(i)];
      Tape tape;
      FusionTrace trace = fuse(s.pan_lr, s.ms_lr, result.params, cfg.J, &tape);
      LossResultT<float> loss = multiscale_loss(trace, s.gt);
      GradStore store = backward(tape, loss.seeds);
      items[static_cast<std::size_t>(i)].loss = loss.value;
      items[static_cast<std::size_t>(i)].grads = collect_grads(result.params, store);
    });

    double mean_loss = 0.0;
    FuseNetGrads grads = FuseNetGrads::zeros_like(result.params);
    for (const ItemResult& item : items) {
      mean_loss += item.loss;
      grads.accumulate(item.grads);
    }
    mean_loss /= static_cast<double>(batch.size());
    grads.scale(1.0f / static_cast<float>(batch.size()));
    if (!std::isfinite(mean_loss))
      throw NumericError("training diverged: non-finite loss at iteration " +
                         std::to_string(it + 1));
    adam_step(result.params, grads, state, cfg);
    result.loss_log.push_back(mean_loss);
  }
  return result;
}

std::string loss_log_csv(const std::vector<double>& losses) {
  std::string out = "iteration,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < losses.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.12e\n", i + 1, losses[i]);
    out += buf;
  }
  return out;
}

void train(const std::vector<std::pair<std::filesystem::path, std::filesystem::path>>& dataset,
           const TrainConfig& cfg, const std::filesystem::path& checkpoint_path,
           const std::filesystem::path& loss_log_path) {
  cfg.validate();
  if (dataset.empty()) throw ValueError("training needs at least one (pan, ms) pair");
  // Scenes are cropped so that Wald degradation by 4 and a J-level fusion of
  // the degraded pair both land on whole pixels.
  const int pan_multiple = kWaldFactor * (1 << cfg.J);
  std::vector<std::pair<Image, Image>> scenes;
  scenes.reserve(dataset.size());
  for (const auto& [pan_path, ms_path] : dataset) {
    const Image pan_full = load_mbr(pan_path).pixels;
    const Image ms_full = load_mbr(ms_path).pixels;
    if (pan_full.width != ms_full.width * kWaldFactor ||
        pan_full.height != ms_full.height * kWaldFactor)
      throw ShapeError(pan_path.string() + " / " + ms_path.string() +
                       ": pan/ms resolution ratio must be 4");
    Image pan = crop_to_multiple(pan_full, pan_multiple);
    Image ms = crop(ms_full, 0, 0, pan.height / kWaldFactor, pan.width / kWaldFactor);
    scenes.emplace_back(std::move(pan), std::move(ms));
  }

  TrainResult result = train_on_images(scenes, cfg);
  save_checkpoint(result.params, checkpoint_path);

  std::ofstream log(loss_log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw IoError("cannot open " + loss_log_path.string() + " for writing");
  const std::string csv = loss_log_csv(result.loss_log);
  log.write(csv.data(), static_cast<std::streamsize>(csv.size()));
  if (!log) throw IoError("write failed for " + loss_log_path.string());
}

}  // namespace pyrfuse
