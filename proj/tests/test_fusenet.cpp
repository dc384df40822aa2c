#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "pyrfuse/fusenet.hpp"
#include "support.hpp"

using namespace pyrfuse;
using namespace testsupport;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "pyrfuse_fusenet_tests";
    fs::create_directories(d);
    return d;
  }();
  return dir / name;
}

// Straight-line unroll of the network for K = 1, built from the raw ops.
template <typename T>
TensorT<T> unrolled_k1(const TensorT<T>& stack, const FuseNetParamsT<T>& p) {
  const T slope = static_cast<T>(kLeakyReluSlope);
  TensorT<T> f1 = leaky_relu(conv2d(stack, p.head), slope);
  TensorT<T> b1 = leaky_relu(conv2d(f1, p.block_conv1), slope);
  TensorT<T> b2 = leaky_relu(conv2d(b1, p.block_conv2), slope);
  TensorT<T> cat = concat_channels<T>({&f1, &b1, &b2}, nullptr);
  TensorT<T> out = conv2d(cat, p.block_fuse);
  return conv2d(conv2d(out, p.global_fuse), p.tail);
}

}  // namespace

TEST_CASE("parameter shapes and counts") {
  FuseNetParams p = FuseNetParams::zeros(8, 4);
  CHECK(p.head.in_channels == 9);
  CHECK(p.block_fuse.in_channels == 144);
  CHECK(p.global_fuse.in_channels == 192);
  CHECK(p.tail.out_channels == 8);
  CHECK(p.param_count() == 151976);

  FuseNetParams q = FuseNetParams::zeros(3, 2);
  CHECK(q.param_count() == 135363);

  CHECK_THROWS_AS(FuseNetParams::zeros(0, 4), ShapeError);
  CHECK_THROWS_AS(FuseNetParams::zeros(8, 0), ShapeError);
}

TEST_CASE("block_forward") {
  Rng rng(31);

  SUBCASE("zero parameters preserve zero") {
    FuseNetParams p = FuseNetParams::zeros(4, 2);
    TensorT<float> x(1, 48, 3, 3, 0.0f);
    TensorT<float> y = block_forward(x, p);
    for (float v : y.data) CHECK(v == 0.0f);
  }

  SUBCASE("1x1 spatial input against the scalar arithmetic chain") {
    // Uniform weights make every feature channel identical, collapsing the
    // block to scalar arithmetic.
    FuseNetParams p = FuseNetParams::zeros(4, 2);
    const double w1 = 0.01, b1 = 0.002, w2 = -0.03, b2 = 0.001, wf = 0.015, bf = -0.004;
    const double a = -0.7;
    for (auto& w : p.block_conv1.weights) w = static_cast<float>(w1);
    for (auto& b : p.block_conv1.bias) b = static_cast<float>(b1);
    for (auto& w : p.block_conv2.weights) w = static_cast<float>(w2);
    for (auto& b : p.block_conv2.bias) b = static_cast<float>(b2);
    for (auto& w : p.block_fuse.weights) w = static_cast<float>(wf);
    for (auto& b : p.block_fuse.bias) b = static_cast<float>(bf);

    TensorT<float> x(1, 48, 1, 1, static_cast<float>(a));
    TensorT<float> y = block_forward(x, p);

    // a 5x5 kernel over a 1x1 plane sees its single pixel 25 times through
    // the mirrored border, so each conv contributes 48 * 25 terms
    auto lrelu = [](double v) { return v > 0 ? v : 0.2 * v; };
    const double f1 = lrelu(48 * 25 * a * w1 + b1);
    const double f2 = lrelu(48 * 25 * f1 * w2 + b2);
    const double expect = wf * (48 * a + 48 * f1 + 48 * f2) + bf;
    for (float v : y.data) CHECK(v == doctest::Approx(expect).epsilon(1e-5));
  }

  SUBCASE("identical inputs give bitwise identical outputs at every position") {
    Rng seed_rng(32);
    FuseNetParams p = FuseNetParams::xavier(4, 3, seed_rng);
    TensorT<float> x = random_tensor<float>(seed_rng, 1, 48, 4, 4);
    TensorT<float> first = block_forward(x, p);
    TensorT<float> second = block_forward(x, p);
    CHECK(first.data == second.data);
  }

  SUBCASE("channel mismatch") {
    FuseNetParams p = FuseNetParams::zeros(4, 2);
    CHECK_THROWS_AS(block_forward(TensorT<float>(1, 47, 2, 2), p), ShapeError);
  }
}

TEST_CASE("fusenet_forward") {
  Rng rng(33);

  SUBCASE("all-zero parameters give zero output") {
    FuseNetParams p = FuseNetParams::zeros(4, 2);
    TensorT<float> stack = random_tensor<float>(rng, 1, 5, 6, 6);
    TensorT<float> y = fusenet_forward(stack, p);
    CHECK(y.c == 4);
    for (float v : y.data) CHECK(v == 0.0f);
  }

  SUBCASE("spatial shape preserved at multiple sizes (scale sharing)") {
    FuseNetParams p = FuseNetParams::xavier(3, 2, rng);
    for (int size : {48, 96}) {
      TensorT<float> stack = random_tensor<float>(rng, 1, 4, size, size);
      TensorT<float> y = fusenet_forward(stack, p);
      CHECK(y.h == size);
      CHECK(y.w == size);
      CHECK(y.c == 3);
      CHECK(y.all_finite());
    }
  }

  SUBCASE("K=1 equals the straight-line unroll") {
    FuseNetParams p = FuseNetParams::xavier(3, 1, rng);
    TensorT<float> stack = random_tensor<float>(rng, 1, 4, 8, 8);
    TensorT<float> y = fusenet_forward(stack, p);
    TensorT<float> expect = unrolled_k1(stack, p);
    CHECK(y.data == expect.data);
  }

  SUBCASE("deterministic") {
    FuseNetParams p = FuseNetParams::xavier(3, 2, rng);
    TensorT<float> stack = random_tensor<float>(rng, 1, 4, 8, 8);
    CHECK(fusenet_forward(stack, p).data == fusenet_forward(stack, p).data);
  }

  SUBCASE("as-printed chaining matches its own unroll") {
    FuseNetParams p = FuseNetParams::xavier(2, 3, rng);
    TensorT<float> stack = random_tensor<float>(rng, 1, 3, 6, 6);
    const float slope = kLeakyReluSlope;
    TensorT<float> f1 = leaky_relu(conv2d(stack, p.head), slope);
    // F_{k,0} = F_{k-1,0} + F_1: block inputs are F1, 2*F1, 3*F1.
    TensorT<float> in1 = f1;
    TensorT<float> in2 = add(in1, f1);
    TensorT<float> in3 = add(in2, f1);
    TensorT<float> o1 = block_forward(in1, p);
    TensorT<float> o2 = block_forward(in2, p);
    TensorT<float> o3 = block_forward(in3, p);
    TensorT<float> cat = concat_channels<float>({&o1, &o2, &o3}, nullptr);
    TensorT<float> expect = conv2d(conv2d(cat, p.global_fuse), p.tail);
    TensorT<float> y = fusenet_forward<float>(stack, p, nullptr, BlockChaining::kAsPrinted);
    CHECK(y.data == expect.data);
  }

  SUBCASE("channel mismatch") {
    FuseNetParams p = FuseNetParams::zeros(4, 2);
    CHECK_THROWS_AS(fusenet_forward(TensorT<float>(1, 4, 4, 4), p), ShapeError);
  }
}

TEST_CASE("weight tying: one gradient buffer sums all block applications") {
  Rng rng(34);
  FuseNetParamsT<double> p = params_cast<double>(FuseNetParams::xavier(2, 3, rng));
  TensorT<double> stack = random_tensor<double>(rng, 1, 3, 4, 4);
  TensorT<double> seed = random_tensor<double>(rng, 1, 2, 4, 4);

  Tape64 tape;
  fusenet_forward(stack, p, &tape);
  GradStoreT<double> store = backward(tape, seed);

  // exactly one buffer per layer object: 6 distinct parameter objects
  CHECK(store.conv_grad_count() == 6);

  auto eval = [&]() {
    TensorT<double> y = fusenet_forward(stack, p);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i)
      acc += y.data[i] * static_cast<double>(seed.data[i]);
    return acc;
  };
  // The shared-block gradient must match finite differences of the whole
  // network, i.e. the sum of all K applications. Samples landing on a
  // rectifier kink bias the difference quotient, so assert on the fraction.
  int checked = 0, strict = 0;
  double worst = 0.0;
  auto probe = [&](ConvParamsT<double>& layer, std::size_t stride) {
    const auto& g = store.conv_grad(layer);
    for (std::size_t i = 0; i < layer.weights.size(); i += stride, ++checked) {
      const double rel = rel_error(g.weights[i], central_diff(&layer.weights[i], 1e-6, eval));
      strict += rel <= 1e-5;
      worst = std::max(worst, rel);
    }
  };
  probe(p.block_conv1, 997);
  probe(p.block_fuse, 499);
  CHECK(checked >= 70);
  CHECK(static_cast<double>(strict) / checked >= 0.98);
  CHECK(worst <= 1e-3);
}

TEST_CASE("checkpoint round trip and malformed checkpoints") {
  Rng rng(35);
  FuseNetParams p = FuseNetParams::xavier(3, 2, rng);
  const fs::path path = temp_file("params.fnet");
  save_checkpoint(p, path);

  FuseNetParams q = load_checkpoint(path);
  CHECK(q.bands == 3);
  CHECK(q.blocks == 2);
  auto pl = p.layers(), ql = q.layers();
  for (std::size_t i = 0; i < pl.size(); ++i) {
    CHECK(pl[i]->weights == ql[i]->weights);
    CHECK(pl[i]->bias == ql[i]->bias);
  }

  SUBCASE("truncated file") {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const fs::path cut = temp_file("truncated.fnet");
    std::ofstream out(cut, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
    out.close();
    CHECK_THROWS_AS(load_checkpoint(cut), FormatError);
  }

  SUBCASE("header disagreeing with the payload size") {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    bytes[8] = 4;  // claim B=4 while the payload was written for B=3
    const fs::path lied = temp_file("mismatch.fnet");
    std::ofstream out(lied, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_AS(load_checkpoint(lied), FormatError);
  }

  SUBCASE("wrong magic") {
    const fs::path bad = temp_file("bad.fnet");
    std::ofstream out(bad, std::ios::binary | std::ios::trunc);
    out.write("NOPE000000000000", 16);
    out.close();
    CHECK_THROWS_AS(load_checkpoint(bad), FormatError);
  }
}
