#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "pyrfuse/errors.hpp"
#include "pyrfuse/fusenet.hpp"

namespace pyrfuse {

namespace {

constexpr char kMagic[4] = {'F', 'N', 'E', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_array(std::string& out, const std::vector<float>& a) {
  for (float v : a) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
  }
}

}  // namespace

void save_checkpoint(const FuseNetParams& params, const std::filesystem::path& path) {
  std::string out;
  out.reserve(16 + params.param_count() * 4);
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(params.bands));
  put_u32(out, static_cast<std::uint32_t>(params.blocks));
  for (const ConvParams* layer : params.layers()) {
    put_array(out, layer->weights);
    put_array(out, layer->bias);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

FuseNetParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 16) throw FormatError(path.string() + ": file shorter than the FNET header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError(path.string() + ": bad magic \"" +
                      std::string(bytes.begin(), bytes.begin() + 4) + "\", expected \"FNET\"");
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kVersion)
    throw FormatError(path.string() + ": unsupported version " + std::to_string(version));
  const std::uint32_t bands = get_u32(bytes.data() + 8);
  const std::uint32_t blocks = get_u32(bytes.data() + 12);
  if (bands == 0 || blocks == 0)
    throw FormatError(path.string() + ": band and block counts must be positive");

  FuseNetParams params = FuseNetParams::zeros(static_cast<int>(bands), static_cast<int>(blocks));
  const std::size_t expected = 16 + params.param_count() * 4;
  if (bytes.size() != expected)
    throw FormatError(path.string() + ": payload length mismatch for B=" + std::to_string(bands) +
                      " K=" + std::to_string(blocks) + " (expected " + std::to_string(expected) +
                      " bytes, got " + std::to_string(bytes.size()) + ")");

  const unsigned char* p = bytes.data() + 16;
  auto take = [&p](std::vector<float>& a) {
    for (float& v : a) {
      const std::uint32_t bits = get_u32(p);
      std::memcpy(&v, &bits, 4);
      p += 4;
    }
  };
  for (ConvParams* layer : params.layers()) {
    take(layer->weights);
    take(layer->bias);
  }
  return params;
}

}  // namespace pyrfuse
