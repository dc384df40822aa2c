#include "pyrfuse/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "pyrfuse/errors.hpp"

namespace pyrfuse {

namespace {

constexpr char kMagic[4] = {'M', 'B', 'R', '1'};
constexpr std::size_t kHeaderSize = 4 + 4 * 4 + 4;

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float get_f32(const unsigned char* p) {
  const std::uint32_t bits = get_u32(p);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return bytes;
}

MbrHeader parse_header(const std::vector<unsigned char>& bytes, const std::string& name) {
  if (bytes.size() < kHeaderSize) throw FormatError(name + ": file shorter than the MBR header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError(name + ": bad magic \"" + std::string(bytes.begin(), bytes.begin() + 4) +
                      "\", expected \"MBR1\"");
  MbrHeader h;
  h.width = get_u32(bytes.data() + 4);
  h.height = get_u32(bytes.data() + 8);
  h.bands = get_u32(bytes.data() + 12);
  const std::uint32_t dtype = get_u32(bytes.data() + 16);
  if (dtype > 1)
    throw FormatError(name + ": unsupported dtype code " + std::to_string(dtype));
  h.dtype = static_cast<SampleType>(dtype);
  h.radiometric_max = get_f32(bytes.data() + 20);
  if (h.width == 0 || h.height == 0 || h.bands == 0)
    throw FormatError(name + ": zero dimension in header");
  if (!(h.radiometric_max > 0.0f))
    throw FormatError(name + ": radiometric_max must be positive");
  return h;
}

}  // namespace

MbrHeader read_mbr_header(const std::filesystem::path& path) {
  return parse_header(read_all(path), path.string());
}

RasterImage load_mbr(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = read_all(path);
  const MbrHeader h = parse_header(bytes, path.string());

  const std::size_t count =
      static_cast<std::size_t>(h.width) * h.height * h.bands;
  const std::size_t sample_size = h.dtype == SampleType::kU16 ? 2 : 4;
  if (bytes.size() != kHeaderSize + count * sample_size)
    throw FormatError(path.string() + ": payload length mismatch (expected " +
                      std::to_string(kHeaderSize + count * sample_size) + " bytes, got " +
                      std::to_string(bytes.size()) + ")");

  RasterImage img;
  img.radiometric_max = h.radiometric_max;
  img.pixels = Image(static_cast<int>(h.bands), static_cast<int>(h.height),
                     static_cast<int>(h.width));
  const unsigned char* p = bytes.data() + kHeaderSize;
  if (h.dtype == SampleType::kU16) {
    const float inv = 1.0f / h.radiometric_max;
    for (std::size_t i = 0; i < count; ++i, p += 2) {
      const std::uint16_t raw =
          static_cast<std::uint16_t>(p[0] | (static_cast<std::uint16_t>(p[1]) << 8));
      img.pixels.data[i] = std::clamp(static_cast<float>(raw) * inv, 0.0f, 1.0f);
    }
  } else {
    for (std::size_t i = 0; i < count; ++i, p += 4) img.pixels.data[i] = get_f32(p);
  }
  return img;
}

void save_mbr(const RasterImage& img, const std::filesystem::path& path, SampleType dtype) {
  if (!(img.radiometric_max > 0.0f)) throw ValueError("radiometric_max must be positive");
  if (dtype == SampleType::kU16) {
    if (img.radiometric_max > 65535.0f)
      throw ValueError("radiometric_max too large for 16-bit storage");
    for (float v : img.pixels.data)
      if (!(v >= 0.0f && v <= 1.0f))
        throw ValueError("u16 storage requires samples in [0, 1], found " + std::to_string(v));
  }

  std::string out;
  out.reserve(kHeaderSize + img.pixels.size() * (dtype == SampleType::kU16 ? 2 : 4));
  out.append(kMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(img.pixels.width));
  put_u32(out, static_cast<std::uint32_t>(img.pixels.height));
  put_u32(out, static_cast<std::uint32_t>(img.pixels.bands));
  put_u32(out, static_cast<std::uint32_t>(dtype));
  put_f32(out, img.radiometric_max);
  if (dtype == SampleType::kU16) {
    for (float v : img.pixels.data) {
      const auto raw = static_cast<std::uint16_t>(std::lround(v * img.radiometric_max));
      out.push_back(static_cast<char>(raw & 0xff));
      out.push_back(static_cast<char>((raw >> 8) & 0xff));
    }
  } else {
    for (float v : img.pixels.data) put_f32(out, v);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

std::vector<unsigned char> export_ppm(const RasterImage& img, int band_r, int band_g,
                                      int band_b) {
  const Image& px = img.pixels;
  for (int b : {band_r, band_g, band_b})
    if (b < 0 || b >= px.bands)
      throw ShapeError("band index " + std::to_string(b) + " out of range (image has " +
                       std::to_string(px.bands) + " bands)");

  char header[32];
  const int header_len = std::snprintf(header, sizeof(header), "P6\n%d %d\n255\n", px.width,
                                       px.height);
  std::vector<unsigned char> out;
  out.reserve(static_cast<std::size_t>(header_len) + 3 * px.plane_size());
  out.insert(out.end(), header, header + header_len);

  const int triple[3] = {band_r, band_g, band_b};
  for (int y = 0; y < px.height; ++y)
    for (int x = 0; x < px.width; ++x)
      for (int b : triple) {
        const float v = std::clamp(px.at(b, y, x), 0.0f, 1.0f);
        out.push_back(static_cast<unsigned char>(std::lround(v * 255.0f)));
      }
  return out;
}

}  // namespace pyrfuse
