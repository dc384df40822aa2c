#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pyrfuse/image.hpp"

namespace pyrfuse {

/// Stored sample encodings of the MBR container.
enum class SampleType : std::uint32_t { kU16 = 0, kF32 = 1 };

/// Normalized multi-band raster plus the radiometric ceiling used to map
/// stored integer samples to [0, 1]. Immutable by convention after load.
struct RasterImage {
  Image pixels;
  float radiometric_max = 2047.0f;
};

/// Reads an MBR file. Integer samples are divided by the header's
/// radiometric_max (and clamped to [0, 1]); float samples are taken verbatim.
RasterImage load_mbr(const std::filesystem::path& path);

/// Writes an MBR file. u16 requires every sample in [0, 1] and quantizes to
/// round(x * radiometric_max); f32 stores the payload bitwise.
void save_mbr(const RasterImage& img, const std::filesystem::path& path, SampleType dtype);

/// Binary PPM (P6, maxval 255) of three selected bands, 8-bit per channel.
std::vector<unsigned char> export_ppm(const RasterImage& img, int band_r, int band_g, int band_b);

/// Header summary without loading the payload (file inspection).
struct MbrHeader {
  std::uint32_t width = 0, height = 0, bands = 0;
  SampleType dtype = SampleType::kU16;
  float radiometric_max = 0.0f;
};
MbrHeader read_mbr_header(const std::filesystem::path& path);

}  // namespace pyrfuse
