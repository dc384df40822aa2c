#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "pyrfuse/errors.hpp"

namespace pyrfuse {

/// Multi-band image: band-sequential storage, row-major within each band.
template <typename T>
struct ImageT {
  int bands = 0;
  int height = 0;
  int width = 0;
  std::vector<T> data;

  ImageT() = default;
  ImageT(int bands_, int height_, int width_, T fill = T(0))
      : bands(bands_),
        height(height_),
        width(width_),
        data(static_cast<std::size_t>(bands_) * static_cast<std::size_t>(height_) *
                 static_cast<std::size_t>(width_),
             fill) {
    if (bands_ < 1 || height_ < 1 || width_ < 1)
      throw ShapeError("image dimensions must be positive");
  }

  std::size_t plane_size() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  std::size_t size() const { return data.size(); }

  T* band(int b) { return data.data() + static_cast<std::size_t>(b) * plane_size(); }
  const T* band(int b) const { return data.data() + static_cast<std::size_t>(b) * plane_size(); }

  T& at(int b, int y, int x) {
    return data[(static_cast<std::size_t>(b) * height + y) * width + x];
  }
  T at(int b, int y, int x) const {
    return data[(static_cast<std::size_t>(b) * height + y) * width + x];
  }

  bool same_shape(const ImageT& o) const {
    return bands == o.bands && height == o.height && width == o.width;
  }

  bool all_finite() const {
    for (const T& v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }
};

using Image = ImageT<float>;

template <typename To, typename From>
ImageT<To> image_cast(const ImageT<From>& src) {
  ImageT<To> out(src.bands, src.height, src.width);
  for (std::size_t i = 0; i < src.data.size(); ++i) out.data[i] = static_cast<To>(src.data[i]);
  return out;
}

}  // namespace pyrfuse
