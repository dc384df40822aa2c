// Python bindings for the pansharpening core. Images cross the boundary as
// numpy float32 arrays: (H, W) for single-band, (bands, H, W) otherwise.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pyrfuse/fusion.hpp"
#include "pyrfuse/metrics.hpp"
#include "pyrfuse/raster.hpp"
#include "pyrfuse/training.hpp"

namespace py = pybind11;
using namespace pyrfuse;

namespace {

Image image_from_array(const py::array_t<float, py::array::c_style | py::array::forcecast>& arr) {
  const auto info = arr.request();
  int bands, h, w;
  if (info.ndim == 2) {
    bands = 1;
    h = static_cast<int>(info.shape[0]);
    w = static_cast<int>(info.shape[1]);
  } else if (info.ndim == 3) {
    bands = static_cast<int>(info.shape[0]);
    h = static_cast<int>(info.shape[1]);
    w = static_cast<int>(info.shape[2]);
  } else {
    throw ShapeError("expected a (H, W) or (bands, H, W) array");
  }
  Image img(bands, h, w);
  std::copy(static_cast<const float*>(info.ptr), static_cast<const float*>(info.ptr) + img.size(),
            img.data.begin());
  return img;
}

py::array_t<float> array_from_image(const Image& img) {
  py::array_t<float> arr(
      {static_cast<py::ssize_t>(img.bands), static_cast<py::ssize_t>(img.height),
       static_cast<py::ssize_t>(img.width)});
  std::copy(img.data.begin(), img.data.end(), static_cast<float*>(arr.request().ptr));
  return arr;
}

TrainConfig config_from_kwargs(int iterations, int batch_size, int patch_size,
                               double learning_rate, std::uint64_t seed, int blocks, int levels) {
  TrainConfig cfg;
  cfg.iterations = iterations;
  cfg.batch_size = batch_size;
  cfg.patch_size = patch_size;
  cfg.learning_rate = static_cast<float>(learning_rate);
  cfg.seed = seed;
  cfg.K = blocks;
  cfg.J = levels;
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(pyrfuse, m) {
  m.doc() = "Pyramid-based pansharpening: Laplacian decomposition, the shared-parameter fusion "
            "network, training under the reduced-scale protocol, and quality metrics";

  py::register_exception<Error>(m, "PyrfuseError", PyExc_RuntimeError);

  m.def(
      "read_mbr",
      [](const std::filesystem::path& path) {
        const RasterImage img = load_mbr(path);
        return py::make_tuple(array_from_image(img.pixels), img.radiometric_max);
      },
      py::arg("path"), "Load an MBR raster; returns (array, radiometric_max).");

  m.def(
      "write_mbr",
      [](const std::filesystem::path& path, const py::array_t<float>& array,
         float radiometric_max, const std::string& dtype) {
        SampleType st;
        if (dtype == "u16")
          st = SampleType::kU16;
        else if (dtype == "f32")
          st = SampleType::kF32;
        else
          throw ValueError("dtype must be \"u16\" or \"f32\"");
        save_mbr({image_from_array(array), radiometric_max}, path, st);
      },
      py::arg("path"), py::arg("array"), py::arg("radiometric_max") = 2047.0f,
      py::arg("dtype") = "f32");

  m.def(
      "pyramid_reduce",
      [](const py::array_t<float>& array) { return array_from_image(reduce(image_from_array(array))); },
      py::arg("array"), "Low-pass filter and decimate by 2.");

  m.def(
      "pyramid_expand",
      [](const py::array_t<float>& array) { return array_from_image(expand(image_from_array(array))); },
      py::arg("array"), "Zero-insertion upsample by 2 with the interpolation filter.");

  m.def(
      "interpolate",
      [](const py::array_t<float>& ms, int levels) {
        return array_from_image(pyramid_interpolate(image_from_array(ms), levels));
      },
      py::arg("ms"), py::arg("levels") = 2,
      "Pyramid interpolation of a multispectral image (the zero-network baseline).");

  m.def(
      "init_checkpoint",
      [](const std::filesystem::path& path, int bands, int blocks, std::uint64_t seed,
         bool zero) {
        if (zero) {
          save_checkpoint(FuseNetParams::zeros(bands, blocks), path);
        } else {
          Rng rng(seed);
          save_checkpoint(FuseNetParams::xavier(bands, blocks, rng), path);
        }
      },
      py::arg("path"), py::arg("bands"), py::arg("blocks") = 4, py::arg("seed") = 0,
      py::arg("zero") = false,
      "Write a freshly initialized checkpoint (Xavier weights, or all zero).");

  m.def(
      "checkpoint_info",
      [](const std::filesystem::path& path) {
        const FuseNetParams p = load_checkpoint(path);
        py::dict info;
        info["bands"] = p.bands;
        info["blocks"] = p.blocks;
        info["parameters"] = p.param_count();
        return info;
      },
      py::arg("path"));

  m.def(
      "fuse",
      [](const py::array_t<float>& pan, const py::array_t<float>& ms,
         const std::filesystem::path& checkpoint, int levels) {
        const FuseNetParams params = load_checkpoint(checkpoint);
        return array_from_image(
            fuse(image_from_array(pan), image_from_array(ms), params, levels).final);
      },
      py::arg("pan"), py::arg("ms"), py::arg("checkpoint"), py::arg("levels") = 2,
      "Pansharpen a (pan, ms) pair with a trained checkpoint.");

  m.def(
      "train",
      [](const std::vector<std::pair<py::array_t<float>, py::array_t<float>>>& scenes,
         const std::filesystem::path& checkpoint, int iterations, int batch_size, int patch_size,
         double learning_rate, std::uint64_t seed, int blocks, int levels) {
        const TrainConfig cfg = config_from_kwargs(iterations, batch_size, patch_size,
                                                   learning_rate, seed, blocks, levels);
        std::vector<std::pair<Image, Image>> pairs;
        pairs.reserve(scenes.size());
        for (const auto& [pan, ms] : scenes)
          pairs.emplace_back(image_from_array(pan), image_from_array(ms));
        const TrainResult result = train_on_images(pairs, cfg);
        save_checkpoint(result.params, checkpoint);
        return result.loss_log;
      },
      py::arg("scenes"), py::arg("checkpoint"), py::arg("iterations") = 100,
      py::arg("batch_size") = 4, py::arg("patch_size") = 32, py::arg("learning_rate") = 1e-3,
      py::arg("seed") = 0, py::arg("blocks") = 4, py::arg("levels") = 2,
      "Train on full-resolution (pan, ms) scenes; returns the per-iteration loss log.");

  m.def(
      "wald_degrade",
      [](const py::array_t<float>& array, int factor) {
        return array_from_image(wald_degrade(image_from_array(array), factor));
      },
      py::arg("array"), py::arg("factor") = 4);

  m.def(
      "evaluate_reduced",
      [](const py::array_t<float>& fused, const py::array_t<float>& gt) {
        py::dict out;
        for (const auto& [name, value] :
             evaluate_reduced(image_from_array(fused), image_from_array(gt)).values)
          out[name.c_str()] = value;
        return out;
      },
      py::arg("fused"), py::arg("gt"));

  m.def(
      "evaluate_full",
      [](const py::array_t<float>& fused, const py::array_t<float>& ms,
         const py::array_t<float>& pan) {
        py::dict out;
        for (const auto& [name, value] :
             evaluate_full(image_from_array(fused), image_from_array(ms), image_from_array(pan))
                 .values)
          out[name.c_str()] = value;
        return out;
      },
      py::arg("fused"), py::arg("ms"), py::arg("pan"));
}
