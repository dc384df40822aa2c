// pyrfuse command-line tool: simulate / train / fuse / eval-reduced /
// eval-full / info over MBR rasters and FNET checkpoints.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pyrfuse/errors.hpp"
#include "pyrfuse/fusion.hpp"
#include "pyrfuse/metrics.hpp"
#include "pyrfuse/raster.hpp"
#include "pyrfuse/training.hpp"

namespace fs = std::filesystem;
using namespace pyrfuse;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

void write_bytes(const fs::path& path, const void* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw IoError("write failed for " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
  write_bytes(path, text.data(), text.size());
}

// Crops a loaded pair so pan is a multiple of `pan_multiple` and ms stays at
// exactly pan/ratio. The original pair must already be in that ratio.
void crop_pair(RasterImage& pan, RasterImage& ms, int pan_multiple, int ratio) {
  if (pan.pixels.width != ratio * ms.pixels.width ||
      pan.pixels.height != ratio * ms.pixels.height)
    throw ShapeError("pan/ms resolution ratio must be exactly " + std::to_string(ratio));
  pan.pixels = crop_to_multiple(pan.pixels, pan_multiple);
  Image ms_cropped(ms.pixels.bands, pan.pixels.height / ratio, pan.pixels.width / ratio);
  for (int b = 0; b < ms.pixels.bands; ++b)
    for (int y = 0; y < ms_cropped.height; ++y) {
      const float* src = ms.pixels.band(b) + static_cast<std::size_t>(y) * ms.pixels.width;
      std::copy(src, src + ms_cropped.width,
                ms_cropped.band(b) + static_cast<std::size_t>(y) * ms_cropped.width);
    }
  ms.pixels = std::move(ms_cropped);
}

std::vector<std::pair<fs::path, fs::path>> parse_data_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data list " + path.string());
  std::vector<std::pair<fs::path, fs::path>> pairs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream row(line);
    std::string pan, ms, extra;
    if (!(row >> pan)) continue;  // blank line
    if (pan[0] == '#') continue;
    if (!(row >> ms) || (row >> extra))
      throw ValueError("data list line " + std::to_string(lineno) +
                       " must hold exactly two paths: \"" + line + "\"");
    pairs.emplace_back(pan, ms);
  }
  if (pairs.empty()) throw ValueError("data list " + path.string() + " holds no pairs");
  return pairs;
}

int cmd_simulate(const fs::path& pan_path, const fs::path& ms_path, const fs::path& out_dir) {
  RasterImage pan = load_mbr(pan_path);
  RasterImage ms = load_mbr(ms_path);
  if (pan.pixels.bands != 1) throw ShapeError("--pan must be a single-band image");
  // Degradation by 4 plus a later 2-level fusion of the degraded pair needs
  // pan dimensions divisible by 16.
  crop_pair(pan, ms, 16, 4);

  RasterImage pan_lr{wald_degrade(pan.pixels, 4), pan.radiometric_max};
  RasterImage ms_lr{wald_degrade(ms.pixels, 4), ms.radiometric_max};
  fs::create_directories(out_dir);
  save_mbr(pan_lr, out_dir / "pan_lr.mbr", SampleType::kF32);
  save_mbr(ms_lr, out_dir / "ms_lr.mbr", SampleType::kF32);
  save_mbr(ms, out_dir / "gt.mbr", SampleType::kF32);
  std::printf("wrote %s/{pan_lr,ms_lr,gt}.mbr (pan_lr %dx%d, ms_lr %dx%d)\n",
              out_dir.string().c_str(), pan_lr.pixels.width, pan_lr.pixels.height,
              ms_lr.pixels.width, ms_lr.pixels.height);
  return 0;
}

int cmd_train(const fs::path& config_path, const fs::path& data_list,
              const fs::path& checkpoint_path, const fs::path& loss_log_path) {
  const TrainConfig cfg = parse_config(config_path);
  const auto pairs = parse_data_list(data_list);
  for (const auto& [pan, ms] : pairs) {
    if (!fs::exists(pan)) throw IoError("missing training input " + pan.string());
    if (!fs::exists(ms)) throw IoError("missing training input " + ms.string());
  }
  train(pairs, cfg, checkpoint_path, loss_log_path);
  std::printf("wrote checkpoint %s and loss log %s (%d iterations)\n",
              checkpoint_path.string().c_str(), loss_log_path.string().c_str(), cfg.iterations);
  return 0;
}

int cmd_fuse(const fs::path& pan_path, const fs::path& ms_path, const fs::path& checkpoint_path,
             const fs::path& out_path, const fs::path& preview_path,
             const std::vector<int>& preview_bands, int levels) {
  RasterImage pan = load_mbr(pan_path);
  RasterImage ms = load_mbr(ms_path);
  FuseNetParams params = load_checkpoint(checkpoint_path);
  if (pan.pixels.bands != 1) throw ShapeError("--pan must be a single-band image");
  if (params.bands != ms.pixels.bands)
    throw FormatError("checkpoint expects " + std::to_string(params.bands) +
                      " bands but --ms has " + std::to_string(ms.pixels.bands));
  crop_pair(pan, ms, 1 << levels, 1 << levels);

  FusionTrace trace = fuse(pan.pixels, ms.pixels, params, levels);
  RasterImage fused{trace.final, ms.radiometric_max};
  // The residual path can leave samples slightly outside [0, 1]; exports
  // clamp, the MBR payload keeps the raw values.
  save_mbr(fused, out_path, SampleType::kF32);
  std::printf("wrote %s (%dx%d, %d bands)\n", out_path.string().c_str(), fused.pixels.width,
              fused.pixels.height, fused.pixels.bands);

  if (!preview_path.empty()) {
    const auto ppm = export_ppm(fused, preview_bands[0], preview_bands[1], preview_bands[2]);
    write_bytes(preview_path, ppm.data(), ppm.size());
    std::printf("wrote preview %s\n", preview_path.string().c_str());
  }
  return 0;
}

int cmd_eval_reduced(const fs::path& fused_path, const fs::path& gt_path,
                     const fs::path& out_path, bool markdown) {
  const Image fused = load_mbr(fused_path).pixels;
  const Image gt = load_mbr(gt_path).pixels;
  const MetricsReport report = evaluate_reduced(fused, gt);
  write_text(out_path, report.to_csv());
  std::fputs((markdown ? report.to_markdown() : report.to_csv()).c_str(), stdout);
  return 0;
}

int cmd_eval_full(const fs::path& fused_path, const fs::path& ms_path, const fs::path& pan_path,
                  const fs::path& out_path, bool markdown) {
  const Image fused = load_mbr(fused_path).pixels;
  const Image ms = load_mbr(ms_path).pixels;
  const Image pan = load_mbr(pan_path).pixels;
  const MetricsReport report = evaluate_full(fused, ms, pan);
  write_text(out_path, report.to_csv());
  std::fputs((markdown ? report.to_markdown() : report.to_csv()).c_str(), stdout);
  return 0;
}

int cmd_info(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4) throw FormatError(path.string() + ": shorter than a magic number");
  const std::string tag(magic, 4);
  if (tag == "MBR1") {
    const MbrHeader h = read_mbr_header(path);
    std::printf("%ux%u, %u bands, %s, max %g\n", h.width, h.height, h.bands,
                h.dtype == SampleType::kU16 ? "u16" : "f32",
                static_cast<double>(h.radiometric_max));
  } else if (tag == "FNET") {
    const FuseNetParams params = load_checkpoint(path);
    std::printf("FNET checkpoint: B=%d, K=%d, %zu parameters\n", params.bands, params.blocks,
                params.param_count());
  } else {
    throw FormatError(path.string() + ": unknown magic \"" + tag + "\"");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pyramid-based pansharpening: fuse a high-resolution panchromatic band with a "
               "low-resolution multispectral image"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Degrade a (pan, ms) pair by 4 for reduced-scale "
                                             "training and evaluation");
  fs::path sim_pan, sim_ms, sim_out;
  sim->add_option("--pan", sim_pan, "panchromatic MBR")->required()->check(CLI::ExistingFile);
  sim->add_option("--ms", sim_ms, "multispectral MBR")->required()->check(CLI::ExistingFile);
  sim->add_option("--out-dir", sim_out, "output directory")->required();

  // train
  auto* tr = app.add_subcommand("train", "Train a checkpoint on (pan, ms) pairs");
  fs::path tr_config, tr_list, tr_ckpt, tr_log;
  tr->add_option("--config", tr_config, "key = value config file")
      ->required()
      ->check(CLI::ExistingFile);
  tr->add_option("--data-list", tr_list, "text file, one \"pan ms\" path pair per line")
      ->required()
      ->check(CLI::ExistingFile);
  tr->add_option("--out-checkpoint", tr_ckpt, "output FNET checkpoint")->required();
  tr->add_option("--loss-log", tr_log, "output CSV loss log")->required();

  // fuse
  auto* fu = app.add_subcommand("fuse", "Pansharpen with a trained checkpoint");
  fs::path fu_pan, fu_ms, fu_ckpt, fu_out, fu_preview;
  std::string fu_bands = "0,1,2";
  int fu_levels = 2;
  fu->add_option("--pan", fu_pan, "panchromatic MBR")->required()->check(CLI::ExistingFile);
  fu->add_option("--ms", fu_ms, "multispectral MBR")->required()->check(CLI::ExistingFile);
  fu->add_option("--checkpoint", fu_ckpt, "FNET checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  fu->add_option("--out", fu_out, "output MBR")->required();
  fu->add_option("--preview", fu_preview, "optional PPM preview path");
  fu->add_option("--bands", fu_bands, "preview band triple r,g,b (default 0,1,2)");
  fu->add_option("--levels", fu_levels, "pyramid stages (default 2)")->check(CLI::Range(1, 8));

  // eval-reduced
  auto* er = app.add_subcommand("eval-reduced", "Reduced-scale metrics against a ground truth");
  fs::path er_fused, er_gt, er_out;
  bool er_md = false;
  er->add_option("--fused", er_fused, "fused MBR")->required()->check(CLI::ExistingFile);
  er->add_option("--gt", er_gt, "ground-truth MBR")->required()->check(CLI::ExistingFile);
  er->add_option("--out", er_out, "output CSV report")->required();
  er->add_flag("--markdown", er_md, "print a Markdown table instead of CSV");

  // eval-full
  auto* ef = app.add_subcommand("eval-full", "No-reference full-scale metrics");
  fs::path ef_fused, ef_ms, ef_pan, ef_out;
  bool ef_md = false;
  ef->add_option("--fused", ef_fused, "fused MBR")->required()->check(CLI::ExistingFile);
  ef->add_option("--ms", ef_ms, "original multispectral MBR")
      ->required()
      ->check(CLI::ExistingFile);
  ef->add_option("--pan", ef_pan, "original panchromatic MBR")
      ->required()
      ->check(CLI::ExistingFile);
  ef->add_option("--out", ef_out, "output CSV report")->required();
  ef->add_flag("--markdown", ef_md, "print a Markdown table instead of CSV");

  // info
  auto* in = app.add_subcommand("info", "Print the header of an MBR or FNET file");
  fs::path in_file;
  in->add_option("--file", in_file, "file to inspect")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_pan, sim_ms, sim_out);
    if (tr->parsed()) return cmd_train(tr_config, tr_list, tr_ckpt, tr_log);
    if (fu->parsed()) {
      std::vector<int> bands;
      std::istringstream list(fu_bands);
      std::string item;
      while (std::getline(list, item, ','))
        try {
          std::size_t used = 0;
          bands.push_back(std::stoi(item, &used));
          if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
          std::fprintf(stderr, "error: --bands expects integers, got \"%s\"\n", item.c_str());
          return kExitUsage;
        }
      if (bands.size() != 3) {
        std::fprintf(stderr, "error: --bands expects exactly three indices, got \"%s\"\n",
                     fu_bands.c_str());
        return kExitUsage;
      }
      return cmd_fuse(fu_pan, fu_ms, fu_ckpt, fu_out, fu_preview, bands, fu_levels);
    }
    if (er->parsed()) return cmd_eval_reduced(er_fused, er_gt, er_out, er_md);
    if (ef->parsed()) return cmd_eval_full(ef_fused, ef_ms, ef_pan, ef_out, ef_md);
    if (in->parsed()) return cmd_info(in_file);
  } catch (const NumericError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  } catch (const ValueError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kExitNumeric;
  }
  return 0;
}
