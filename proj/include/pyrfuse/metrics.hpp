#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pyrfuse/image.hpp"

namespace pyrfuse {

/// Named scalar results of one evaluation, plus per-band detail where the
/// metric decomposes band-wise.
struct MetricsReport {
  enum class Context { kReduced, kFull };

  Context context = Context::kReduced;
  std::vector<std::pair<std::string, double>> values;
  std::map<std::string, std::vector<double>> per_band;

  double value(const std::string& name) const;

  /// "name,value" rows, one per metric, in report order.
  std::string to_csv() const;
  /// One-row Markdown table with metric names as columns.
  std::string to_markdown() const;
};

/// Parses CSV produced by MetricsReport::to_csv.
std::vector<std::pair<std::string, double>> parse_metrics_csv(const std::string& csv);

/// Mean spectral angle between per-pixel band vectors, in degrees. Pixels
/// where either vector is all-zero are skipped.
double sam_degrees(const Image& fused, const Image& ref);

/// Relative dimensionless global synthesis error for the given
/// resolution ratio (defaults to the factor-4 protocol).
double ergas(const Image& fused, const Image& ref, double scale_ratio = 0.25,
             std::vector<double>* per_band = nullptr);

/// Universal image quality index between two single-band images, averaged
/// over all sliding windows (stride 1, summed-area tables). Windows where
/// both inputs are flat are skipped; windows with zero means use the
/// correlation-contrast form directly.
double q_index(const Image& x, const Image& y, int window = 32);

/// Mean q_index over bands.
double qave(const Image& fused, const Image& ref, int window = 32,
            std::vector<double>* per_band = nullptr);

/// Mean over bands of the Pearson correlation between high-pass filtered
/// inputs (3x3 kernel: 8 center, -1 elsewhere, symmetric boundary).
double scc(const Image& fused, const Image& ref, std::vector<double>* per_band = nullptr);

/// Spectral distortion: mean absolute difference between inter-band q_index
/// tables of the fused product and of the low-resolution input.
double d_lambda(const Image& fused, const Image& ms, int window = 32);

/// Spatial distortion: mean absolute difference between each band's q_index
/// against the pan and the low-resolution band's q_index against the
/// degraded pan.
double d_s(const Image& fused, const Image& ms, const Image& pan, int window = 32);

/// (1 - d_lambda) * (1 - d_s).
double qnr(double d_lambda_value, double d_s_value);

MetricsReport evaluate_reduced(const Image& fused, const Image& gt);
MetricsReport evaluate_full(const Image& fused, const Image& ms, const Image& pan);

}  // namespace pyrfuse
