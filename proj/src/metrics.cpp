#include "pyrfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "pyrfuse/errors.hpp"
#include "pyrfuse/pyramid.hpp"
#include "pyrfuse/training.hpp"

namespace pyrfuse {

double MetricsReport::value(const std::string& name) const {
  for (const auto& [key, v] : values)
    if (key == name) return v;
  throw LookupError("metric \"" + name + "\" not in report");
}

std::string MetricsReport::to_csv() const {
  std::string out;
  char buf[96];
  for (const auto& [key, v] : values) {
    std::snprintf(buf, sizeof(buf), "%s,%.12g\n", key.c_str(), v);
    out += buf;
  }
  return out;
}

std::string MetricsReport::to_markdown() const {
  std::string header = "|", rule = "|", row = "|";
  char buf[64];
  for (const auto& [key, v] : values) {
    header += " " + key + " |";
    rule += "---|";
    std::snprintf(buf, sizeof(buf), " %.4f |", v);
    row += buf;
  }
  return header + "\n" + rule + "\n" + row + "\n";
}

std::vector<std::pair<std::string, double>> parse_metrics_csv(const std::string& csv) {
  std::vector<std::pair<std::string, double>> out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) throw FormatError("metrics CSV row missing comma: " + line);
    out.emplace_back(line.substr(0, comma), std::stod(line.substr(comma + 1)));
  }
  return out;
}

namespace {

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) throw ShapeError(std::string(what) + ": images must share shape");
}

// Sliding-window universal quality index over two planes. Window moments come
// from summed-area tables; the naive definition is population moments.
// Windows where both planes are flat carry no information and are skipped;
// windows with exactly zero means keep the correlation-contrast part with the
// luminance term at its ideal value.
double q_index_planes(const float* x, const float* y, int h, int w, int window) {
  if (h < window || w < window)
    throw ShapeError("q_index: image smaller than the " + std::to_string(window) +
                     "-pixel window");
  const int sw = w + 1;
  const std::size_t sat_size = static_cast<std::size_t>(h + 1) * sw;
  std::vector<double> sx(sat_size, 0.0), sy(sat_size, 0.0), sxx(sat_size, 0.0),
      syy(sat_size, 0.0), sxy(sat_size, 0.0);
  for (int i = 0; i < h; ++i) {
    const float* xrow = x + static_cast<std::size_t>(i) * w;
    const float* yrow = y + static_cast<std::size_t>(i) * w;
    for (int j = 0; j < w; ++j) {
      const std::size_t cur = static_cast<std::size_t>(i + 1) * sw + (j + 1);
      const std::size_t up = cur - sw, left = cur - 1, diag = up - 1;
      const double xv = xrow[j], yv = yrow[j];
      sx[cur] = xv + sx[up] + sx[left] - sx[diag];
      sy[cur] = yv + sy[up] + sy[left] - sy[diag];
      sxx[cur] = xv * xv + sxx[up] + sxx[left] - sxx[diag];
      syy[cur] = yv * yv + syy[up] + syy[left] - syy[diag];
      sxy[cur] = xv * yv + sxy[up] + sxy[left] - sxy[diag];
    }
  }
  auto window_sum = [&](const std::vector<double>& s, int i0, int j0) {
    const std::size_t a = static_cast<std::size_t>(i0) * sw + j0;
    const std::size_t b = static_cast<std::size_t>(i0) * sw + (j0 + window);
    const std::size_t c = static_cast<std::size_t>(i0 + window) * sw + j0;
    const std::size_t d = static_cast<std::size_t>(i0 + window) * sw + (j0 + window);
    return s[d] - s[b] - s[c] + s[a];
  };

  const double n = static_cast<double>(window) * window;
  double acc = 0.0;
  long used = 0;
  for (int i0 = 0; i0 + window <= h; ++i0) {
    for (int j0 = 0; j0 + window <= w; ++j0) {
      const double mx = window_sum(sx, i0, j0) / n;
      const double my = window_sum(sy, i0, j0) / n;
      const double vx = std::max(0.0, window_sum(sxx, i0, j0) / n - mx * mx);
      const double vy = std::max(0.0, window_sum(syy, i0, j0) / n - my * my);
      const double cxy = window_sum(sxy, i0, j0) / n - mx * my;
      const double den1 = vx + vy;
      if (den1 <= 0.0) continue;
      const double den2 = mx * mx + my * my;
      acc += den2 == 0.0 ? 2.0 * cxy / den1 : 4.0 * cxy * mx * my / (den1 * den2);
      ++used;
    }
  }
  if (used == 0) throw NumericError("q_index: every window is flat");
  return acc / static_cast<double>(used);
}

}  // namespace

double q_index(const Image& x, const Image& y, int window) {
  if (x.bands != 1 || y.bands != 1) throw ShapeError("q_index operates on single-band images");
  require_same_shape(x, y, "q_index");
  return q_index_planes(x.band(0), y.band(0), x.height, x.width, window);
}

double sam_degrees(const Image& fused, const Image& ref) {
  require_same_shape(fused, ref, "sam");
  if (fused.bands < 2) throw ShapeError("sam requires at least two bands");
  const std::size_t npix = fused.plane_size();
  double acc = 0.0;
  long used = 0;
  for (std::size_t p = 0; p < npix; ++p) {
    double dot = 0.0, nf = 0.0, nr = 0.0;
    for (int b = 0; b < fused.bands; ++b) {
      const double f = fused.data[static_cast<std::size_t>(b) * npix + p];
      const double r = ref.data[static_cast<std::size_t>(b) * npix + p];
      dot += f * r;
      nf += f * f;
      nr += r * r;
    }
    if (nf == 0.0 || nr == 0.0) continue;
    // compare squares first: keeps collinear vectors at exactly 0 or pi
    if (dot * dot >= nf * nr)
      acc += dot > 0.0 ? 0.0 : std::numbers::pi;
    else
      acc += std::acos(dot / std::sqrt(nf * nr));
    ++used;
  }
  if (used == 0) throw NumericError("sam: every pixel has a zero spectral vector");
  return acc / static_cast<double>(used) * 180.0 / std::numbers::pi;
}

double ergas(const Image& fused, const Image& ref, double scale_ratio,
             std::vector<double>* per_band) {
  require_same_shape(fused, ref, "ergas");
  const std::size_t npix = fused.plane_size();
  double acc = 0.0;
  if (per_band) per_band->clear();
  for (int b = 0; b < fused.bands; ++b) {
    const float* f = fused.band(b);
    const float* r = ref.band(b);
    double mean = 0.0, mse = 0.0;
    for (std::size_t p = 0; p < npix; ++p) {
      mean += r[p];
      const double d = static_cast<double>(f[p]) - static_cast<double>(r[p]);
      mse += d * d;
    }
    mean /= static_cast<double>(npix);
    mse /= static_cast<double>(npix);
    if (mean == 0.0)
      throw NumericError("ergas: reference band " + std::to_string(b) + " has zero mean");
    const double term = std::sqrt(mse) / mean;
    if (per_band) per_band->push_back(term);
    acc += term * term;
  }
  return 100.0 * scale_ratio * std::sqrt(acc / static_cast<double>(fused.bands));
}

double qave(const Image& fused, const Image& ref, int window, std::vector<double>* per_band) {
  require_same_shape(fused, ref, "qave");
  if (per_band) per_band->clear();
  double acc = 0.0;
  for (int b = 0; b < fused.bands; ++b) {
    const double q =
        q_index_planes(fused.band(b), ref.band(b), fused.height, fused.width, window);
    if (per_band) per_band->push_back(q);
    acc += q;
  }
  return acc / static_cast<double>(fused.bands);
}

namespace {

// 3x3 high-pass (8 center, -1 elsewhere) with whole-sample symmetric borders.
std::vector<double> highpass_plane(const float* src, int h, int w) {
  std::vector<double> out(static_cast<std::size_t>(h) * w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      double acc = 0.0;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          const double v = src[static_cast<std::size_t>(mirror_index(i + di, h)) * w +
                               mirror_index(j + dj, w)];
          acc += (di == 0 && dj == 0) ? 8.0 * v : -v;
        }
      out[static_cast<std::size_t>(i) * w + j] = acc;
    }
  return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b, int band) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double va = 0.0, vb = 0.0, cov = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    va += da * da;
    vb += db * db;
    cov += da * db;
  }
  if (va == 0.0 || vb == 0.0)
    throw NumericError("scc: band " + std::to_string(band) +
                       " has zero variance after high-pass filtering");
  return cov / (std::sqrt(va) * std::sqrt(vb));
}

}  // namespace

double scc(const Image& fused, const Image& ref, std::vector<double>* per_band) {
  require_same_shape(fused, ref, "scc");
  if (per_band) per_band->clear();
  double acc = 0.0;
  for (int b = 0; b < fused.bands; ++b) {
    const auto hf = highpass_plane(fused.band(b), fused.height, fused.width);
    const auto hr = highpass_plane(ref.band(b), ref.height, ref.width);
    const double r = pearson(hf, hr, b);
    if (per_band) per_band->push_back(r);
    acc += r;
  }
  return acc / static_cast<double>(fused.bands);
}

double d_lambda(const Image& fused, const Image& ms, int window) {
  if (fused.bands != ms.bands) throw ShapeError("d_lambda: band counts must match");
  if (fused.bands < 2) throw ShapeError("d_lambda requires at least two bands");
  if (fused.width != 4 * ms.width || fused.height != 4 * ms.height)
    throw ShapeError("d_lambda: fused must be 4x the multispectral resolution");
  const int B = fused.bands;
  double acc = 0.0;
  for (int b = 0; b < B; ++b)
    for (int r = 0; r < B; ++r) {
      if (b == r) continue;
      const double qf =
          q_index_planes(fused.band(b), fused.band(r), fused.height, fused.width, window);
      const double qm = q_index_planes(ms.band(b), ms.band(r), ms.height, ms.width, window);
      acc += std::abs(qf - qm);
    }
  return acc / (static_cast<double>(B) * (B - 1));
}

double d_s(const Image& fused, const Image& ms, const Image& pan, int window) {
  if (fused.bands != ms.bands) throw ShapeError("d_s: band counts must match");
  if (pan.bands != 1) throw ShapeError("d_s: pan must be single-band");
  if (fused.width != pan.width || fused.height != pan.height)
    throw ShapeError("d_s: fused and pan must share resolution");
  if (fused.width != 4 * ms.width || fused.height != 4 * ms.height)
    throw ShapeError("d_s: fused must be 4x the multispectral resolution");
  const Image pan_lr = wald_degrade(pan, 4);
  double acc = 0.0;
  for (int b = 0; b < fused.bands; ++b) {
    const double qh =
        q_index_planes(fused.band(b), pan.band(0), fused.height, fused.width, window);
    const double ql =
        q_index_planes(ms.band(b), pan_lr.band(0), ms.height, ms.width, window);
    acc += std::abs(qh - ql);
  }
  return acc / static_cast<double>(fused.bands);
}

double qnr(double d_lambda_value, double d_s_value) {
  return (1.0 - d_lambda_value) * (1.0 - d_s_value);
}

MetricsReport evaluate_reduced(const Image& fused, const Image& gt) {
  MetricsReport report;
  report.context = MetricsReport::Context::kReduced;
  std::vector<double> q_bands, scc_bands, ergas_bands;
  report.values.emplace_back("QAVE", qave(fused, gt, 32, &q_bands));
  report.values.emplace_back("SAM", sam_degrees(fused, gt));
  report.values.emplace_back("ERGAS", ergas(fused, gt, 0.25, &ergas_bands));
  report.values.emplace_back("SCC", scc(fused, gt, &scc_bands));
  report.per_band["QAVE"] = std::move(q_bands);
  report.per_band["ERGAS_rmse_ratio"] = std::move(ergas_bands);
  report.per_band["SCC"] = std::move(scc_bands);
  return report;
}

MetricsReport evaluate_full(const Image& fused, const Image& ms, const Image& pan) {
  MetricsReport report;
  report.context = MetricsReport::Context::kFull;
  const double dl = d_lambda(fused, ms);
  const double ds = d_s(fused, ms, pan);
  report.values.emplace_back("D_lambda", dl);
  report.values.emplace_back("D_s", ds);
  report.values.emplace_back("QNR", qnr(dl, ds));
  return report;
}

}  // namespace pyrfuse
