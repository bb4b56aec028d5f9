// Copyright 2026 The TeNCA Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tenca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "tenca/dataset.hpp"
#include "tenca/error.hpp"

namespace tenca {

namespace {

void require_same_shape(const Image& a, const Image& b) {
  if (!a.same_shape(b) || a.empty()) {
    throw DataError("metric inputs must be non-empty and share a shape");
  }
}

std::vector<double> gaussian_window(const SsimSettings& s) {
  std::vector<double> g(s.window);
  const double c = (double(s.window) - 1.0) / 2.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < s.window; ++i) {
    const double x = double(i) - c;
    g[i] = std::exp(-(x * x) / (2.0 * s.sigma * s.sigma));
    sum += g[i];
  }
  for (auto& v : g) v /= sum;
  return g;
}

// Valid-mode separable filtering of a row-major h x w field.
std::vector<double> filter_valid(const std::vector<double>& src, std::size_t h, std::size_t w,
                                 const std::vector<double>& g) {
  const std::size_t n = g.size();
  const std::size_t ow = w - n + 1;
  const std::size_t oh = h - n + 1;
  std::vector<double> tmp(h * ow, 0.0);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += g[k] * src[i * w + j + k];
      tmp[i * ow + j] = acc;
    }
  }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t i = 0; i < oh; ++i) {
    for (std::size_t j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += g[k] * tmp[(i + k) * ow + j];
      out[i * ow + j] = acc;
    }
  }
  return out;
}

}  // namespace

double mse(const Image& a, const Image& b) {
  require_same_shape(a, b);
  double acc = 0.0;
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = double(pa[i]) - double(pb[i]);
    acc += d * d;
  }
  return acc / double(pa.size());
}

double mae(const Image& a, const Image& b) {
  require_same_shape(a, b);
  double acc = 0.0;
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) acc += std::abs(double(pa[i]) - double(pb[i]));
  return acc / double(pa.size());
}

double psnr_from_mse(double mse_value, double peak) {
  if (mse_value <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse_value);
}

double psnr(const Image& a, const Image& b, double peak) {
  return psnr_from_mse(mse(a, b), peak);
}

SsimTerms ssim_terms(const Image& a, const Image& b, const SsimSettings& s) {
  require_same_shape(a, b);
  const std::size_t h = a.height();
  const std::size_t w = a.width();
  if (h < s.window || w < s.window) {
    throw DataError("image " + std::to_string(h) + "x" + std::to_string(w) +
                    " is smaller than the " + std::to_string(s.window) + "x" +
                    std::to_string(s.window) + " SSIM window");
  }
  const auto g = gaussian_window(s);
  std::vector<double> x(h * w), y(h * w), xx(h * w), yy(h * w), xy(h * w);
  for (std::size_t i = 0; i < h * w; ++i) {
    x[i] = a.pixels()[i];
    y[i] = b.pixels()[i];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mx = filter_valid(x, h, w, g);
  const auto my = filter_valid(y, h, w, g);
  const auto mxx = filter_valid(xx, h, w, g);
  const auto myy = filter_valid(yy, h, w, g);
  const auto mxy = filter_valid(xy, h, w, g);

  const double c1 = (s.k1 * s.data_range) * (s.k1 * s.data_range);
  const double c2 = (s.k2 * s.data_range) * (s.k2 * s.data_range);
  double ssim_sum = 0.0;
  double cs_sum = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double va = mxx[i] - mx[i] * mx[i];
    const double vb = myy[i] - my[i] * my[i];
    const double cov = mxy[i] - mx[i] * my[i];
    const double lum = (2.0 * mx[i] * my[i] + c1) / (mx[i] * mx[i] + my[i] * my[i] + c1);
    const double cs = (2.0 * cov + c2) / (va + vb + c2);
    ssim_sum += lum * cs;
    cs_sum += cs;
  }
  const double n = double(mx.size());
  return {ssim_sum / n, cs_sum / n};
}

double ssim(const Image& a, const Image& b, const SsimSettings& s) {
  return ssim_terms(a, b, s).ssim;
}

Image downsample2(const Image& img) {
  const std::size_t h = img.height() / 2;
  const std::size_t w = img.width() / 2;
  Image out(h, w);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const double sum = double(img(2 * i, 2 * j)) + double(img(2 * i, 2 * j + 1)) +
                         double(img(2 * i + 1, 2 * j)) + double(img(2 * i + 1, 2 * j + 1));
      out(i, j) = static_cast<float>(sum / 4.0);
    }
  }
  return out;
}

std::vector<double> ms_ssim_weights(std::size_t levels) {
  static constexpr double kWeights[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  if (levels < 1 || levels > 5) throw ConfigError("MS-SSIM supports 1 to 5 levels");
  std::vector<double> w(kWeights, kWeights + levels);
  double sum = 0.0;
  for (double v : w) sum += v;
  for (double& v : w) v /= sum;
  return w;
}

std::size_t max_ms_ssim_levels(std::size_t height, std::size_t width, const SsimSettings& s) {
  const std::size_t m = std::min(height, width);
  std::size_t levels = 0;
  for (std::size_t l = 1; l <= 5; ++l) {
    if (m >= (std::size_t{1} << (l - 1)) * s.window) levels = l;
  }
  return levels;
}

double ms_ssim(const Image& a, const Image& b, std::size_t levels, const SsimSettings& s) {
  require_same_shape(a, b);
  const auto weights = ms_ssim_weights(levels);
  const std::size_t needed = (std::size_t{1} << (levels - 1)) * s.window;
  if (std::min(a.height(), a.width()) < needed) {
    throw DataError("MS-SSIM with " + std::to_string(levels) + " levels needs images of at least " +
                    std::to_string(needed) + "x" + std::to_string(needed));
  }
  if (levels == 1) return ssim(a, b, s);
  Image x = a;
  Image y = b;
  double result = 1.0;
  for (std::size_t l = 0; l < levels; ++l) {
    const SsimTerms t = ssim_terms(x, y, s);
    if (l + 1 < levels) {
      result *= std::pow(std::max(t.cs, 0.0), weights[l]);
      x = downsample2(x);
      y = downsample2(y);
    } else {
      result *= std::pow(std::max(t.ssim, 0.0), weights[l]);
    }
  }
  return result;
}

namespace {

MetricMeans mean_of(std::size_t phase, const std::vector<const FrameMetrics*>& rows) {
  MetricMeans m;
  m.phase = phase;
  m.count = rows.size();
  if (rows.empty()) return m;
  for (const auto* r : rows) {
    m.mse += r->mse;
    m.mae += r->mae;
    m.psnr_db += r->psnr_db;
    m.ssim += r->ssim;
    m.ms_ssim += r->ms_ssim;
  }
  const double n = double(rows.size());
  m.mse /= n;
  m.mae /= n;
  m.psnr_db /= n;
  m.ssim /= n;
  m.ms_ssim /= n;
  return m;
}

}  // namespace

std::vector<MetricMeans> MetricReport::per_phase() const {
  std::map<std::size_t, std::vector<const FrameMetrics*>> by_phase;
  for (const auto& f : frames) by_phase[f.phase].push_back(&f);
  std::vector<MetricMeans> out;
  for (const auto& [phase, rows] : by_phase) out.push_back(mean_of(phase, rows));
  return out;
}

MetricMeans MetricReport::overall() const {
  std::vector<const FrameMetrics*> rows;
  for (const auto& f : frames) rows.push_back(&f);
  return mean_of(0, rows);
}

MetricMeans MetricReport::case_mean(std::uint64_t case_id) const {
  std::vector<const FrameMetrics*> rows;
  for (const auto& f : frames) {
    if (f.case_id == case_id) rows.push_back(&f);
  }
  return mean_of(0, rows);
}

FrameMetrics frame_metrics(std::uint64_t case_id, std::size_t phase, double time_s,
                           const Image& prediction, const Image& target,
                           std::size_t ms_ssim_levels) {
  FrameMetrics m;
  m.case_id = case_id;
  m.phase = phase;
  m.time_s = time_s;
  m.mse = mse(prediction, target);
  m.mae = mae(prediction, target);
  m.psnr_db = psnr_from_mse(m.mse);
  m.ssim = ssim(prediction, target);
  m.ms_ssim = ms_ssim(prediction, target, ms_ssim_levels);
  return m;
}

MetricReport evaluate_predictions(std::span<const TrainingCase> dataset,
                                  const std::vector<std::vector<Image>>& predictions,
                                  const std::string& source) {
  if (predictions.size() != dataset.size()) {
    throw ContractViolation("prediction list does not match the dataset");
  }
  MetricReport report;
  report.source = source;
  for (std::size_t c = 0; c < dataset.size(); ++c) {
    const auto& tc = dataset[c];
    if (predictions[c].size() != tc.frames.size()) {
      throw ContractViolation("prediction count does not match frame count");
    }
    const std::size_t levels =
        max_ms_ssim_levels(tc.pre_contrast.height(), tc.pre_contrast.width());
    if (levels == 0) throw DataError("images are smaller than the SSIM window");
    if (report.ms_ssim_levels == 0 || levels < report.ms_ssim_levels) {
      report.ms_ssim_levels = levels;
    }
    for (std::size_t i = 0; i < tc.frames.size(); ++i) {
      report.frames.push_back(frame_metrics(tc.case_id, i + 1, tc.frames[i].time_s,
                                            predictions[c][i], tc.frames[i].target, levels));
    }
  }
  return report;
}

MetricReport baseline_report(std::span<const TrainingCase> dataset) {
  std::vector<std::vector<Image>> predictions;
  predictions.reserve(dataset.size());
  for (const auto& c : dataset) {
    predictions.emplace_back(c.frames.size(), c.pre_contrast);
  }
  return evaluate_predictions(dataset, predictions, "baseline");
}

std::string format_report_csv(std::span<const MetricReport> reports) {
  std::ostringstream out;
  const SsimSettings s;
  out << "# ssim: gaussian window " << s.window << "x" << s.window << " sigma "
      << format_double(s.sigma) << " K1 " << format_double(s.k1) << " K2 "
      << format_double(s.k2) << " data_range " << format_double(s.data_range) << "\n";
  for (const auto& r : reports) {
    out << "# " << r.source << ": ms_ssim levels " << r.ms_ssim_levels << "\n";
  }
  out << "source,case_id,phase,time_s,mse,mae,psnr_db,ssim,ms_ssim\n";
  auto num = [](double v) { return format_double(v); };
  for (const auto& r : reports) {
    for (const auto& f : r.frames) {
      out << r.source << ',' << f.case_id << ',' << f.phase << ',' << num(f.time_s) << ','
          << num(f.mse) << ',' << num(f.mae) << ',' << num(f.psnr_db) << ',' << num(f.ssim)
          << ',' << num(f.ms_ssim) << "\n";
    }
  }
  auto mean_row = [&](const std::string& source, const MetricMeans& m) {
    out << source << ",mean," << (m.phase == 0 ? std::string("all") : std::to_string(m.phase))
        << ",," << num(m.mse) << ',' << num(m.mae) << ',' << num(m.psnr_db) << ','
        << num(m.ssim) << ',' << num(m.ms_ssim) << "\n";
  };
  for (const auto& r : reports) {
    for (const auto& m : r.per_phase()) mean_row(r.source, m);
    mean_row(r.source, r.overall());
  }
  return out.str();
}

}  // namespace tenca
