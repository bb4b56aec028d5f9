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

#ifndef TENCA_METRICS_HPP_
#define TENCA_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tenca/image.hpp"
#include "tenca/training_case.hpp"

namespace tenca {

// Gaussian-window SSIM settings (11x11, sigma 1.5, K1 = 0.01, K2 = 0.03).
struct SsimSettings {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double data_range = 1.0;
};

double mse(const Image& a, const Image& b);
double mae(const Image& a, const Image& b);

// 10 log10(peak^2 / mse); +infinity when the images are identical.
double psnr(const Image& a, const Image& b, double peak = 1.0);
double psnr_from_mse(double mse_value, double peak = 1.0);

struct SsimTerms {
  double ssim = 0.0;  // mean of luminance * contrast-structure
  double cs = 0.0;    // mean of contrast-structure alone
};

// Means over all valid (fully inside) window positions. Throws DataError if
// the image is smaller than the window.
SsimTerms ssim_terms(const Image& a, const Image& b, const SsimSettings& s = {});
double ssim(const Image& a, const Image& b, const SsimSettings& s = {});

// 2x2 mean pooling (odd trailing row/column dropped).
Image downsample2(const Image& img);

// Standard five-scale weights, truncated to `levels` and renormalized.
std::vector<double> ms_ssim_weights(std::size_t levels);

// Largest level count <= 5 with min(h, w) >= 2^(levels-1) * window.
std::size_t max_ms_ssim_levels(std::size_t height, std::size_t width,
                               const SsimSettings& s = {});

// Product of clamped per-scale contrast-structure terms and the coarsest
// full SSIM, each raised to its weight.
double ms_ssim(const Image& a, const Image& b, std::size_t levels = 5,
               const SsimSettings& s = {});

struct FrameMetrics {
  std::uint64_t case_id = 0;
  std::size_t phase = 0;  // 1-based frame index
  double time_s = 0.0;
  double mse = 0.0;
  double mae = 0.0;
  double psnr_db = 0.0;
  double ssim = 0.0;
  double ms_ssim = 0.0;
};

// Means of a set of frame rows. phase == 0 stands for "all phases".
struct MetricMeans {
  std::size_t phase = 0;
  std::size_t count = 0;
  double mse = 0.0;
  double mae = 0.0;
  double psnr_db = 0.0;
  double ssim = 0.0;
  double ms_ssim = 0.0;
};

struct MetricReport {
  std::string source;  // "model" or "baseline"
  std::size_t ms_ssim_levels = 0;
  std::vector<FrameMetrics> frames;

  std::vector<MetricMeans> per_phase() const;
  MetricMeans overall() const;
  // Mean over the frames of one case.
  MetricMeans case_mean(std::uint64_t case_id) const;
};

FrameMetrics frame_metrics(std::uint64_t case_id, std::size_t phase, double time_s,
                           const Image& prediction, const Image& target,
                           std::size_t ms_ssim_levels);

// predictions[c][i] is the prediction for frame i of dataset[c].
MetricReport evaluate_predictions(std::span<const TrainingCase> dataset,
                                  const std::vector<std::vector<Image>>& predictions,
                                  const std::string& source);

// Every frame predicted by a copy of its pre-contrast image.
MetricReport baseline_report(std::span<const TrainingCase> dataset);

// CSV with per-frame rows followed by per-phase and overall mean rows.
std::string format_report_csv(std::span<const MetricReport> reports);

}  // namespace tenca

#endif  // TENCA_METRICS_HPP_
