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

#ifndef TENCA_PHANTOM_HPP_
#define TENCA_PHANTOM_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tenca/image.hpp"
#include "tenca/training_case.hpp"

namespace tenca {

// A: peak-scale amplitude, alpha: uptake rate (1/s), beta: washout rate (1/s).
struct Kinetics {
  double amplitude = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

// A * (1 - exp(-alpha t)) * exp(-beta t).
double enhancement_curve(double amplitude, double alpha, double beta, double t_s);
inline double enhancement_curve(const Kinetics& k, double t_s) {
  return enhancement_curve(k.amplitude, k.alpha, k.beta, t_s);
}

// Time of maximum enhancement, ln((alpha + beta) / beta) / alpha; +inf when
// beta == 0.
double peak_time(double alpha, double beta);

struct Range {
  double min = 0.0;
  double max = 0.0;
};

// One tissue class: elliptic regions with a pre-contrast offset and kinetic
// parameters drawn per region from the given ranges.
struct TissueClass {
  std::size_t count_min = 0;
  std::size_t count_max = 0;
  Range radius;      // pixels, before scaling by min(h, w) / 64
  double pre_offset = 0.0;
  Range amplitude;
  Range alpha;
  Range beta;
};

struct PhantomSpec {
  std::size_t height = 64;
  std::size_t width = 64;
  double background = 0.2;
  double background_variation = 0.05;
  TissueClass gland{1, 2, {8.0, 14.0}, 0.12, {0.08, 0.15}, {0.002, 0.004}, {0.0, 0.0}};
  TissueClass lesion{1, 3, {3.0, 6.0}, 0.25, {0.25, 0.4}, {0.01, 0.03}, {0.0005, 0.002}};
  double noise_sigma = 0.01;
  std::size_t k_min = 2;
  std::size_t k_max = 5;
  double max_time_s = kMaxTimeSeconds;
  double delta_t_s = 8.0;  // time grid the sampled acquisition times snap near
  std::uint64_t seed = 0;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Noise-free ground truth of a phantom, evaluable at any time.
class DenseTruth {
 public:
  DenseTruth() = default;
  DenseTruth(std::size_t height, std::size_t width, std::vector<double> baseline,
             std::vector<std::uint16_t> labels, std::vector<Kinetics> regions);

  // clamp01(baseline + curve of the pixel's region at t).
  Image at(double t_s) const;

  // Value before clamping and float rounding (used by frame synthesis).
  double raw(std::size_t pixel, double t_s) const;

  const std::vector<std::uint16_t>& labels() const { return labels_; }
  const std::vector<Kinetics>& regions() const { return regions_; }
  std::size_t height() const { return height_; }
  std::size_t width() const { return width_; }

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<double> baseline_;
  std::vector<std::uint16_t> labels_;  // 0 = background, r + 1 = regions_[r]
  std::vector<Kinetics> regions_;
};

struct Phantom {
  TrainingCase data;
  DenseTruth truth;
};

// Deterministic in (spec, case_id). Structure and noise use separate
// streams, so changing noise_sigma leaves the truth unchanged.
Phantom generate_phantom(const PhantomSpec& spec, std::uint64_t case_id);

// Linear-interpolation percentile (q in [0, 100]) of the values.
double percentile(std::span<const float> values, double q);

struct IntensityWindow {
  double low = 0.0;
  double high = 1.0;
};

// 0.02 / 99.98 percentiles of the reference. Throws DataError when the
// reference is constant.
IntensityWindow intensity_window(const Image& reference);

// (image - low) / (high - low), clipped to [0, 1].
Image normalize_intensity(const Image& image, const IntensityWindow& window);
Image normalize_intensity(const Image& image, const Image& reference);

// Normalizes pre-contrast and every frame with the window of the
// pre-contrast image.
TrainingCase normalize_case(const TrainingCase& c);

// size x size window around `center`, shifted inward at the borders.
Image crop_patch(const Image& image, std::size_t center_row, std::size_t center_col,
                 std::size_t size);

// Same window applied to the pre-contrast image and every frame.
TrainingCase crop_case(const TrainingCase& c, std::size_t center_row,
                       std::size_t center_col, std::size_t size);

}  // namespace tenca

#endif  // TENCA_PHANTOM_HPP_
