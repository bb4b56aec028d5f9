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

#include "tenca/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "tenca/error.hpp"
#include "tenca/rng.hpp"

namespace tenca {

double enhancement_curve(double amplitude, double alpha, double beta, double t_s) {
  if (t_s <= 0.0) return 0.0;
  return amplitude * (1.0 - std::exp(-alpha * t_s)) * std::exp(-beta * t_s);
}

double peak_time(double alpha, double beta) {
  if (beta <= 0.0) return std::numeric_limits<double>::infinity();
  return std::log((alpha + beta) / beta) / alpha;
}

namespace {

void check_range(const Range& r, const std::string& name) {
  if (!(r.min <= r.max) || !std::isfinite(r.min) || !std::isfinite(r.max)) {
    throw ConfigError("invalid phantom field '" + name + "': min must be <= max");
  }
}

void check_class(const TissueClass& c, const std::string& name) {
  if (c.count_min > c.count_max) {
    throw ConfigError("invalid phantom field '" + name + ".count': min must be <= max");
  }
  check_range(c.radius, name + ".radius");
  check_range(c.amplitude, name + ".amplitude");
  check_range(c.alpha, name + ".alpha");
  check_range(c.beta, name + ".beta");
  if (c.radius.min <= 0.0) {
    throw ConfigError("invalid phantom field '" + name + ".radius_min': must be > 0");
  }
  if (c.amplitude.min < 0.0) {
    throw ConfigError("invalid phantom field '" + name + ".amplitude_min': must be >= 0");
  }
  if (c.beta.min < 0.0) {
    throw ConfigError("invalid phantom field '" + name + ".beta_min': must be >= 0");
  }
  if (!(c.alpha.min > c.beta.max)) {
    throw ConfigError("invalid phantom field '" + name +
                      ".alpha_min': uptake rate alpha must exceed washout rate beta");
  }
}

double draw(std::mt19937_64& gen, const Range& r) {
  if (r.min == r.max) return r.min;
  return std::uniform_real_distribution<double>(r.min, r.max)(gen);
}

std::size_t draw_count(std::mt19937_64& gen, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(gen);
}

float clamp01f(double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); }

// Paints an ellipse with label `label` into the label map.
void paint_ellipse(std::vector<std::uint16_t>& labels, std::size_t h, std::size_t w,
                   double cy, double cx, double ry, double rx, double angle,
                   std::uint16_t label) {
  const double ca = std::cos(angle);
  const double sa = std::sin(angle);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const double dy = double(i) - cy;
      const double dx = double(j) - cx;
      const double u = (ca * dx + sa * dy) / rx;
      const double v = (-sa * dx + ca * dy) / ry;
      if (u * u + v * v <= 1.0) labels[i * w + j] = label;
    }
  }
}

}  // namespace

void PhantomSpec::validate() const {
  if (height < 16 || width < 16) {
    throw ConfigError("invalid phantom field 'height/width': sizes must be >= 16");
  }
  if (!(background >= 0.0 && background <= 1.0)) {
    throw ConfigError("invalid phantom field 'background': must lie in [0, 1]");
  }
  if (!(background_variation >= 0.0)) {
    throw ConfigError("invalid phantom field 'background_variation': must be >= 0");
  }
  check_class(gland, "gland");
  check_class(lesion, "lesion");
  if (!(noise_sigma >= 0.0)) {
    throw ConfigError("invalid phantom field 'noise_sigma': must be >= 0");
  }
  if (k_min < 1 || k_min > k_max || k_max > kMaxFrames) {
    throw ConfigError("invalid phantom field 'k_min/k_max': need 1 <= k_min <= k_max <= 5");
  }
  if (!(delta_t_s > 0.0)) throw ConfigError("invalid phantom field 'delta_t': must be > 0");
  if (!(max_time_s > 0.0 && max_time_s <= kMaxTimeSeconds)) {
    throw ConfigError("invalid phantom field 'max_time': must lie in (0, 1024]");
  }
  const auto slots = static_cast<std::size_t>(std::floor(max_time_s / delta_t_s));
  if (slots < k_max) {
    throw ConfigError("invalid phantom field 'max_time': too short for k_max distinct steps");
  }
}

DenseTruth::DenseTruth(std::size_t height, std::size_t width, std::vector<double> baseline,
                       std::vector<std::uint16_t> labels, std::vector<Kinetics> regions)
    : height_(height), width_(width), baseline_(std::move(baseline)),
      labels_(std::move(labels)), regions_(std::move(regions)) {}

double DenseTruth::raw(std::size_t pixel, double t_s) const {
  const std::uint16_t label = labels_[pixel];
  double v = baseline_[pixel];
  if (label != 0) v += enhancement_curve(regions_[label - 1], t_s);
  return v;
}

Image DenseTruth::at(double t_s) const {
  Image img(height_, width_);
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = clamp01f(raw(i, t_s));
  return img;
}

Phantom generate_phantom(const PhantomSpec& spec, std::uint64_t case_id) {
  spec.validate();
  const std::size_t h = spec.height;
  const std::size_t w = spec.width;
  const std::uint64_t base = mix64(spec.seed ^ mix64(case_id));
  std::mt19937_64 gen(base);
  std::mt19937_64 noise_gen(mix64(base ^ 0x6e6f697365ULL));

  // Smooth background.
  constexpr double two_pi = 2.0 * std::numbers::pi;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double fy = 0.5 + unit(gen);
  const double fx = 0.5 + unit(gen);
  const double py = unit(gen);
  const double px = unit(gen);
  std::vector<double> baseline(h * w);
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      baseline[i * w + j] =
          spec.background + spec.background_variation *
                                std::sin(two_pi * (fy * double(i) / double(h) + py)) *
                                std::cos(two_pi * (fx * double(j) / double(w) + px));
    }
  }

  // Regions: glands first, lesions painted on top.
  const double scale = double(std::min(h, w)) / 64.0;
  std::vector<std::uint16_t> labels(h * w, 0);
  std::vector<Kinetics> regions;
  std::vector<double> offsets;
  auto place = [&](const TissueClass& tc) {
    const std::size_t n = draw_count(gen, tc.count_min, tc.count_max);
    for (std::size_t r = 0; r < n; ++r) {
      const double ry = draw(gen, tc.radius) * scale;
      const double rx = draw(gen, tc.radius) * scale;
      const double margin = std::max(ry, rx) + 1.0;
      const double cy = margin + unit(gen) * std::max(0.0, double(h) - 2 * margin);
      const double cx = margin + unit(gen) * std::max(0.0, double(w) - 2 * margin);
      const double angle = unit(gen) * std::numbers::pi;
      Kinetics k;
      k.amplitude = draw(gen, tc.amplitude);
      k.alpha = draw(gen, tc.alpha);
      k.beta = draw(gen, tc.beta);
      regions.push_back(k);
      offsets.push_back(tc.pre_offset);
      paint_ellipse(labels, h, w, cy, cx, ry, rx, angle,
                    static_cast<std::uint16_t>(regions.size()));
    }
  };
  place(spec.gland);
  place(spec.lesion);
  for (std::size_t p = 0; p < h * w; ++p) {
    if (labels[p] != 0) baseline[p] += offsets[labels[p] - 1];
  }

  // Acquisition times: k distinct steps of the delta_t grid, each pulled
  // back by less than delta_t / 2 in half-second increments.
  const std::size_t k = draw_count(gen, spec.k_min, spec.k_max);
  const auto slots = static_cast<std::size_t>(std::floor(spec.max_time_s / spec.delta_t_s));
  std::vector<std::size_t> all(slots);
  for (std::size_t s = 0; s < slots; ++s) all[s] = s + 1;
  std::vector<std::size_t> chosen;
  std::sample(all.begin(), all.end(), std::back_inserter(chosen), k, gen);
  std::sort(chosen.begin(), chosen.end());
  const auto max_jitter_halves =
      static_cast<std::size_t>(std::max(0.0, std::ceil(spec.delta_t_s) - 1.0));

  Phantom out;
  out.truth = DenseTruth(h, w, baseline, labels, regions);
  out.data.case_id = case_id;
  out.data.pre_contrast = Image(h, w);
  std::normal_distribution<double> noise(0.0, 1.0);
  {
    auto pre = out.data.pre_contrast.pixels();
    for (std::size_t p = 0; p < h * w; ++p) {
      const double n = noise(noise_gen);
      pre[p] = clamp01f(spec.noise_sigma > 0.0 ? baseline[p] + spec.noise_sigma * n
                                               : baseline[p]);
    }
  }
  for (std::size_t slot : chosen) {
    const double jitter =
        0.5 * double(std::uniform_int_distribution<std::size_t>(0, max_jitter_halves)(gen));
    double t = double(slot) * spec.delta_t_s - std::min(jitter, spec.delta_t_s / 2 - 0.25);
    t = std::max(t, 0.5);
    Frame f;
    f.time_s = t;
    f.target = Image(h, w);
    auto dst = f.target.pixels();
    for (std::size_t p = 0; p < h * w; ++p) {
      const double v = out.truth.raw(p, t);
      const double n = noise(noise_gen);
      dst[p] = clamp01f(spec.noise_sigma > 0.0 ? v + spec.noise_sigma * n : v);
    }
    out.data.frames.push_back(std::move(f));
  }
  return out;
}

double percentile(std::span<const float> values, double q) {
  if (values.empty()) throw DataError("percentile of an empty image");
  if (!(q >= 0.0 && q <= 100.0)) throw ConfigError("percentile must lie in [0, 100]");
  std::vector<double> sorted(values.begin(), values.end());
  const double pos = q / 100.0 * double(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  std::nth_element(sorted.begin(), sorted.begin() + std::ptrdiff_t(lo), sorted.end());
  const double a = sorted[lo];
  double b = a;
  if (hi != lo) b = *std::min_element(sorted.begin() + std::ptrdiff_t(lo) + 1, sorted.end());
  return a + (pos - double(lo)) * (b - a);
}

IntensityWindow intensity_window(const Image& reference) {
  if (reference.empty()) throw DataError("normalization reference is empty");
  IntensityWindow win{percentile(reference.pixels(), 0.02),
                      percentile(reference.pixels(), 99.98)};
  if (!(win.high > win.low)) {
    throw DataError("normalization reference is constant (p99.98 <= p0.02)");
  }
  return win;
}

Image normalize_intensity(const Image& image, const IntensityWindow& window) {
  if (!(window.high > window.low)) throw DataError("empty intensity window");
  Image out(image.height(), image.width());
  const auto src = image.pixels();
  auto dst = out.pixels();
  const double span = window.high - window.low;
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = clamp01f((double(src[i]) - window.low) / span);
  }
  return out;
}

Image normalize_intensity(const Image& image, const Image& reference) {
  return normalize_intensity(image, intensity_window(reference));
}

TrainingCase normalize_case(const TrainingCase& c) {
  const IntensityWindow win = intensity_window(c.pre_contrast);
  TrainingCase out = c;
  out.pre_contrast = normalize_intensity(c.pre_contrast, win);
  for (auto& f : out.frames) f.target = normalize_intensity(f.target, win);
  return out;
}

Image crop_patch(const Image& image, std::size_t center_row, std::size_t center_col,
                 std::size_t size) {
  if (size == 0 || size > image.height() || size > image.width()) {
    throw DataError("patch size " + std::to_string(size) + " exceeds image " +
                    std::to_string(image.height()) + "x" + std::to_string(image.width()));
  }
  auto origin = [size](std::size_t center, std::size_t extent) {
    const long start = long(center) - long(size / 2);
    return static_cast<std::size_t>(std::clamp<long>(start, 0, long(extent - size)));
  };
  const std::size_t r0 = origin(center_row, image.height());
  const std::size_t c0 = origin(center_col, image.width());
  Image out(size, size);
  for (std::size_t i = 0; i < size; ++i) {
    for (std::size_t j = 0; j < size; ++j) out(i, j) = image(r0 + i, c0 + j);
  }
  return out;
}

TrainingCase crop_case(const TrainingCase& c, std::size_t center_row,
                       std::size_t center_col, std::size_t size) {
  TrainingCase out = c;
  out.pre_contrast = crop_patch(c.pre_contrast, center_row, center_col, size);
  for (auto& f : out.frames) f.target = crop_patch(f.target, center_row, center_col, size);
  return out;
}

}  // namespace tenca
