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

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tenca/error.hpp"
#include "tenca/metrics.hpp"
#include "tenca/phantom.hpp"
#include "test_util.hpp"

using namespace tenca;
using tenca::testing::random_image;

namespace {

// Direct per-window evaluation of the SSIM formula, written without any
// sharing with the library code.
SsimTerms oracle_ssim(const Image& a, const Image& b) {
  const int win = 11;
  const double sigma = 1.5, c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double g[11][11];
  double total = 0;
  for (int i = 0; i < win; ++i) {
    for (int j = 0; j < win; ++j) {
      const double y = i - 5, x = j - 5;
      g[i][j] = std::exp(-(x * x + y * y) / (2 * sigma * sigma));
      total += g[i][j];
    }
  }
  double ssim_sum = 0, cs_sum = 0;
  int count = 0;
  for (std::size_t r = 0; r + win <= a.height(); ++r) {
    for (std::size_t c = 0; c + win <= a.width(); ++c) {
      double ma = 0, mb = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          const double wgt = g[i][j] / total;
          ma += wgt * a(r + i, c + j);
          mb += wgt * b(r + i, c + j);
        }
      double va = 0, vb = 0, cov = 0;
      for (int i = 0; i < win; ++i)
        for (int j = 0; j < win; ++j) {
          const double wgt = g[i][j] / total;
          const double da = a(r + i, c + j) - ma, db = b(r + i, c + j) - mb;
          va += wgt * da * da;
          vb += wgt * db * db;
          cov += wgt * da * db;
        }
      const double cs = (2 * cov + c2) / (va + vb + c2);
      const double l = (2 * ma * mb + c1) / (ma * ma + mb * mb + c1);
      ssim_sum += l * cs;
      cs_sum += cs;
      ++count;
    }
  }
  return {ssim_sum / count, cs_sum / count};
}

Image oracle_pool(const Image& img) {
  Image out(img.height() / 2, img.width() / 2);
  for (std::size_t r = 0; r < out.height(); ++r)
    for (std::size_t c = 0; c < out.width(); ++c)
      out(r, c) = static_cast<float>(
          (double(img(2 * r, 2 * c)) + img(2 * r, 2 * c + 1) + img(2 * r + 1, 2 * c) +
           img(2 * r + 1, 2 * c + 1)) / 4.0);
  return out;
}

Image blurred_copy(const Image& img, float amount, std::uint64_t seed) {
  Image noise = random_image(img.height(), img.width(), seed, -amount, amount);
  Image out = img;
  for (std::size_t i = 0; i < out.size(); ++i) out.pixels()[i] += noise.pixels()[i];
  return out;
}

}  // namespace

TEST_CASE("psnr") {
  CHECK(psnr_from_mse(0.01) == doctest::Approx(20.0).epsilon(1e-14));
  CHECK(psnr_from_mse(1e-4) == doctest::Approx(40.0).epsilon(1e-14));
  const Image a = random_image(8, 8, 1);
  CHECK(std::isinf(psnr(a, a)));
  CHECK(psnr(a, a) > 0);
  Image b(8, 8, 0.f), c(8, 8, 0.1f);
  CHECK(psnr(b, c) == doctest::Approx(20.0).epsilon(1e-6));
  double prev = std::numeric_limits<double>::infinity();
  for (double m = 1e-6; m < 1; m *= 3) {
    CHECK(psnr_from_mse(m) < prev);
    prev = psnr_from_mse(m);
  }
}

TEST_CASE("identity and symmetry of every metric") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Image a = random_image(64, 64, s);
    const Image b = blurred_copy(a, 0.2f, s + 100);
    CHECK(mse(a, a) == 0);
    CHECK(mae(a, a) == 0);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ms_ssim(a, a, 3) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mse(a, b) == mse(b, a));
    CHECK(mae(a, b) == mae(b, a));
    CHECK(std::abs(ssim(a, b) - ssim(b, a)) < 1e-12);
    CHECK(std::abs(ms_ssim(a, b, 3) - ms_ssim(b, a, 3)) < 1e-12);
    CHECK(mae(a, b) <= std::sqrt(mse(a, b)));
    const double v = ssim(a, b);
    CHECK(v >= -1);
    CHECK(v < 1);
  }
}

TEST_CASE("ssim matches a per-window oracle") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Image a = random_image(23 + s, 30, s);
    const Image b = blurred_copy(a, 0.3f, s + 7);
    const SsimTerms lib = ssim_terms(a, b);
    const SsimTerms ref = oracle_ssim(a, b);
    CHECK(lib.ssim == doctest::Approx(ref.ssim).epsilon(1e-10));
    CHECK(lib.cs == doctest::Approx(ref.cs).epsilon(1e-10));
  }
  const Image zero(16, 16, 0.f), one(16, 16, 1.f);
  const double expect = 1e-4 / (1.0 + 1e-4);
  CHECK(ssim(zero, one) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(oracle_ssim(zero, one).ssim == doctest::Approx(expect).epsilon(1e-12));
  CHECK_THROWS_AS(ssim(Image(10, 20, 0.f), Image(10, 20, 0.f)), DataError);
  CHECK_THROWS_AS(ssim(Image(12, 12, 0.f), Image(12, 13, 0.f)), DataError);
}

TEST_CASE("ms-ssim weights and level selection") {
  const auto w5 = ms_ssim_weights(5);
  const double ref[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};
  for (int i = 0; i < 5; ++i) CHECK(w5[std::size_t(i)] == doctest::Approx(ref[i] / 1.0001));
  const auto w3 = ms_ssim_weights(3);
  const double s3 = 0.0448 + 0.2856 + 0.3001;
  CHECK(w3[0] == doctest::Approx(0.0448 / s3).epsilon(1e-12));
  CHECK(w3[2] == doctest::Approx(0.3001 / s3).epsilon(1e-12));
  CHECK(max_ms_ssim_levels(64, 64) == 3);
  CHECK(max_ms_ssim_levels(168, 168) == 4);
  CHECK(max_ms_ssim_levels(176, 200) == 5);
  CHECK(max_ms_ssim_levels(400, 400) == 5);
  CHECK(max_ms_ssim_levels(11, 11) == 1);
  CHECK(max_ms_ssim_levels(10, 40) == 0);
}

TEST_CASE("ms-ssim on 64x64 at three levels matches the per-level oracle") {
  const auto w = ms_ssim_weights(3);
  for (std::uint64_t s = 0; s < 3; ++s) {
    const Image a = random_image(64, 64, 20 + s);
    const Image b = blurred_copy(a, 0.15f, 40 + s);
    Image x = a, y = b;
    double expect = 1;
    for (std::size_t l = 0; l < 3; ++l) {
      const SsimTerms t = oracle_ssim(x, y);
      if (l < 2) {
        expect *= std::pow(std::max(t.cs, 0.0), w[l]);
        x = oracle_pool(x);
        y = oracle_pool(y);
      } else {
        expect *= std::pow(std::max(t.ssim, 0.0), w[l]);
      }
    }
    CHECK(ms_ssim(a, b, 3) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(downsample2(a) == oracle_pool(a));
  }
}

TEST_CASE("ms-ssim with one level is ssim; small images are rejected") {
  const Image a = random_image(32, 32, 5);
  const Image b = blurred_copy(a, 0.2f, 6);
  CHECK(ms_ssim(a, b, 1) == ssim(a, b));
  CHECK_THROWS_WITH_AS(ms_ssim(a, b, 3), doctest::Contains("44x44"), DataError);
}

TEST_CASE("downsample2 drops the odd row and column") {
  Image img(5, 3, std::vector<float>{1, 2, 9, 3, 4, 9, 5, 6, 9, 7, 8, 9, 9, 9, 9});
  const Image d = downsample2(img);
  CHECK(d.height() == 2);
  CHECK(d.width() == 1);
  CHECK(d(0, 0) == 2.5f);
  CHECK(d(1, 0) == 6.5f);
}

TEST_CASE("baseline of a phantom without enhancement is perfect") {
  PhantomSpec spec;
  spec.gland.amplitude = {0, 0};
  spec.lesion.amplitude = {0, 0};
  spec.noise_sigma = 0;
  const std::vector<TrainingCase> ds{generate_phantom(spec, 1).data,
                                     generate_phantom(spec, 2).data};
  const MetricReport r = baseline_report(ds);
  CHECK(r.source == "baseline");
  CHECK(r.ms_ssim_levels == 3);
  for (const auto& f : r.frames) {
    CHECK(std::isinf(f.psnr_db));
    CHECK(f.ssim == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f.mse == 0);
  }
}

TEST_CASE("baseline ssim falls as the enhancement amplitude grows") {
  double prev = 2;
  for (double amp : {0.0, 0.1, 0.2, 0.4, 0.8}) {
    PhantomSpec spec;
    spec.noise_sigma = 0;
    spec.gland.amplitude = {amp, amp};
    spec.lesion.amplitude = {amp, amp};
    std::vector<TrainingCase> ds;
    for (std::uint64_t i = 0; i < 4; ++i) ds.push_back(generate_phantom(spec, i).data);
    const double s = baseline_report(ds).overall().ssim;
    CHECK(s < prev);
    prev = s;
  }
}

TEST_CASE("evaluate_predictions: perfect predictor, phases and CSV") {
  PhantomSpec spec;
  std::vector<TrainingCase> ds;
  for (std::uint64_t i = 0; i < 5; ++i) ds.push_back(generate_phantom(spec, i).data);
  std::vector<std::vector<Image>> perfect;
  for (const auto& c : ds) {
    perfect.emplace_back();
    for (const auto& f : c.frames) perfect.back().push_back(f.target);
  }
  const MetricReport model = evaluate_predictions(ds, perfect, "model");
  const MetricMeans all = model.overall();
  CHECK(std::isinf(all.psnr_db));
  CHECK(all.ssim == doctest::Approx(1.0));
  CHECK(all.ms_ssim == doctest::Approx(1.0));

  const MetricReport base = baseline_report(ds);
  std::size_t frames = 0, max_k = 0;
  for (const auto& c : ds) frames += c.k(), max_k = std::max(max_k, c.k());
  CHECK(base.frames.size() == frames);
  const auto phases = base.per_phase();
  CHECK(phases.size() == max_k);
  std::size_t counted = 0;
  for (const auto& m : phases) counted += m.count;
  CHECK(counted == frames);
  CHECK(phases[0].count == ds.size());

  double sum = 0;
  for (const auto& f : base.frames)
    if (f.case_id == 2) sum += f.mse;
  CHECK(base.case_mean(2).mse == doctest::Approx(sum / double(ds[2].k())));

  const std::vector<MetricReport> both{model, base};
  const std::string csv = format_report_csv(both);
  CHECK(csv.find("source,case_id,phase,time_s,mse,mae,psnr_db,ssim,ms_ssim\n") !=
        std::string::npos);
  CHECK(csv.find("sigma 1.5") != std::string::npos);
  CHECK(csv.find("baseline,mean,all,,") != std::string::npos);
  CHECK(csv.find("model,mean,1,,") != std::string::npos);
  std::istringstream lines(csv);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] != '#') ++rows;
  CHECK(rows == 1 + 2 * frames + 2 * (max_k + 1));

  const std::vector<std::vector<Image>> short_preds(ds.size() - 1);
  CHECK_THROWS(evaluate_predictions(ds, short_preds, "model"));
}
