#include "sdigs/splat/metrics.hpp"

#include "sdigs/core/error.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace sdigs;

namespace {

// Direct (non-separable) SSIM reference: explicit 2D window weights and
// per-window accumulation, structured nothing like the production code.
double ssim_oracle(const Image& a, const Image& b, int window, double sigma,
                   double k1, double k2) {
  const int half = window / 2;
  std::vector<double> w2(static_cast<size_t>(window) * window);
  double wsum = 0.0;
  for (int i = 0; i < window; ++i) {
    for (int j = 0; j < window; ++j) {
      const double di = i - half, dj = j - half;
      w2[i * window + j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
      wsum += w2[i * window + j];
    }
  }
  for (double& w : w2) w /= wsum;

  const double c1 = k1 * k1, c2 = k2 * k2;
  double total = 0.0;
  int64_t count = 0;
  for (int c = 0; c < 3; ++c) {
    for (int y0 = 0; y0 + window <= a.height; ++y0) {
      for (int x0 = 0; x0 + window <= a.width; ++x0) {
        double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
        for (int i = 0; i < window; ++i) {
          for (int j = 0; j < window; ++j) {
            const double w = w2[i * window + j];
            const double xv = a.at(x0 + j, y0 + i, c);
            const double yv = b.at(x0 + j, y0 + i, c);
            mx += w * xv;
            my += w * yv;
            mxx += w * xv * xv;
            myy += w * yv * yv;
            mxy += w * xv * yv;
          }
        }
        const double vx = mxx - mx * mx;
        const double vy = myy - my * my;
        const double cov = mxy - mx * my;
        total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                 ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++count;
      }
    }
  }
  return total / count;
}

Image random_image(int w, int h, uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  Image img(w, h);
  for (double& v : img.data) v = uni(rng);
  return img;
}

}  // namespace

TEST_CASE("mse and psnr closed forms") {
  Image a(8, 6, 0.5);
  Image b(8, 6, 0.25);
  CHECK(mse(a, a) == 0.0);
  CHECK(mse(a, b) == doctest::Approx(0.0625).epsilon(1e-12));
  // PSNR of a uniform 0.25 offset: 10*log10(1/0.0625) = 10*log10(16).
  CHECK(psnr(a, b) == doctest::Approx(10.0 * std::log10(16.0)).epsilon(1e-12));
}

TEST_CASE("psnr of identical images is +infinity and prints as inf") {
  Image a = random_image(10, 10, 7);
  const double p = psnr(a, a);
  CHECK(std::isinf(p));
  CHECK(p > 0);
  CHECK(format_metric(p) == "inf");
}

TEST_CASE("metric formatting") {
  CHECK(format_metric(1.5) == "1.500000");
  CHECK(format_metric(-0.25) == "-0.250000");
  CHECK(format_metric(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(format_metric(std::nan("")) == "nan");
}

TEST_CASE("metrics reject mismatched or empty shapes") {
  Image a(8, 8, 0.0), b(8, 9, 0.0), e;
  CHECK_THROWS_AS(mse(a, b), DataError);
  CHECK_THROWS_AS(psnr(a, b), DataError);
  CHECK_THROWS_AS(ssim(a, b), DataError);
  CHECK_THROWS_AS(mse(e, e), DataError);
}

TEST_CASE("ssim of an image with itself is 1") {
  Image a = random_image(16, 13, 21);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ssim of two flat images matches the luminance term") {
  // Zero variance everywhere: SSIM reduces to (2ab+c1)/(a^2+b^2+c1).
  Image a(12, 12, 1.0);
  Image b(12, 12, 0.0);
  const double c1 = 0.01 * 0.01;
  CHECK(ssim(a, b) == doctest::Approx(c1 / (1.0 + c1)).epsilon(1e-12));
}

TEST_CASE("ssim matches the direct window oracle") {
  for (uint32_t seed = 0; seed < 6; ++seed) {
    const int w = 11 + static_cast<int>(seed % 3) * 3;
    const int h = 12 + static_cast<int>(seed % 4) * 2;
    Image a = random_image(w, h, 100 + seed);
    Image b = random_image(w, h, 200 + seed);
    CHECK(ssim(a, b) ==
          doctest::Approx(ssim_oracle(a, b, 11, 1.5, 0.01, 0.03)).epsilon(1e-10));
    // Correlated pair: b = 0.5*(a + noise) exercises nonzero covariance.
    Image c = a;
    for (size_t i = 0; i < c.data.size(); ++i)
      c.data[i] = 0.5 * (c.data[i] + b.data[i]);
    CHECK(ssim(a, c) ==
          doctest::Approx(ssim_oracle(a, c, 11, 1.5, 0.01, 0.03)).epsilon(1e-10));
  }
}

TEST_CASE("ssim parameter validation") {
  Image a = random_image(16, 16, 3);
  SsimParams even;
  even.window = 10;
  CHECK_THROWS_AS(ssim(a, a, even), UsageError);
  SsimParams bad_sigma;
  bad_sigma.sigma = 0.0;
  CHECK_THROWS_AS(ssim(a, a, bad_sigma), UsageError);
  Image tiny = random_image(10, 10, 4);  // smaller than the 11x11 window
  CHECK_THROWS_AS(ssim(tiny, tiny), UsageError);
}

TEST_CASE("ssim penalizes structural noise more than a constant shift") {
  Image a = random_image(24, 24, 9);
  Image shifted = a;
  for (double& v : shifted.data) v = std::min(1.0, v * 0.9 + 0.05);
  Image noisy = a;
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> uni(-0.3, 0.3);
  for (double& v : noisy.data) v = std::clamp(v + uni(rng), 0.0, 1.0);
  CHECK(ssim(a, shifted) > ssim(a, noisy));
}
