#include "sdigs/splat/metrics.hpp"

#include "sdigs/core/error.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

namespace sdigs {
namespace {

// Normalized 1D Gaussian taps; the 2D window is their outer product.
std::vector<double> gaussian_taps(int window, double sigma) {
  std::vector<double> taps(window);
  const int half = window / 2;
  double sum = 0.0;
  for (int i = 0; i < window; ++i) {
    const double d = i - half;
    taps[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += taps[i];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Valid-region separable convolution: input H x W, output (H-w+1) x (W-w+1).
std::vector<double> convolve_valid(const std::vector<double>& in, int w, int h,
                                   const std::vector<double>& taps, int* out_w,
                                   int* out_h) {
  const int window = static_cast<int>(taps.size());
  const int cw = w - window + 1;
  const int ch = h - window + 1;
  *out_w = cw;
  *out_h = ch;
  // Horizontal pass (full rows), then vertical pass.
  std::vector<double> mid(static_cast<size_t>(h) * cw);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < cw; ++x) {
      double acc = 0.0;
      for (int k = 0; k < window; ++k) acc += taps[k] * in[y * w + x + k];
      mid[static_cast<size_t>(y) * cw + x] = acc;
    }
  }
  std::vector<double> out(static_cast<size_t>(ch) * cw);
  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < cw; ++x) {
      double acc = 0.0;
      for (int k = 0; k < window; ++k)
        acc += taps[k] * mid[static_cast<size_t>(y + k) * cw + x];
      out[static_cast<size_t>(y) * cw + x] = acc;
    }
  }
  return out;
}

void require_same_shape(const Image& a, const Image& b, const char* fn) {
  if (a.width <= 0 || a.height <= 0)
    throw DataError(std::string(fn) + ": empty image");
  if (!a.same_shape(b))
    throw DataError(std::string(fn) + ": image shapes differ");
}

}  // namespace

double mse(const Image& a, const Image& b) {
  require_same_shape(a, b, "mse");
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.data.size());
}

double psnr(const Image& a, const Image& b) {
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / m);
}

double ssim(const Image& a, const Image& b, const SsimParams& params) {
  require_same_shape(a, b, "ssim");
  if (params.window < 1 || params.window % 2 == 0)
    throw UsageError("ssim: window must be odd and positive");
  if (!(params.sigma > 0.0)) throw UsageError("ssim: sigma must be positive");
  if (a.width < params.window || a.height < params.window)
    throw UsageError("ssim: image smaller than the window");

  const std::vector<double> taps = gaussian_taps(params.window, params.sigma);
  const double c1 = (params.k1 * params.k1);  // L = 1
  const double c2 = (params.k2 * params.k2);
  const int w = a.width, h = a.height;
  const size_t npx = static_cast<size_t>(w) * h;

  std::vector<double> x(npx), y(npx), xx(npx), yy(npx), xy(npx);
  double total = 0.0;
  int64_t count = 0;
  for (int c = 0; c < 3; ++c) {
    for (size_t p = 0; p < npx; ++p) {
      const double xv = a.data[3 * p + c];
      const double yv = b.data[3 * p + c];
      x[p] = xv;
      y[p] = yv;
      xx[p] = xv * xv;
      yy[p] = yv * yv;
      xy[p] = xv * yv;
    }
    int cw = 0, chh = 0;
    const std::vector<double> mu_x = convolve_valid(x, w, h, taps, &cw, &chh);
    const std::vector<double> mu_y = convolve_valid(y, w, h, taps, &cw, &chh);
    const std::vector<double> mu_xx = convolve_valid(xx, w, h, taps, &cw, &chh);
    const std::vector<double> mu_yy = convolve_valid(yy, w, h, taps, &cw, &chh);
    const std::vector<double> mu_xy = convolve_valid(xy, w, h, taps, &cw, &chh);
    for (size_t p = 0; p < mu_x.size(); ++p) {
      const double mx = mu_x[p], my = mu_y[p];
      const double var_x = mu_xx[p] - mx * mx;
      const double var_y = mu_yy[p] - my * my;
      const double cov = mu_xy[p] - mx * my;
      const double num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
      const double den = (mx * mx + my * my + c1) * (var_x + var_y + c2);
      total += num / den;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

std::string format_metric(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return std::string(buf);
}

}  // namespace sdigs
