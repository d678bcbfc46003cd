#pragma once

#include "sdigs/core/types.hpp"

#include <string>

namespace sdigs {

// Mean squared error over all pixels and channels. DataError on shape
// mismatch or empty images.
double mse(const Image& a, const Image& b);

// 10 * log10(1 / MSE) for unit dynamic range; +infinity for identical images.
double psnr(const Image& a, const Image& b);

struct SsimParams {
  int window = 11;      // odd
  double sigma = 1.5;   // Gaussian window std-dev
  double k1 = 0.01;
  double k2 = 0.03;
};

// Mean SSIM with a Gaussian-weighted window, evaluated on fully valid window
// positions only and averaged over the three channels. Images must be at
// least window x window.
double ssim(const Image& a, const Image& b, const SsimParams& params = {});

// Fixed-precision metric formatting; infinities print as "inf"/"-inf".
std::string format_metric(double value);

}  // namespace sdigs
