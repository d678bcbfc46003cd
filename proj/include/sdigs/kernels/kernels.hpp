#pragma once

#include <cstddef>
#include <cstdint>

namespace sdigs::kernels {

// Numeric conventions of the splat compositing kernels. The same constants
// gate the forward and backward passes so both see the same active set.
inline constexpr double kMinTransmittance = 1e-4;  // pixel saturation cutoff
inline constexpr double kMaxAlpha = 0.999;         // per-splat alpha clamp
inline constexpr double kMaxSupportQ = 9.0;        // 3-sigma support (q = d^T conic d)

// One splat crossing one raster row. The caller precomputes the row constants
// dy = y - cv, tb = (2*cb)*dy and tc = (cc*dy)*dy once, so every backend
// evaluates the conic quadratic with the exact same operation order:
//   q = ((ca*dx)*dx + tb*dx) + tc
// Slot [i] of each row slice addresses pixel x = x0 + i.
struct SplatRowFwd {
  double ca = 0, cb = 0, cc = 0;  // conic (inverse 2d covariance)
  double cu = 0;                  // splat center, u
  double dy = 0, tb = 0, tc = 0;  // row constants (see above)
  double alpha = 0;               // post-sigmoid opacity
  double color[3] = {0, 0, 0};
  int32_t index = 0;              // depth-order index of this splat
  int x0 = 0;
  int count = 0;
  double* ch[3] = {nullptr, nullptr, nullptr};  // channel planes, row slices
  double* transmittance = nullptr;
  int32_t* last_splat = nullptr;  // depth-order index of last applied splat
};

// Backward counterpart. `transmittance` enters holding the value *after* this
// splat was composited and leaves holding the value before it (reverse
// reconstruction); `suffix` accumulates sum(color_k * alpha_k * T_k) over the
// splats behind the current one.
//
// The g_* outputs are += accumulated. Reductions over pixels are defined as
// four lane-striped partial sums (pixel i contributes to partial i & 3)
// combined as (s0 + s1) + (s2 + s3); the scalar backend implements the same
// striping so both backends produce identical bits.
struct SplatRowBwd {
  double ca = 0, cb = 0, cc = 0;
  double cu = 0;
  double dy = 0, tb = 0, tc = 0;
  double alpha = 0;
  double color[3] = {0, 0, 0};
  int32_t index = 0;
  int x0 = 0;
  int count = 0;
  const double* grad_out[3] = {nullptr, nullptr, nullptr};  // dL/dC planes
  double* suffix[3] = {nullptr, nullptr, nullptr};
  double* transmittance = nullptr;
  const int32_t* last_splat = nullptr;
  // outputs
  double g_color[3] = {0, 0, 0};
  double g_alpha = 0;
  double g_conic[3] = {0, 0, 0};
  double g_center[2] = {0, 0};
};

// A kernel backend. All backends implement the same IEEE-754 double
// operation sequences (no FMA contraction, shared polynomial exp), so their
// outputs are bitwise identical; the equivalence tests assert that.
struct Kernels {
  const char* name;
  // y[i] = exp(x[i]); Cephes-style rational polynomial, |x| <= 709 exact
  // range, overflow -> +inf, underflow -> 0, NaN propagates.
  void (*exp_pd)(const double* x, double* y, size_t n);
  // sum((a[i]-b[i])^2), lane-striped accumulation as documented above.
  double (*sq_diff_sum)(const double* a, const double* b, size_t n);
  // One Adam step over a flat parameter block. bias1/bias2 are the
  // 1/(1-beta^t) correction factors, computed once by the caller.
  void (*adam_step)(double* param, double* m, double* v, const double* grad,
                    size_t n, double lr, double beta1, double beta2, double eps,
                    double bias1, double bias2);
  void (*splat_row_fwd)(SplatRowFwd& args);
  void (*splat_row_bwd)(SplatRowBwd& args);
};

enum class Backend { automatic, scalar, avx2 };

// Active backend: chosen on first use from SDIGS_KERNELS (scalar|avx2|auto)
// or CPU detection, unless select_backend was called first.
const Kernels& active();
void select_backend(Backend backend);  // UsageError if unsupported

const Kernels& scalar_kernels();
const Kernels* avx2_kernels();  // nullptr when not built or not supported
bool avx2_supported();

}  // namespace sdigs::kernels
