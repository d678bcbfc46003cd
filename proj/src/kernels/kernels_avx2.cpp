// AVX2 kernel backend. Mirrors the scalar backend operation-for-operation:
// same exp polynomial, same operand ordering, no FMA, and the lane-striped
// reduction layout documented in kernels.hpp. The equivalence tests assert
// bitwise identity against the scalar backend, so any change here must keep
// the two in lockstep.

#include "sdigs/kernels/kernels.hpp"

#include "exp_core.hpp"

#include <immintrin.h>

namespace sdigs::kernels {
namespace {

using detail::exp_one;

// Packed mirror of detail::exp_one. Out-of-range and NaN lanes are fixed up
// with blends; the main path may compute garbage for them, which is discarded.
inline __m256d exp4(__m256d x) {
  const __m256d nd =
      _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(detail::kExpLog2E)),
                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_sub_pd(x, _mm256_mul_pd(nd, _mm256_set1_pd(detail::kExpLn2Hi)));
  r = _mm256_sub_pd(r, _mm256_mul_pd(nd, _mm256_set1_pd(detail::kExpLn2Lo)));
  const __m256d rr = _mm256_mul_pd(r, r);
  __m256d p = _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(detail::kExpP0), rr),
                            _mm256_set1_pd(detail::kExpP1));
  p = _mm256_add_pd(_mm256_mul_pd(p, rr), _mm256_set1_pd(detail::kExpP2));
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(detail::kExpQ0), rr),
                            _mm256_set1_pd(detail::kExpQ1));
  q = _mm256_add_pd(_mm256_mul_pd(q, rr), _mm256_set1_pd(detail::kExpQ2));
  q = _mm256_add_pd(_mm256_mul_pd(q, rr), _mm256_set1_pd(detail::kExpQ3));
  const __m256d s = _mm256_add_pd(p, p);
  const __m256d d = _mm256_sub_pd(q, p);
  __m256d y = _mm256_add_pd(_mm256_div_pd(s, d), _mm256_set1_pd(1.0));
  // 2^n as 2^(n>>1) * 2^(n-(n>>1)); n fits int32 for in-range x.
  const __m128i n32 = _mm256_cvtpd_epi32(nd);
  const __m128i n1 = _mm_srai_epi32(n32, 1);
  const __m128i n2 = _mm_sub_epi32(n32, n1);
  const __m256i bias = _mm256_set1_epi64x(1023);
  const __m256d s1 = _mm256_castsi256_pd(
      _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(n1), bias), 52));
  const __m256d s2 = _mm256_castsi256_pd(
      _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(n2), bias), 52));
  y = _mm256_mul_pd(_mm256_mul_pd(y, s1), s2);
  const __m256d over =
      _mm256_cmp_pd(x, _mm256_set1_pd(detail::kExpOverflow), _CMP_GT_OQ);
  const __m256d under =
      _mm256_cmp_pd(x, _mm256_set1_pd(detail::kExpUnderflow), _CMP_LT_OQ);
  const __m256d unord = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  y = _mm256_blendv_pd(y, _mm256_set1_pd(std::numeric_limits<double>::infinity()), over);
  y = _mm256_blendv_pd(y, _mm256_setzero_pd(), under);
  y = _mm256_blendv_pd(y, x, unord);
  return y;
}

void exp_pd_avx2(const double* x, double* y, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, exp4(_mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) y[i] = exp_one(x[i]);
}

double sq_diff_sum_avx2(const double* a, const double* b, size_t n) {
  __m256d vacc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    vacc = _mm256_add_pd(vacc, _mm256_mul_pd(d, d));
  }
  alignas(32) double acc[4];
  _mm256_store_pd(acc, vacc);
  for (; i < n; ++i) {
    double d = a[i] - b[i];
    acc[i & 3] += d * d;
  }
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

void adam_step_avx2(double* param, double* m, double* v, const double* grad,
                    size_t n, double lr, double beta1, double beta2, double eps,
                    double bias1, double bias2) {
  const double omb1 = 1.0 - beta1;
  const double omb2 = 1.0 - beta2;
  const __m256d vb1 = _mm256_set1_pd(beta1), vomb1 = _mm256_set1_pd(omb1);
  const __m256d vb2 = _mm256_set1_pd(beta2), vomb2 = _mm256_set1_pd(omb2);
  const __m256d vbias1 = _mm256_set1_pd(bias1), vbias2 = _mm256_set1_pd(bias2);
  const __m256d vlr = _mm256_set1_pd(lr), veps = _mm256_set1_pd(eps);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d g = _mm256_loadu_pd(grad + i);
    __m256d mi = _mm256_add_pd(_mm256_mul_pd(vb1, _mm256_loadu_pd(m + i)),
                               _mm256_mul_pd(vomb1, g));
    __m256d vi = _mm256_add_pd(_mm256_mul_pd(vb2, _mm256_loadu_pd(v + i)),
                               _mm256_mul_pd(vomb2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    __m256d mhat = _mm256_mul_pd(mi, vbias1);
    __m256d vhat = _mm256_mul_pd(vi, vbias2);
    __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
    __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, mhat), denom);
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  for (; i < n; ++i) {
    double g = grad[i];
    double mi = (beta1 * m[i]) + (omb1 * g);
    double vi = (beta2 * v[i]) + (omb2 * (g * g));
    m[i] = mi;
    v[i] = vi;
    double mhat = mi * bias1;
    double vhat = vi * bias2;
    double denom = std::sqrt(vhat) + eps;
    param[i] -= (lr * mhat) / denom;
  }
}

// Scalar forward body, shared by the vector kernel's tail. Identical to the
// scalar backend's loop body.
inline void fwd_one(SplatRowFwd& a, int i) {
  double T = a.transmittance[i];
  if (!(T >= kMinTransmittance)) return;
  double dx = (a.x0 + i) - a.cu;
  double q = ((a.ca * dx) * dx + a.tb * dx) + a.tc;
  if (!(q <= kMaxSupportQ)) return;
  double w = exp_one(-0.5 * q);
  double al = a.alpha * w;
  if (al > kMaxAlpha) al = kMaxAlpha;
  double weight = al * T;
  a.ch[0][i] += a.color[0] * weight;
  a.ch[1][i] += a.color[1] * weight;
  a.ch[2][i] += a.color[2] * weight;
  a.transmittance[i] = T * (1.0 - al);
  a.last_splat[i] = a.index;
}

void splat_row_fwd_avx2(SplatRowFwd& a) {
  const __m256d vca = _mm256_set1_pd(a.ca);
  const __m256d vtb = _mm256_set1_pd(a.tb);
  const __m256d vtc = _mm256_set1_pd(a.tc);
  const __m256d vcu = _mm256_set1_pd(a.cu);
  const __m256d valpha = _mm256_set1_pd(a.alpha);
  const __m256d vone = _mm256_set1_pd(1.0);
  const __m256d vhalfneg = _mm256_set1_pd(-0.5);
  const __m256d vqmax = _mm256_set1_pd(kMaxSupportQ);
  const __m256d vtmin = _mm256_set1_pd(kMinTransmittance);
  const __m256d valmax = _mm256_set1_pd(kMaxAlpha);
  const __m256d iota = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  int i = 0;
  for (; i + 4 <= a.count; i += 4) {
    __m256d T = _mm256_loadu_pd(a.transmittance + i);
    __m256d xv = _mm256_add_pd(_mm256_set1_pd(static_cast<double>(a.x0 + i)), iota);
    __m256d dx = _mm256_sub_pd(xv, vcu);
    __m256d q = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(_mm256_mul_pd(vca, dx), dx),
                      _mm256_mul_pd(vtb, dx)),
        vtc);
    __m256d mask = _mm256_and_pd(_mm256_cmp_pd(T, vtmin, _CMP_GE_OQ),
                                 _mm256_cmp_pd(q, vqmax, _CMP_LE_OQ));
    int bits = _mm256_movemask_pd(mask);
    if (bits == 0) continue;
    __m256d w = exp4(_mm256_mul_pd(vhalfneg, q));
    __m256d al = _mm256_min_pd(_mm256_mul_pd(valpha, w), valmax);
    __m256d weight = _mm256_mul_pd(al, T);
    for (int c = 0; c < 3; ++c) {
      __m256d old = _mm256_loadu_pd(a.ch[c] + i);
      __m256d upd =
          _mm256_add_pd(old, _mm256_mul_pd(_mm256_set1_pd(a.color[c]), weight));
      _mm256_storeu_pd(a.ch[c] + i, _mm256_blendv_pd(old, upd, mask));
    }
    __m256d tnew = _mm256_mul_pd(T, _mm256_sub_pd(vone, al));
    _mm256_storeu_pd(a.transmittance + i, _mm256_blendv_pd(T, tnew, mask));
    for (int l = 0; l < 4; ++l) {
      if (bits & (1 << l)) a.last_splat[i + l] = a.index;
    }
  }
  for (; i < a.count; ++i) fwd_one(a, i);
}

void splat_row_bwd_avx2(SplatRowBwd& a) {
  const double cbdy = a.cb * a.dy;
  const double ccdy = a.cc * a.dy;
  const double dy2 = a.dy * a.dy;
  __m256d acc_col[3] = {_mm256_setzero_pd(), _mm256_setzero_pd(),
                        _mm256_setzero_pd()};
  __m256d acc_alpha = _mm256_setzero_pd();
  __m256d acc_conic[3] = {_mm256_setzero_pd(), _mm256_setzero_pd(),
                          _mm256_setzero_pd()};
  __m256d acc_cen[2] = {_mm256_setzero_pd(), _mm256_setzero_pd()};

  const __m256d vca = _mm256_set1_pd(a.ca);
  const __m256d vcb = _mm256_set1_pd(a.cb);
  const __m256d vtb = _mm256_set1_pd(a.tb);
  const __m256d vtc = _mm256_set1_pd(a.tc);
  const __m256d vcu = _mm256_set1_pd(a.cu);
  const __m256d valpha = _mm256_set1_pd(a.alpha);
  const __m256d vone = _mm256_set1_pd(1.0);
  const __m256d vhalfneg = _mm256_set1_pd(-0.5);
  const __m256d vqmax = _mm256_set1_pd(kMaxSupportQ);
  const __m256d valmax = _mm256_set1_pd(kMaxAlpha);
  const __m256d vcbdy = _mm256_set1_pd(cbdy);
  const __m256d vccdy = _mm256_set1_pd(ccdy);
  const __m256d vdy2 = _mm256_set1_pd(dy2);
  const __m256d vdy = _mm256_set1_pd(a.dy);
  const __m256d vtwo = _mm256_set1_pd(2.0);
  const __m128i vidx = _mm_set1_epi32(a.index);
  const __m256d iota = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);

  int i = 0;
  for (; i + 4 <= a.count; i += 4) {
    __m128i last =
        _mm_loadu_si128(reinterpret_cast<const __m128i*>(a.last_splat + i));
    // lanes where index > last were never applied in the forward pass
    __m128i skip32 = _mm_cmpgt_epi32(vidx, last);
    __m256d gate = _mm256_castsi256_pd(_mm256_cvtepi32_epi64(skip32));
    __m256d xv = _mm256_add_pd(_mm256_set1_pd(static_cast<double>(a.x0 + i)), iota);
    __m256d dx = _mm256_sub_pd(xv, vcu);
    __m256d q = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(_mm256_mul_pd(vca, dx), dx),
                      _mm256_mul_pd(vtb, dx)),
        vtc);
    __m256d mask =
        _mm256_andnot_pd(gate, _mm256_cmp_pd(q, vqmax, _CMP_LE_OQ));
    int bits = _mm256_movemask_pd(mask);
    if (bits == 0) continue;
    __m256d w = exp4(_mm256_mul_pd(vhalfneg, q));
    __m256d al_raw = _mm256_mul_pd(valpha, w);
    __m256d clamped = _mm256_cmp_pd(al_raw, valmax, _CMP_GT_OQ);
    __m256d al = _mm256_min_pd(al_raw, valmax);
    __m256d om = _mm256_sub_pd(vone, al);
    __m256d t_after = _mm256_loadu_pd(a.transmittance + i);
    __m256d t_prev = _mm256_div_pd(t_after, om);
    _mm256_storeu_pd(a.transmittance + i,
                     _mm256_blendv_pd(t_after, t_prev, mask));
    __m256d awt = _mm256_mul_pd(al, t_prev);
    __m256d dl_da = _mm256_setzero_pd();
    for (int c = 0; c < 3; ++c) {
      __m256d go = _mm256_loadu_pd(a.grad_out[c] + i);
      __m256d colc = _mm256_set1_pd(a.color[c]);
      acc_col[c] = _mm256_add_pd(
          acc_col[c], _mm256_and_pd(_mm256_mul_pd(awt, go), mask));
      __m256d sfx = _mm256_loadu_pd(a.suffix[c] + i);
      __m256d term = _mm256_mul_pd(
          go, _mm256_sub_pd(_mm256_mul_pd(colc, t_prev), _mm256_div_pd(sfx, om)));
      dl_da = _mm256_add_pd(dl_da, term);
      __m256d sfx_new = _mm256_add_pd(sfx, _mm256_mul_pd(colc, awt));
      _mm256_storeu_pd(a.suffix[c] + i, _mm256_blendv_pd(sfx, sfx_new, mask));
    }
    // clamp gate: alpha/position gradients vanish for saturated lanes
    __m256d open = _mm256_andnot_pd(clamped, mask);
    acc_alpha = _mm256_add_pd(acc_alpha,
                              _mm256_and_pd(_mm256_mul_pd(dl_da, w), open));
    __m256d dl_dq = _mm256_mul_pd(_mm256_mul_pd(vhalfneg, w),
                                  _mm256_mul_pd(dl_da, valpha));
    acc_conic[0] = _mm256_add_pd(
        acc_conic[0],
        _mm256_and_pd(_mm256_mul_pd(dl_dq, _mm256_mul_pd(dx, dx)), open));
    acc_conic[1] = _mm256_add_pd(
        acc_conic[1],
        _mm256_and_pd(
            _mm256_mul_pd(dl_dq, _mm256_mul_pd(_mm256_mul_pd(vtwo, dx), vdy)),
            open));
    acc_conic[2] = _mm256_add_pd(
        acc_conic[2], _mm256_and_pd(_mm256_mul_pd(dl_dq, vdy2), open));
    __m256d gx =
        _mm256_mul_pd(vtwo, _mm256_add_pd(_mm256_mul_pd(vca, dx), vcbdy));
    __m256d gy =
        _mm256_mul_pd(vtwo, _mm256_add_pd(_mm256_mul_pd(vcb, dx), vccdy));
    acc_cen[0] = _mm256_sub_pd(acc_cen[0],
                               _mm256_and_pd(_mm256_mul_pd(dl_dq, gx), open));
    acc_cen[1] = _mm256_sub_pd(acc_cen[1],
                               _mm256_and_pd(_mm256_mul_pd(dl_dq, gy), open));
  }

  alignas(32) double lanes_col[3][4], lanes_alpha[4], lanes_conic[3][4],
      lanes_cen[2][4];
  for (int c = 0; c < 3; ++c) {
    _mm256_store_pd(lanes_col[c], acc_col[c]);
    _mm256_store_pd(lanes_conic[c], acc_conic[c]);
  }
  _mm256_store_pd(lanes_alpha, acc_alpha);
  _mm256_store_pd(lanes_cen[0], acc_cen[0]);
  _mm256_store_pd(lanes_cen[1], acc_cen[1]);

  // Tail pixels continue the same lane striping, identical to the scalar body.
  for (; i < a.count; ++i) {
    if (a.index > a.last_splat[i]) continue;
    double dx = (a.x0 + i) - a.cu;
    double q = ((a.ca * dx) * dx + a.tb * dx) + a.tc;
    if (!(q <= kMaxSupportQ)) continue;
    double w = exp_one(-0.5 * q);
    double al_raw = a.alpha * w;
    bool clamped = al_raw > kMaxAlpha;
    double al = clamped ? kMaxAlpha : al_raw;
    double om = 1.0 - al;
    double t_prev = a.transmittance[i] / om;
    a.transmittance[i] = t_prev;
    double awt = al * t_prev;
    int lane = i & 3;
    double dl_da = 0.0;
    for (int c = 0; c < 3; ++c) {
      double go = a.grad_out[c][i];
      lanes_col[c][lane] += awt * go;
      dl_da += go * (a.color[c] * t_prev - a.suffix[c][i] / om);
      a.suffix[c][i] += a.color[c] * awt;
    }
    if (!clamped) {
      lanes_alpha[lane] += dl_da * w;
      double dl_dq = (-0.5 * w) * (dl_da * a.alpha);
      lanes_conic[0][lane] += dl_dq * (dx * dx);
      lanes_conic[1][lane] += dl_dq * ((2.0 * dx) * a.dy);
      lanes_conic[2][lane] += dl_dq * dy2;
      double gx = 2.0 * (a.ca * dx + cbdy);
      double gy = 2.0 * (a.cb * dx + ccdy);
      lanes_cen[0][lane] -= dl_dq * gx;
      lanes_cen[1][lane] -= dl_dq * gy;
    }
  }

  for (int c = 0; c < 3; ++c) {
    a.g_color[c] += (lanes_col[c][0] + lanes_col[c][1]) +
                    (lanes_col[c][2] + lanes_col[c][3]);
    a.g_conic[c] += (lanes_conic[c][0] + lanes_conic[c][1]) +
                    (lanes_conic[c][2] + lanes_conic[c][3]);
  }
  a.g_alpha += (lanes_alpha[0] + lanes_alpha[1]) + (lanes_alpha[2] + lanes_alpha[3]);
  a.g_center[0] +=
      (lanes_cen[0][0] + lanes_cen[0][1]) + (lanes_cen[0][2] + lanes_cen[0][3]);
  a.g_center[1] +=
      (lanes_cen[1][0] + lanes_cen[1][1]) + (lanes_cen[1][2] + lanes_cen[1][3]);
}

}  // namespace

const Kernels& avx2_kernels_impl() {
  static const Kernels k = {
      "avx2",         exp_pd_avx2,        sq_diff_sum_avx2,
      adam_step_avx2, splat_row_fwd_avx2, splat_row_bwd_avx2,
  };
  return k;
}

}  // namespace sdigs::kernels
