#include "sdigs/kernels/kernels.hpp"

#include "exp_core.hpp"

namespace sdigs::kernels {
namespace {

using detail::exp_one;

void exp_pd_scalar(const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = exp_one(x[i]);
}

double sq_diff_sum_scalar(const double* a, const double* b, size_t n) {
  // Lane-striped partials; see the reduction contract in kernels.hpp.
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  for (size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i];
    acc[i & 3] += d * d;
  }
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

void adam_step_scalar(double* param, double* m, double* v, const double* grad,
                      size_t n, double lr, double beta1, double beta2,
                      double eps, double bias1, double bias2) {
  double omb1 = 1.0 - beta1;
  double omb2 = 1.0 - beta2;
  for (size_t i = 0; i < n; ++i) {
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

void splat_row_fwd_scalar(SplatRowFwd& a) {
  for (int i = 0; i < a.count; ++i) {
    double T = a.transmittance[i];
    if (!(T >= kMinTransmittance)) continue;
    double dx = (a.x0 + i) - a.cu;
    double q = ((a.ca * dx) * dx + a.tb * dx) + a.tc;
    if (!(q <= kMaxSupportQ)) continue;
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
}

void splat_row_bwd_scalar(SplatRowBwd& a) {
  double acc_col[3][4] = {};
  double acc_alpha[4] = {};
  double acc_conic[3][4] = {};
  double acc_cen[2][4] = {};
  double cbdy = a.cb * a.dy;
  double ccdy = a.cc * a.dy;
  double dy2 = a.dy * a.dy;
  for (int i = 0; i < a.count; ++i) {
    if (a.index > a.last_splat[i]) continue;  // never applied in forward
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
      acc_col[c][lane] += awt * go;
      dl_da += go * (a.color[c] * t_prev - a.suffix[c][i] / om);
      a.suffix[c][i] += a.color[c] * awt;
    }
    if (!clamped) {
      acc_alpha[lane] += dl_da * w;
      double dl_dq = (-0.5 * w) * (dl_da * a.alpha);
      acc_conic[0][lane] += dl_dq * (dx * dx);
      acc_conic[1][lane] += dl_dq * ((2.0 * dx) * a.dy);
      acc_conic[2][lane] += dl_dq * dy2;
      double gx = 2.0 * (a.ca * dx + cbdy);
      double gy = 2.0 * (a.cb * dx + ccdy);
      acc_cen[0][lane] -= dl_dq * gx;
      acc_cen[1][lane] -= dl_dq * gy;
    }
  }
  for (int c = 0; c < 3; ++c) {
    a.g_color[c] += (acc_col[c][0] + acc_col[c][1]) + (acc_col[c][2] + acc_col[c][3]);
    a.g_conic[c] +=
        (acc_conic[c][0] + acc_conic[c][1]) + (acc_conic[c][2] + acc_conic[c][3]);
  }
  a.g_alpha += (acc_alpha[0] + acc_alpha[1]) + (acc_alpha[2] + acc_alpha[3]);
  a.g_center[0] += (acc_cen[0][0] + acc_cen[0][1]) + (acc_cen[0][2] + acc_cen[0][3]);
  a.g_center[1] += (acc_cen[1][0] + acc_cen[1][1]) + (acc_cen[1][2] + acc_cen[1][3]);
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k = {
      "scalar",          exp_pd_scalar,        sq_diff_sum_scalar,
      adam_step_scalar,  splat_row_fwd_scalar, splat_row_bwd_scalar,
  };
  return k;
}

}  // namespace sdigs::kernels
