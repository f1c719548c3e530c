#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "pih/kernels.hpp"

// AVX-512 variants (F+VL+DQ). Same blocking scheme as the AVX2 build with
// twice the lane width; scalar tails keep arbitrary shapes exact.

// libmvec vector transcendentals (glibc ships no direct-call header for them)
#if defined(PIH_HAVE_MVEC)
extern "C" {
__m512d _ZGVeN8v_exp(__m512d);
__m512d _ZGVeN8v_tanh(__m512d);
__m512 _ZGVeN16v_expf(__m512);
__m512 _ZGVeN16v_tanhf(__m512);
}
#endif

namespace pih::kern::detail {

namespace {

// ---------------------------------------------------------------- float ----

void matmul_nt_f(const float* a, const float* b, float* c, int m, int n, int k,
                 bool accumulate) {
  const int kv = k & ~15;
  for (int i = 0; i < m; ++i) {
    const float* ai = a + static_cast<size_t>(i) * k;
    float* ci = c + static_cast<size_t>(i) * n;
    int j = 0;
    for (; j + 4 <= n; j += 4) {
      const float* b0 = b + static_cast<size_t>(j) * k;
      const float* b1 = b0 + k;
      const float* b2 = b1 + k;
      const float* b3 = b2 + k;
      __m512 acc0 = _mm512_setzero_ps(), acc1 = _mm512_setzero_ps();
      __m512 acc2 = _mm512_setzero_ps(), acc3 = _mm512_setzero_ps();
      for (int p = 0; p < kv; p += 16) {
        const __m512 av = _mm512_loadu_ps(ai + p);
        acc0 = _mm512_fmadd_ps(av, _mm512_loadu_ps(b0 + p), acc0);
        acc1 = _mm512_fmadd_ps(av, _mm512_loadu_ps(b1 + p), acc1);
        acc2 = _mm512_fmadd_ps(av, _mm512_loadu_ps(b2 + p), acc2);
        acc3 = _mm512_fmadd_ps(av, _mm512_loadu_ps(b3 + p), acc3);
      }
      float s0 = _mm512_reduce_add_ps(acc0);
      float s1 = _mm512_reduce_add_ps(acc1);
      float s2 = _mm512_reduce_add_ps(acc2);
      float s3 = _mm512_reduce_add_ps(acc3);
      for (int p = kv; p < k; ++p) {
        s0 += ai[p] * b0[p];
        s1 += ai[p] * b1[p];
        s2 += ai[p] * b2[p];
        s3 += ai[p] * b3[p];
      }
      if (accumulate) {
        ci[j] += s0;
        ci[j + 1] += s1;
        ci[j + 2] += s2;
        ci[j + 3] += s3;
      } else {
        ci[j] = s0;
        ci[j + 1] = s1;
        ci[j + 2] = s2;
        ci[j + 3] = s3;
      }
    }
    for (; j < n; ++j) {
      const float* bj = b + static_cast<size_t>(j) * k;
      __m512 acc = _mm512_setzero_ps();
      for (int p = 0; p < kv; p += 16)
        acc = _mm512_fmadd_ps(_mm512_loadu_ps(ai + p), _mm512_loadu_ps(bj + p),
                              acc);
      float s = _mm512_reduce_add_ps(acc);
      for (int p = kv; p < k; ++p) s += ai[p] * bj[p];
      ci[j] = accumulate ? ci[j] + s : s;
    }
  }
}

template <bool kTn>
void matmul_bcast_f(const float* a, const float* b, float* c, int m, int n,
                    int k, bool accumulate) {
  constexpr int TILE = 64;  // 4 x 16 floats
  for (int i = 0; i < m; ++i) {
    float* ci = c + static_cast<size_t>(i) * n;
    int j = 0;
    for (; j + TILE <= n; j += TILE) {
      __m512 c0, c1, c2, c3;
      if (accumulate) {
        c0 = _mm512_loadu_ps(ci + j);
        c1 = _mm512_loadu_ps(ci + j + 16);
        c2 = _mm512_loadu_ps(ci + j + 32);
        c3 = _mm512_loadu_ps(ci + j + 48);
      } else {
        c0 = c1 = c2 = c3 = _mm512_setzero_ps();
      }
      for (int p = 0; p < k; ++p) {
        const float as = kTn ? a[static_cast<size_t>(p) * m + i]
                             : a[static_cast<size_t>(i) * k + p];
        const __m512 av = _mm512_set1_ps(as);
        const float* bp = b + static_cast<size_t>(p) * n + j;
        c0 = _mm512_fmadd_ps(av, _mm512_loadu_ps(bp), c0);
        c1 = _mm512_fmadd_ps(av, _mm512_loadu_ps(bp + 16), c1);
        c2 = _mm512_fmadd_ps(av, _mm512_loadu_ps(bp + 32), c2);
        c3 = _mm512_fmadd_ps(av, _mm512_loadu_ps(bp + 48), c3);
      }
      _mm512_storeu_ps(ci + j, c0);
      _mm512_storeu_ps(ci + j + 16, c1);
      _mm512_storeu_ps(ci + j + 32, c2);
      _mm512_storeu_ps(ci + j + 48, c3);
    }
    for (; j + 16 <= n; j += 16) {
      __m512 cv = accumulate ? _mm512_loadu_ps(ci + j) : _mm512_setzero_ps();
      for (int p = 0; p < k; ++p) {
        const float as = kTn ? a[static_cast<size_t>(p) * m + i]
                             : a[static_cast<size_t>(i) * k + p];
        cv = _mm512_fmadd_ps(
            _mm512_set1_ps(as),
            _mm512_loadu_ps(b + static_cast<size_t>(p) * n + j), cv);
      }
      _mm512_storeu_ps(ci + j, cv);
    }
    for (; j < n; ++j) {
      float acc = accumulate ? ci[j] : 0.0f;
      for (int p = 0; p < k; ++p) {
        const float as = kTn ? a[static_cast<size_t>(p) * m + i]
                             : a[static_cast<size_t>(i) * k + p];
        acc += as * b[static_cast<size_t>(p) * n + j];
      }
      ci[j] = acc;
    }
  }
}

// c[m,n] (+)= sum_p outer(a[p,:], b[p,:]); p-outer keeps the small C hot in
// cache and streams a and b once (k is batch*time in the weight-grad GEMMs)
void matmul_tn_f(const float* a, const float* b, float* c, int m, int n, int k,
                 bool accumulate) {
  if (!accumulate)
    std::memset(c, 0, static_cast<size_t>(m) * n * sizeof(float));
  const int nv = n & ~15;
  for (int p = 0; p < k; ++p) {
    const float* ap = a + static_cast<size_t>(p) * m;
    const float* bp = b + static_cast<size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const __m512 av = _mm512_set1_ps(ap[i]);
      float* ci = c + static_cast<size_t>(i) * n;
      int j = 0;
      for (; j < nv; j += 16)
        _mm512_storeu_ps(ci + j, _mm512_fmadd_ps(av, _mm512_loadu_ps(bp + j),
                                                 _mm512_loadu_ps(ci + j)));
      for (; j < n; ++j) ci[j] += ap[i] * bp[j];
    }
  }
}

void matmul_tn_d(const double* a, const double* b, double* c, int m, int n,
                 int k, bool accumulate) {
  if (!accumulate)
    std::memset(c, 0, static_cast<size_t>(m) * n * sizeof(double));
  const int nv = n & ~7;
  for (int p = 0; p < k; ++p) {
    const double* ap = a + static_cast<size_t>(p) * m;
    const double* bp = b + static_cast<size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const __m512d av = _mm512_set1_pd(ap[i]);
      double* ci = c + static_cast<size_t>(i) * n;
      int j = 0;
      for (; j < nv; j += 8)
        _mm512_storeu_pd(ci + j, _mm512_fmadd_pd(av, _mm512_loadu_pd(bp + j),
                                                 _mm512_loadu_pd(ci + j)));
      for (; j < n; ++j) ci[j] += ap[i] * bp[j];
    }
  }
}

void axpy_f(float alpha, const float* x, float* y, int n) {
  const __m512 av = _mm512_set1_ps(alpha);
  int i = 0;
  for (; i + 16 <= n; i += 16)
    _mm512_storeu_ps(y + i, _mm512_fmadd_ps(av, _mm512_loadu_ps(x + i),
                                            _mm512_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_f(float* x, float alpha, int n) {
  const __m512 av = _mm512_set1_ps(alpha);
  int i = 0;
  for (; i + 16 <= n; i += 16)
    _mm512_storeu_ps(x + i, _mm512_mul_ps(av, _mm512_loadu_ps(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void vadd_f(const float* a, const float* b, float* c, int n) {
  int i = 0;
  for (; i + 16 <= n; i += 16)
    _mm512_storeu_ps(
        c + i, _mm512_add_ps(_mm512_loadu_ps(a + i), _mm512_loadu_ps(b + i)));
  for (; i < n; ++i) c[i] = a[i] + b[i];
}

void vmul_f(const float* a, const float* b, float* c, int n) {
  int i = 0;
  for (; i + 16 <= n; i += 16)
    _mm512_storeu_ps(
        c + i, _mm512_mul_ps(_mm512_loadu_ps(a + i), _mm512_loadu_ps(b + i)));
  for (; i < n; ++i) c[i] = a[i] * b[i];
}

void vfma_f(const float* a, const float* b, float* c, int n) {
  int i = 0;
  for (; i + 16 <= n; i += 16)
    _mm512_storeu_ps(c + i,
                     _mm512_fmadd_ps(_mm512_loadu_ps(a + i),
                                     _mm512_loadu_ps(b + i),
                                     _mm512_loadu_ps(c + i)));
  for (; i < n; ++i) c[i] += a[i] * b[i];
}

float dot_f(const float* a, const float* b, int n) {
  __m512 acc = _mm512_setzero_ps();
  int i = 0;
  for (; i + 16 <= n; i += 16)
    acc = _mm512_fmadd_ps(_mm512_loadu_ps(a + i), _mm512_loadu_ps(b + i), acc);
  float s = _mm512_reduce_add_ps(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

float sum_f(const float* x, int n) {
  __m512 acc = _mm512_setzero_ps();
  int i = 0;
  for (; i + 16 <= n; i += 16) acc = _mm512_add_ps(acc, _mm512_loadu_ps(x + i));
  float s = _mm512_reduce_add_ps(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

void tanh_bwd_f(const float* y, const float* dy, float* dx, int n) {
  const __m512 one = _mm512_set1_ps(1.0f);
  int i = 0;
  for (; i + 16 <= n; i += 16) {
    const __m512 yv = _mm512_loadu_ps(y + i);
    const __m512 g = _mm512_fnmadd_ps(yv, yv, one);
    _mm512_storeu_ps(dx + i, _mm512_fmadd_ps(_mm512_loadu_ps(dy + i), g,
                                             _mm512_loadu_ps(dx + i)));
  }
  for (; i < n; ++i) dx[i] += dy[i] * (1.0f - y[i] * y[i]);
}

void sigmoid_bwd_f(const float* y, const float* dy, float* dx, int n) {
  const __m512 one = _mm512_set1_ps(1.0f);
  int i = 0;
  for (; i + 16 <= n; i += 16) {
    const __m512 yv = _mm512_loadu_ps(y + i);
    const __m512 g = _mm512_mul_ps(yv, _mm512_sub_ps(one, yv));
    _mm512_storeu_ps(dx + i, _mm512_fmadd_ps(_mm512_loadu_ps(dy + i), g,
                                             _mm512_loadu_ps(dx + i)));
  }
  for (; i < n; ++i) dx[i] += dy[i] * y[i] * (1.0f - y[i]);
}

void add_bias_f(float* y, const float* bias, int rows, int n) {
  for (int r = 0; r < rows; ++r) {
    float* yr = y + static_cast<size_t>(r) * n;
    int j = 0;
    for (; j + 16 <= n; j += 16)
      _mm512_storeu_ps(yr + j, _mm512_add_ps(_mm512_loadu_ps(yr + j),
                                             _mm512_loadu_ps(bias + j)));
    for (; j < n; ++j) yr[j] += bias[j];
  }
}

// --------------------------------------------------------------- double ----

void matmul_nt_d(const double* a, const double* b, double* c, int m, int n,
                 int k, bool accumulate) {
  const int kv = k & ~7;
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<size_t>(i) * k;
    double* ci = c + static_cast<size_t>(i) * n;
    int j = 0;
    for (; j + 2 <= n; j += 2) {
      const double* b0 = b + static_cast<size_t>(j) * k;
      const double* b1 = b0 + k;
      __m512d acc0 = _mm512_setzero_pd(), acc1 = _mm512_setzero_pd();
      for (int p = 0; p < kv; p += 8) {
        const __m512d av = _mm512_loadu_pd(ai + p);
        acc0 = _mm512_fmadd_pd(av, _mm512_loadu_pd(b0 + p), acc0);
        acc1 = _mm512_fmadd_pd(av, _mm512_loadu_pd(b1 + p), acc1);
      }
      double s0 = _mm512_reduce_add_pd(acc0);
      double s1 = _mm512_reduce_add_pd(acc1);
      for (int p = kv; p < k; ++p) {
        s0 += ai[p] * b0[p];
        s1 += ai[p] * b1[p];
      }
      ci[j] = accumulate ? ci[j] + s0 : s0;
      ci[j + 1] = accumulate ? ci[j + 1] + s1 : s1;
    }
    for (; j < n; ++j) {
      const double* bj = b + static_cast<size_t>(j) * k;
      __m512d acc = _mm512_setzero_pd();
      for (int p = 0; p < kv; p += 8)
        acc = _mm512_fmadd_pd(_mm512_loadu_pd(ai + p), _mm512_loadu_pd(bj + p),
                              acc);
      double s = _mm512_reduce_add_pd(acc);
      for (int p = kv; p < k; ++p) s += ai[p] * bj[p];
      ci[j] = accumulate ? ci[j] + s : s;
    }
  }
}

template <bool kTn>
void matmul_bcast_d(const double* a, const double* b, double* c, int m, int n,
                    int k, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<size_t>(i) * n;
    int j = 0;
    for (; j + 16 <= n; j += 16) {
      __m512d c0, c1;
      if (accumulate) {
        c0 = _mm512_loadu_pd(ci + j);
        c1 = _mm512_loadu_pd(ci + j + 8);
      } else {
        c0 = c1 = _mm512_setzero_pd();
      }
      for (int p = 0; p < k; ++p) {
        const double as = kTn ? a[static_cast<size_t>(p) * m + i]
                              : a[static_cast<size_t>(i) * k + p];
        const __m512d av = _mm512_set1_pd(as);
        const double* bp = b + static_cast<size_t>(p) * n + j;
        c0 = _mm512_fmadd_pd(av, _mm512_loadu_pd(bp), c0);
        c1 = _mm512_fmadd_pd(av, _mm512_loadu_pd(bp + 8), c1);
      }
      _mm512_storeu_pd(ci + j, c0);
      _mm512_storeu_pd(ci + j + 8, c1);
    }
    for (; j < n; ++j) {
      double acc = accumulate ? ci[j] : 0.0;
      for (int p = 0; p < k; ++p) {
        const double as = kTn ? a[static_cast<size_t>(p) * m + i]
                              : a[static_cast<size_t>(i) * k + p];
        acc += as * b[static_cast<size_t>(p) * n + j];
      }
      ci[j] = acc;
    }
  }
}

void axpy_d(double alpha, const double* x, double* y, int n) {
  const __m512d av = _mm512_set1_pd(alpha);
  int i = 0;
  for (; i + 8 <= n; i += 8)
    _mm512_storeu_pd(y + i, _mm512_fmadd_pd(av, _mm512_loadu_pd(x + i),
                                            _mm512_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_d(double* x, double alpha, int n) {
  const __m512d av = _mm512_set1_pd(alpha);
  int i = 0;
  for (; i + 8 <= n; i += 8)
    _mm512_storeu_pd(x + i, _mm512_mul_pd(av, _mm512_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void vadd_d(const double* a, const double* b, double* c, int n) {
  int i = 0;
  for (; i + 8 <= n; i += 8)
    _mm512_storeu_pd(
        c + i, _mm512_add_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i)));
  for (; i < n; ++i) c[i] = a[i] + b[i];
}

void vmul_d(const double* a, const double* b, double* c, int n) {
  int i = 0;
  for (; i + 8 <= n; i += 8)
    _mm512_storeu_pd(
        c + i, _mm512_mul_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i)));
  for (; i < n; ++i) c[i] = a[i] * b[i];
}

void vfma_d(const double* a, const double* b, double* c, int n) {
  int i = 0;
  for (; i + 8 <= n; i += 8)
    _mm512_storeu_pd(c + i,
                     _mm512_fmadd_pd(_mm512_loadu_pd(a + i),
                                     _mm512_loadu_pd(b + i),
                                     _mm512_loadu_pd(c + i)));
  for (; i < n; ++i) c[i] += a[i] * b[i];
}

double dot_d(const double* a, const double* b, int n) {
  __m512d acc = _mm512_setzero_pd();
  int i = 0;
  for (; i + 8 <= n; i += 8)
    acc = _mm512_fmadd_pd(_mm512_loadu_pd(a + i), _mm512_loadu_pd(b + i), acc);
  double s = _mm512_reduce_add_pd(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_d(const double* x, int n) {
  __m512d acc = _mm512_setzero_pd();
  int i = 0;
  for (; i + 8 <= n; i += 8) acc = _mm512_add_pd(acc, _mm512_loadu_pd(x + i));
  double s = _mm512_reduce_add_pd(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

void tanh_bwd_d(const double* y, const double* dy, double* dx, int n) {
  const __m512d one = _mm512_set1_pd(1.0);
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m512d yv = _mm512_loadu_pd(y + i);
    const __m512d g = _mm512_fnmadd_pd(yv, yv, one);
    _mm512_storeu_pd(dx + i, _mm512_fmadd_pd(_mm512_loadu_pd(dy + i), g,
                                             _mm512_loadu_pd(dx + i)));
  }
  for (; i < n; ++i) dx[i] += dy[i] * (1.0 - y[i] * y[i]);
}

void sigmoid_bwd_d(const double* y, const double* dy, double* dx, int n) {
  const __m512d one = _mm512_set1_pd(1.0);
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m512d yv = _mm512_loadu_pd(y + i);
    const __m512d g = _mm512_mul_pd(yv, _mm512_sub_pd(one, yv));
    _mm512_storeu_pd(dx + i, _mm512_fmadd_pd(_mm512_loadu_pd(dy + i), g,
                                             _mm512_loadu_pd(dx + i)));
  }
  for (; i < n; ++i) dx[i] += dy[i] * y[i] * (1.0 - y[i]);
}

void add_bias_d(double* y, const double* bias, int rows, int n) {
  for (int r = 0; r < rows; ++r) {
    double* yr = y + static_cast<size_t>(r) * n;
    int j = 0;
    for (; j + 8 <= n; j += 8)
      _mm512_storeu_pd(yr + j, _mm512_add_pd(_mm512_loadu_pd(yr + j),
                                             _mm512_loadu_pd(bias + j)));
    for (; j < n; ++j) yr[j] += bias[j];
  }
}

#if defined(PIH_HAVE_MVEC)
// Tails run through the same vector call on a zero-padded buffer, so an
// element's result never depends on where a caller's vector boundary lands
// (bitwise padding invariance in the net relies on that).
inline __m512 tanh16f(__m512 v) { return _ZGVeN16v_tanhf(v); }

inline __m512 sigm16f(__m512 v) {
  const __m512 one = _mm512_set1_ps(1.0f);
  const __m512 e = _ZGVeN16v_expf(_mm512_sub_ps(_mm512_setzero_ps(), v));
  return _mm512_div_ps(one, _mm512_add_ps(one, e));
}

template <__m512 (*F)(__m512)>
void map16f(const float* x, float* y, int n) {
  int i = 0;
  for (; i + 16 <= n; i += 16)
    _mm512_storeu_ps(y + i, F(_mm512_loadu_ps(x + i)));
  if (i < n) {
    float buf[16] = {0};
    std::memcpy(buf, x + i, static_cast<size_t>(n - i) * sizeof(float));
    _mm512_storeu_ps(buf, F(_mm512_loadu_ps(buf)));
    std::memcpy(y + i, buf, static_cast<size_t>(n - i) * sizeof(float));
  }
}

void vtanh_f(const float* x, float* y, int n) { map16f<&tanh16f>(x, y, n); }
void vsigmoid_f(const float* x, float* y, int n) { map16f<&sigm16f>(x, y, n); }

inline __m512d tanh8d(__m512d v) { return _ZGVeN8v_tanh(v); }

inline __m512d sigm8d(__m512d v) {
  const __m512d one = _mm512_set1_pd(1.0);
  const __m512d e = _ZGVeN8v_exp(_mm512_sub_pd(_mm512_setzero_pd(), v));
  return _mm512_div_pd(one, _mm512_add_pd(one, e));
}

template <__m512d (*F)(__m512d)>
void map8d(const double* x, double* y, int n) {
  int i = 0;
  for (; i + 8 <= n; i += 8) _mm512_storeu_pd(y + i, F(_mm512_loadu_pd(x + i)));
  if (i < n) {
    double buf[8] = {0};
    std::memcpy(buf, x + i, static_cast<size_t>(n - i) * sizeof(double));
    _mm512_storeu_pd(buf, F(_mm512_loadu_pd(buf)));
    std::memcpy(y + i, buf, static_cast<size_t>(n - i) * sizeof(double));
  }
}

void vtanh_d(const double* x, double* y, int n) { map8d<&tanh8d>(x, y, n); }
void vsigmoid_d(const double* x, double* y, int n) { map8d<&sigm8d>(x, y, n); }
#else
void vtanh_f(const float* x, float* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void vsigmoid_f(const float* x, float* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = 1.0f / (1.0f + std::exp(-x[i]));
}

void vtanh_d(const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void vsigmoid_d(const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
}
#endif

}  // namespace

template <>
Ops<float> make_avx512_ops<float>() {
  Ops<float> o;
  o.matmul_nt = &matmul_nt_f;
  o.matmul_nn = &matmul_bcast_f<false>;
  o.matmul_tn = &matmul_tn_f;
  o.axpy = &axpy_f;
  o.scale = &scale_f;
  o.vadd = &vadd_f;
  o.vmul = &vmul_f;
  o.vfma = &vfma_f;
  o.dot = &dot_f;
  o.sum = &sum_f;
  o.tanh_bwd = &tanh_bwd_f;
  o.sigmoid_bwd = &sigmoid_bwd_f;
  o.add_bias = &add_bias_f;
  o.vtanh = &vtanh_f;
  o.vsigmoid = &vsigmoid_f;
  return o;
}

template <>
Ops<double> make_avx512_ops<double>() {
  Ops<double> o;
  o.matmul_nt = &matmul_nt_d;
  o.matmul_nn = &matmul_bcast_d<false>;
  o.matmul_tn = &matmul_tn_d;
  o.axpy = &axpy_d;
  o.scale = &scale_d;
  o.vadd = &vadd_d;
  o.vmul = &vmul_d;
  o.vfma = &vfma_d;
  o.dot = &dot_d;
  o.sum = &sum_d;
  o.tanh_bwd = &tanh_bwd_d;
  o.sigmoid_bwd = &sigmoid_bwd_d;
  o.add_bias = &add_bias_d;
  o.vtanh = &vtanh_d;
  o.vsigmoid = &vsigmoid_d;
  return o;
}

}  // namespace pih::kern::detail
