#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "pih/kernels.hpp"

// AVX2+FMA variants. Register-blocked 1x4 dot kernels for the NT form and
// 4-vector C tiles for the broadcast forms. Remainders fall back to scalar
// tails inside each routine, so results stay deterministic for any shape.

// libmvec vector transcendentals (glibc ships no direct-call header for them)
#if defined(PIH_HAVE_MVEC)
extern "C" {
__m256d _ZGVdN4v_exp(__m256d);
__m256d _ZGVdN4v_expm1(__m256d);
__m256 _ZGVdN8v_expf(__m256);
__m256 _ZGVdN8v_tanhf(__m256);
}
#endif

namespace pih::kern::detail {

namespace {

// ---------------------------------------------------------------- float ----

inline __m128 hsum4(__m256 a, __m256 b, __m256 c, __m256 d) {
  const __m256 t0 = _mm256_hadd_ps(a, b);
  const __m256 t1 = _mm256_hadd_ps(c, d);
  const __m256 t2 = _mm256_hadd_ps(t0, t1);
  return _mm_add_ps(_mm256_castps256_ps128(t2), _mm256_extractf128_ps(t2, 1));
}

inline float hsum1(__m256 a) {
  const __m128 lo = _mm256_castps256_ps128(a);
  const __m128 hi = _mm256_extractf128_ps(a, 1);
  __m128 s = _mm_add_ps(lo, hi);
  s = _mm_add_ps(s, _mm_movehl_ps(s, s));
  s = _mm_add_ss(s, _mm_movehdup_ps(s));
  return _mm_cvtss_f32(s);
}

void matmul_nt_f(const float* a, const float* b, float* c, int m, int n, int k,
                 bool accumulate) {
  const int kv = k & ~7;
  for (int i = 0; i < m; ++i) {
    const float* ai = a + static_cast<size_t>(i) * k;
    float* ci = c + static_cast<size_t>(i) * n;
    int j = 0;
    for (; j + 4 <= n; j += 4) {
      const float* b0 = b + static_cast<size_t>(j) * k;
      const float* b1 = b0 + k;
      const float* b2 = b1 + k;
      const float* b3 = b2 + k;
      __m256 acc0 = _mm256_setzero_ps(), acc1 = _mm256_setzero_ps();
      __m256 acc2 = _mm256_setzero_ps(), acc3 = _mm256_setzero_ps();
      for (int p = 0; p < kv; p += 8) {
        const __m256 av = _mm256_loadu_ps(ai + p);
        acc0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b0 + p), acc0);
        acc1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b1 + p), acc1);
        acc2 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b2 + p), acc2);
        acc3 = _mm256_fmadd_ps(av, _mm256_loadu_ps(b3 + p), acc3);
      }
      __m128 s = hsum4(acc0, acc1, acc2, acc3);
      float tail[4] = {0, 0, 0, 0};
      for (int p = kv; p < k; ++p) {
        tail[0] += ai[p] * b0[p];
        tail[1] += ai[p] * b1[p];
        tail[2] += ai[p] * b2[p];
        tail[3] += ai[p] * b3[p];
      }
      s = _mm_add_ps(s, _mm_loadu_ps(tail));
      if (accumulate) s = _mm_add_ps(s, _mm_loadu_ps(ci + j));
      _mm_storeu_ps(ci + j, s);
    }
    for (; j < n; ++j) {
      const float* bj = b + static_cast<size_t>(j) * k;
      __m256 acc = _mm256_setzero_ps();
      for (int p = 0; p < kv; p += 8)
        acc = _mm256_fmadd_ps(_mm256_loadu_ps(ai + p), _mm256_loadu_ps(bj + p),
                              acc);
      float s = hsum1(acc);
      for (int p = kv; p < k; ++p) s += ai[p] * bj[p];
      ci[j] = accumulate ? ci[j] + s : s;
    }
  }
}

// c[i, j0:j0+W) += sum_p a[i,p] * b[p, j0:j0+W) with C tile held in registers
void matmul_nn_f(const float* a, const float* b, float* c, int m, int n, int k,
                 bool accumulate) {
  constexpr int TILE = 32;  // 4 x 8 floats
  for (int i = 0; i < m; ++i) {
    const float* ai = a + static_cast<size_t>(i) * k;
    float* ci = c + static_cast<size_t>(i) * n;
    int j = 0;
    for (; j + TILE <= n; j += TILE) {
      __m256 c0, c1, c2, c3;
      if (accumulate) {
        c0 = _mm256_loadu_ps(ci + j);
        c1 = _mm256_loadu_ps(ci + j + 8);
        c2 = _mm256_loadu_ps(ci + j + 16);
        c3 = _mm256_loadu_ps(ci + j + 24);
      } else {
        c0 = c1 = c2 = c3 = _mm256_setzero_ps();
      }
      for (int p = 0; p < k; ++p) {
        const __m256 av = _mm256_set1_ps(ai[p]);
        const float* bp = b + static_cast<size_t>(p) * n + j;
        c0 = _mm256_fmadd_ps(av, _mm256_loadu_ps(bp), c0);
        c1 = _mm256_fmadd_ps(av, _mm256_loadu_ps(bp + 8), c1);
        c2 = _mm256_fmadd_ps(av, _mm256_loadu_ps(bp + 16), c2);
        c3 = _mm256_fmadd_ps(av, _mm256_loadu_ps(bp + 24), c3);
      }
      _mm256_storeu_ps(ci + j, c0);
      _mm256_storeu_ps(ci + j + 8, c1);
      _mm256_storeu_ps(ci + j + 16, c2);
      _mm256_storeu_ps(ci + j + 24, c3);
    }
    for (; j + 8 <= n; j += 8) {
      __m256 cv = accumulate ? _mm256_loadu_ps(ci + j) : _mm256_setzero_ps();
      for (int p = 0; p < k; ++p)
        cv = _mm256_fmadd_ps(
            _mm256_set1_ps(ai[p]),
            _mm256_loadu_ps(b + static_cast<size_t>(p) * n + j), cv);
      _mm256_storeu_ps(ci + j, cv);
    }
    for (; j < n; ++j) {
      float acc = accumulate ? ci[j] : 0.0f;
      for (int p = 0; p < k; ++p)
        acc += ai[p] * b[static_cast<size_t>(p) * n + j];
      ci[j] = acc;
    }
  }
}

// c[m,n] (+)= sum_p outer(a[p,:], b[p,:]); the p-outer walk keeps the whole
// (small) C hot in cache and streams a and b exactly once, which is the
// shape the whole-sequence weight-gradient GEMMs have (k is the batch*time
// dimension there and dwarfs m and n)
void matmul_tn_f(const float* a, const float* b, float* c, int m, int n, int k,
                 bool accumulate) {
  if (!accumulate)
    std::memset(c, 0, static_cast<size_t>(m) * n * sizeof(float));
  const int nv = n & ~7;
  for (int p = 0; p < k; ++p) {
    const float* ap = a + static_cast<size_t>(p) * m;
    const float* bp = b + static_cast<size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const __m256 av = _mm256_set1_ps(ap[i]);
      float* ci = c + static_cast<size_t>(i) * n;
      int j = 0;
      for (; j < nv; j += 8)
        _mm256_storeu_ps(ci + j, _mm256_fmadd_ps(av, _mm256_loadu_ps(bp + j),
                                                 _mm256_loadu_ps(ci + j)));
      for (; j < n; ++j) ci[j] += ap[i] * bp[j];
    }
  }
}

void axpy_f(float alpha, const float* x, float* y, int n) {
  const __m256 av = _mm256_set1_ps(alpha);
  int i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i),
                                            _mm256_loadu_ps(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_f(float* x, float alpha, int n) {
  const __m256 av = _mm256_set1_ps(alpha);
  int i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(x + i, _mm256_mul_ps(av, _mm256_loadu_ps(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void vadd_f(const float* a, const float* b, float* c, int n) {
  int i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(
        c + i, _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) c[i] = a[i] + b[i];
}

void vmul_f(const float* a, const float* b, float* c, int n) {
  int i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(
        c + i, _mm256_mul_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) c[i] = a[i] * b[i];
}

void vfma_f(const float* a, const float* b, float* c, int n) {
  int i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(c + i,
                     _mm256_fmadd_ps(_mm256_loadu_ps(a + i),
                                     _mm256_loadu_ps(b + i),
                                     _mm256_loadu_ps(c + i)));
  for (; i < n; ++i) c[i] += a[i] * b[i];
}

float dot_f(const float* a, const float* b, int n) {
  __m256 acc = _mm256_setzero_ps();
  int i = 0;
  for (; i + 8 <= n; i += 8)
    acc = _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), acc);
  float s = hsum1(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

float sum_f(const float* x, int n) {
  __m256 acc = _mm256_setzero_ps();
  int i = 0;
  for (; i + 8 <= n; i += 8) acc = _mm256_add_ps(acc, _mm256_loadu_ps(x + i));
  float s = hsum1(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

void tanh_bwd_f(const float* y, const float* dy, float* dx, int n) {
  const __m256 one = _mm256_set1_ps(1.0f);
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 yv = _mm256_loadu_ps(y + i);
    const __m256 g = _mm256_fnmadd_ps(yv, yv, one);  // 1 - y*y
    _mm256_storeu_ps(dx + i, _mm256_fmadd_ps(_mm256_loadu_ps(dy + i), g,
                                             _mm256_loadu_ps(dx + i)));
  }
  for (; i < n; ++i) dx[i] += dy[i] * (1.0f - y[i] * y[i]);
}

void sigmoid_bwd_f(const float* y, const float* dy, float* dx, int n) {
  const __m256 one = _mm256_set1_ps(1.0f);
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 yv = _mm256_loadu_ps(y + i);
    const __m256 g = _mm256_mul_ps(yv, _mm256_sub_ps(one, yv));
    _mm256_storeu_ps(dx + i, _mm256_fmadd_ps(_mm256_loadu_ps(dy + i), g,
                                             _mm256_loadu_ps(dx + i)));
  }
  for (; i < n; ++i) dx[i] += dy[i] * y[i] * (1.0f - y[i]);
}

void add_bias_f(float* y, const float* bias, int rows, int n) {
  for (int r = 0; r < rows; ++r) {
    float* yr = y + static_cast<size_t>(r) * n;
    int j = 0;
    for (; j + 8 <= n; j += 8)
      _mm256_storeu_ps(yr + j, _mm256_add_ps(_mm256_loadu_ps(yr + j),
                                             _mm256_loadu_ps(bias + j)));
    for (; j < n; ++j) yr[j] += bias[j];
  }
}

#if defined(PIH_HAVE_MVEC)
// Tails run through the same vector call on a zero-padded buffer, so an
// element's result never depends on where a caller's vector boundary lands
// (bitwise padding invariance in the net relies on that).
inline __m256 tanh8f(__m256 v) { return _ZGVdN8v_tanhf(v); }

inline __m256 sigm8f(__m256 v) {
  const __m256 one = _mm256_set1_ps(1.0f);
  const __m256 e = _ZGVdN8v_expf(_mm256_sub_ps(_mm256_setzero_ps(), v));
  return _mm256_div_ps(one, _mm256_add_ps(one, e));
}

template <__m256 (*F)(__m256)>
void map8f(const float* x, float* y, int n) {
  int i = 0;
  for (; i + 8 <= n; i += 8) _mm256_storeu_ps(y + i, F(_mm256_loadu_ps(x + i)));
  if (i < n) {
    float buf[8] = {0};
    std::memcpy(buf, x + i, static_cast<size_t>(n - i) * sizeof(float));
    _mm256_storeu_ps(buf, F(_mm256_loadu_ps(buf)));
    std::memcpy(y + i, buf, static_cast<size_t>(n - i) * sizeof(float));
  }
}

void vtanh_f(const float* x, float* y, int n) { map8f<&tanh8f>(x, y, n); }
void vsigmoid_f(const float* x, float* y, int n) { map8f<&sigm8f>(x, y, n); }
#else
void vtanh_f(const float* x, float* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void vsigmoid_f(const float* x, float* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = 1.0f / (1.0f + std::exp(-x[i]));
}
#endif

// --------------------------------------------------------------- double ----

inline double hsum1d(__m256d a) {
  const __m128d lo = _mm256_castpd256_pd128(a);
  const __m128d hi = _mm256_extractf128_pd(a, 1);
  __m128d s = _mm_add_pd(lo, hi);
  s = _mm_add_sd(s, _mm_unpackhi_pd(s, s));
  return _mm_cvtsd_f64(s);
}

void matmul_nt_d(const double* a, const double* b, double* c, int m, int n,
                 int k, bool accumulate) {
  const int kv = k & ~3;
  for (int i = 0; i < m; ++i) {
    const double* ai = a + static_cast<size_t>(i) * k;
    double* ci = c + static_cast<size_t>(i) * n;
    int j = 0;
    for (; j + 2 <= n; j += 2) {
      const double* b0 = b + static_cast<size_t>(j) * k;
      const double* b1 = b0 + k;
      __m256d acc0 = _mm256_setzero_pd(), acc1 = _mm256_setzero_pd();
      for (int p = 0; p < kv; p += 4) {
        const __m256d av = _mm256_loadu_pd(ai + p);
        acc0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b0 + p), acc0);
        acc1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b1 + p), acc1);
      }
      double s0 = hsum1d(acc0), s1 = hsum1d(acc1);
      for (int p = kv; p < k; ++p) {
        s0 += ai[p] * b0[p];
        s1 += ai[p] * b1[p];
      }
      ci[j] = accumulate ? ci[j] + s0 : s0;
      ci[j + 1] = accumulate ? ci[j + 1] + s1 : s1;
    }
    for (; j < n; ++j) {
      const double* bj = b + static_cast<size_t>(j) * k;
      __m256d acc = _mm256_setzero_pd();
      for (int p = 0; p < kv; p += 4)
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(ai + p), _mm256_loadu_pd(bj + p),
                              acc);
      double s = hsum1d(acc);
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
    for (; j + 8 <= n; j += 8) {
      __m256d c0, c1;
      if (accumulate) {
        c0 = _mm256_loadu_pd(ci + j);
        c1 = _mm256_loadu_pd(ci + j + 4);
      } else {
        c0 = c1 = _mm256_setzero_pd();
      }
      for (int p = 0; p < k; ++p) {
        const double as = kTn ? a[static_cast<size_t>(p) * m + i]
                              : a[static_cast<size_t>(i) * k + p];
        const __m256d av = _mm256_set1_pd(as);
        const double* bp = b + static_cast<size_t>(p) * n + j;
        c0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp), c0);
        c1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + 4), c1);
      }
      _mm256_storeu_pd(ci + j, c0);
      _mm256_storeu_pd(ci + j + 4, c1);
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

void matmul_tn_d(const double* a, const double* b, double* c, int m, int n,
                 int k, bool accumulate) {
  if (!accumulate)
    std::memset(c, 0, static_cast<size_t>(m) * n * sizeof(double));
  const int nv = n & ~3;
  for (int p = 0; p < k; ++p) {
    const double* ap = a + static_cast<size_t>(p) * m;
    const double* bp = b + static_cast<size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const __m256d av = _mm256_set1_pd(ap[i]);
      double* ci = c + static_cast<size_t>(i) * n;
      int j = 0;
      for (; j < nv; j += 4)
        _mm256_storeu_pd(ci + j, _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + j),
                                                 _mm256_loadu_pd(ci + j)));
      for (; j < n; ++j) ci[j] += ap[i] * bp[j];
    }
  }
}

void axpy_d(double alpha, const double* x, double* y, int n) {
  const __m256d av = _mm256_set1_pd(alpha);
  int i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_d(double* x, double alpha, int n) {
  const __m256d av = _mm256_set1_pd(alpha);
  int i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= alpha;
}

void vadd_d(const double* a, const double* b, double* c, int n) {
  int i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(
        c + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) c[i] = a[i] + b[i];
}

void vmul_d(const double* a, const double* b, double* c, int n) {
  int i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(
        c + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) c[i] = a[i] * b[i];
}

void vfma_d(const double* a, const double* b, double* c, int n) {
  int i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(c + i,
                     _mm256_fmadd_pd(_mm256_loadu_pd(a + i),
                                     _mm256_loadu_pd(b + i),
                                     _mm256_loadu_pd(c + i)));
  for (; i < n; ++i) c[i] += a[i] * b[i];
}

double dot_d(const double* a, const double* b, int n) {
  __m256d acc = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  double s = hsum1d(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_d(const double* x, int n) {
  __m256d acc = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum1d(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

void tanh_bwd_d(const double* y, const double* dy, double* dx, int n) {
  const __m256d one = _mm256_set1_pd(1.0);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d yv = _mm256_loadu_pd(y + i);
    const __m256d g = _mm256_fnmadd_pd(yv, yv, one);
    _mm256_storeu_pd(dx + i, _mm256_fmadd_pd(_mm256_loadu_pd(dy + i), g,
                                             _mm256_loadu_pd(dx + i)));
  }
  for (; i < n; ++i) dx[i] += dy[i] * (1.0 - y[i] * y[i]);
}

void sigmoid_bwd_d(const double* y, const double* dy, double* dx, int n) {
  const __m256d one = _mm256_set1_pd(1.0);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d yv = _mm256_loadu_pd(y + i);
    const __m256d g = _mm256_mul_pd(yv, _mm256_sub_pd(one, yv));
    _mm256_storeu_pd(dx + i, _mm256_fmadd_pd(_mm256_loadu_pd(dy + i), g,
                                             _mm256_loadu_pd(dx + i)));
  }
  for (; i < n; ++i) dx[i] += dy[i] * y[i] * (1.0 - y[i]);
}

void add_bias_d(double* y, const double* bias, int rows, int n) {
  for (int r = 0; r < rows; ++r) {
    double* yr = y + static_cast<size_t>(r) * n;
    int j = 0;
    for (; j + 4 <= n; j += 4)
      _mm256_storeu_pd(yr + j, _mm256_add_pd(_mm256_loadu_pd(yr + j),
                                             _mm256_loadu_pd(bias + j)));
    for (; j < n; ++j) yr[j] += bias[j];
  }
}

#if defined(PIH_HAVE_MVEC)
// tanh(x) = -expm1(-2x) / (2 + expm1(-2x)); libmvec has no fast AVX2 tanh,
// but its expm1 is, and this form stays exact through x = 0. The clamp keeps
// expm1 from overflowing (tanh is already +-1 to the last bit at |x| = 20);
// the final blend restores NaN inputs the clamp would otherwise swallow.
inline __m256d tanh4d(__m256d xv) {
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d cap = _mm256_set1_pd(20.0);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d c =
      _mm256_min_pd(_mm256_max_pd(xv, _mm256_sub_pd(zero, cap)), cap);
  const __m256d em = _ZGVdN4v_expm1(_mm256_mul_pd(_mm256_set1_pd(-2.0), c));
  const __m256d t =
      _mm256_div_pd(_mm256_sub_pd(zero, em), _mm256_add_pd(two, em));
  return _mm256_blendv_pd(t, xv, _mm256_cmp_pd(xv, xv, _CMP_UNORD_Q));
}

inline __m256d sigm4d(__m256d v) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d e = _ZGVdN4v_exp(_mm256_sub_pd(_mm256_setzero_pd(), v));
  return _mm256_div_pd(one, _mm256_add_pd(one, e));
}

template <__m256d (*F)(__m256d)>
void map4d(const double* x, double* y, int n) {
  int i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, F(_mm256_loadu_pd(x + i)));
  if (i < n) {
    double buf[4] = {0};
    std::memcpy(buf, x + i, static_cast<size_t>(n - i) * sizeof(double));
    _mm256_storeu_pd(buf, F(_mm256_loadu_pd(buf)));
    std::memcpy(y + i, buf, static_cast<size_t>(n - i) * sizeof(double));
  }
}

void vtanh_d(const double* x, double* y, int n) { map4d<&tanh4d>(x, y, n); }
void vsigmoid_d(const double* x, double* y, int n) { map4d<&sigm4d>(x, y, n); }
#else
void vtanh_d(const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

void vsigmoid_d(const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = 1.0 / (1.0 + std::exp(-x[i]));
}
#endif

}  // namespace

template <>
Ops<float> make_avx2_ops<float>() {
  Ops<float> o;
  o.matmul_nt = &matmul_nt_f;
  o.matmul_nn = &matmul_nn_f;
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
Ops<double> make_avx2_ops<double>() {
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
