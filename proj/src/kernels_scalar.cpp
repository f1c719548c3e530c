#include <cmath>

#include "pih/kernels.hpp"

namespace pih::kern::detail {

namespace {

template <typename T>
void matmul_nt(const T* a, const T* b, T* c, int m, int n, int k,
               bool accumulate) {
  for (int i = 0; i < m; ++i) {
    const T* ai = a + static_cast<size_t>(i) * k;
    T* ci = c + static_cast<size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const T* bj = b + static_cast<size_t>(j) * k;
      T acc = 0;
      for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] = accumulate ? ci[j] + acc : acc;
    }
  }
}

template <typename T>
void matmul_nn(const T* a, const T* b, T* c, int m, int n, int k,
               bool accumulate) {
  for (int i = 0; i < m; ++i) {
    const T* ai = a + static_cast<size_t>(i) * k;
    T* ci = c + static_cast<size_t>(i) * n;
    if (!accumulate)
      for (int j = 0; j < n; ++j) ci[j] = 0;
    for (int p = 0; p < k; ++p) {
      const T av = ai[p];
      const T* bp = b + static_cast<size_t>(p) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

template <typename T>
void matmul_tn(const T* a, const T* b, T* c, int m, int n, int k,
               bool accumulate) {
  if (!accumulate) {
    for (size_t idx = 0; idx < static_cast<size_t>(m) * n; ++idx) c[idx] = 0;
  }
  for (int p = 0; p < k; ++p) {
    const T* ap = a + static_cast<size_t>(p) * m;
    const T* bp = b + static_cast<size_t>(p) * n;
    for (int i = 0; i < m; ++i) {
      const T av = ap[i];
      T* ci = c + static_cast<size_t>(i) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
    }
  }
}

template <typename T>
void axpy(T alpha, const T* x, T* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
void scale(T* x, T alpha, int n) {
  for (int i = 0; i < n; ++i) x[i] *= alpha;
}

template <typename T>
void vadd(const T* a, const T* b, T* c, int n) {
  for (int i = 0; i < n; ++i) c[i] = a[i] + b[i];
}

template <typename T>
void vmul(const T* a, const T* b, T* c, int n) {
  for (int i = 0; i < n; ++i) c[i] = a[i] * b[i];
}

template <typename T>
void vfma(const T* a, const T* b, T* c, int n) {
  for (int i = 0; i < n; ++i) c[i] += a[i] * b[i];
}

template <typename T>
T dot(const T* a, const T* b, int n) {
  T acc = 0;
  for (int i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <typename T>
T sum(const T* x, int n) {
  T acc = 0;
  for (int i = 0; i < n; ++i) acc += x[i];
  return acc;
}

template <typename T>
void tanh_bwd(const T* y, const T* dy, T* dx, int n) {
  for (int i = 0; i < n; ++i) dx[i] += dy[i] * (T{1} - y[i] * y[i]);
}

template <typename T>
void sigmoid_bwd(const T* y, const T* dy, T* dx, int n) {
  for (int i = 0; i < n; ++i) dx[i] += dy[i] * y[i] * (T{1} - y[i]);
}

template <typename T>
void add_bias(T* y, const T* bias, int rows, int n) {
  for (int r = 0; r < rows; ++r) {
    T* yr = y + static_cast<size_t>(r) * n;
    for (int j = 0; j < n; ++j) yr[j] += bias[j];
  }
}

template <typename T>
void vtanh(const T* x, T* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = std::tanh(x[i]);
}

template <typename T>
void vsigmoid(const T* x, T* y, int n) {
  for (int i = 0; i < n; ++i) y[i] = T(1) / (T(1) + std::exp(-x[i]));
}

}  // namespace

template <typename T>
Ops<T> make_scalar_ops() {
  Ops<T> o;
  o.matmul_nt = &matmul_nt<T>;
  o.matmul_nn = &matmul_nn<T>;
  o.matmul_tn = &matmul_tn<T>;
  o.axpy = &axpy<T>;
  o.scale = &scale<T>;
  o.vadd = &vadd<T>;
  o.vmul = &vmul<T>;
  o.vfma = &vfma<T>;
  o.dot = &dot<T>;
  o.sum = &sum<T>;
  o.tanh_bwd = &tanh_bwd<T>;
  o.sigmoid_bwd = &sigmoid_bwd<T>;
  o.add_bias = &add_bias<T>;
  o.vtanh = &vtanh<T>;
  o.vsigmoid = &vsigmoid<T>;
  return o;
}

template Ops<float> make_scalar_ops<float>();
template Ops<double> make_scalar_ops<double>();

}  // namespace pih::kern::detail
