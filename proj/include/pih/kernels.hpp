#pragma once

#include <cstddef>
#include <string>

// Data-parallel inner loops used by the network core. Every routine has a
// scalar reference implementation plus AVX2/AVX512 variants; the active
// backend is picked at runtime (cpuid, overridable via the PIH_KERNELS
// environment variable or force_backend). Variants are equivalence-tested
// against the scalar reference in tests/test_kernels.cpp.
//
// Matrix layout is row-major throughout.

namespace pih::kern {

enum class Backend { scalar, avx2, avx512 };

Backend active_backend();
void force_backend(Backend b);      // tests only; resets the dispatch tables
bool backend_available(Backend b);
const char* backend_name(Backend b);

template <typename T>
struct Ops {
  // c[m,n] (+)= a[m,k] * b[n,k]^T   (dot-product form; b holds n rows of length k)
  void (*matmul_nt)(const T* a, const T* b, T* c, int m, int n, int k,
                    bool accumulate);
  // c[m,n] (+)= a[m,k] * b[k,n]     (broadcast form)
  void (*matmul_nn)(const T* a, const T* b, T* c, int m, int n, int k,
                    bool accumulate);
  // c[m,n] (+)= a[k,m]^T * b[k,n]   (outer-product accumulation, e.g. dW += dY^T X)
  void (*matmul_tn)(const T* a, const T* b, T* c, int m, int n, int k,
                    bool accumulate);

  void (*axpy)(T alpha, const T* x, T* y, int n);          // y += alpha*x
  void (*scale)(T* x, T alpha, int n);                     // x *= alpha
  void (*vadd)(const T* a, const T* b, T* c, int n);       // c = a + b
  void (*vmul)(const T* a, const T* b, T* c, int n);       // c = a .* b
  void (*vfma)(const T* a, const T* b, T* c, int n);       // c += a .* b
  T (*dot)(const T* a, const T* b, int n);
  T (*sum)(const T* x, int n);
  void (*tanh_bwd)(const T* y, const T* dy, T* dx, int n);     // dx += dy*(1-y^2)
  void (*sigmoid_bwd)(const T* y, const T* dy, T* dx, int n);  // dx += dy*y*(1-y)
  void (*add_bias)(T* y, const T* bias, int rows, int n);      // y[r,:] += bias

  // Transcendental maps (in-place allowed). SIMD variants use libmvec and
  // agree with the scalar reference to a few ulp rather than bitwise; the
  // equivalence tests bound the difference explicitly.
  void (*vtanh)(const T* x, T* y, int n);     // y = tanh(x)
  void (*vsigmoid)(const T* x, T* y, int n);  // y = 1/(1+exp(-x))
};

template <typename T>
const Ops<T>& ops();

extern template const Ops<float>& ops<float>();
extern template const Ops<double>& ops<double>();

namespace detail {
template <typename T>
Ops<T> make_scalar_ops();
#if defined(PIH_BUILD_AVX2)
template <typename T>
Ops<T> make_avx2_ops();
#endif
#if defined(PIH_BUILD_AVX512)
template <typename T>
Ops<T> make_avx512_ops();
#endif
}  // namespace detail

}  // namespace pih::kern
