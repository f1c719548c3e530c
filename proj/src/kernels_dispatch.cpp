#include <atomic>
#include <cstdlib>
#include <cstring>

#include "pih/kernels.hpp"

namespace pih::kern {

namespace {

Backend detect_best() {
#if defined(PIH_BUILD_AVX512)
  if (backend_available(Backend::avx512)) return Backend::avx512;
#endif
#if defined(PIH_BUILD_AVX2)
  if (backend_available(Backend::avx2)) return Backend::avx2;
#endif
  return Backend::scalar;
}

Backend initial_backend() {
  if (const char* env = std::getenv("PIH_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
    if (std::strcmp(env, "avx2") == 0 && backend_available(Backend::avx2))
      return Backend::avx2;
    if (std::strcmp(env, "avx512") == 0 && backend_available(Backend::avx512))
      return Backend::avx512;
    // unknown or unsupported value: fall through to autodetect
  }
  return detect_best();
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> b{initial_backend()};
  return b;
}

}  // namespace

bool backend_available(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(PIH_BUILD_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::avx512:
#if defined(PIH_BUILD_AVX512)
      return __builtin_cpu_supports("avx512f") &&
             __builtin_cpu_supports("avx512vl") &&
             __builtin_cpu_supports("avx512dq");
#else
      return false;
#endif
  }
  return false;
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void force_backend(Backend b) {
  current().store(backend_available(b) ? b : Backend::scalar,
                  std::memory_order_relaxed);
}

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::avx512:
      return "avx512";
  }
  return "unknown";
}

template <typename T>
const Ops<T>& ops() {
  static const Ops<T> scalar_tab = detail::make_scalar_ops<T>();
#if defined(PIH_BUILD_AVX2)
  static const Ops<T> avx2_tab = backend_available(Backend::avx2)
                                     ? detail::make_avx2_ops<T>()
                                     : scalar_tab;
#endif
#if defined(PIH_BUILD_AVX512)
  static const Ops<T> avx512_tab = backend_available(Backend::avx512)
                                       ? detail::make_avx512_ops<T>()
                                       : scalar_tab;
#endif
  switch (active_backend()) {
#if defined(PIH_BUILD_AVX2)
    case Backend::avx2:
      return avx2_tab;
#endif
#if defined(PIH_BUILD_AVX512)
    case Backend::avx512:
      return avx512_tab;
#endif
    default:
      return scalar_tab;
  }
}

template const Ops<float>& ops<float>();
template const Ops<double>& ops<double>();

}  // namespace pih::kern
