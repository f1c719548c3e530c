#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "pih/kernels.hpp"
#include "pih/rng.hpp"

using pih::Rng;
using pih::kern::Backend;

namespace {

// Naive triple-loop reference, written independently of the kernel code.
template <typename T>
void naive_nt(const T* a, const T* b, T* c, int m, int n, int k, bool acc) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      T s = acc ? c[i * n + j] : T(0);
      for (int p = 0; p < k; ++p) s += a[i * k + p] * b[j * k + p];
      c[i * n + j] = s;
    }
}

template <typename T>
void naive_nn(const T* a, const T* b, T* c, int m, int n, int k, bool acc) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      T s = acc ? c[i * n + j] : T(0);
      for (int p = 0; p < k; ++p) s += a[i * k + p] * b[p * n + j];
      c[i * n + j] = s;
    }
}

template <typename T>
void naive_tn(const T* a, const T* b, T* c, int m, int n, int k, bool acc) {
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      T s = acc ? c[i * n + j] : T(0);
      for (int p = 0; p < k; ++p) s += a[p * m + i] * b[p * n + j];
      c[i * n + j] = s;
    }
}

template <typename T>
std::vector<T> random_vec(size_t n, Rng& rng) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.uniform(-1.0, 1.0));
  return v;
}

template <typename T>
std::vector<T> want_tanh(const std::vector<T>& x) {
  std::vector<T> w(x.size());
  for (size_t i = 0; i < x.size(); ++i)
    w[i] = static_cast<T>(std::tanh(static_cast<double>(x[i])));
  return w;
}

template <typename T>
void check_close(const std::vector<T>& got, const std::vector<T>& want,
                 double tol) {
  REQUIRE(got.size() == want.size());
  double worst = 0.0;
  for (size_t i = 0; i < got.size(); ++i) {
    const double d = std::abs(static_cast<double>(got[i]) -
                              static_cast<double>(want[i]));
    const double scale = 1.0 + std::abs(static_cast<double>(want[i]));
    worst = std::max(worst, d / scale);
  }
  CHECK(worst <= tol);
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::scalar, Backend::avx2, Backend::avx512})
    if (pih::kern::backend_available(b)) out.push_back(b);
  return out;
}

struct Shape {
  int m, n, k;
};
const Shape kShapes[] = {{1, 1, 1},    {1, 7, 3},    {3, 5, 7},
                         {17, 19, 23}, {16, 192, 48}, {8, 192, 64},
                         {33, 65, 129}, {2, 64, 67},  {192, 48, 32}};

template <typename T>
void run_matmul_checks(double tol) {
  Rng rng(20260814);
  for (Backend b : available_backends()) {
    pih::kern::force_backend(b);
    const auto& o = pih::kern::ops<T>();
    for (const auto& s : kShapes) {
      for (bool acc : {false, true}) {
        auto a = random_vec<T>(static_cast<size_t>(s.m) * s.k, rng);
        auto bm = random_vec<T>(static_cast<size_t>(s.n) * s.k, rng);
        auto c0 = random_vec<T>(static_cast<size_t>(s.m) * s.n, rng);

        auto c = c0;
        auto ref = c0;
        o.matmul_nt(a.data(), bm.data(), c.data(), s.m, s.n, s.k, acc);
        naive_nt(a.data(), bm.data(), ref.data(), s.m, s.n, s.k, acc);
        check_close(c, ref, tol);

        auto a_nn = random_vec<T>(static_cast<size_t>(s.m) * s.k, rng);
        auto b_nn = random_vec<T>(static_cast<size_t>(s.k) * s.n, rng);
        c = c0;
        ref = c0;
        o.matmul_nn(a_nn.data(), b_nn.data(), c.data(), s.m, s.n, s.k, acc);
        naive_nn(a_nn.data(), b_nn.data(), ref.data(), s.m, s.n, s.k, acc);
        check_close(c, ref, tol);

        auto a_tn = random_vec<T>(static_cast<size_t>(s.k) * s.m, rng);
        auto b_tn = random_vec<T>(static_cast<size_t>(s.k) * s.n, rng);
        c = c0;
        ref = c0;
        o.matmul_tn(a_tn.data(), b_tn.data(), c.data(), s.m, s.n, s.k, acc);
        naive_tn(a_tn.data(), b_tn.data(), ref.data(), s.m, s.n, s.k, acc);
        check_close(c, ref, tol);
      }
    }
  }
  pih::kern::force_backend(Backend::scalar);
}

template <typename T>
void run_elementwise_checks(double tol) {
  Rng rng(99);
  for (Backend b : available_backends()) {
    pih::kern::force_backend(b);
    const auto& o = pih::kern::ops<T>();
    for (int n : {1, 3, 8, 16, 17, 64, 100, 257}) {
      auto x = random_vec<T>(n, rng);
      auto y = random_vec<T>(n, rng);
      auto z = random_vec<T>(n, rng);
      const T alpha = static_cast<T>(0.37);

      auto got = y;
      o.axpy(alpha, x.data(), got.data(), n);
      std::vector<T> want(n);
      for (int i = 0; i < n; ++i) want[i] = y[i] + alpha * x[i];
      check_close(got, want, tol);

      got = x;
      o.scale(got.data(), alpha, n);
      for (int i = 0; i < n; ++i) want[i] = x[i] * alpha;
      check_close(got, want, tol);

      got.assign(n, T(0));
      o.vadd(x.data(), y.data(), got.data(), n);
      for (int i = 0; i < n; ++i) want[i] = x[i] + y[i];
      check_close(got, want, tol);

      got.assign(n, T(0));
      o.vmul(x.data(), y.data(), got.data(), n);
      for (int i = 0; i < n; ++i) want[i] = x[i] * y[i];
      check_close(got, want, tol);

      got = z;
      o.vfma(x.data(), y.data(), got.data(), n);
      for (int i = 0; i < n; ++i) want[i] = z[i] + x[i] * y[i];
      check_close(got, want, tol);

      double dref = 0;
      for (int i = 0; i < n; ++i)
        dref += static_cast<double>(x[i]) * static_cast<double>(y[i]);
      CHECK(std::abs(static_cast<double>(o.dot(x.data(), y.data(), n)) - dref) <=
            tol * (1.0 + std::abs(dref)));

      double sref = 0;
      for (int i = 0; i < n; ++i) sref += static_cast<double>(x[i]);
      CHECK(std::abs(static_cast<double>(o.sum(x.data(), n)) - sref) <=
            tol * (1.0 + std::abs(sref)));

      // activation backward rules; y plays the role of a forward output
      std::vector<T> act(n), dy = random_vec<T>(n, rng);
      for (int i = 0; i < n; ++i)
        act[i] = static_cast<T>(std::tanh(static_cast<double>(x[i])));
      got = z;
      o.tanh_bwd(act.data(), dy.data(), got.data(), n);
      for (int i = 0; i < n; ++i)
        want[i] = z[i] + dy[i] * (T(1) - act[i] * act[i]);
      check_close(got, want, tol);

      for (int i = 0; i < n; ++i)
        act[i] =
            static_cast<T>(1.0 / (1.0 + std::exp(-static_cast<double>(x[i]))));
      got = z;
      o.sigmoid_bwd(act.data(), dy.data(), got.data(), n);
      for (int i = 0; i < n; ++i)
        want[i] = z[i] + dy[i] * act[i] * (T(1) - act[i]);
      check_close(got, want, tol);

      // transcendental maps; inputs cover the gate range plus the saturated
      // ends and a straddle of the avx2 tanh clamp at |x| = 20
      std::vector<T> tx(n);
      for (int i = 0; i < n; ++i)
        tx[i] = static_cast<T>(8.0 * static_cast<double>(x[i]));
      if (n >= 8) {
        tx[0] = T(0);
        tx[1] = T(19);
        tx[2] = T(21);
        tx[3] = T(-19);
        tx[4] = T(-21);
        tx[5] = T(400);
        tx[6] = T(-400);
      }
      got.assign(n, T(0));
      o.vtanh(tx.data(), got.data(), n);
      for (int i = 0; i < n; ++i)
        want[i] = static_cast<T>(std::tanh(static_cast<double>(tx[i])));
      check_close(got, want, tol);

      got.assign(n, T(0));
      o.vsigmoid(tx.data(), got.data(), n);
      for (int i = 0; i < n; ++i)
        want[i] =
            static_cast<T>(1.0 / (1.0 + std::exp(-static_cast<double>(tx[i]))));
      check_close(got, want, tol);

      // in-place use is allowed and NaN must survive both maps
      got = tx;
      o.vtanh(got.data(), got.data(), n);
      check_close(got, want_tanh(tx), tol);
      std::vector<T> nanv(n, std::numeric_limits<T>::quiet_NaN());
      o.vtanh(nanv.data(), nanv.data(), n);
      for (int i = 0; i < n; ++i) CHECK(std::isnan(nanv[i]));
      nanv.assign(n, std::numeric_limits<T>::quiet_NaN());
      o.vsigmoid(nanv.data(), nanv.data(), n);
      for (int i = 0; i < n; ++i) CHECK(std::isnan(nanv[i]));
    }

    // add_bias over a few row counts
    for (int rows : {1, 2, 5}) {
      for (int n : {1, 9, 64, 70}) {
        auto y0 = random_vec<T>(static_cast<size_t>(rows) * n, rng);
        auto bias = random_vec<T>(n, rng);
        auto got = y0;
        o.add_bias(got.data(), bias.data(), rows, n);
        std::vector<T> want = y0;
        for (int r = 0; r < rows; ++r)
          for (int j = 0; j < n; ++j) want[r * n + j] += bias[j];
        check_close(got, want, tol);
      }
    }
  }
  pih::kern::force_backend(Backend::scalar);
}

}  // namespace

TEST_CASE("matmul kernels match a naive oracle on every available backend") {
  run_matmul_checks<float>(2e-5);
  run_matmul_checks<double>(1e-12);
}

TEST_CASE("elementwise kernels match reference formulas on every backend") {
  run_elementwise_checks<float>(2e-5);
  run_elementwise_checks<double>(1e-12);
}

TEST_CASE("SIMD backends agree with the scalar reference to tight tolerance") {
  // Direct scalar-vs-SIMD comparison at training shapes. Different summation
  // orders only; float disagreement must stay at rounding scale.
  Rng rng(7);
  const auto backs = available_backends();
  for (const auto& s : kShapes) {
    auto a = random_vec<float>(static_cast<size_t>(s.m) * s.k, rng);
    auto bm = random_vec<float>(static_cast<size_t>(s.n) * s.k, rng);
    pih::kern::force_backend(Backend::scalar);
    std::vector<float> ref(static_cast<size_t>(s.m) * s.n, 0.f);
    pih::kern::ops<float>().matmul_nt(a.data(), bm.data(), ref.data(), s.m,
                                      s.n, s.k, false);
    for (Backend b : backs) {
      if (b == Backend::scalar) continue;
      pih::kern::force_backend(b);
      std::vector<float> got(static_cast<size_t>(s.m) * s.n, 0.f);
      pih::kern::ops<float>().matmul_nt(a.data(), bm.data(), got.data(), s.m,
                                        s.n, s.k, false);
      check_close(got, ref, 1e-5);
    }
  }
  pih::kern::force_backend(Backend::scalar);
}

TEST_CASE("each backend is bitwise deterministic across repeated calls") {
  Rng rng(11);
  for (Backend b : available_backends()) {
    pih::kern::force_backend(b);
    const auto& o = pih::kern::ops<float>();
    const int m = 13, n = 67, k = 45;
    auto a = random_vec<float>(static_cast<size_t>(m) * k, rng);
    auto bm = random_vec<float>(static_cast<size_t>(n) * k, rng);
    std::vector<float> c1(static_cast<size_t>(m) * n, 0.f), c2 = c1;
    o.matmul_nt(a.data(), bm.data(), c1.data(), m, n, k, false);
    o.matmul_nt(a.data(), bm.data(), c2.data(), m, n, k, false);
    CHECK(std::memcmp(c1.data(), c2.data(), c1.size() * sizeof(float)) == 0);
  }
  pih::kern::force_backend(Backend::scalar);
}

TEST_CASE("backend selection respects force_backend and names round-trip") {
  for (Backend b : available_backends()) {
    pih::kern::force_backend(b);
    CHECK(pih::kern::active_backend() == b);
  }
  CHECK(std::string(pih::kern::backend_name(Backend::scalar)) == "scalar");
  CHECK(std::string(pih::kern::backend_name(Backend::avx2)) == "avx2");
  CHECK(std::string(pih::kern::backend_name(Backend::avx512)) == "avx512");
  pih::kern::force_backend(Backend::scalar);
}
