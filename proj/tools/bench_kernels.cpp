// Microbenchmark for the matmul kernels at the shapes the recurrent nets
// actually use (batch-of-rows by small dense layers). Prints sustained
// Gflop/s per backend so batch sizes can be chosen with open eyes.

#include <chrono>
#include <cstdio>
#include <vector>

#include "pih/kernels.hpp"
#include "pih/rng.hpp"

using pih::kern::Backend;

namespace {

struct Shape {
  const char* tag;
  int m, n, k;
};

template <typename T>
void fill(std::vector<T>& v, pih::Rng& rng) {
  for (auto& x : v) x = static_cast<T>(rng.uniform(-1.0, 1.0));
}

template <typename T>
void bench_type(const char* tname) {
  // m = active sequence rows per step; n/k = layer widths.
  // 192 = stacked GRU gates for hidden 64; 48 = obs+act embed; 67 = hidden+3.
  const Shape shapes[] = {
      {"nt gru_x", 32, 192, 48},  {"nt gru_h", 32, 192, 64},
      {"nt mlp", 32, 64, 67},     {"nn dX", 32, 64, 192},
      {"tn dW", 192, 48, 32},     {"nt small", 8, 192, 64},
  };
  const auto& o = pih::kern::ops<T>();
  pih::Rng rng(1234);
  for (const auto& s : shapes) {
    std::vector<T> a(static_cast<size_t>(s.m) * s.k);
    std::vector<T> b(static_cast<size_t>(s.n) * s.k);
    std::vector<T> c(static_cast<size_t>(s.m) * s.n, T(0));
    // nn/tn read b as [k,n] and a as [k,m]; sizes above cover both layouts.
    std::vector<T> a2(static_cast<size_t>(s.k) * s.m);
    std::vector<T> b2(static_cast<size_t>(s.k) * s.n);
    fill(a, rng);
    fill(b, rng);
    fill(a2, rng);
    fill(b2, rng);

    const bool is_nn = s.tag[1] == 'n' && s.tag[0] == 'n';
    const bool is_tn = s.tag[0] == 't';
    auto run = [&] {
      if (is_tn)
        o.matmul_tn(a2.data(), b2.data(), c.data(), s.m, s.n, s.k, true);
      else if (is_nn)
        o.matmul_nn(a.data(), b2.data(), c.data(), s.m, s.n, s.k, true);
      else
        o.matmul_nt(a.data(), b.data(), c.data(), s.m, s.n, s.k, true);
    };

    for (int w = 0; w < 50; ++w) run();  // warmup
    const double flop = 2.0 * s.m * s.n * s.k;
    long iters = 0;
    const auto t0 = std::chrono::steady_clock::now();
    double elapsed = 0.0;
    while (elapsed < 0.25) {
      for (int r = 0; r < 200; ++r) run();
      iters += 200;
      elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                              t0)
                    .count();
    }
    const double gflops = flop * static_cast<double>(iters) / elapsed / 1e9;
    double sink = 0;
    for (const auto& x : c) sink += static_cast<double>(x);
    std::printf("  %-9s %-8s m=%-3d n=%-3d k=%-3d  %7.2f Gflop/s (sink %.3g)\n",
                tname, s.tag, s.m, s.n, s.k, gflops, sink);
  }
}

}  // namespace

int main() {
  for (Backend b : {Backend::scalar, Backend::avx2, Backend::avx512}) {
    if (!pih::kern::backend_available(b)) {
      std::printf("backend %s: not available\n", pih::kern::backend_name(b));
      continue;
    }
    pih::kern::force_backend(b);
    std::printf("backend %s:\n", pih::kern::backend_name(b));
    bench_type<float>("float");
    bench_type<double>("double");
  }
  return 0;
}
