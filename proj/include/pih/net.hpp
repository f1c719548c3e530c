#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pih/kernels.hpp"
#include "pih/rng.hpp"

// Differentiable-network kernel: flat parameter stores with named slices,
// linear / gated-recurrent layers with hand-written reverse passes, the
// squashed-Gaussian policy head and scalar Q heads. Everything is templated
// on the scalar type; training uses double by default, float is available
// behind a flag (finite-difference validation needs 64-bit).
//
// Matrices are row-major. Sequence tensors are time-major: slice t is a
// contiguous (batch x dim) block, so each time step is one GEMM.

namespace pih::net {

// raised when a module boundary sees a non-finite value; the CLI maps this
// to its numerical-failure exit code
struct numerical_error : std::runtime_error {
  explicit numerical_error(const std::string& what)
      : std::runtime_error(what) {}
};

template <typename T>
void check_finite(const char* tag, const T* x, size_t n) {
  for (size_t i = 0; i < n; ++i)
    if (!std::isfinite(static_cast<double>(x[i])))
      throw numerical_error(std::string("non-finite value in ") + tag);
}

enum class Nonlin { tanh_fn, relu_fn };

struct NetSpec {
  int obs_dim = 9;   // 6 for the full-state baseline
  int act_dim = 3;
  int obs_embed = 32;
  int act_embed = 16;
  int rnn_hidden = 64;
  std::vector<int> mlp_hidden = {64, 64};
  Nonlin nonlin = Nonlin::tanh_fn;
  double log_std_min = -10.0;
  double log_std_max = 2.0;
  bool recurrent = true;  // false: features are just the embedded observation

  int feature_dim() const { return recurrent ? rnn_hidden : obs_embed; }
  void validate() const {
    if (obs_dim < 1 || act_dim < 1 || obs_embed < 1 || act_embed < 1 ||
        rnn_hidden < 1)
      throw std::invalid_argument("net spec: all dims must be >= 1");
    for (int h : mlp_hidden)
      if (h < 1) throw std::invalid_argument("net spec: mlp dims must be >= 1");
    if (!(log_std_min < log_std_max))
      throw std::invalid_argument("net spec: log_std_min must be < log_std_max");
  }
};

nlohmann::ordered_json spec_to_json(const NetSpec& s);
NetSpec spec_from_json(const nlohmann::ordered_json& j);
bool spec_equal(const NetSpec& a, const NetSpec& b);

// Flat parameter vector plus an equally shaped gradient and Adam moments.
// Layers register named slices while the net is being wired, then finalize()
// allocates and initializes everything deterministically from the seed.
template <typename T>
class ParamStore {
 public:
  struct Slice {
    std::string name;
    size_t off;
    int rows, cols;
    int init_fan;  // uniform(+-1/sqrt(init_fan)); 0 = zero-init
  };

  size_t add(const std::string& name, int rows, int cols, int init_fan) {
    if (finalized_) throw std::logic_error("param store already finalized");
    const size_t off = total_;
    slices_.push_back({name, off, rows, cols, init_fan});
    total_ += static_cast<size_t>(rows) * cols;
    return off;
  }

  void finalize(std::uint64_t seed) {
    if (finalized_) throw std::logic_error("param store already finalized");
    finalized_ = true;
    w_.assign(total_, T(0));
    g_.assign(total_, T(0));
    m_.assign(total_, T(0));
    v_.assign(total_, T(0));
    for (size_t si = 0; si < slices_.size(); ++si) {
      const Slice& s = slices_[si];
      if (s.init_fan <= 0) continue;
      Rng rng(derive_seed(seed, "init", si));
      const double lim = 1.0 / std::sqrt(static_cast<double>(s.init_fan));
      const size_t n = static_cast<size_t>(s.rows) * s.cols;
      for (size_t i = 0; i < n; ++i)
        w_[s.off + i] = static_cast<T>(rng.uniform(-lim, lim));
    }
  }

  T* p(size_t off) { return w_.data() + off; }
  const T* p(size_t off) const { return w_.data() + off; }
  T* g(size_t off) { return g_.data() + off; }

  std::vector<T>& params() { return w_; }
  const std::vector<T>& params() const { return w_; }
  std::vector<T>& grads() { return g_; }
  const std::vector<Slice>& slices() const { return slices_; }
  size_t size() const { return total_; }

  const Slice& slice(const std::string& name) const {
    for (const auto& s : slices_)
      if (s.name == name) return s;
    throw std::invalid_argument("no param slice named " + name);
  }

  void zero_grad() { std::fill(g_.begin(), g_.end(), T(0)); }

  void adam_step(T lr, T beta1 = T(0.9), T beta2 = T(0.999),
                 T eps = T(1e-8)) {
    ++t_;
    const double bc1 = 1.0 - std::pow(static_cast<double>(beta1), t_);
    const double bc2 = 1.0 - std::pow(static_cast<double>(beta2), t_);
    for (size_t i = 0; i < total_; ++i) {
      m_[i] = beta1 * m_[i] + (T(1) - beta1) * g_[i];
      v_[i] = beta2 * v_[i] + (T(1) - beta2) * g_[i] * g_[i];
      const T mh = static_cast<T>(m_[i] / bc1);
      const T vh = static_cast<T>(v_[i] / bc2);
      w_[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
  }

  void copy_params_from(const ParamStore& o) {
    if (o.total_ != total_) throw std::invalid_argument("param size mismatch");
    w_ = o.w_;
  }

  // this <- rho*this + (1-rho)*other
  void polyak_from(const ParamStore& o, T rho) {
    if (o.total_ != total_) throw std::invalid_argument("param size mismatch");
    for (size_t i = 0; i < total_; ++i)
      w_[i] = rho * w_[i] + (T(1) - rho) * o.w_[i];
  }

  int opt_steps() const { return t_; }
  std::vector<T>& adam_m() { return m_; }
  std::vector<T>& adam_v() { return v_; }
  void set_opt_steps(int t) { t_ = t; }

 private:
  std::vector<Slice> slices_;
  size_t total_ = 0;
  bool finalized_ = false;
  std::vector<T> w_, g_, m_, v_;
  int t_ = 0;
};

namespace detail {

inline double softplus(double x) {
  return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0);
}

// base64 of raw little-endian bytes; checkpoints must round-trip bit-exactly
std::string b64_encode(const unsigned char* data, size_t n);
std::vector<unsigned char> b64_decode(const std::string& s);

}  // namespace detail

// y = x * W^T + b
template <typename T>
class Linear {
 public:
  Linear(ParamStore<T>& ps, const std::string& name, int in, int out)
      : ps_(&ps), in_(in), out_(out) {
    w_ = ps.add(name + ".w", out, in, in);
    b_ = ps.add(name + ".b", 1, out, in);
  }

  void forward(const T* x, int n, T* y) {
    const auto& k = kern::ops<T>();
    n_ = n;
    x_.assign(x, x + static_cast<size_t>(n) * in_);
    // one small transpose turns the row GEMM into broadcast form, which
    // vectorizes over `out` instead of reducing over a short `in`
    wt_.resize(static_cast<size_t>(in_) * out_);
    const T* w = ps_->p(w_);
    for (int r = 0; r < out_; ++r)
      for (int c = 0; c < in_; ++c)
        wt_[static_cast<size_t>(c) * out_ + r] = w[static_cast<size_t>(r) * in_ + c];
    k.matmul_nn(x, wt_.data(), y, n, out_, in_, false);
    k.add_bias(y, ps_->p(b_), n, out_);
    fwd_ = true;
  }

  // dx may be null; when accumulate is false dx is overwritten
  void backward(const T* dy, T* dx, bool accumulate) {
    if (!fwd_) throw std::logic_error("linear backward without forward");
    fwd_ = false;
    const auto& k = kern::ops<T>();
    k.matmul_tn(dy, x_.data(), ps_->g(w_), out_, in_, n_, true);
    T* db = ps_->g(b_);
    for (int r = 0; r < n_; ++r)
      k.axpy(T(1), dy + static_cast<size_t>(r) * out_, db, out_);
    if (dx) k.matmul_nn(dy, ps_->p(w_), dx, n_, in_, out_, accumulate);
  }

  int in() const { return in_; }
  int out() const { return out_; }

 private:
  ParamStore<T>* ps_;
  size_t w_, b_;
  int in_, out_, n_ = 0;
  std::vector<T> x_, wt_;
  bool fwd_ = false;
};

template <typename T>
class Activation {
 public:
  explicit Activation(Nonlin kind) : kind_(kind) {}

  void forward(const T* x, size_t n, T* y) {
    y_.resize(n);
    if (kind_ == Nonlin::tanh_fn) {
      kern::ops<T>().vtanh(x, y, static_cast<int>(n));
    } else {
      for (size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
    }
    std::memcpy(y_.data(), y, n * sizeof(T));
    fwd_ = true;
  }

  // dx is accumulated into
  void backward(const T* dy, T* dx) {
    if (!fwd_) throw std::logic_error("activation backward without forward");
    fwd_ = false;
    const size_t n = y_.size();
    if (kind_ == Nonlin::tanh_fn) {
      kern::ops<T>().tanh_bwd(y_.data(), dy, dx, static_cast<int>(n));
    } else {
      for (size_t i = 0; i < n; ++i)
        if (y_[i] > T(0)) dx[i] += dy[i];
    }
  }

 private:
  Nonlin kind_;
  std::vector<T> y_;
  bool fwd_ = false;
};

// Linear -> act -> ... -> Linear (no activation after the last layer)
template <typename T>
class Mlp {
 public:
  Mlp(ParamStore<T>& ps, const std::string& name, int in,
      const std::vector<int>& hidden, int out, Nonlin nonlin) {
    int cur = in;
    for (size_t i = 0; i < hidden.size(); ++i) {
      layers_.emplace_back(ps, name + ".l" + std::to_string(i), cur,
                           hidden[i]);
      acts_.emplace_back(nonlin);
      cur = hidden[i];
    }
    layers_.emplace_back(ps, name + ".l" + std::to_string(hidden.size()), cur,
                         out);
    in_ = in;
    out_ = out;
  }

  void forward(const T* x, int n, T* y) {
    n_ = n;
    bufs_.resize(layers_.size());
    const T* cur = x;
    for (size_t i = 0; i + 1 < layers_.size(); ++i) {
      bufs_[i].resize(static_cast<size_t>(n) * layers_[i].out());
      layers_[i].forward(cur, n, bufs_[i].data());
      acts_[i].forward(bufs_[i].data(), bufs_[i].size(), bufs_[i].data());
      cur = bufs_[i].data();
    }
    layers_.back().forward(cur, n, y);
  }

  void backward(const T* dy, T* dx, bool accumulate) {
    const T* cur = dy;
    for (size_t i = layers_.size(); i-- > 0;) {
      if (i == 0) {
        layers_[0].backward(cur, dx, accumulate);
        break;
      }
      // dpost_ is fully overwritten (accumulate=false); only carry_, the
      // accumulation target, needs zeroing
      dpost_.resize(static_cast<size_t>(n_) * layers_[i].in());
      layers_[i].backward(cur, dpost_.data(), false);
      carry_.assign(dpost_.size(), T(0));
      acts_[i - 1].backward(dpost_.data(), carry_.data());
      cur = carry_.data();
    }
  }

  int in() const { return in_; }
  int out() const { return out_; }

 private:
  std::vector<Linear<T>> layers_;
  std::vector<Activation<T>> acts_;
  std::vector<std::vector<T>> bufs_;
  std::vector<T> dpost_, carry_;
  int in_ = 0, out_ = 0, n_ = 0;
};

// Gated recurrent cell over a time-major masked sequence:
//   r = sigm(W_ir x + b_ir + W_hr h + b_hr)
//   z = sigm(W_iz x + b_iz + W_hz h + b_hz)
//   n = tanh(W_in x + b_in + r .* (W_hn h + b_hn))
//   h' = (1-z) .* n + z .* h
// Rows with mask 0 propagate h unchanged and contribute no gradients.
template <typename T>
class Gru {
 public:
  Gru(ParamStore<T>& ps, const std::string& name, int in, int hidden)
      : ps_(&ps), in_(in), h_(hidden) {
    wi_ = ps.add(name + ".w_ih", 3 * hidden, in, hidden);
    bi_ = ps.add(name + ".b_ih", 1, 3 * hidden, hidden);
    wh_ = ps.add(name + ".w_hh", 3 * hidden, hidden, hidden);
    bh_ = ps.add(name + ".b_hh", 1, 3 * hidden, hidden);
  }

  // x: steps*b*in, mask: steps*b, features out: steps*b*hidden; h starts at 0
  void forward(const T* x, const T* mask, int steps, int b, T* features) {
    const auto& k = kern::ops<T>();
    steps_ = steps;
    b_ = b;
    x_.assign(x, x + static_cast<size_t>(steps) * b * in_);
    mask_.assign(mask, mask + static_cast<size_t>(steps) * b);
    hprev_.resize(static_cast<size_t>(steps) * b * h_);
    r_.resize(hprev_.size());
    z_.resize(hprev_.size());
    n_.resize(hprev_.size());
    ghn_.resize(hprev_.size());

    std::vector<T> h(static_cast<size_t>(b) * h_, T(0));
    std::vector<T> gh(static_cast<size_t>(b) * 3 * h_);

    // gate weights transposed once per sequence: the per-step GEMMs then
    // broadcast over the 3*hidden output columns instead of reducing over
    // the short input dimension
    wit_.resize(static_cast<size_t>(in_) * 3 * h_);
    wht_.resize(static_cast<size_t>(h_) * 3 * h_);
    const T* wi = ps_->p(wi_);
    const T* wh = ps_->p(wh_);
    for (int r = 0; r < 3 * h_; ++r)
      for (int c = 0; c < in_; ++c)
        wit_[static_cast<size_t>(c) * 3 * h_ + r] =
            wi[static_cast<size_t>(r) * in_ + c];
    for (int r = 0; r < 3 * h_; ++r)
      for (int c = 0; c < h_; ++c)
        wht_[static_cast<size_t>(c) * 3 * h_ + r] =
            wh[static_cast<size_t>(r) * h_ + c];

    // the input-side gate GEMM has no recurrence in it, so it runs once over
    // the whole sequence; only the h-side GEMM stays per step
    gi_.resize(static_cast<size_t>(steps) * b * 3 * h_);
    k.matmul_nn(x, wit_.data(), gi_.data(), steps * b, 3 * h_, in_, false);
    k.add_bias(gi_.data(), ps_->p(bi_), steps * b, 3 * h_);

    for (int t = 0; t < steps; ++t) {
      const size_t sb = static_cast<size_t>(t) * b;
      std::memcpy(&hprev_[sb * h_], h.data(), h.size() * sizeof(T));
      // batches are ordered longest episode first, so live rows form a
      // prefix; the per-step work shrinks to it (the rest is padding whose
      // h passes through untouched)
      int nb = b;
      while (nb > 0 && mask[sb + nb - 1] == T(0)) --nb;
      const T* gi = gi_.data() + sb * 3 * h_;
      k.matmul_nn(h.data(), wht_.data(), gh.data(), nb, 3 * h_, h_, false);
      k.add_bias(gh.data(), ps_->p(bh_), nb, 3 * h_);

      // the stored gate slabs for this step are contiguous across its live
      // rows, so the pregate sums land there and one sigmoid/tanh sweep
      // covers the whole step
      T* rs = &r_[sb * h_];
      T* zs = &z_[sb * h_];
      T* ns = &n_[sb * h_];
      T* gs = &ghn_[sb * h_];
      for (int i = 0; i < nb; ++i) {
        const size_t row = static_cast<size_t>(i) * h_;
        const T* girow = &gi[static_cast<size_t>(i) * 3 * h_];
        const T* ghrow = &gh[static_cast<size_t>(i) * 3 * h_];
        k.vadd(girow, ghrow, rs + row, h_);
        k.vadd(girow + h_, ghrow + h_, zs + row, h_);
        std::memcpy(gs + row, ghrow + 2 * h_, static_cast<size_t>(h_) * sizeof(T));
        std::memcpy(ns + row, girow + 2 * h_, static_cast<size_t>(h_) * sizeof(T));
      }
      k.vsigmoid(rs, rs, nb * h_);
      k.vsigmoid(zs, zs, nb * h_);
      k.vfma(rs, gs, ns, nb * h_);  // n pregate = gin + r .* ghn
      k.vtanh(ns, ns, nb * h_);
      for (int i = 0; i < nb; ++i) {
        if (mask[sb + i] == T(0)) continue;  // padded row: h passes through
        const size_t row = static_cast<size_t>(i) * h_;
        T* hrow = &h[row];
        const T* zr = zs + row;
        const T* nr = ns + row;
        for (int j = 0; j < h_; ++j)
          hrow[j] = (T(1) - zr[j]) * nr[j] + zr[j] * hrow[j];
      }
      std::memcpy(features + sb * h_, h.data(), h.size() * sizeof(T));
    }
    fwd_ = true;
  }

  // dfeat: steps*b*hidden gradients on every step's output; dx optional
  void backward(const T* dfeat, T* dx) {
    if (!fwd_) throw std::logic_error("gru backward without forward");
    fwd_ = false;
    const auto& k = kern::ops<T>();
    const int B = b_, H = h_;
    std::vector<T> dh(static_cast<size_t>(B) * H, T(0));
    std::vector<T> dhn(static_cast<size_t>(B) * H);
    dgi_.resize(static_cast<size_t>(steps_) * B * 3 * H);
    dgh_.resize(dgi_.size());

    // the recurrence forces a per-step walk for dh, but the gate gradients
    // land in whole-sequence slabs so the parameter and input GEMMs can run
    // once at the end; rows the walk does not write are zeroed here so they
    // stay out of those sums
    for (int t = steps_ - 1; t >= 0; --t) {
      const size_t sb = static_cast<size_t>(t) * B;
      // gradient on this step's output: downstream consumers + recurrence;
      // full width, since a padded row's output is h_{t-1} passed through
      k.axpy(T(1), dfeat + sb * H, dh.data(), B * H);

      int nb = B;
      while (nb > 0 && mask_[sb + nb - 1] == T(0)) --nb;
      T* dgi = &dgi_[sb * 3 * H];
      T* dgh = &dgh_[sb * 3 * H];
      if (nb < B) {
        std::memset(dgi + static_cast<size_t>(nb) * 3 * H, 0,
                    static_cast<size_t>(B - nb) * 3 * H * sizeof(T));
        std::memset(dgh + static_cast<size_t>(nb) * 3 * H, 0,
                    static_cast<size_t>(B - nb) * 3 * H * sizeof(T));
      }
      if (nb == 0) continue;

      for (int i = 0; i < nb; ++i) {
        const T mrow = mask_[sb + i];
        T* dhrow = &dh[static_cast<size_t>(i) * H];
        T* dgirow = dgi + static_cast<size_t>(i) * 3 * H;
        T* dghrow = dgh + static_cast<size_t>(i) * 3 * H;
        T* dhnrow = &dhn[static_cast<size_t>(i) * H];
        if (mrow == T(0)) {
          // h passed through untouched; puts all gradient on h_{t-1}
          std::memset(dgirow, 0, static_cast<size_t>(3) * H * sizeof(T));
          std::memset(dghrow, 0, static_cast<size_t>(3) * H * sizeof(T));
          std::memset(dhnrow, 0, static_cast<size_t>(H) * sizeof(T));
          continue;
        }
        const T* rr = &r_[(sb + i) * H];
        const T* zr = &z_[(sb + i) * H];
        const T* nr = &n_[(sb + i) * H];
        const T* gr = &ghn_[(sb + i) * H];
        const T* hp = &hprev_[(sb + i) * H];
        for (int j = 0; j < H; ++j) {
          const T g = dhrow[j];
          const T dz = g * (hp[j] - nr[j]);
          const T dn = g * (T(1) - zr[j]);
          const T dgn = dn * (T(1) - nr[j] * nr[j]);
          const T dr = dgn * gr[j];
          const T dgr = dr * rr[j] * (T(1) - rr[j]);
          const T dgz = dz * zr[j] * (T(1) - zr[j]);
          dgirow[j] = dgr;
          dgirow[H + j] = dgz;
          dgirow[2 * H + j] = dgn;
          dghrow[j] = dgr;
          dghrow[H + j] = dgz;
          dghrow[2 * H + j] = dgn * rr[j];
          dhnrow[j] = g * zr[j];  // direct path h' = ... + z .* h
        }
      }

      // dh for step t-1: direct term (masked rows pass dh through) + W_hh path
      for (int i = 0; i < nb; ++i) {
        const T mrow = mask_[sb + i];
        T* dhrow = &dh[static_cast<size_t>(i) * H];
        const T* dhnrow = &dhn[static_cast<size_t>(i) * H];
        if (mrow == T(0)) continue;  // dh carries over unchanged
        for (int j = 0; j < H; ++j) dhrow[j] = dhnrow[j];
      }
      k.matmul_nt(dgh, wht_.data(), dhn.data(), nb, H, 3 * H, false);
      for (int i = 0; i < nb; ++i) {
        if (mask_[sb + i] == T(0)) continue;
        k.axpy(T(1), &dhn[static_cast<size_t>(i) * H],
               &dh[static_cast<size_t>(i) * H], H);
      }
    }

    const int rows = steps_ * B;
    k.matmul_tn(dgi_.data(), x_.data(), ps_->g(wi_), 3 * H, in_, rows, true);
    k.matmul_tn(dgh_.data(), hprev_.data(), ps_->g(wh_), 3 * H, H, rows, true);
    T* dbi = ps_->g(bi_);
    T* dbh = ps_->g(bh_);
    for (int r = 0; r < rows; ++r) {
      k.axpy(T(1), &dgi_[static_cast<size_t>(r) * 3 * H], dbi, 3 * H);
      k.axpy(T(1), &dgh_[static_cast<size_t>(r) * 3 * H], dbh, 3 * H);
    }
    if (dx)
      k.matmul_nt(dgi_.data(), wit_.data(), dx, rows, in_, 3 * H, false);
  }

  int hidden() const { return h_; }

 private:
  ParamStore<T>* ps_;
  size_t wi_, bi_, wh_, bh_;
  int in_, h_, steps_ = 0, b_ = 0;
  std::vector<T> x_, mask_, hprev_, r_, z_, n_, ghn_, gi_, wit_, wht_;
  std::vector<T> dgi_, dgh_;
  bool fwd_ = false;
};

// Feature extractor over action-observation histories. Step t sees
// (o_t, a_{t-1}) with a_{-1} = 0, so features are causal by construction.
// In the non-recurrent variant features are just the embedded observation.
template <typename T>
class HistoryEncoder {
 public:
  HistoryEncoder(ParamStore<T>& ps, const std::string& name,
                 const NetSpec& spec)
      : spec_(spec),
        obs_emb_(ps, name + ".obs_emb", spec.obs_dim, spec.obs_embed),
        obs_act_(spec.nonlin),
        act_emb_(ps, name + ".act_emb", spec.act_dim, spec.act_embed),
        act_act_(spec.nonlin) {
    if (spec.recurrent)
      gru_.emplace_back(ps, name + ".gru", spec.obs_embed + spec.act_embed,
                        spec.rnn_hidden);
  }

  // obs: steps*b*obs_dim (slice t = o_t); act: (steps-1)*b*act_dim
  // (slice t = a_t, consumed by encoder step t+1); mask: steps*b
  void forward(const T* obs, const T* act, const T* mask, int steps, int b,
               T* features) {
    steps_ = steps;
    b_ = b;
    const int oe = spec_.obs_embed, ae = spec_.act_embed;
    const size_t n_obs = static_cast<size_t>(steps) * b;
    check_finite("encoder observations", obs, n_obs * spec_.obs_dim);
    if (spec_.recurrent && steps > 1)
      check_finite("encoder actions", act,
                   static_cast<size_t>(steps - 1) * b * spec_.act_dim);

    oemb_.resize(n_obs * oe);
    obs_emb_.forward(obs, static_cast<int>(n_obs), oemb_.data());
    obs_act_.forward(oemb_.data(), oemb_.size(), oemb_.data());

    if (!spec_.recurrent) {
      std::memcpy(features, oemb_.data(), oemb_.size() * sizeof(T));
      check_finite("encoder features", features, oemb_.size());
      return;
    }

    const size_t n_act = static_cast<size_t>(steps - 1) * b;
    aemb_.resize(n_act * ae);
    if (n_act > 0) {
      act_emb_.forward(act, static_cast<int>(n_act), aemb_.data());
      act_act_.forward(aemb_.data(), aemb_.size(), aemb_.data());
    }

    // gru input: [obsE(o_t) | actE(a_{t-1})], zeros for the first slice
    u_.assign(n_obs * (oe + ae), T(0));
    for (int t = 0; t < steps; ++t)
      for (int i = 0; i < b; ++i) {
        const size_t row = static_cast<size_t>(t) * b + i;
        std::memcpy(&u_[row * (oe + ae)], &oemb_[row * oe], oe * sizeof(T));
        if (t > 0)
          std::memcpy(&u_[row * (oe + ae) + oe],
                      &aemb_[(static_cast<size_t>(t - 1) * b + i) * ae],
                      ae * sizeof(T));
      }
    gru_[0].forward(u_.data(), mask, steps, b, features);
    check_finite("encoder features", features,
                 n_obs * static_cast<size_t>(spec_.rnn_hidden));
  }

  // dfeat: steps*b*feature_dim; dobs/dact optional outputs (overwritten)
  void backward(const T* dfeat, T* dobs, T* dact) {
    const int oe = spec_.obs_embed, ae = spec_.act_embed;
    const size_t n_obs = static_cast<size_t>(steps_) * b_;

    if (!spec_.recurrent) {
      std::vector<T> d(n_obs * oe, T(0));
      obs_act_.backward(dfeat, d.data());
      obs_emb_.backward(d.data(), dobs, false);
      return;
    }

    std::vector<T> du(n_obs * (oe + ae));
    gru_[0].backward(dfeat, du.data());

    std::vector<T> doemb(n_obs * oe);
    const size_t n_act = static_cast<size_t>(steps_ - 1) * b_;
    std::vector<T> daemb(n_act * ae, T(0));
    for (int t = 0; t < steps_; ++t)
      for (int i = 0; i < b_; ++i) {
        const size_t row = static_cast<size_t>(t) * b_ + i;
        std::memcpy(&doemb[row * oe], &du[row * (oe + ae)], oe * sizeof(T));
        if (t > 0)
          std::memcpy(&daemb[(static_cast<size_t>(t - 1) * b_ + i) * ae],
                      &du[row * (oe + ae) + oe], ae * sizeof(T));
      }

    std::vector<T> d(n_obs * oe, T(0));
    obs_act_.backward(doemb.data(), d.data());
    obs_emb_.backward(d.data(), dobs, false);

    if (n_act > 0) {
      std::vector<T> da(n_act * ae, T(0));
      act_act_.backward(daemb.data(), da.data());
      act_emb_.backward(da.data(), dact, false);
    }
  }

  int feature_dim() const { return spec_.feature_dim(); }

 private:
  NetSpec spec_;
  Linear<T> obs_emb_;
  Activation<T> obs_act_;
  Linear<T> act_emb_;
  Activation<T> act_act_;
  std::vector<Gru<T>> gru_;  // empty when non-recurrent
  std::vector<T> oemb_, aemb_, u_;
  int steps_ = 0, b_ = 0;
};

// MLP from features to (mean, log_std). log_std is squashed smoothly into
// [min, max] instead of hard-clamped so it stays differentiable everywhere.
template <typename T>
class PolicyHead {
 public:
  PolicyHead(ParamStore<T>& ps, const std::string& name, const NetSpec& spec)
      : spec_(spec),
        mlp_(ps, name, spec.feature_dim(), spec.mlp_hidden, 2 * spec.act_dim,
             spec.nonlin) {}

  // features: n x F -> mean: n x A, log_std: n x A
  void forward(const T* features, int n, T* mean, T* log_std) {
    const int A = spec_.act_dim;
    check_finite("policy head features", features,
                 static_cast<size_t>(n) * spec_.feature_dim());
    n_ = n;
    raw_.resize(static_cast<size_t>(n) * 2 * A);
    mlp_.forward(features, n, raw_.data());
    check_finite("policy head", raw_.data(), raw_.size());
    tanh_s_.resize(static_cast<size_t>(n) * A);
    const T lo = static_cast<T>(spec_.log_std_min);
    const T hi = static_cast<T>(spec_.log_std_max);
    for (int r = 0; r < n; ++r)
      for (int j = 0; j < A; ++j) {
        mean[static_cast<size_t>(r) * A + j] = raw_[static_cast<size_t>(r) * 2 * A + j];
        const T s = std::tanh(raw_[static_cast<size_t>(r) * 2 * A + A + j]);
        tanh_s_[static_cast<size_t>(r) * A + j] = s;
        log_std[static_cast<size_t>(r) * A + j] =
            lo + (hi - lo) * (s + T(1)) / T(2);
      }
  }

  void backward(const T* dmean, const T* dlog_std, T* dfeatures,
                bool accumulate) {
    const int A = spec_.act_dim;
    const T lo = static_cast<T>(spec_.log_std_min);
    const T hi = static_cast<T>(spec_.log_std_max);
    std::vector<T> draw(static_cast<size_t>(n_) * 2 * A);
    for (int r = 0; r < n_; ++r)
      for (int j = 0; j < A; ++j) {
        draw[static_cast<size_t>(r) * 2 * A + j] =
            dmean[static_cast<size_t>(r) * A + j];
        const T s = tanh_s_[static_cast<size_t>(r) * A + j];
        draw[static_cast<size_t>(r) * 2 * A + A + j] =
            dlog_std[static_cast<size_t>(r) * A + j] * (hi - lo) / T(2) *
            (T(1) - s * s);
      }
    mlp_.backward(draw.data(), dfeatures, accumulate);
  }

 private:
  NetSpec spec_;
  Mlp<T> mlp_;
  std::vector<T> raw_, tanh_s_;
  int n_ = 0;
};

// MLP over [features | action] to a scalar value per row
template <typename T>
class QHead {
 public:
  QHead(ParamStore<T>& ps, const std::string& name, const NetSpec& spec)
      : f_(spec.feature_dim()),
        a_(spec.act_dim),
        mlp_(ps, name, spec.feature_dim() + spec.act_dim, spec.mlp_hidden, 1,
             spec.nonlin) {}

  void forward(const T* features, const T* action, int n, T* q) {
    check_finite("q head features", features, static_cast<size_t>(n) * f_);
    check_finite("q head action", action, static_cast<size_t>(n) * a_);
    n_ = n;
    in_.resize(static_cast<size_t>(n) * (f_ + a_));
    for (int r = 0; r < n; ++r) {
      std::memcpy(&in_[static_cast<size_t>(r) * (f_ + a_)],
                  features + static_cast<size_t>(r) * f_, f_ * sizeof(T));
      std::memcpy(&in_[static_cast<size_t>(r) * (f_ + a_) + f_],
                  action + static_cast<size_t>(r) * a_, a_ * sizeof(T));
    }
    mlp_.forward(in_.data(), n, q);
    check_finite("q head", q, n);
  }

  // dfeatures/daction are optional and accumulated into when requested
  void backward(const T* dq, T* dfeatures, T* daction, bool accumulate) {
    std::vector<T> din(static_cast<size_t>(n_) * (f_ + a_), T(0));
    mlp_.backward(dq, din.data(), false);
    for (int r = 0; r < n_; ++r) {
      if (dfeatures) {
        T* df = dfeatures + static_cast<size_t>(r) * f_;
        const T* s = &din[static_cast<size_t>(r) * (f_ + a_)];
        if (accumulate)
          for (int j = 0; j < f_; ++j) df[j] += s[j];
        else
          std::memcpy(df, s, f_ * sizeof(T));
      }
      if (daction) {
        T* da = daction + static_cast<size_t>(r) * a_;
        const T* s = &din[static_cast<size_t>(r) * (f_ + a_) + f_];
        if (accumulate)
          for (int j = 0; j < a_; ++j) da[j] += s[j];
        else
          std::memcpy(da, s, a_ * sizeof(T));
      }
    }
  }

 private:
  int f_, a_;
  Mlp<T> mlp_;
  std::vector<T> in_;
  int n_ = 0;
};

// Squashed-Gaussian helpers. A pre-squash sample z = mean + std*eps maps to
// the bounded action a = bound * tanh(z); the log-density picks up the
// change-of-variables term  -log(bound * (1 - tanh(z)^2))  per dimension,
// with log(1 - tanh(z)^2) = 2*(log 2 - z - softplus(-2z)) for stability.
inline double squash_correction(double z) {
  return 2.0 * (std::log(2.0) - z - detail::softplus(-2.0 * z));
}

// log pi(a|h) for one row of pre-squash samples
inline double squashed_logprob(const double* mean, const double* log_std,
                               const double* z, const double* bound, int dim) {
  constexpr double kLog2Pi = 1.8378770664093453;
  double lp = 0.0;
  for (int j = 0; j < dim; ++j) {
    const double s = std::exp(log_std[j]);
    const double u = (z[j] - mean[j]) / s;
    lp += -0.5 * u * u - log_std[j] - 0.5 * kLog2Pi;
    lp -= squash_correction(z[j]) + std::log(bound[j]);
  }
  return lp;
}

template <typename T>
nlohmann::ordered_json store_to_json(const ParamStore<T>& ps);
template <typename T>
void store_from_json(ParamStore<T>& ps, const nlohmann::ordered_json& j);

extern template class ParamStore<float>;
extern template class ParamStore<double>;
extern template class Linear<float>;
extern template class Linear<double>;
extern template class Activation<float>;
extern template class Activation<double>;
extern template class Mlp<float>;
extern template class Mlp<double>;
extern template class Gru<float>;
extern template class Gru<double>;
extern template class HistoryEncoder<float>;
extern template class HistoryEncoder<double>;
extern template class PolicyHead<float>;
extern template class PolicyHead<double>;
extern template class QHead<float>;
extern template class QHead<double>;

}  // namespace pih::net
