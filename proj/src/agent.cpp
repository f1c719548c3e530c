#include "pih/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pih::agent {

void AgentConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("agent: gamma must be in [0,1)");
  if (!(rho > 0.0 && rho < 1.0))
    throw std::invalid_argument("agent: rho must be in (0,1)");
  if (lambda_c < 0.0 || lambda_a < 0.0)
    throw std::invalid_argument("agent: lambda weights must be >= 0");
  if (alpha < 0.0 || (auto_alpha && alpha <= 0.0))
    throw std::invalid_argument("agent: alpha must be positive");
  if (alpha_lr <= 0.0 || lr <= 0.0)
    throw std::invalid_argument("agent: learning rates must be positive");
  if (batch_episodes < 1)
    throw std::invalid_argument("agent: batch_episodes must be >= 1");
  if (!(expert_fraction >= 0.0 && expert_fraction <= 1.0))
    throw std::invalid_argument("agent: expert_fraction must be in [0,1]");
  for (double b : bounds)
    if (!(b > 0.0))
      throw std::invalid_argument("agent: action bounds must be positive");
  net.validate();
  if (net.act_dim != kActDim)
    throw std::invalid_argument("agent: net act_dim must be 3");
  if (net.obs_dim != (use_state ? kStateDim : kObsDim))
    throw std::invalid_argument("agent: net obs_dim does not match input");
  sym::parse_group(group);  // throws on malformed spec
}

namespace {

template <typename T>
std::vector<T> to_scalar(const std::vector<double>& v) {
  return std::vector<T>(v.begin(), v.end());
}

}  // namespace

template <typename T>
SymSacAgent<T>::SymSacAgent(const AgentConfig& cfg, std::uint64_t seed)
    : cfg_(cfg),
      group_(sym::parse_group(cfg.group)),
      actor_(),
      c1_(),
      c2_(),
      t1_(),
      t2_(),
      enc_pi_(actor_, "enc", cfg.net),
      enc_c1_(c1_, "enc", cfg.net),
      enc_c2_(c2_, "enc", cfg.net),
      enc_t1_(t1_, "enc", cfg.net),
      enc_t2_(t2_, "enc", cfg.net),
      pi_(actor_, "pi", cfg.net),
      q1_(c1_, "q", cfg.net),
      q2_(c2_, "q", cfg.net),
      qt1_(t1_, "q", cfg.net),
      qt2_(t2_, "q", cfg.net),
      rng_(derive_seed(seed, "update")),
      act_rng_(derive_seed(seed, "act")) {
  cfg_.validate();
  inverse_.reserve(group_.size());
  for (const auto& g : group_.elements) inverse_.push_back(sym::inverse(g));
  actor_.finalize(derive_seed(seed, "actor"));
  c1_.finalize(derive_seed(seed, "critic1"));
  c2_.finalize(derive_seed(seed, "critic2"));
  t1_.finalize(derive_seed(seed, "target1"));
  t2_.finalize(derive_seed(seed, "target2"));
  t1_.copy_params_from(c1_);
  t2_.copy_params_from(c2_);
  log_alpha_ = std::log(cfg_.alpha > 0.0 ? cfg_.alpha : 1.0);
}

template <typename T>
net::ParamStore<T>& SymSacAgent<T>::store(const std::string& which) {
  if (which == "actor") return actor_;
  if (which == "critic1") return c1_;
  if (which == "critic2") return c2_;
  if (which == "target1") return t1_;
  if (which == "target2") return t2_;
  throw std::invalid_argument("no parameter store named " + which);
}

template <typename T>
typename SymSacAgent<T>::Prepared SymSacAgent<T>::prepare(
    const replay::Batch& batch) const {
  Prepared p;
  p.B = batch.b;
  p.Tm = batch.t_max;
  p.in = to_scalar<T>(cfg_.use_state ? batch.state : batch.obs);
  p.act = to_scalar<T>(batch.act);
  p.enc_mask.assign(static_cast<size_t>(p.Tm + 1) * p.B, T(0));
  for (int t = 0; t <= p.Tm; ++t)
    for (int i = 0; i < p.B; ++i)
      if (t <= batch.lengths[i])
        p.enc_mask[static_cast<size_t>(t) * p.B + i] = T(1);
  return p;
}

template <typename T>
std::vector<double> SymSacAgent<T>::main_mask(const replay::Batch& batch,
                                              int copies) const {
  std::vector<double> m(batch.mask);
  if (copies > 1 && !cfg_.augment) {
    // consistency terms use the expanded rows, the main losses do not
    for (int t = 0; t < batch.t_max; ++t)
      for (int i = 0; i < batch.b; ++i)
        if (i % copies != 0) m[static_cast<size_t>(t) * batch.b + i] = 0.0;
  }
  return m;
}

template <typename T>
std::vector<double> SymSacAgent<T>::compute_target(const replay::Batch& batch,
                                                   std::uint64_t noise_seed,
                                                   int copies) {
  const Prepared p = prepare(batch);
  return target_impl(batch, p, noise_seed, copies);
}

template <typename T>
std::vector<double> SymSacAgent<T>::target_impl(const replay::Batch& batch,
                                                const Prepared& p,
                                                std::uint64_t noise_seed,
                                                int copies) {
  const int B = p.B, Tm = p.Tm, A = kActDim;
  const int Braw = B / copies;
  const int F = cfg_.net.feature_dim();
  const size_t rows = static_cast<size_t>(Tm + 1) * B;

  // sampling noise indexed by (source episode, step): group-expanded copies
  // of an episode reuse the same draw, so a symmetric net sees symmetric
  // targets exactly
  std::vector<double> eps(static_cast<size_t>(Tm) * Braw * A);
  for (int e = 0; e < Braw; ++e) {
    Rng r(derive_seed(noise_seed, "teps", static_cast<std::uint64_t>(e)));
    for (int t = 0; t < Tm; ++t)
      for (int j = 0; j < A; ++j)
        eps[(static_cast<size_t>(t) * Braw + e) * A + j] = r.normal();
  }

  std::vector<T> fpi(rows * F), mean(rows * A), lstd(rows * A);
  enc_pi_.forward(p.in.data(), p.act.data(), p.enc_mask.data(), Tm + 1, B,
                  fpi.data());
  pi_.forward(fpi.data(), static_cast<int>(rows), mean.data(), lstd.data());

  std::vector<T> ft1(rows * F), ft2(rows * F);
  enc_t1_.forward(p.in.data(), p.act.data(), p.enc_mask.data(), Tm + 1, B,
                  ft1.data());
  enc_t2_.forward(p.in.data(), p.act.data(), p.enc_mask.data(), Tm + 1, B,
                  ft2.data());

  // a' ~ pi(.|h') for every extended history, i.e. feature slices 1..Tm
  const size_t nrows = static_cast<size_t>(Tm) * B;
  std::vector<T> atil(nrows * A);
  std::vector<double> logp(nrows, 0.0);
  for (int t = 1; t <= Tm; ++t)
    for (int i = 0; i < B; ++i) {
      const size_t r = static_cast<size_t>(t) * B + i;
      const size_t out = static_cast<size_t>(t - 1) * B + i;
      double mu[3], ls[3], z[3];
      for (int j = 0; j < A; ++j) {
        mu[j] = static_cast<double>(mean[r * A + j]);
        ls[j] = static_cast<double>(lstd[r * A + j]);
        const double e =
            eps[(static_cast<size_t>(t - 1) * Braw + i / copies) * A + j];
        z[j] = mu[j] + std::exp(ls[j]) * e;
        atil[out * A + j] = static_cast<T>(cfg_.bounds[j] * std::tanh(z[j]));
      }
      logp[out] = net::squashed_logprob(mu, ls, z, cfg_.bounds.data(), A);
    }

  std::vector<T> qb1(nrows), qb2(nrows);
  qt1_.forward(ft1.data() + static_cast<size_t>(B) * F, atil.data(),
               static_cast<int>(nrows), qb1.data());
  qt2_.forward(ft2.data() + static_cast<size_t>(B) * F, atil.data(),
               static_cast<int>(nrows), qb2.data());

  const double a = alpha();
  std::vector<double> y(nrows, 0.0);
  for (size_t r = 0; r < nrows; ++r) {
    if (batch.mask[r] == 0.0) continue;
    const double qmin = std::min(static_cast<double>(qb1[r]),
                                 static_cast<double>(qb2[r]));
    y[r] = batch.reward[r] +
           cfg_.gamma * (1.0 - batch.done[r]) * (qmin - a * logp[r]);
  }
  return y;
}

template <typename T>
double SymSacAgent<T>::sym_pairs_q(const std::vector<T>& q,
                                   const replay::Batch& batch, int copies,
                                   std::vector<T>* dq, double lambda) const {
  if (copies < 2) return 0.0;
  const int B = batch.b, Braw = B / copies;
  double n_raw = 0.0;
  for (int t = 0; t < batch.t_max; ++t)
    for (int e = 0; e < Braw; ++e)
      n_raw += batch.mask[static_cast<size_t>(t) * B + e * copies];
  if (n_raw == 0.0) return 0.0;
  const double M = n_raw * copies;

  double loss = 0.0;
  for (int t = 0; t < batch.t_max; ++t)
    for (int e = 0; e < Braw; ++e) {
      const size_t base = static_cast<size_t>(t) * B + e * copies;
      if (batch.mask[base] == 0.0) continue;
      const double q0 = static_cast<double>(q[base]);
      for (int k = 1; k < copies; ++k) {
        const double d = q0 - static_cast<double>(q[base + k]);
        loss += d * d;
        if (dq) {
          const T gd = static_cast<T>(lambda * 2.0 * d / M);
          (*dq)[base] += gd;
          (*dq)[base + k] -= gd;
        }
      }
    }
  return loss / M;
}

template <typename T>
double SymSacAgent<T>::sym_pairs_mean(const std::vector<T>& mean,
                                      const replay::Batch& batch, int copies,
                                      std::vector<T>* dmean,
                                      double lambda) const {
  if (copies < 2) return 0.0;
  const int B = batch.b, Braw = B / copies, A = kActDim;
  double n_raw = 0.0;
  for (int t = 0; t < batch.t_max; ++t)
    for (int e = 0; e < Braw; ++e)
      n_raw += batch.mask[static_cast<size_t>(t) * B + e * copies];
  if (n_raw == 0.0) return 0.0;
  const double M = n_raw * copies;

  double loss = 0.0;
  for (int t = 0; t < batch.t_max; ++t)
    for (int e = 0; e < Braw; ++e) {
      const size_t r0 = static_cast<size_t>(t) * B + e * copies;
      if (batch.mask[r0] == 0.0) continue;
      const double m0x = mean[r0 * A], m0y = mean[r0 * A + 1],
                   m0z = mean[r0 * A + 2];
      for (int k = 1; k < copies; ++k) {
        const size_t rk = r0 + k;
        const Vec2 g0 = sym::apply_point(group_.elements[k], {m0x, m0y});
        const double dx = g0.x - static_cast<double>(mean[rk * A]);
        const double dy = g0.y - static_cast<double>(mean[rk * A + 1]);
        const double dz = m0z - static_cast<double>(mean[rk * A + 2]);
        loss += dx * dx + dy * dy + dz * dz;
        if (dmean) {
          const double w = lambda * 2.0 / M;
          const Vec2 back = sym::apply_point(inverse_[k], {dx, dy});
          (*dmean)[r0 * A] += static_cast<T>(w * back.x);
          (*dmean)[r0 * A + 1] += static_cast<T>(w * back.y);
          (*dmean)[r0 * A + 2] += static_cast<T>(w * dz);
          (*dmean)[rk * A] -= static_cast<T>(w * dx);
          (*dmean)[rk * A + 1] -= static_cast<T>(w * dy);
          (*dmean)[rk * A + 2] -= static_cast<T>(w * dz);
        }
      }
    }
  return loss / M;
}

template <typename T>
typename SymSacAgent<T>::CriticLosses SymSacAgent<T>::critic_pass(
    const replay::Batch& batch, const std::vector<double>& y, int copies) {
  const Prepared p = prepare(batch);
  const int B = p.B, Tm = p.Tm;
  const int F = cfg_.net.feature_dim();
  const size_t rows = static_cast<size_t>(Tm + 1) * B;
  const size_t nrows = static_cast<size_t>(Tm) * B;
  const bool sym = cfg_.aux_losses && copies > 1;

  const std::vector<double> w = main_mask(batch, copies);
  double n_td = 0.0;
  for (double m : w) n_td += m;
  if (n_td == 0.0) throw std::invalid_argument("critic pass: empty mask");

  CriticLosses out;
  net::HistoryEncoder<T>* encs[2] = {&enc_c1_, &enc_c2_};
  net::QHead<T>* heads[2] = {&q1_, &q2_};
  double* tds[2] = {&out.td1, &out.td2};
  double* syms[2] = {&out.sym1, &out.sym2};

  std::vector<T> feat(rows * F), qv(nrows), dq(nrows);
  std::vector<T> dfeat(rows * F);
  for (int c = 0; c < 2; ++c) {
    encs[c]->forward(p.in.data(), p.act.data(), p.enc_mask.data(), Tm + 1, B,
                     feat.data());
    heads[c]->forward(feat.data(), p.act.data(), static_cast<int>(nrows),
                      qv.data());

    std::fill(dq.begin(), dq.end(), T(0));
    double td = 0.0;
    for (size_t r = 0; r < nrows; ++r) {
      const double e = static_cast<double>(qv[r]) - y[r];
      td += w[r] * e * e;
      dq[r] = static_cast<T>(2.0 * w[r] * e / n_td);
    }
    *tds[c] = td / n_td;
    *syms[c] = sym ? sym_pairs_q(qv, batch, copies, &dq, cfg_.lambda_c) : 0.0;

    std::fill(dfeat.begin(), dfeat.end(), T(0));
    heads[c]->backward(dq.data(), dfeat.data(), nullptr, false);
    encs[c]->backward(dfeat.data(), nullptr, nullptr);
  }
  return out;
}

template <typename T>
typename SymSacAgent<T>::ActorLosses SymSacAgent<T>::actor_pass(
    const replay::Batch& batch, std::uint64_t noise_seed, int copies) {
  const Prepared p = prepare(batch);
  const int B = p.B, Tm = p.Tm, A = kActDim;
  const int Braw = B / copies;
  const int F = cfg_.net.feature_dim();
  const size_t rows = static_cast<size_t>(Tm + 1) * B;
  const size_t nrows = static_cast<size_t>(Tm) * B;
  const bool sym = cfg_.aux_losses && copies > 1;
  const double a = alpha();

  const std::vector<double> w = main_mask(batch, copies);
  double n_td = 0.0;
  for (double m : w) n_td += m;
  if (n_td == 0.0) throw std::invalid_argument("actor pass: empty mask");

  std::vector<double> eps(static_cast<size_t>(Tm) * Braw * A);
  for (int e = 0; e < Braw; ++e) {
    Rng r(derive_seed(noise_seed, "aeps", static_cast<std::uint64_t>(e)));
    for (int t = 0; t < Tm; ++t)
      for (int j = 0; j < A; ++j)
        eps[(static_cast<size_t>(t) * Braw + e) * A + j] = r.normal();
  }

  std::vector<T> fpi(rows * F), mean(rows * A), lstd(rows * A);
  enc_pi_.forward(p.in.data(), p.act.data(), p.enc_mask.data(), Tm + 1, B,
                  fpi.data());
  pi_.forward(fpi.data(), static_cast<int>(rows), mean.data(), lstd.data());

  // reparameterized a~ = bound (.) tanh(mu + std*eps) on history slices 0..Tm-1
  std::vector<T> atil(nrows * A);
  std::vector<double> logp(nrows, 0.0), th(nrows * A, 0.0), sd(nrows * A, 0.0);
  for (size_t r = 0; r < nrows; ++r) {
    double mu[3], ls[3], z[3];
    const int e = static_cast<int>(r % B) / copies;
    const int t = static_cast<int>(r / B);
    for (int j = 0; j < A; ++j) {
      mu[j] = static_cast<double>(mean[r * A + j]);
      ls[j] = static_cast<double>(lstd[r * A + j]);
      sd[r * A + j] = std::exp(ls[j]);
      z[j] = mu[j] +
             sd[r * A + j] * eps[(static_cast<size_t>(t) * Braw + e) * A + j];
      th[r * A + j] = std::tanh(z[j]);
      atil[r * A + j] = static_cast<T>(cfg_.bounds[j] * th[r * A + j]);
    }
    logp[r] = net::squashed_logprob(mu, ls, z, cfg_.bounds.data(), A);
  }

  // fresh critic features at the updated parameters; no gradient flows back
  // into the critic encoders from this pass
  std::vector<T> fc(rows * F), q1v(nrows), q2v(nrows);
  enc_c1_.forward(p.in.data(), p.act.data(), p.enc_mask.data(), Tm + 1, B,
                  fc.data());
  q1_.forward(fc.data(), atil.data(), static_cast<int>(nrows), q1v.data());
  enc_c2_.forward(p.in.data(), p.act.data(), p.enc_mask.data(), Tm + 1, B,
                  fc.data());
  q2_.forward(fc.data(), atil.data(), static_cast<int>(nrows), q2v.data());

  ActorLosses out;
  std::vector<T> dq1(nrows, T(0)), dq2(nrows, T(0));
  double sum_logp = 0.0, sum_q = 0.0;
  for (size_t r = 0; r < nrows; ++r) {
    if (w[r] == 0.0) continue;
    const double qmin = std::min(static_cast<double>(q1v[r]),
                                 static_cast<double>(q2v[r]));
    out.main += w[r] * (a * logp[r] - qmin);
    sum_logp += w[r] * logp[r];
    sum_q += w[r] * qmin;
    const T g = static_cast<T>(-w[r] / n_td);
    if (static_cast<double>(q1v[r]) <= static_cast<double>(q2v[r]))
      dq1[r] = g;
    else
      dq2[r] = g;
  }
  out.main /= n_td;
  out.mean_logp = sum_logp / n_td;
  out.entropy = -out.mean_logp;
  out.q_mean = sum_q / n_td;

  std::vector<T> datil(nrows * A, T(0));
  q1_.backward(dq1.data(), nullptr, datil.data(), false);
  q2_.backward(dq2.data(), nullptr, datil.data(), true);

  std::vector<T> dmean(rows * A, T(0)), dlstd(rows * A, T(0));
  for (size_t r = 0; r < nrows; ++r) {
    const int e = static_cast<int>(r % B) / copies;
    const int t = static_cast<int>(r / B);
    for (int j = 0; j < A; ++j) {
      const size_t i = r * A + j;
      const double tj = th[i];
      const double ep = eps[(static_cast<size_t>(t) * Braw + e) * A + j];
      const double dadm = cfg_.bounds[j] * (1.0 - tj * tj);
      // entropy term, with eps held fixed: dlogp/dmu = 2 tanh z,
      // dlogp/dlog_std = -1 + 2 tanh(z) std eps
      const double went = a * w[r] / n_td;
      double gm = went * 2.0 * tj;
      double gs = went * (-1.0 + 2.0 * tj * sd[i] * ep);
      // value term through the action
      gm += static_cast<double>(datil[i]) * dadm;
      gs += static_cast<double>(datil[i]) * dadm * sd[i] * ep;
      dmean[i] += static_cast<T>(gm);
      dlstd[i] += static_cast<T>(gs);
    }
  }

  out.sym = sym ? sym_pairs_mean(mean, batch, copies, &dmean, cfg_.lambda_a)
                : 0.0;

  std::vector<T> dfpi(rows * F, T(0));
  pi_.backward(dmean.data(), dlstd.data(), dfpi.data(), false);
  enc_pi_.backward(dfpi.data(), nullptr, nullptr);
  return out;
}

template <typename T>
double SymSacAgent<T>::critic_sym_loss(const replay::Batch& batch,
                                       int copies) {
  const Prepared p = prepare(batch);
  const size_t rows = static_cast<size_t>(p.Tm + 1) * p.B;
  const size_t nrows = static_cast<size_t>(p.Tm) * p.B;
  const int F = cfg_.net.feature_dim();
  std::vector<T> feat(rows * F), qv(nrows);
  double loss = 0.0;
  net::HistoryEncoder<T>* encs[2] = {&enc_c1_, &enc_c2_};
  net::QHead<T>* heads[2] = {&q1_, &q2_};
  for (int c = 0; c < 2; ++c) {
    encs[c]->forward(p.in.data(), p.act.data(), p.enc_mask.data(), p.Tm + 1,
                     p.B, feat.data());
    heads[c]->forward(feat.data(), p.act.data(), static_cast<int>(nrows),
                      qv.data());
    loss += sym_pairs_q(qv, batch, copies, nullptr, 0.0);
  }
  return loss / 2.0;
}

template <typename T>
double SymSacAgent<T>::actor_sym_loss(const replay::Batch& batch, int copies) {
  const Prepared p = prepare(batch);
  const size_t rows = static_cast<size_t>(p.Tm + 1) * p.B;
  const int F = cfg_.net.feature_dim();
  std::vector<T> feat(rows * F), mean(rows * kActDim), lstd(rows * kActDim);
  enc_pi_.forward(p.in.data(), p.act.data(), p.enc_mask.data(), p.Tm + 1, p.B,
                  feat.data());
  pi_.forward(feat.data(), static_cast<int>(rows), mean.data(), lstd.data());
  return sym_pairs_mean(mean, batch, copies, nullptr, 0.0);
}

template <typename T>
UpdateMetrics SymSacAgent<T>::update(const replay::ReplayBuffer& buffer) {
  return update_batch(
      buffer.sample(cfg_.batch_episodes, cfg_.expert_fraction, rng_));
}

template <typename T>
UpdateMetrics SymSacAgent<T>::update_batch(const replay::Batch& raw) {
  if (raw.b == 0) throw std::invalid_argument("agent update: empty batch");
  actor_.zero_grad();
  c1_.zero_grad();
  c2_.zero_grad();

  const bool expand = (cfg_.augment || cfg_.aux_losses) && group_.size() > 1;
  replay::Batch expanded;
  if (expand) expanded = replay::augment_batch(raw, group_, cfg_.convention);
  const replay::Batch& batch = expand ? expanded : raw;
  const int copies = expand ? static_cast<int>(group_.size()) : 1;

  const std::uint64_t tseed = rng_.next_u64();
  const std::uint64_t aseed = rng_.next_u64();

  const std::vector<double> y = compute_target(batch, tseed, copies);
  const CriticLosses cl = critic_pass(batch, y, copies);
  c1_.adam_step(static_cast<T>(cfg_.lr));
  c2_.adam_step(static_cast<T>(cfg_.lr));

  const ActorLosses al = actor_pass(batch, aseed, copies);
  actor_.adam_step(static_cast<T>(cfg_.lr));

  t1_.polyak_from(c1_, static_cast<T>(cfg_.rho));
  t2_.polyak_from(c2_, static_cast<T>(cfg_.rho));

  if (cfg_.auto_alpha) {
    // move alpha up when entropy sits below the -dim(A) target
    const double target_entropy = -static_cast<double>(kActDim);
    log_alpha_ += cfg_.alpha_lr * (al.mean_logp + target_entropy);
  }
  ++updates_;

  UpdateMetrics m;
  m.td_loss_1 = cl.td1;
  m.td_loss_2 = cl.td2;
  m.critic_sym_loss = 0.5 * (cl.sym1 + cl.sym2);
  m.actor_loss = al.main;
  m.actor_sym_loss = al.sym;
  m.entropy = al.entropy;
  m.alpha = alpha();
  m.q_mean = al.q_mean;
  const double probe[8] = {m.td_loss_1, m.td_loss_2, m.critic_sym_loss,
                           m.actor_loss, m.actor_sym_loss, m.entropy,
                           m.alpha, m.q_mean};
  net::check_finite("update metrics", probe, 8);
  return m;
}

template <typename T>
ActionVec SymSacAgent<T>::act(const std::vector<double>& in_hist,
                              const std::vector<double>& act_hist,
                              bool stochastic) {
  const int in_dim = input_dim();
  if (in_hist.empty() || in_hist.size() % in_dim != 0)
    throw std::invalid_argument("act: malformed input history");
  const int steps = static_cast<int>(in_hist.size()) / in_dim;
  if (act_hist.size() != static_cast<size_t>(steps - 1) * kActDim)
    throw std::invalid_argument("act: action history length mismatch");

  const std::vector<T> in = to_scalar<T>(in_hist);
  const std::vector<T> acts = to_scalar<T>(act_hist);
  std::vector<T> mask(steps, T(1));
  std::vector<T> feat(static_cast<size_t>(steps) * cfg_.net.feature_dim());
  std::vector<T> mean(static_cast<size_t>(steps) * kActDim);
  std::vector<T> lstd(mean.size());
  enc_pi_.forward(in.data(), acts.data(), mask.data(), steps, 1, feat.data());
  pi_.forward(feat.data(), steps, mean.data(), lstd.data());

  const size_t last = static_cast<size_t>(steps - 1) * kActDim;
  ActionVec a;
  double out[3];
  for (int j = 0; j < kActDim; ++j) {
    double z = static_cast<double>(mean[last + j]);
    if (stochastic)
      z += std::exp(static_cast<double>(lstd[last + j])) * act_rng_.normal();
    out[j] = cfg_.bounds[j] * std::tanh(z);
  }
  a.delta = {out[0], out[1], out[2]};
  return a;
}

template <typename T>
nlohmann::ordered_json SymSacAgent<T>::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["net"] = net::spec_to_json(cfg_.net);
  j["log_alpha"] = log_alpha_;
  j["updates"] = updates_;
  j["actor"] = net::store_to_json(actor_);
  j["critic1"] = net::store_to_json(c1_);
  j["critic2"] = net::store_to_json(c2_);
  j["target1"] = net::store_to_json(t1_);
  j["target2"] = net::store_to_json(t2_);
  return j;
}

template <typename T>
void SymSacAgent<T>::from_json(const nlohmann::ordered_json& j) {
  if (j.at("version").get<int>() != 1)
    throw std::invalid_argument("agent checkpoint: unknown version");
  const net::NetSpec spec = net::spec_from_json(j.at("net"));
  if (!net::spec_equal(spec, cfg_.net))
    throw std::invalid_argument("agent checkpoint: net spec mismatch");
  net::store_from_json(actor_, j.at("actor"));
  net::store_from_json(c1_, j.at("critic1"));
  net::store_from_json(c2_, j.at("critic2"));
  net::store_from_json(t1_, j.at("target1"));
  net::store_from_json(t2_, j.at("target2"));
  log_alpha_ = j.at("log_alpha").get<double>();
  updates_ = j.at("updates").get<std::int64_t>();
}

template class SymSacAgent<float>;
template class SymSacAgent<double>;

}  // namespace pih::agent
