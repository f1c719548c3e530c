#include "pih/replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "pih/episode_io.hpp"

namespace pih::replay {

Episode Batch::extract(int i) const {
  if (i < 0 || i >= b) throw std::out_of_range("batch episode index");
  Episode ep;
  ep.seed = seeds[i];
  ep.source = sources[i];
  const int len = lengths[i];
  ep.steps.resize(len);
  for (int t = 0; t < len; ++t) {
    auto& st = ep.steps[t];
    std::array<double, kObsDim> o{};
    std::memcpy(o.data(), obs_t(t) + size_t(i) * kObsDim,
                sizeof(double) * kObsDim);
    st.obs = Observation::from_flat(o);
    std::memcpy(st.state.data(), state_t(t) + size_t(i) * kStateDim,
                sizeof(double) * kStateDim);
    const double* a = act_t(t) + size_t(i) * kActDim;
    st.action = {{a[0], a[1], a[2]}};
    st.reward = reward[size_t(t) * b + i];
    st.done = done[size_t(t) * b + i] != 0.0;
    st.success = success[size_t(t) * b + i] != 0.0;
  }
  std::array<double, kObsDim> o{};
  std::memcpy(o.data(), obs_t(len) + size_t(i) * kObsDim,
              sizeof(double) * kObsDim);
  ep.final_obs = Observation::from_flat(o);
  std::memcpy(ep.final_state.data(), state_t(len) + size_t(i) * kStateDim,
              sizeof(double) * kStateDim);
  ep.success = !ep.steps.empty() && ep.steps.back().success;
  return ep;
}

Batch make_batch(const std::vector<const Episode*>& eps) {
  if (eps.empty()) throw std::invalid_argument("empty episode list");
  for (const auto* ep : eps)
    if (!ep || ep->steps.empty())
      throw std::invalid_argument("null or empty episode in batch");

  // longest first, stable so equal lengths keep sample order
  std::vector<const Episode*> order = eps;
  std::stable_sort(order.begin(), order.end(),
                   [](const Episode* a, const Episode* b) {
                     return a->length() > b->length();
                   });

  Batch out;
  out.b = static_cast<int>(order.size());
  out.t_max = static_cast<int>(order.front()->length());
  const size_t b = order.size(), tm = out.t_max;
  out.obs.assign((tm + 1) * b * kObsDim, 0.0);
  out.state.assign((tm + 1) * b * kStateDim, 0.0);
  out.act.assign(tm * b * kActDim, 0.0);
  out.reward.assign(tm * b, 0.0);
  out.done.assign(tm * b, 0.0);
  out.mask.assign(tm * b, 0.0);
  out.success.assign(tm * b, 0.0);
  out.lengths.resize(b);
  out.seeds.resize(b);
  out.sources.resize(b);

  for (size_t i = 0; i < b; ++i) {
    const Episode& ep = *order[i];
    const size_t len = ep.length();
    out.lengths[i] = static_cast<int>(len);
    out.seeds[i] = ep.seed;
    out.sources[i] = ep.source;
    for (size_t t = 0; t < len; ++t) {
      const auto& st = ep.steps[t];
      const auto o = st.obs.flat();
      std::memcpy(&out.obs[(t * b + i) * kObsDim], o.data(),
                  sizeof(double) * kObsDim);
      std::memcpy(&out.state[(t * b + i) * kStateDim], st.state.data(),
                  sizeof(double) * kStateDim);
      double* a = &out.act[(t * b + i) * kActDim];
      a[0] = st.action.delta.x;
      a[1] = st.action.delta.y;
      a[2] = st.action.delta.z;
      out.reward[t * b + i] = st.reward;
      out.done[t * b + i] = st.done ? 1.0 : 0.0;
      out.mask[t * b + i] = 1.0;
      out.success[t * b + i] = st.success ? 1.0 : 0.0;
    }
    const auto fo = ep.final_obs.flat();
    std::memcpy(&out.obs[(len * b + i) * kObsDim], fo.data(),
                sizeof(double) * kObsDim);
    std::memcpy(&out.state[(len * b + i) * kStateDim], ep.final_state.data(),
                sizeof(double) * kStateDim);
  }
  return out;
}

namespace {

void transform_obs9(const sym::GroupElement& g, sym::TorqueConvention conv,
                    double* o) {
  std::array<double, kObsDim> v;
  std::memcpy(v.data(), o, sizeof v);
  const Observation w = sym::act_observation(g, Observation::from_flat(v), conv);
  const auto r = w.flat();
  std::memcpy(o, r.data(), sizeof v);
}

void transform_state6(const sym::GroupElement& g, double* s) {
  const Vec2 peg = sym::apply_point(g, {s[0], s[1]});
  const Vec2 tip = sym::apply_point(g, {s[3], s[4]});
  s[0] = peg.x;
  s[1] = peg.y;
  s[3] = tip.x;
  s[4] = tip.y;
}

}  // namespace

Batch augment_batch(const Batch& in, const sym::SymGroup& group,
                    sym::TorqueConvention conv) {
  const int G = static_cast<int>(group.size());
  if (G < 1) throw std::invalid_argument("empty group");

  Batch out;
  out.b = in.b * G;
  out.t_max = in.t_max;
  const size_t ib = in.b, ob = out.b, tm = in.t_max;
  out.obs.resize((tm + 1) * ob * kObsDim);
  out.state.resize((tm + 1) * ob * kStateDim);
  out.act.resize(tm * ob * kActDim);
  out.reward.resize(tm * ob);
  out.done.resize(tm * ob);
  out.mask.resize(tm * ob);
  out.success.resize(tm * ob);
  out.lengths.resize(ob);
  out.seeds.resize(ob);
  out.sources.resize(ob);

  for (size_t i = 0; i < ib; ++i) {
    for (int j = 0; j < G; ++j) {
      const size_t oi = i * G + j;
      const sym::GroupElement& g = group.elements[j];
      out.lengths[oi] = in.lengths[i];
      out.seeds[oi] = in.seeds[i];
      out.sources[oi] = in.sources[i];
      for (size_t t = 0; t <= tm; ++t) {
        double* o = &out.obs[(t * ob + oi) * kObsDim];
        std::memcpy(o, &in.obs[(t * ib + i) * kObsDim],
                    sizeof(double) * kObsDim);
        double* s = &out.state[(t * ob + oi) * kStateDim];
        std::memcpy(s, &in.state[(t * ib + i) * kStateDim],
                    sizeof(double) * kStateDim);
        if (!g.is_identity()) {
          transform_obs9(g, conv, o);
          transform_state6(g, s);
        }
      }
      for (size_t t = 0; t < tm; ++t) {
        double* a = &out.act[(t * ob + oi) * kActDim];
        std::memcpy(a, &in.act[(t * ib + i) * kActDim],
                    sizeof(double) * kActDim);
        if (!g.is_identity()) {
          const ActionVec ta = sym::act_action(g, {{a[0], a[1], a[2]}});
          a[0] = ta.delta.x;
          a[1] = ta.delta.y;
          a[2] = ta.delta.z;
        }
        out.reward[t * ob + oi] = in.reward[t * ib + i];
        out.done[t * ob + oi] = in.done[t * ib + i];
        out.mask[t * ob + oi] = in.mask[t * ib + i];
        out.success[t * ob + oi] = in.success[t * ib + i];
      }
    }
  }
  return out;
}

ReplayBuffer::ReplayBuffer(size_t capacity_online)
    : capacity_online_(capacity_online) {
  if (capacity_online_ < 1)
    throw std::invalid_argument("online capacity must be >= 1");
}

void ReplayBuffer::push(Episode ep) {
  if (ep.steps.empty() || !ep.steps.back().done)
    throw std::invalid_argument("only complete episodes can be stored");
  if (ep.source == Source::expert) {
    expert_.push_back(std::move(ep));
    return;
  }
  online_.push_back(std::move(ep));
  while (online_.size() > capacity_online_) online_.pop_front();
}

std::vector<const Episode*> ReplayBuffer::sample_episodes(
    int b, double expert_fraction, Rng& rng) const {
  if (b < 1) throw std::invalid_argument("batch size must be >= 1");
  if (expert_fraction < 0.0 || expert_fraction > 1.0)
    throw std::invalid_argument("expert_fraction out of [0,1]");
  if (size() == 0) throw std::logic_error("sampling from an empty buffer");

  int n_exp = static_cast<int>(std::ceil(expert_fraction * b));
  n_exp = std::min(n_exp, b);
  if (expert_.empty()) n_exp = 0;
  if (online_.empty()) n_exp = b;

  std::vector<const Episode*> out;
  out.reserve(b);
  for (int i = 0; i < n_exp; ++i)
    out.push_back(&expert_[rng.uniform_int(expert_.size())]);
  for (int i = n_exp; i < b; ++i)
    out.push_back(&online_[rng.uniform_int(online_.size())]);
  return out;
}

Batch ReplayBuffer::sample(int b, double expert_fraction, Rng& rng) const {
  return make_batch(sample_episodes(b, expert_fraction, rng));
}

void ReplayBuffer::save(const std::string& path,
                        const env::EnvConfig& cfg) const {
  std::vector<Episode> all(expert_.begin(), expert_.end());
  all.insert(all.end(), online_.begin(), online_.end());
  io::save_episodes(path, all, cfg);
}

void ReplayBuffer::load(const std::string& path) {
  for (auto& ep : io::load_episodes(path)) push(std::move(ep));
}

}  // namespace pih::replay
