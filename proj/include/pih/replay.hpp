#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "pih/env.hpp"
#include "pih/rng.hpp"
#include "pih/symmetry.hpp"
#include "pih/types.hpp"

namespace pih::replay {

// Padded episode batch, time-major: slice t is a contiguous (b x dim) row
// block, so the recurrent forward pass is one GEMM per step. Episodes are
// ordered longest first; with mask[t*b+i] = 0 the step is padding.
struct Batch {
  int b = 0;
  int t_max = 0;
  std::vector<double> obs;      // (t_max+1) * b * kObsDim; slice len+... pad 0
  std::vector<double> state;    // (t_max+1) * b * kStateDim
  std::vector<double> act;      // t_max * b * kActDim
  std::vector<double> reward;   // t_max * b
  std::vector<double> done;     // t_max * b, 1.0 on the terminal step
  std::vector<double> mask;     // t_max * b
  std::vector<double> success;  // t_max * b (bookkeeping, not a train input)
  std::vector<int> lengths;     // per episode
  std::vector<std::uint64_t> seeds;
  std::vector<Source> sources;

  const double* obs_t(int t) const { return obs.data() + size_t(t) * b * kObsDim; }
  const double* state_t(int t) const {
    return state.data() + size_t(t) * b * kStateDim;
  }
  const double* act_t(int t) const { return act.data() + size_t(t) * b * kActDim; }

  Episode extract(int i) const;  // unpad one episode
};

Batch make_batch(const std::vector<const Episode*>& eps);

// b -> b*|G| episodes, episode-major element-minor: output i*|G| + j holds
// episode i transformed by group element j (element 0, the identity, copies
// bit-exactly). Rewards, dones, masks and lengths are unchanged.
Batch augment_batch(const Batch& in, const sym::SymGroup& group,
                    sym::TorqueConvention conv);

class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity_online);

  void push(Episode ep);  // rejects episodes that do not end with done
  size_t size() const { return expert_.size() + online_.size(); }
  size_t expert_count() const { return expert_.size(); }
  size_t online_count() const { return online_.size(); }
  size_t capacity_online() const { return capacity_online_; }

  // ceil(expert_fraction*b) expert episodes (with replacement), remainder
  // online; either set falls back to the other when empty
  std::vector<const Episode*> sample_episodes(int b, double expert_fraction,
                                              Rng& rng) const;
  Batch sample(int b, double expert_fraction, Rng& rng) const;

  void save(const std::string& path, const env::EnvConfig& cfg) const;
  void load(const std::string& path);  // appends file contents to the sets

 private:
  std::vector<Episode> expert_;
  std::deque<Episode> online_;
  size_t capacity_online_;
};

}  // namespace pih::replay
