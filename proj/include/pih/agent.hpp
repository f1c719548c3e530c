#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "pih/net.hpp"
#include "pih/replay.hpp"
#include "pih/rng.hpp"
#include "pih/symmetry.hpp"
#include "pih/types.hpp"

// Symmetry-aware recurrent soft actor-critic over episode batches: twin
// critics with Polyak-averaged targets, a squashed-Gaussian policy, optional
// batch augmentation by a planar symmetry group, and the two symmetric
// consistency losses (critic invariance, actor equivariance).

namespace pih::agent {

struct AgentConfig {
  double gamma = 0.99;
  double alpha = 0.1;      // entropy temperature; initial value when auto
  bool auto_alpha = false;  // tune alpha toward target entropy -dim(A)
  double alpha_lr = 3e-4;
  double rho = 0.995;  // target smoothing
  double lambda_c = 1.0;
  double lambda_a = 1.0;
  std::string group = "e";
  bool augment = false;     // train main losses on the b*|G| expanded batch
  bool aux_losses = false;  // add the symmetric consistency terms
  int batch_episodes = 8;
  double expert_fraction = 0.25;
  double lr = 3e-4;
  bool use_state = false;  // privileged baseline: encode true state, not obs
  std::array<double, 3> bounds = {0.002, 0.002, 0.001};
  sym::TorqueConvention convention = sym::TorqueConvention::xy_vector;
  net::NetSpec net;

  void validate() const;  // throws std::invalid_argument
};

struct UpdateMetrics {
  double td_loss_1 = 0.0;
  double td_loss_2 = 0.0;
  double critic_sym_loss = 0.0;  // averaged over both critics
  double actor_loss = 0.0;       // alpha*logpi - min Q, without the sym term
  double actor_sym_loss = 0.0;
  double entropy = 0.0;  // -E[log pi] estimate on the update batch
  double alpha = 0.0;
  double q_mean = 0.0;
};

template <typename T>
class SymSacAgent {
 public:
  SymSacAgent(const AgentConfig& cfg, std::uint64_t seed);
  SymSacAgent(const SymSacAgent&) = delete;
  SymSacAgent& operator=(const SymSacAgent&) = delete;

  // in_hist: steps * input_dim() observations (or states), oldest first;
  // act_hist: (steps-1) * 3 preceding actions
  ActionVec act(const std::vector<double>& in_hist,
                const std::vector<double>& act_hist, bool stochastic);

  UpdateMetrics update(const replay::ReplayBuffer& buffer);
  UpdateMetrics update_batch(const replay::Batch& raw);

  // --- pieces of an update, exposed so tests can pin them down ---

  // per-step targets y = r + gamma*(1-d)*(min Q_bar(h', a') - alpha*log pi);
  // `batch` may already be group-expanded, with `copies` rows per source
  // episode sharing the per-(episode, step) sampling noise
  std::vector<double> compute_target(const replay::Batch& batch,
                                     std::uint64_t noise_seed, int copies = 1);

  struct CriticLosses {
    double td1 = 0.0, td2 = 0.0, sym1 = 0.0, sym2 = 0.0;
  };
  // forward + backward for both critics against fixed targets y; accumulates
  // gradients without stepping the optimizer
  CriticLosses critic_pass(const replay::Batch& batch,
                           const std::vector<double>& y, int copies);

  struct ActorLosses {
    double main = 0.0, sym = 0.0, entropy = 0.0, q_mean = 0.0,
           mean_logp = 0.0;
  };
  // policy-gradient pass; Q heads contribute d/da only, critic encoders stay
  // frozen (their parameter gradients are scratch, cleared next update)
  ActorLosses actor_pass(const replay::Batch& batch, std::uint64_t noise_seed,
                         int copies);

  // consistency losses on an already-expanded batch (forward only)
  double critic_sym_loss(const replay::Batch& batch, int copies);
  double actor_sym_loss(const replay::Batch& batch, int copies);

  nlohmann::ordered_json to_json() const;
  void from_json(const nlohmann::ordered_json& j);  // rejects spec mismatch

  double alpha() const {
    return cfg_.auto_alpha ? std::exp(log_alpha_) : cfg_.alpha;
  }
  const AgentConfig& config() const { return cfg_; }
  const sym::SymGroup& group() const { return group_; }
  int input_dim() const { return cfg_.use_state ? kStateDim : kObsDim; }
  std::int64_t updates_done() const { return updates_; }

  // "actor", "critic1", "critic2", "target1", "target2"
  net::ParamStore<T>& store(const std::string& which);

 private:
  struct Prepared {  // typed, time-major views of a batch
    int B = 0, Tm = 0;
    std::vector<T> in;        // (Tm+1)*B*input_dim
    std::vector<T> act;       // Tm*B*3
    std::vector<T> enc_mask;  // (Tm+1)*B; 1 while t <= episode length
  };
  Prepared prepare(const replay::Batch& batch) const;

  std::vector<double> target_impl(const replay::Batch& batch, const Prepared& p,
                                  std::uint64_t noise_seed, int copies);
  double sym_pairs_q(const std::vector<T>& q, const replay::Batch& batch,
                     int copies, std::vector<T>* dq, double lambda) const;
  double sym_pairs_mean(const std::vector<T>& mean, const replay::Batch& batch,
                        int copies, std::vector<T>* dmean, double lambda) const;
  // valid-step weights for the main losses: group-expanded rows count only
  // when augmentation is on; identity rows always count
  std::vector<double> main_mask(const replay::Batch& batch, int copies) const;

  AgentConfig cfg_;
  sym::SymGroup group_;
  std::vector<sym::GroupElement> inverse_;  // aligned with group_.elements

  net::ParamStore<T> actor_, c1_, c2_, t1_, t2_;
  net::HistoryEncoder<T> enc_pi_, enc_c1_, enc_c2_, enc_t1_, enc_t2_;
  net::PolicyHead<T> pi_;
  net::QHead<T> q1_, q2_, qt1_, qt2_;

  Rng rng_;      // update-time sampling noise
  Rng act_rng_;  // stochastic action selection
  double log_alpha_ = 0.0;
  std::int64_t updates_ = 0;
};

extern template class SymSacAgent<float>;
extern template class SymSacAgent<double>;

}  // namespace pih::agent
