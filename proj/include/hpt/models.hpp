#pragma once

#include <span>
#include <utility>
#include <vector>

#include "hpt/policy.hpp"
#include "hpt/regularization.hpp"

namespace hpt {

inline const std::vector<int> kPolicyHidden = {64, 64};

// Flat snapshot of parameters plus optimizer state, for update aborts.
struct ModelSnapshot {
  Vec params;
  std::vector<Vec> adam_m, adam_v;
  std::vector<long> adam_t;
};

std::vector<std::span<double>> prim_param_spans(PrimitiveSet& prims);
std::vector<std::span<const double>> prim_grad_spans(const PrimitiveGrads& g);

// Composite policy + separate critic, with gradient buffers, per-group Adam
// state and reusable evaluation workspaces. The three parameter groups
// (primitives, combiner, critic) step independently so freeze masks stay
// exact at the bit level.
struct CompositeModel {
  CompositePolicy policy;
  DenseNet critic;
  CompositeGrads grads;
  NetGrads critic_grads;
  Adam opt_prims, opt_comb, opt_critic;

  CompositeEval ev;
  FwdCache critic_cache;
  Vec sg_buf;

  int state_dim() const { return policy.state_dim; }
  int goal_dim() const { return policy.goal_dim; }
  int action_dim() const { return policy.action_dim; }

  void eval(std::span<const double> s, std::span<const double> g) {
    composite_eval(policy, s, g, ev);
  }
  const DiagGaussian& dist() const { return ev.dist; }

  double stage_logp(std::span<const double> a, double coeff) {
    return stage_logp_grad(policy, ev, a, coeff);
  }

  // stages DR/UR gradients on top of the current eval; returns their values
  std::pair<double, double> stage_regs(const RegConfig& rc, double inv_m) {
    const double dr = rc.alpha == 0.0
                          ? 0.0
                          : diversity_terms(ev.prim_dists, rc.kl_clip,
                                            -rc.alpha * inv_m, ev.d_mean, ev.d_std);
    const double ur = rc.beta == 0.0
                          ? 0.0
                          : utility_entropy(ev.weights, -rc.beta * inv_m, ev.d_w);
    return {dr, ur};
  }

  void flush(const FreezeMask& f) { composite_flush(policy, ev, f, grads); }

  double critic_forward(std::span<const double> s, std::span<const double> g);
  void critic_backward(double d_value);
  double value(std::span<const double> s, std::span<const double> g);

  void zero_grads() {
    grads.zero();
    critic_grads.zero();
  }
  void opt_step(const FreezeMask& f);

  ModelSnapshot snapshot() const;
  void restore(const ModelSnapshot& snap);

  void reset_optimizers(const AdamConfig& cfg);
};

struct PlainModel {
  PlainPolicy policy;
  DenseNet critic;
  PlainGrads grads;
  NetGrads critic_grads;
  Adam opt_pol, opt_critic;

  PlainEval ev;
  FwdCache critic_cache;
  Vec sg_buf;

  int state_dim() const { return policy.state_dim; }
  int goal_dim() const { return policy.goal_dim; }
  int action_dim() const { return policy.action_dim; }

  void eval(std::span<const double> s, std::span<const double> g) {
    plain_eval(policy, s, g, ev);
  }
  const DiagGaussian& dist() const { return ev.dist; }

  double stage_logp(std::span<const double> a, double coeff) {
    staged_a_.assign(a.begin(), a.end());
    staged_coeff_ = coeff;
    return log_prob(ev.dist, a);
  }
  std::pair<double, double> stage_regs(const RegConfig&, double) { return {0.0, 0.0}; }
  void flush(const FreezeMask& f);

  double critic_forward(std::span<const double> s, std::span<const double> g);
  void critic_backward(double d_value);
  double value(std::span<const double> s, std::span<const double> g);

  void zero_grads() {
    grads.zero();
    critic_grads.zero();
  }
  void opt_step(const FreezeMask& f);

  ModelSnapshot snapshot() const;
  void restore(const ModelSnapshot& snap);

  void reset_optimizers(const AdamConfig& cfg);

 private:
  Vec staged_a_;
  double staged_coeff_ = 0;
};

CompositeModel make_composite_model(int state_dim, int goal_dim, int action_dim, int k,
                                    const std::vector<int>& hidden, Rng& rng,
                                    const AdamConfig& adam = {});
PlainModel make_plain_model(int state_dim, int goal_dim, int action_dim,
                            const std::vector<int>& hidden, Rng& rng,
                            const AdamConfig& adam = {});

}  // namespace hpt
