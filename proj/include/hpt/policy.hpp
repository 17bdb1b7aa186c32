#pragma once

#include <span>
#include <vector>

#include "hpt/distribution.hpp"
#include "hpt/nn.hpp"

namespace hpt {

// Which parameter set receives gradients during an update.
struct FreezeMask {
  bool primitives_frozen = false;
  bool combiner_frozen = false;
};

// k state-conditioned Gaussian primitives. Means come from per-primitive
// nets that see the state only; log-stds are learnable and state-independent.
struct PrimitiveSet {
  int k = 0;
  int state_dim = 0;
  int action_dim = 0;
  std::vector<DenseNet> nets;  // state -> action mean
  std::vector<Vec> log_std;    // k vectors of length action_dim

  size_t param_count() const;
};

struct PrimitiveGrads {
  std::vector<NetGrads> nets;
  std::vector<Vec> log_std;
  void zero();
};

// C_phi(s, g): sigmoid-output net over the (s, g) concatenation producing
// one weight per primitive.
struct CombinationFunction {
  DenseNet net;
};

struct CompositePolicy {
  PrimitiveSet prims;
  CombinationFunction comb;
  int state_dim = 0, goal_dim = 0, action_dim = 0;
};

struct CompositeGrads {
  PrimitiveGrads prims;
  NetGrads comb;
  void zero();
};

CompositePolicy make_composite_policy(int state_dim, int goal_dim, int action_dim,
                                      int k, const std::vector<int>& hidden, Rng& rng);
CompositeGrads make_composite_grads(const CompositePolicy& p);

// Effective per-dimension std: exp(log_std) clamped to [kStdFloor, kStdCeil].
DiagGaussian primitive_dist(const PrimitiveSet& prims, int i, std::span<const double> s);

// w_i = max(sigmoid(u_i), kWeightFloor)
Vec combine_weights(const CombinationFunction& comb, std::span<const double> s,
                    std::span<const double> g);

// Forward pass record for one (s, g): primitive dists, weights and the
// composite, plus the net caches needed to push gradients back to theta/phi.
struct CompositeEval {
  std::vector<FwdCache> prim_caches;
  FwdCache comb_cache;
  std::vector<DiagGaussian> prim_dists;
  Vec weights;
  DiagGaussian dist;
  Vec sg;  // concat buffer

  // gradient staging, one slot per primitive
  std::vector<Vec> d_mean, d_std;
  Vec d_w;
  void zero_stage();
};

void composite_eval(const CompositePolicy& p, std::span<const double> s,
                    std::span<const double> g, CompositeEval& ev);

// Stage coeff * d log pi(a|s,g) w.r.t. primitive means/stds and weights into
// ev; returns log pi(a|s,g). Call composite_flush to push staged gradients
// through the nets (so regularizer terms can be folded into the same pass).
double stage_logp_grad(const CompositePolicy& p, CompositeEval& ev,
                       std::span<const double> a, double coeff);

// Push ev's staged (d_mean, d_std, d_w) through the primitive and combiner
// nets, honoring the freeze mask and the std/weight clamp gates.
void composite_flush(const CompositePolicy& p, CompositeEval& ev,
                     const FreezeMask& freeze, CompositeGrads& grads);

// Convenience: full gradient of coeff * log_prob through everything.
double composite_logp_backward(const CompositePolicy& p, CompositeEval& ev,
                               std::span<const double> a, double coeff,
                               const FreezeMask& freeze, CompositeGrads& grads);

// Plain diagonal-Gaussian policy on the (s, g) concatenation; the scratch
// baseline and the unit-level PPO harness use it.
struct PlainPolicy {
  DenseNet net;
  Vec log_std;
  int state_dim = 0, goal_dim = 0, action_dim = 0;
};

struct PlainGrads {
  NetGrads net;
  Vec log_std;
  void zero();
};

struct PlainEval {
  FwdCache cache;
  DiagGaussian dist;
  Vec sg;
};

PlainPolicy make_plain_policy(int state_dim, int goal_dim, int action_dim,
                              const std::vector<int>& hidden, Rng& rng);
PlainGrads make_plain_grads(const PlainPolicy& p);

void plain_eval(const PlainPolicy& p, std::span<const double> s,
                std::span<const double> g, PlainEval& ev);
double plain_logp_backward(const PlainPolicy& p, PlainEval& ev,
                           std::span<const double> a, double coeff, PlainGrads& grads);

uint64_t param_checksum(const PrimitiveSet& prims);
uint64_t param_checksum(const CompositePolicy& p);
uint64_t param_checksum(const PlainPolicy& p);

}  // namespace hpt
