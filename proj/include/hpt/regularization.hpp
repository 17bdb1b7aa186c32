#pragma once

#include <span>

#include "hpt/distribution.hpp"
#include "hpt/policy.hpp"

namespace hpt {

struct RegConfig {
  double alpha = 0.1;    // diversity coefficient
  double beta = 0.01;    // utility coefficient
  double kl_clip = 10.0; // per-pair KL saturation
};

inline double pairwise_kl(const DiagGaussian& p, const DiagGaussian& q) {
  return kl_divergence(p, q);
}

// Per-state diversity value: mean over ordered pairs i != j of
// min(KL(d_i || d_j), kl_clip). Accumulates coeff * gradient w.r.t. each
// primitive's mean and std; the clip gates the gradient where it binds.
double diversity_terms(std::span<const DiagGaussian> dists, double kl_clip,
                       double coeff, std::span<Vec> d_mean, std::span<Vec> d_std);

// Batch diversity regularizer: mean of diversity_terms over the given
// states, gradients routed into the primitive nets and log-stds.
double diversity_reg(const PrimitiveSet& prims, std::span<const Vec> states,
                     double kl_clip, PrimitiveGrads& grads);

// Entropy of softmax(w); accumulates coeff * dH/dw into d_w.
double utility_entropy(std::span<const double> w, double coeff, std::span<double> d_w);

// Batch utility regularizer value (no gradient), for direct evaluation.
double utility_reg(std::span<const Vec> w_batch);

}  // namespace hpt
