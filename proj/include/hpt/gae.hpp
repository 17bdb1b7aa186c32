#pragma once

#include <algorithm>
#include <cmath>

#include "hpt/rollout.hpp"

namespace hpt {

struct Advantages {
  Vec adv;  // GAE(gamma, lambda) advantage estimates
  Vec ret;  // value targets: adv + V(s_t)
};

// Backward recursion over the batch:
//   delta_t = r_t + gamma * V(s_{t+1}) * (1 - done_t) - V(s_t)
//   adv_t   = delta_t + gamma * lambda * (1 - done_t) * adv_{t+1}
// with V beyond the batch cut taken from batch.final_bootstrap.
inline Advantages compute_gae(const RolloutBatch& batch, double gamma, double lambda) {
  const int n = batch.n;
  Advantages out;
  out.adv.assign(n, 0.0);
  out.ret.assign(n, 0.0);
  double next_adv = 0.0;
  double next_value = batch.final_bootstrap;
  for (int t = n - 1; t >= 0; --t) {
    const double not_done = batch.done[t] ? 0.0 : 1.0;
    const double delta =
        batch.reward[t] + gamma * next_value * not_done - batch.value[t];
    next_adv = delta + gamma * lambda * not_done * next_adv;
    out.adv[t] = next_adv;
    out.ret[t] = next_adv + batch.value[t];
    next_value = batch.value[t];
  }
  return out;
}

// In-place batch normalization to zero mean / unit std, with the divisor
// floored at 1e-8 so constant advantages map to zero.
inline void normalize_advantages(Vec& adv) {
  if (adv.empty()) return;
  const double mu = mean(adv);
  double sq = 0.0;
  for (double a : adv) sq += (a - mu) * (a - mu);
  const double sd = std::sqrt(sq / static_cast<double>(adv.size()));
  const double div = std::max(sd, 1e-8);
  for (double& a : adv) a = (a - mu) / div;
}

}  // namespace hpt
