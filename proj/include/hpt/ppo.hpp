#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hpt/gae.hpp"
#include "hpt/models.hpp"
#include "hpt/rollout.hpp"

namespace hpt {

struct PpoConfig {
  double clip_eps = 0.2;
  double gamma = 0.99;
  double lambda = 0.95;
  int epochs = 10;
  int minibatch = 256;
  double value_coef = 0.5;
  double kl_stop = 0.05;  // skip remaining minibatches past this approx KL
  bool normalize_adv = true;
  int steps_per_update = 4096;
  AdamConfig adam;
};

struct UpdateStats {
  double surrogate = 0;   // mean clipped surrogate (maximized)
  double value_loss = 0;  // mean squared error of the critic
  double diversity = 0;   // mean per-state diversity value
  double utility = 0;     // mean per-state weight entropy
  double clip_frac = 0;   // fraction of samples with |rho - 1| > clip_eps
  double approx_kl = 0;   // mean of (rho - 1) - log rho over minibatches
  int stop_epoch = -1;    // epoch where the KL guard fired, -1 if it never did
  int minibatches = 0;    // optimizer steps actually applied
  bool aborted = false;   // non-finite values appeared; parameters restored
};

// Mean squared error between the critic's values and the return targets.
template <class Model>
double value_loss(Model& model, const RolloutBatch& batch, const Vec& returns) {
  require(static_cast<int>(returns.size()) == batch.n, "value_loss: size mismatch");
  double s = 0;
  for (int t = 0; t < batch.n; ++t) {
    const double err = model.value(batch.state(t), batch.goal(t)) - returns[t];
    s += err * err;
  }
  return s / static_cast<double>(batch.n);
}

// One PPO update over the batch: `epochs` reshuffled passes in minibatches,
// maximizing the clipped surrogate plus alpha * diversity + beta * utility,
// minimizing value_coef * critic MSE. Parameter groups excluded by `freeze`
// receive no optimizer step. If anything non-finite shows up, the whole
// update rolls back to the pre-update snapshot and `aborted` is set.
template <class Model>
UpdateStats ppo_update(Model& model, const RolloutBatch& batch, const Advantages& adv,
                       const PpoConfig& cfg, const RegConfig& regs,
                       const FreezeMask& freeze, Rng& rng) {
  const int n = batch.n;
  require(n > 0 && static_cast<int>(adv.adv.size()) == n, "ppo: batch/advantage mismatch");
  const ModelSnapshot snap = model.snapshot();
  const bool use_regs = regs.alpha != 0.0 || regs.beta != 0.0;

  UpdateStats st;
  double surr_sum = 0, vloss_sum = 0, dr_sum = 0, ur_sum = 0, kl_sum = 0;
  long clip_count = 0, sample_count = 0, kl_batches = 0;

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);

  try {
    for (int epoch = 0; epoch < cfg.epochs && st.stop_epoch < 0; ++epoch) {
      rng.shuffle(idx);
      for (int start = 0; start < n; start += cfg.minibatch) {
        const int m = std::min(cfg.minibatch, n - start);
        const double inv_m = 1.0 / static_cast<double>(m);
        model.zero_grads();

        double mb_surr = 0, mb_vloss = 0, mb_kl = 0;
        for (int j = 0; j < m; ++j) {
          const int i = idx[start + j];
          const auto s = batch.state(i);
          const auto g = batch.goal(i);
          const auto a = batch.action(i);
          const double A = adv.adv[i];

          model.eval(s, g);
          const double logp_new = log_prob(model.dist(), a);
          const double log_ratio = logp_new - batch.logp[i];
          const double ratio = std::exp(log_ratio);
          const double t1 = ratio * A;
          const double t2 = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps) * A;
          mb_surr += std::min(t1, t2);
          mb_kl += (ratio - 1.0) - log_ratio;
          if (std::abs(ratio - 1.0) > cfg.clip_eps) ++clip_count;

          const double coeff = (t1 <= t2) ? -inv_m * ratio * A : 0.0;
          model.stage_logp(a, coeff);
          if (use_regs) {
            const auto [dr, ur] = model.stage_regs(regs, inv_m);
            dr_sum += dr;
            ur_sum += ur;
          }
          model.flush(freeze);

          const double v = model.critic_forward(s, g);
          const double err = v - adv.ret[i];
          mb_vloss += err * err;
          model.critic_backward(cfg.value_coef * 2.0 * inv_m * err);
        }
        mb_surr *= inv_m;
        mb_vloss *= inv_m;
        mb_kl *= inv_m;
        if (!std::isfinite(mb_surr) || !std::isfinite(mb_vloss) || !std::isfinite(mb_kl))
          throw std::runtime_error("ppo: non-finite minibatch loss");

        surr_sum += mb_surr;
        vloss_sum += mb_vloss;
        kl_sum += mb_kl;
        ++kl_batches;
        sample_count += m;

        if (mb_kl > cfg.kl_stop) {
          st.stop_epoch = epoch;  // discard this minibatch's gradients
          break;
        }
        model.opt_step(freeze);
        ++st.minibatches;
      }
    }
  } catch (const std::runtime_error&) {
    model.restore(snap);
    st.aborted = true;
    return st;
  }

  if (kl_batches > 0) {
    st.surrogate = surr_sum / static_cast<double>(kl_batches);
    st.value_loss = vloss_sum / static_cast<double>(kl_batches);
    st.approx_kl = kl_sum / static_cast<double>(kl_batches);
  }
  if (sample_count > 0) {
    st.clip_frac = static_cast<double>(clip_count) / static_cast<double>(sample_count);
    if (use_regs) {
      st.diversity = dr_sum / static_cast<double>(sample_count);
      st.utility = ur_sum / static_cast<double>(sample_count);
    }
  }
  return st;
}

}  // namespace hpt
