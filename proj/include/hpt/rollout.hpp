#pragma once

#include <span>
#include <vector>

#include "hpt/env.hpp"
#include "hpt/math.hpp"

namespace hpt {

// Fixed-size on-policy batch in flat row-major storage.
struct RolloutBatch {
  int n = 0;
  int state_dim = 0, goal_dim = 0, action_dim = 0;
  Vec states, goals, actions;
  Vec logp, reward, value;
  std::vector<uint8_t> done;
  // V(s_n) under the collecting policy when step n-1 did not end an episode;
  // unused (zero) otherwise.
  double final_bootstrap = 0.0;

  void resize(int steps, int sd, int gd, int ad) {
    n = steps;
    state_dim = sd;
    goal_dim = gd;
    action_dim = ad;
    states.assign(static_cast<size_t>(n) * sd, 0.0);
    goals.assign(static_cast<size_t>(n) * gd, 0.0);
    actions.assign(static_cast<size_t>(n) * ad, 0.0);
    logp.assign(n, 0.0);
    reward.assign(n, 0.0);
    value.assign(n, 0.0);
    done.assign(n, 0);
    final_bootstrap = 0.0;
  }

  std::span<const double> state(int t) const {
    return {states.data() + static_cast<size_t>(t) * state_dim, (size_t)state_dim};
  }
  std::span<const double> goal(int t) const {
    return {goals.data() + static_cast<size_t>(t) * goal_dim, (size_t)goal_dim};
  }
  std::span<const double> action(int t) const {
    return {actions.data() + static_cast<size_t>(t) * action_dim, (size_t)action_dim};
  }
};

// Running tally of episode returns that spill across batch boundaries.
struct EpisodeTracker {
  double partial_return = 0.0;
  std::vector<double> completed;  // returns of episodes finished so far
  void add_step(double r, bool done) {
    partial_return += r;
    if (done) {
      completed.push_back(partial_return);
      partial_return = 0.0;
    }
  }
  double recent_mean(int n) const {
    if (completed.empty()) return 0.0;
    const size_t k = std::min<size_t>(n, completed.size());
    double s = 0.0;
    for (size_t i = completed.size() - k; i < completed.size(); ++i) s += completed[i];
    return s / static_cast<double>(k);
  }
};

// Collects n_steps transitions, sampling from the model's stochastic policy
// and auto-resetting the environment at episode boundaries. The environment
// carries its state across calls; the final value bootstrap comes from the
// model's critic at the first state beyond the batch.
template <class Model>
void collect_rollout(PointMassEnv& env, Model& model, int n_steps, Rng& rng,
                     RolloutBatch& out, EpisodeTracker& episodes) {
  out.resize(n_steps, model.state_dim(), model.goal_dim(), model.action_dim());
  Vec s(model.state_dim()), g(model.goal_dim()), a(model.action_dim());
  for (int t = 0; t < n_steps; ++t) {
    env.observe(s, g);
    std::copy(s.begin(), s.end(),
              out.states.begin() + static_cast<size_t>(t) * out.state_dim);
    std::copy(g.begin(), g.end(),
              out.goals.begin() + static_cast<size_t>(t) * out.goal_dim);

    model.eval(s, g);
    sample(model.dist(), rng, a);
    out.logp[t] = log_prob(model.dist(), a);
    std::copy(a.begin(), a.end(),
              out.actions.begin() + static_cast<size_t>(t) * out.action_dim);
    out.value[t] = model.value(s, g);

    const auto res = env.step(a);
    out.reward[t] = res.reward;
    out.done[t] = res.done ? 1 : 0;
    episodes.add_step(res.reward, res.done);
    if (res.done) env.reset();
  }
  if (out.done[n_steps - 1]) {
    out.final_bootstrap = 0.0;
  } else {
    env.observe(s, g);
    out.final_bootstrap = model.value(s, g);
  }
}

}  // namespace hpt
