#pragma once

#include <string>
#include <vector>

#include "hpt/config.hpp"
#include "hpt/env.hpp"
#include "hpt/models.hpp"

namespace hpt {

// Alternating freeze schedule for transfer: phases of p updates each, the
// first phase training the combiner only, the next the primitives only, and
// so on. p <= 0 pins the first phase forever (combiner-only adaptation).
struct TransferSchedule {
  int p = 10;

  FreezeMask freeze_for(long update) const {
    const bool combiner_phase = (p <= 0) ? true : ((update / p) % 2 == 0);
    return FreezeMask{.primitives_frozen = combiner_phase, .combiner_frozen = !combiner_phase};
  }
};

inline const char* phase_name(const FreezeMask& f) {
  if (f.primitives_frozen && !f.combiner_frozen) return "combiner";
  if (f.combiner_frozen && !f.primitives_frozen) return "primitives";
  return "all";
}

struct EvalResult {
  double mean_return = 0;
  double std_return = 0;
  std::vector<double> returns;  // one entry per episode
};

// Per-step record of one episode, for plotting and CSV export.
struct Trajectory {
  std::vector<double> x, y, gx, gy, r;
};

// Endpoint dispersion of rollouts driven by fixed random primitive weights.
struct SpreadStats {
  double bearing_spread = 0;  // circular std of endpoint bearings, radians
  double mean_distance = 0;   // mean endpoint distance from the origin
  double product = 0;         // bearing_spread * mean_distance
};

// Deterministic evaluation: the policy emits its mean action every step, so
// only the environment's goal draws consume randomness.
EvalResult eval_policy(CompositeModel& m, PointMassEnv& env, int episodes,
                       std::vector<Trajectory>* trajs = nullptr);
EvalResult eval_policy(PlainModel& m, PointMassEnv& env, int episodes,
                       std::vector<Trajectory>* trajs = nullptr);

// Bypasses the combination function: each rollout draws weights uniformly
// from (0, 1]^k, holds them fixed, and steps the composite's mean action.
SpreadStats random_weight_rollouts(CompositeModel& m, const EnvSpec& spec, int n_rollouts,
                                   uint64_t seed, std::vector<Trajectory>* trajs = nullptr);

struct RunResult {
  bool completed = false;  // the full step budget was spent
  bool aborted = false;    // a diverged update ended the run early
  long env_steps = 0;
  long updates = 0;
  double final_return_mean = 0;
  double final_return_std = 0;
  std::string final_checkpoint;
  double wall_seconds = 0;  // training wall-clock; 0 when the run was cached
};

// Executes one training run into cfg.out_dir, writing config.snapshot,
// metrics.jsonl, checkpoints/step_N, eval/final.csv and done.json. A run
// whose done.json already exists is returned as-is unless force is set.
RunResult run_training(const RunConfig& cfg, bool force = false);

bool run_done(const std::string& out_dir);
RunResult load_run_result(const std::string& out_dir);

}  // namespace hpt
