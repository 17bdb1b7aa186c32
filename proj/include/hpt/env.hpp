#pragma once

#include <span>
#include <string>
#include <vector>

#include "hpt/math.hpp"

namespace hpt {

// 2D point-mass goal reaching. Goals sit on an arc of a fixed-radius circle;
// the arc and the drag coefficient are the task knobs.
struct EnvSpec {
  double angle_lo = -M_PI / 4;
  double angle_hi = M_PI / 4;
  double radius = 5.0;
  double friction = 0.2;  // velocity drag per step
  int max_episode_steps = 200;
  double reach_threshold = 0.5;
  double action_scale = 0.02;
};

// Named task registry. Throws on unknown names.
EnvSpec make_task(const std::string& name);
std::vector<std::string> task_names();
bool is_known_task(const std::string& name);

struct EnvState {
  double px = 0, py = 0;
  double vx = 0, vy = 0;
  double gx = 0, gy = 0;
  int steps_elapsed = 0;
};

class PointMassEnv {
 public:
  static constexpr int kStateDim = 4;   // position, velocity
  static constexpr int kGoalDim = 2;    // goal relative to position
  static constexpr int kActionDim = 2;

  PointMassEnv(EnvSpec spec, Rng rng) : spec_(spec), rng_(rng) {}

  const EnvSpec& spec() const { return spec_; }
  const EnvState& state() const { return st_; }

  // position and velocity reset to zero; a fresh goal is drawn from the arc
  void reset();

  struct StepResult {
    double reward = 0;
    bool done = false;
    bool reached = false;
  };

  // The action is clamped to [-1, 1] per dimension, then
  // velocity <- (1 - friction) * velocity + action_scale * action;
  // reward is 10x the distance progress minus a small quadratic penalty on
  // the clamped action, plus a bonus (and a goal re-sample) on reaching.
  StepResult step(std::span<const double> action);

  void observe(std::span<double> s, std::span<double> g) const;

 private:
  void sample_goal();

  EnvSpec spec_;
  Rng rng_;
  EnvState st_;
};

}  // namespace hpt
