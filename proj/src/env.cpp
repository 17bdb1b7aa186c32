#include "hpt/env.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace hpt {

namespace {

EnvSpec arc_task(double lo, double hi) {
  EnvSpec s;
  s.angle_lo = lo;
  s.angle_hi = hi;
  return s;
}

const std::map<std::string, EnvSpec>& registry() {
  static const std::map<std::string, EnvSpec> reg = [] {
    std::map<std::string, EnvSpec> r;
    r["pretrain-front"] = arc_task(-M_PI / 4, M_PI / 4);
    r["xfer-1"] = arc_task(-M_PI / 6, M_PI / 6);
    r["xfer-2"] = arc_task(M_PI / 6, 3 * M_PI / 6);
    r["xfer-3"] = arc_task(3 * M_PI / 6, 5 * M_PI / 6);
    r["xfer-4"] = arc_task(5 * M_PI / 6, 7 * M_PI / 6);
    r["pretrain-half"] = arc_task(-M_PI / 2, M_PI / 2);
    r["xfer-back"] = arc_task(5 * M_PI / 6, 7 * M_PI / 6);
    EnvSpec ice = arc_task(M_PI / 6, 3 * M_PI / 6);
    ice.friction = 0.02;  // low-friction dynamics shift of the xfer-2 arc
    r["xfer-ice"] = ice;
    return r;
  }();
  return reg;
}

}  // namespace

EnvSpec make_task(const std::string& name) {
  const auto& reg = registry();
  auto it = reg.find(name);
  require(it != reg.end(), "make_task: unknown task '" + name + "'");
  return it->second;
}

std::vector<std::string> task_names() {
  std::vector<std::string> names;
  for (const auto& [name, spec] : registry()) names.push_back(name);
  return names;
}

bool is_known_task(const std::string& name) {
  return registry().count(name) > 0;
}

void PointMassEnv::sample_goal() {
  const double theta = rng_.uniform(spec_.angle_lo, spec_.angle_hi);
  st_.gx = spec_.radius * std::cos(theta);
  st_.gy = spec_.radius * std::sin(theta);
}

void PointMassEnv::reset() {
  st_ = EnvState{};
  sample_goal();
}

PointMassEnv::StepResult PointMassEnv::step(std::span<const double> action) {
  require(action.size() == kActionDim, "step: action dim mismatch");
  require(all_finite(action), "step: non-finite action");
  require(st_.steps_elapsed < spec_.max_episode_steps, "step: episode already done");
  const double ax = std::clamp(action[0], -1.0, 1.0);
  const double ay = std::clamp(action[1], -1.0, 1.0);

  const double prev_dist = std::hypot(st_.gx - st_.px, st_.gy - st_.py);
  st_.vx = (1.0 - spec_.friction) * st_.vx + spec_.action_scale * ax;
  st_.vy = (1.0 - spec_.friction) * st_.vy + spec_.action_scale * ay;
  st_.px += st_.vx;
  st_.py += st_.vy;
  st_.steps_elapsed += 1;

  const double new_dist = std::hypot(st_.gx - st_.px, st_.gy - st_.py);
  StepResult res;
  res.reward = (prev_dist - new_dist) * 10.0 - 0.01 * (ax * ax + ay * ay);
  if (new_dist < spec_.reach_threshold) {
    res.reward += 10.0;
    res.reached = true;
    sample_goal();
  }
  res.done = st_.steps_elapsed >= spec_.max_episode_steps;
  return res;
}

void PointMassEnv::observe(std::span<double> s, std::span<double> g) const {
  s[0] = st_.px;
  s[1] = st_.py;
  s[2] = st_.vx;
  s[3] = st_.vy;
  g[0] = st_.gx - st_.px;
  g[1] = st_.gy - st_.py;
}

}  // namespace hpt
