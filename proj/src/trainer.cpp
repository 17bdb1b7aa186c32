#include "hpt/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include "hpt/checkpoint.hpp"
#include "hpt/gae.hpp"
#include "hpt/metrics.hpp"
#include "hpt/ppo.hpp"
#include "hpt/rollout.hpp"

namespace hpt {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

template <class Model>
double run_episode(Model& m, PointMassEnv& env, Trajectory* traj) {
  env.reset();
  Vec s(m.state_dim()), g(m.goal_dim());
  double ret = 0;
  bool done = false;
  while (!done) {
    env.observe(s, g);
    m.eval(s, g);
    if (traj) {
      traj->x.push_back(env.state().px);
      traj->y.push_back(env.state().py);
      traj->gx.push_back(env.state().gx);
      traj->gy.push_back(env.state().gy);
    }
    const auto res = env.step(m.dist().mean);
    ret += res.reward;
    if (traj) traj->r.push_back(res.reward);
    done = res.done;
  }
  return ret;
}

template <class Model>
EvalResult eval_impl(Model& m, PointMassEnv& env, int episodes, std::vector<Trajectory>* trajs) {
  require(episodes > 0, "eval: need at least one episode");
  EvalResult out;
  out.returns.reserve(episodes);
  for (int e = 0; e < episodes; ++e) {
    Trajectory* traj = nullptr;
    if (trajs) {
      trajs->emplace_back();
      traj = &trajs->back();
    }
    out.returns.push_back(run_episode(m, env, traj));
  }
  out.mean_return = mean(out.returns);
  out.std_return = stddev(out.returns);
  return out;
}

uint64_t prims_checksum(const CompositeModel& m) { return param_checksum(m.policy.prims); }
uint64_t comb_checksum(const CompositeModel& m) { return param_checksum(m.policy.comb.net); }
uint64_t prims_checksum(const PlainModel&) { return 0; }
uint64_t comb_checksum(const PlainModel&) { return 0; }

template <class Model>
RunResult train_loop(Model& model, const RunConfig& cfg, const RegConfig& regs, bool alternating,
                     int sched_p, const std::vector<long>& milestone_steps, PointMassEnv& env,
                     Rng& act_rng, Rng& shuffle_rng, Rng& eval_rng, const fs::path& dir) {
  MetricsWriter metrics((dir / "metrics.jsonl").string());
  const TransferSchedule sched{sched_p};
  RolloutBatch batch;
  EpisodeTracker episodes;
  RunResult res;
  env.reset();

  long env_steps = 0, update = 0;
  size_t next_ms = 0;
  std::string last_ckpt;

  const auto save_ckpt = [&]() {
    const fs::path path = dir / "checkpoints" / ("step_" + std::to_string(env_steps));
    const json meta = {{"task", cfg.task},
                       {"mode", cfg.mode},
                       {"seed", cfg.seed},
                       {"env_steps", env_steps},
                       {"update", update}};
    save_checkpoint(path.string(), model, meta);
    last_ckpt = path.string();
  };

  while (env_steps < cfg.total_steps) {
    collect_rollout(env, model, cfg.ppo.steps_per_update, act_rng, batch, episodes);
    env_steps += batch.n;
    Advantages adv = compute_gae(batch, cfg.ppo.gamma, cfg.ppo.lambda);
    if (cfg.ppo.normalize_adv) normalize_advantages(adv.adv);

    const FreezeMask f = alternating ? sched.freeze_for(update) : FreezeMask{};
    const uint64_t pre_prims = prims_checksum(model);
    const uint64_t pre_comb = comb_checksum(model);
    const UpdateStats st = ppo_update(model, batch, adv, cfg.ppo, regs, f, shuffle_rng);
    if (f.primitives_frozen)
      require(prims_checksum(model) == pre_prims, "freeze audit: primitives changed");
    if (f.combiner_frozen)
      require(comb_checksum(model) == pre_comb, "freeze audit: combiner changed");
    ++update;

    metrics.write(json{{"update", update},
                       {"step", env_steps},
                       {"ep_return", episodes.recent_mean(10)},
                       {"episodes", episodes.completed.size()},
                       {"surrogate", st.surrogate},
                       {"value_loss", st.value_loss},
                       {"diversity", st.diversity},
                       {"utility", st.utility},
                       {"clip_frac", st.clip_frac},
                       {"approx_kl", st.approx_kl},
                       {"stop_epoch", st.stop_epoch},
                       {"minibatches", st.minibatches},
                       {"phase", phase_name(f)},
                       {"checksum_prims", prims_checksum(model)},
                       {"checksum_comb", comb_checksum(model)},
                       {"aborted", st.aborted}});

    if (st.aborted) {
      res.aborted = true;  // parameters were rolled back to the last good state
      break;
    }
    while (next_ms < milestone_steps.size() && env_steps >= milestone_steps[next_ms]) {
      const long target = milestone_steps[next_ms];
      while (next_ms < milestone_steps.size() && milestone_steps[next_ms] == target) ++next_ms;
      save_ckpt();
    }
  }

  res.env_steps = env_steps;
  res.updates = update;
  res.completed = !res.aborted && env_steps >= cfg.total_steps;
  if (last_ckpt.empty() || res.aborted) save_ckpt();
  res.final_checkpoint = last_ckpt;

  PointMassEnv eval_env(env.spec(), eval_rng.child(0));
  const EvalResult ev = eval_policy(model, eval_env, cfg.eval_episodes);
  res.final_return_mean = ev.mean_return;
  res.final_return_std = ev.std_return;

  std::ofstream csv(dir / "eval" / "final.csv");
  require(bool(csv), "trainer: cannot write final.csv");
  csv << "episode,ret\n" << std::setprecision(17);
  for (size_t i = 0; i < ev.returns.size(); ++i) csv << i << ',' << ev.returns[i] << '\n';
  return res;
}

// Copies the leading `count` parameters (primitives sit first in the flat
// order) from src into dst, leaving dst's fresh optimizer state in place.
void adopt_params(CompositeModel& dst, const CompositeModel& src, size_t count) {
  ModelSnapshot d = dst.snapshot();
  const ModelSnapshot s = src.snapshot();
  require(d.params.size() == s.params.size(), "transfer: checkpoint shape mismatch");
  require(count <= d.params.size(), "transfer: bad parameter count");
  std::copy(s.params.begin(), s.params.begin() + static_cast<long>(count), d.params.begin());
  dst.restore(d);
}

void check_dims(const CompositeModel& src, const RunConfig& cfg) {
  require(src.policy.prims.k == cfg.k, "transfer: checkpoint k differs from config");
  require(src.state_dim() == PointMassEnv::kStateDim && src.goal_dim() == PointMassEnv::kGoalDim &&
              src.action_dim() == PointMassEnv::kActionDim,
          "transfer: checkpoint dims differ from environment");
}

}  // namespace

EvalResult eval_policy(CompositeModel& m, PointMassEnv& env, int episodes,
                       std::vector<Trajectory>* trajs) {
  return eval_impl(m, env, episodes, trajs);
}

EvalResult eval_policy(PlainModel& m, PointMassEnv& env, int episodes,
                       std::vector<Trajectory>* trajs) {
  return eval_impl(m, env, episodes, trajs);
}

SpreadStats random_weight_rollouts(CompositeModel& m, const EnvSpec& spec, int n_rollouts,
                                   uint64_t seed, std::vector<Trajectory>* trajs) {
  require(n_rollouts > 0, "random_weight_rollouts: need at least one rollout");
  Rng root(seed);
  PointMassEnv env(spec, root.child(0));
  Rng wrng = root.child(1);

  const int k = m.policy.prims.k;
  Vec w(k), s(m.state_dim()), g(m.goal_dim());
  std::vector<DiagGaussian> dists(k);
  DiagGaussian comp;

  double sum_cos = 0, sum_sin = 0, sum_dist = 0;
  for (int n = 0; n < n_rollouts; ++n) {
    for (double& wi : w) wi = 1.0 - wrng.uniform();  // (0, 1]
    env.reset();
    Trajectory* traj = nullptr;
    if (trajs) {
      trajs->emplace_back();
      traj = &trajs->back();
    }
    bool done = false;
    while (!done) {
      env.observe(s, g);
      for (int i = 0; i < k; ++i) dists[i] = primitive_dist(m.policy.prims, i, s);
      compose(dists, w, comp);
      if (traj) {
        traj->x.push_back(env.state().px);
        traj->y.push_back(env.state().py);
        traj->gx.push_back(env.state().gx);
        traj->gy.push_back(env.state().gy);
      }
      const auto res = env.step(comp.mean);
      if (traj) traj->r.push_back(res.reward);
      done = res.done;
    }
    const double px = env.state().px, py = env.state().py;
    sum_dist += std::hypot(px, py);
    const double bearing = std::atan2(py, px);
    sum_cos += std::cos(bearing);
    sum_sin += std::sin(bearing);
  }

  const double inv = 1.0 / static_cast<double>(n_rollouts);
  const double rbar = std::hypot(sum_cos * inv, sum_sin * inv);
  SpreadStats st;
  st.bearing_spread = std::sqrt(std::max(0.0, -2.0 * std::log(std::max(rbar, 1e-300))));
  st.mean_distance = sum_dist * inv;
  st.product = st.bearing_spread * st.mean_distance;
  return st;
}

RunResult run_training(const RunConfig& cfg, bool force) {
  validate(cfg);
  const fs::path dir(cfg.out_dir);
  if (!force && fs::exists(dir / "done.json")) return load_run_result(cfg.out_dir);
  const auto wall_start = std::chrono::steady_clock::now();
  fs::create_directories(dir / "checkpoints");
  fs::create_directories(dir / "eval");
  fs::remove(dir / "done.json");
  {
    std::ofstream snap(dir / "config.snapshot");
    require(bool(snap), "trainer: cannot write config.snapshot");
    snap << config_to_json(cfg).dump(2) << '\n';
  }

  const EnvSpec spec = make_task(cfg.task);
  Rng root(cfg.seed);
  Rng model_rng = root.child(0);
  PointMassEnv env(spec, root.child(1));
  Rng act_rng = root.child(2);
  Rng shuffle_rng = root.child(3);
  Rng eval_rng = root.child(4);

  const std::vector<double> fracs =
      cfg.mode == "pretrain" ? cfg.milestones : std::vector<double>{1.0};
  std::vector<long> ms;
  ms.reserve(fracs.size());
  for (double fr : fracs) ms.push_back(std::llround(fr * static_cast<double>(cfg.total_steps)));
  std::sort(ms.begin(), ms.end());

  // Only pretraining shapes the primitives with the regularizers; every
  // other mode optimizes the task reward alone.
  const RegConfig no_regs{0.0, 0.0, cfg.regs.kl_clip};

  RunResult res;
  if (cfg.mode == "pretrain" || (cfg.mode == "scratch" && cfg.scratch_composite)) {
    const RegConfig regs = cfg.mode == "pretrain" ? cfg.regs : no_regs;
    CompositeModel model =
        make_composite_model(PointMassEnv::kStateDim, PointMassEnv::kGoalDim,
                             PointMassEnv::kActionDim, cfg.k, cfg.hidden, model_rng, cfg.ppo.adam);
    res = train_loop(model, cfg, regs, false, 0, ms, env, act_rng, shuffle_rng, eval_rng, dir);
  } else if (cfg.mode == "scratch") {
    PlainModel model = make_plain_model(PointMassEnv::kStateDim, PointMassEnv::kGoalDim,
                                        PointMassEnv::kActionDim, cfg.hidden, model_rng,
                                        cfg.ppo.adam);
    res = train_loop(model, cfg, no_regs, false, 0, ms, env, act_rng, shuffle_rng, eval_rng, dir);
  } else if (cfg.mode == "transfer-ours" || cfg.mode == "transfer-mcp") {
    CompositeModel model =
        make_composite_model(PointMassEnv::kStateDim, PointMassEnv::kGoalDim,
                             PointMassEnv::kActionDim, cfg.k, cfg.hidden, model_rng, cfg.ppo.adam);
    const CompositeModel src = load_composite(cfg.init_checkpoint, cfg.ppo.adam);
    check_dims(src, cfg);
    // primitives come from the checkpoint; combiner and critic stay freshly
    // initialized so the new task learns its own coordination from scratch
    adopt_params(model, src, model.policy.prims.param_count());
    const int sched_p = cfg.mode == "transfer-mcp" ? 0 : cfg.p;
    res = train_loop(model, cfg, no_regs, true, sched_p, ms, env, act_rng, shuffle_rng, eval_rng,
                     dir);
  } else {  // finetune: everything from the checkpoint, everything trainable
    const json header = checkpoint_header(cfg.init_checkpoint);
    const std::string kind = header.at("kind").get<std::string>();
    if (kind == "composite") {
      CompositeModel model = make_composite_model(PointMassEnv::kStateDim, PointMassEnv::kGoalDim,
                                                  PointMassEnv::kActionDim, cfg.k, cfg.hidden,
                                                  model_rng, cfg.ppo.adam);
      const CompositeModel src = load_composite(cfg.init_checkpoint, cfg.ppo.adam);
      check_dims(src, cfg);
      ModelSnapshot d = model.snapshot();
      const ModelSnapshot s = src.snapshot();
      require(d.params.size() == s.params.size(), "finetune: checkpoint shape mismatch");
      d.params = s.params;
      model.restore(d);
      res = train_loop(model, cfg, no_regs, false, 0, ms, env, act_rng, shuffle_rng, eval_rng, dir);
    } else {
      PlainModel model = make_plain_model(PointMassEnv::kStateDim, PointMassEnv::kGoalDim,
                                          PointMassEnv::kActionDim, cfg.hidden, model_rng,
                                          cfg.ppo.adam);
      const PlainModel src = load_plain(cfg.init_checkpoint, cfg.ppo.adam);
      ModelSnapshot d = model.snapshot();
      const ModelSnapshot s = src.snapshot();
      require(d.params.size() == s.params.size(), "finetune: checkpoint shape mismatch");
      d.params = s.params;
      model.restore(d);
      res = train_loop(model, cfg, no_regs, false, 0, ms, env, act_rng, shuffle_rng, eval_rng, dir);
    }
  }

  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  const json done = {{"completed", res.completed},
                     {"aborted", res.aborted},
                     {"env_steps", res.env_steps},
                     {"updates", res.updates},
                     {"final_return_mean", res.final_return_mean},
                     {"final_return_std", res.final_return_std},
                     {"final_checkpoint", res.final_checkpoint},
                     {"wall_seconds", res.wall_seconds}};
  std::ofstream out(dir / "done.json");
  require(bool(out), "trainer: cannot write done.json");
  out << done.dump(2) << '\n';
  return res;
}

bool run_done(const std::string& out_dir) {
  return fs::exists(fs::path(out_dir) / "done.json");
}

RunResult load_run_result(const std::string& out_dir) {
  std::ifstream in(fs::path(out_dir) / "done.json");
  require(bool(in), "trainer: no done.json in " + out_dir);
  json j = json::parse(in);
  RunResult res;
  res.completed = j.at("completed").get<bool>();
  res.aborted = j.at("aborted").get<bool>();
  res.env_steps = j.at("env_steps").get<long>();
  res.updates = j.at("updates").get<long>();
  res.final_return_mean = j.at("final_return_mean").get<double>();
  res.final_return_std = j.at("final_return_std").get<double>();
  res.final_checkpoint = j.at("final_checkpoint").get<std::string>();
  res.wall_seconds = j.value("wall_seconds", 0.0);
  return res;
}

}  // namespace hpt
