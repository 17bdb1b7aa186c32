#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "hpt/checkpoint.hpp"
#include "hpt/config.hpp"
#include "hpt/export.hpp"
#include "hpt/suite.hpp"
#include "hpt/trainer.hpp"

#include <CLI11.hpp>

namespace {

int detect_jobs() {
  if (const char* env = std::getenv("HPT_JOBS")) {
    const int j = std::atoi(env);
    if (j > 0) return j;
  }
  return 1;
}

// Loads whichever policy kind the checkpoint holds and evaluates it.
hpt::EvalResult eval_checkpoint(const std::string& ckpt, hpt::PointMassEnv& env, int episodes,
                                std::vector<hpt::Trajectory>* trajs) {
  const std::string kind = hpt::checkpoint_header(ckpt).at("kind").get<std::string>();
  if (kind == "composite") {
    hpt::CompositeModel m = hpt::load_composite(ckpt, {});
    return hpt::eval_policy(m, env, episodes, trajs);
  }
  hpt::PlainModel m = hpt::load_plain(ckpt, {});
  return hpt::eval_policy(m, env, episodes, trajs);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hierarchical policy transfer experiments"};
  app.require_subcommand(1);
  int rc = 0;

  // ---- run ----
  auto* run = app.add_subcommand("run", "execute one training run from a config file");
  std::string run_config;
  std::vector<std::string> run_sets;
  bool run_force = false;
  run->add_option("config", run_config, "JSON run config")->required();
  run->add_option("--set", run_sets, "override a config key, e.g. --set ppo.lr=0.001");
  run->add_flag("--force", run_force, "re-run even if the directory is complete");
  run->callback([&] {
    nlohmann::json j = hpt::load_config_file(run_config);
    hpt::apply_overrides(j, run_sets);
    const hpt::RunConfig cfg = hpt::config_from_json(j);
    const hpt::RunResult r = hpt::run_training(cfg, run_force);
    std::cout << "mode=" << cfg.mode << " task=" << cfg.task << " seed=" << cfg.seed
              << " steps=" << r.env_steps << " updates=" << r.updates
              << " completed=" << (r.completed ? 1 : 0) << " final_return=" << r.final_return_mean
              << " +/- " << r.final_return_std << "\n";
    if (!r.completed) rc = 1;
  });

  // ---- suite ----
  auto* suite = app.add_subcommand("suite", "run an experiment grid with resume");
  hpt::SuiteOptions opt;
  opt.jobs = detect_jobs();
  std::string summary_path;
  suite->add_option("--root", opt.root, "directory that holds all runs");
  suite->add_option("--suites", opt.suites,
                    "subset of: transfer-range ablation quality period-sweep")
      ->delimiter(',');
  suite->add_option("--seeds", opt.seeds, "seeds per cell");
  suite->add_option("--jobs", opt.jobs, "parallel runs (default: HPT_JOBS or 1)");
  suite->add_option("--pretrain-steps", opt.pretrain_steps);
  suite->add_option("--transfer-steps", opt.transfer_steps);
  suite->add_option("--eval-episodes", opt.eval_episodes);
  suite->add_option("--summary", summary_path, "summary CSV path (default <root>/summary.csv)");
  suite->callback([&] {
    const hpt::SuitePlan plan = hpt::build_suite_plan(opt);
    std::cout << "suite: " << plan.cells.size() << " cells\n";
    const hpt::SuiteOutcome out = hpt::run_suite(plan);
    if (summary_path.empty()) summary_path = opt.root + "/summary.csv";
    hpt::write_suite_summary(plan, summary_path);
    std::cout << "suite: ran " << out.ran << ", cached " << out.skipped << ", failed "
              << out.failed << "; summary at " << summary_path << "\n";
    for (const std::string& f : out.failures) std::cout << "  failure: " << f << "\n";
    if (out.failed > 0) rc = 1;
  });

  // ---- export ----
  auto* exp = app.add_subcommand("export", "turn runs and checkpoints into CSVs");
  exp->require_subcommand(1);

  auto* curves = exp->add_subcommand("curves", "mean/min/max learning curves across runs");
  std::vector<std::string> curve_runs;
  std::string curve_field = "ep_return", curve_out;
  double curve_ema = 1.0;
  curves->add_option("--run", curve_runs, "run directory (repeat for several seeds)")->required();
  curves->add_option("--field", curve_field, "metrics field to plot");
  curves->add_option("--ema", curve_ema, "smoothing coefficient in (0,1]; 1 disables");
  curves->add_option("--out", curve_out, "output CSV")->required();
  curves->callback([&] {
    hpt::write_curves_csv(curve_out, hpt::aggregate_curves(curve_runs, curve_field, curve_ema));
    std::cout << "wrote " << curve_out << "\n";
  });

  auto* trajs = exp->add_subcommand("trajectories", "roll out a checkpoint and dump paths");
  std::string tr_ckpt, tr_task, tr_out;
  int tr_episodes = 8, tr_random = 0;
  uint64_t tr_seed = 0;
  trajs->add_option("--checkpoint", tr_ckpt)->required();
  trajs->add_option("--task", tr_task)->required();
  trajs->add_option("--episodes", tr_episodes, "episodes with the policy's mean action");
  trajs->add_option("--random-weights", tr_random,
                    "instead: rollouts with fixed random primitive weights");
  trajs->add_option("--seed", tr_seed);
  trajs->add_option("--out", tr_out)->required();
  trajs->callback([&] {
    std::vector<hpt::Trajectory> paths;
    if (tr_random > 0) {
      hpt::CompositeModel m = hpt::load_composite(tr_ckpt, {});
      hpt::random_weight_rollouts(m, hpt::make_task(tr_task), tr_random, tr_seed, &paths);
    } else {
      hpt::PointMassEnv env(hpt::make_task(tr_task), hpt::Rng(tr_seed).child(0));
      eval_checkpoint(tr_ckpt, env, tr_episodes, &paths);
    }
    hpt::write_trajectories_csv(tr_out, paths);
    std::cout << "wrote " << tr_out << "\n";
  });

  auto* spread = exp->add_subcommand("spread", "endpoint dispersion under random weights");
  std::string sp_ckpt, sp_task = "pretrain-front", sp_out;
  int sp_rollouts = 64;
  uint64_t sp_seed = 0;
  spread->add_option("--checkpoint", sp_ckpt)->required();
  spread->add_option("--task", sp_task);
  spread->add_option("--rollouts", sp_rollouts);
  spread->add_option("--seed", sp_seed);
  spread->add_option("--out", sp_out)->required();
  spread->callback([&] {
    hpt::CompositeModel m = hpt::load_composite(sp_ckpt, {});
    const hpt::SpreadStats st =
        hpt::random_weight_rollouts(m, hpt::make_task(sp_task), sp_rollouts, sp_seed, nullptr);
    hpt::write_spread_csv(sp_out, st);
    std::cout << "spread=" << st.bearing_spread << " dist=" << st.mean_distance
              << " product=" << st.product << "\n";
  });

  // ---- env ----
  auto* env_cmd = app.add_subcommand("env", "environment utilities");
  env_cmd->require_subcommand(1);
  auto* rollout = env_cmd->add_subcommand("rollout", "dump policy rollouts as CSV");
  std::string ro_task, ro_ckpt, ro_out;
  int ro_episodes = 1;
  uint64_t ro_seed = 0;
  rollout->add_option("--task", ro_task)->required();
  rollout->add_option("--policy", ro_ckpt, "checkpoint to drive the rollout")->required();
  rollout->add_option("--episodes", ro_episodes);
  rollout->add_option("--seed", ro_seed);
  rollout->add_option("--out", ro_out)->required();
  rollout->callback([&] {
    hpt::PointMassEnv env(hpt::make_task(ro_task), hpt::Rng(ro_seed).child(0));
    std::vector<hpt::Trajectory> paths;
    const hpt::EvalResult ev = eval_checkpoint(ro_ckpt, env, ro_episodes, &paths);
    hpt::write_trajectories_csv(ro_out, paths);
    std::cout << "wrote " << ro_out << " (mean return " << ev.mean_return << ")\n";
  });

  // ---- policy ----
  auto* pol = app.add_subcommand("policy", "checkpoint utilities");
  pol->require_subcommand(1);
  auto* inspect = pol->add_subcommand("inspect", "print checkpoint header and checksums");
  std::string in_ckpt;
  inspect->add_option("checkpoint", in_ckpt)->required();
  inspect->callback([&] {
    const nlohmann::json h = hpt::checkpoint_header(in_ckpt);
    std::cout << h.dump(2) << "\n";
    const std::string kind = h.at("kind").get<std::string>();
    if (kind == "composite") {
      const hpt::CompositeModel m = hpt::load_composite(in_ckpt, {});
      std::cout << "policy_checksum=" << std::hex << hpt::param_checksum(m.policy)
                << " critic_checksum=" << hpt::param_checksum(m.critic) << std::dec << "\n";
    } else {
      const hpt::PlainModel m = hpt::load_plain(in_ckpt, {});
      std::cout << "policy_checksum=" << std::hex << hpt::param_checksum(m.policy)
                << " critic_checksum=" << hpt::param_checksum(m.critic) << std::dec << "\n";
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return rc;
}
