#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "hpt/checkpoint.hpp"
#include "hpt/suite.hpp"

using namespace hpt;
namespace fs = std::filesystem;

namespace {

fs::path scratch_root() {
  static const fs::path p = [] {
    const fs::path q = fs::temp_directory_path() / "hpt_test_suite";
    fs::remove_all(q);
    fs::create_directories(q);
    return q;
  }();
  return p;
}

int count_cells(const SuitePlan& plan, const std::string& suite) {
  int n = 0;
  for (const SuiteCell& c : plan.cells)
    if (c.suite == suite) ++n;
  return n;
}

}  // namespace

TEST_CASE("suite plan: grids, dedup and dependency wiring") {
  SuiteOptions opt;
  opt.root = "r";

  SUBCASE("full grid") {
    const SuitePlan plan = build_suite_plan(opt);
    CHECK(plan.cells.size() == 155);
    CHECK(count_cells(plan, "pretrain") == 20);
    CHECK(count_cells(plan, "transfer-range") == 80);
    CHECK(count_cells(plan, "ablation") == 5);
    CHECK(count_cells(plan, "quality") == 40);
    CHECK(count_cells(plan, "period-sweep") == 10);

    std::set<std::string> dirs, names;
    for (const SuiteCell& c : plan.cells) {
      CHECK(dirs.insert(c.cfg.out_dir).second);
      names.insert(c.suite + "/" + c.name);
      if (c.cfg.mode == "scratch") {
        CHECK(c.dep_dir.empty());
      } else if (c.cfg.mode != "pretrain") {
        CHECK(!c.dep_dir.empty());
      }
      if (c.suite == "quality") {
        CHECK(c.dep_select >= 0);
        CHECK(c.dep_select <= 3);
      } else {
        CHECK(c.dep_select == -1);
      }
    }
    CHECK(names.size() == plan.cells.size());
  }

  SUBCASE("the p=10 arm of the period sweep reuses the transfer-range cell") {
    opt.suites = {"period-sweep"};
    const SuitePlan plan = build_suite_plan(opt);
    CHECK(plan.cells.size() == 20);  // 5 pretrains, 10 swept, 5 reused p=10 cells
    int p5 = 0, p10 = 0, p20 = 0;
    for (const SuiteCell& c : plan.cells) {
      if (c.cfg.mode != "transfer-ours") continue;
      if (c.cfg.p == 5) ++p5;
      if (c.cfg.p == 10) ++p10;
      if (c.cfg.p == 20) ++p20;
    }
    CHECK(p5 == 5);
    CHECK(p10 == 5);
    CHECK(p20 == 5);
  }

  SUBCASE("unknown suite names are rejected") {
    opt.suites = {"everything"};
    CHECK_THROWS(build_suite_plan(opt));
  }
}

TEST_CASE("suite run: end-to-end micro grid, resume, summary") {
  SuiteOptions opt;
  opt.root = (scratch_root() / "grid").string();
  opt.seeds = 1;
  opt.pretrain_steps = 1280;
  opt.transfer_steps = 128;
  opt.eval_episodes = 2;
  opt.k = 2;
  opt.hidden = {8};
  opt.ppo.steps_per_update = 128;
  opt.ppo.minibatch = 64;
  opt.ppo.epochs = 2;

  const SuitePlan plan = build_suite_plan(opt);
  CHECK(plan.cells.size() == 31);

  const SuiteOutcome first = run_suite(plan);
  CHECK(first.ran == 31);
  CHECK(first.failed == 0);
  CHECK(first.skipped == 0);

  // milestones resolve in ascending step order and load
  const std::string pre_dir = opt.root + "/pretrain/drur_s0";
  long prev = -1;
  for (int sel = 0; sel < 4; ++sel) {
    const std::string ckpt = resolve_checkpoint(pre_dir, sel);
    const long steps = checkpoint_header(ckpt).at("meta").at("env_steps").get<long>();
    CHECK(steps > prev);
    prev = steps;
  }
  CHECK(resolve_checkpoint(pre_dir, -1) == resolve_checkpoint(pre_dir, 3));
  CHECK_THROWS(resolve_checkpoint(pre_dir, 4));

  // second pass touches nothing
  const SuiteOutcome second = run_suite(plan);
  CHECK(second.ran == 0);
  CHECK(second.failed == 0);
  CHECK(second.skipped == 31);

  const std::string csv_path = opt.root + "/summary.csv";
  write_suite_summary(plan, csv_path);
  std::ifstream csv(csv_path);
  REQUIRE(bool(csv));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "suite,name,mode,task,seed,env_steps,completed,return_mean,return_std,out_dir");
  int rows = 0;
  bool all_completed = true;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    ++rows;
    std::stringstream ss(line);
    std::string field;
    for (int i = 0; i < 7; ++i) std::getline(ss, field, ',');
    all_completed = all_completed && field == "1";
  }
  CHECK(rows == 31);
  CHECK(all_completed);
}

TEST_CASE("suite run: an unsatisfiable dependency is recorded, not fatal") {
  SuiteOptions opt;
  opt.root = (scratch_root() / "broken").string();
  SuitePlan plan;
  plan.opt = opt;

  SuiteCell ok;
  ok.suite = "pretrain";
  ok.name = "tiny_ok";
  ok.cfg.mode = "scratch";
  ok.cfg.task = "xfer-1";
  ok.cfg.total_steps = 128;
  ok.cfg.seed = 1;
  ok.cfg.k = 2;
  ok.cfg.hidden = {8};
  ok.cfg.eval_episodes = 2;
  ok.cfg.ppo.steps_per_update = 128;
  ok.cfg.ppo.minibatch = 64;
  ok.cfg.ppo.epochs = 1;
  ok.cfg.out_dir = opt.root + "/ok";
  plan.cells.push_back(ok);

  SuiteCell blocked = ok;
  blocked.name = "blocked";
  blocked.cfg.mode = "transfer-ours";
  blocked.cfg.out_dir = opt.root + "/blocked";
  blocked.dep_dir = opt.root + "/never_exists";
  plan.cells.push_back(blocked);

  const SuiteOutcome out = run_suite(plan);
  CHECK(out.ran == 1);
  CHECK(out.failed == 1);
  REQUIRE(out.failures.size() == 1);
  CHECK(out.failures[0].find("blocked") != std::string::npos);
  CHECK(run_done(opt.root + "/ok"));
  CHECK(!run_done(opt.root + "/blocked"));
}
