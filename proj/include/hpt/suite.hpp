#pragma once

#include <string>
#include <vector>

#include "hpt/config.hpp"
#include "hpt/trainer.hpp"

namespace hpt {

// One experiment cell. Cells that start from a checkpoint name the run
// directory that produces it; the concrete file is resolved only when the
// dependency has finished (milestone counts depend on the actual step at
// which each threshold was crossed).
struct SuiteCell {
  std::string suite;
  std::string name;
  RunConfig cfg;            // init_checkpoint left empty until resolved
  std::string dep_dir;      // empty: no dependency
  int dep_select = -1;      // -1: final checkpoint; >= 0: milestone index
};

struct SuiteOptions {
  std::string root = "runs";
  std::vector<std::string> suites = {"transfer-range", "ablation", "quality", "period-sweep"};
  int seeds = 5;
  long pretrain_steps = 1000000;
  long transfer_steps = 300000;
  int eval_episodes = 100;
  int jobs = 1;
  // model/optimizer shape shared by every cell; tests shrink these
  int k = 4;
  std::vector<int> hidden = {64, 64};
  PpoConfig ppo;
};

struct SuitePlan {
  SuiteOptions opt;
  std::vector<SuiteCell> cells;
};

struct SuiteOutcome {
  int ran = 0;
  int skipped = 0;   // already had a done.json
  int failed = 0;
  std::vector<std::string> failures;  // "cell: reason"
};

// Expands the requested suites into a deduplicated cell list (pretraining
// cells shared between suites appear once).
SuitePlan build_suite_plan(const SuiteOptions& opt);

// Runs every cell whose dependencies complete, skipping finished ones, and
// records failures without stopping the rest of the grid.
SuiteOutcome run_suite(const SuitePlan& plan);

// Per-run rows for everything in the plan that has finished.
void write_suite_summary(const SuitePlan& plan, const std::string& csv_path);

// Picks a checkpoint out of a finished run: the final one, or the idx-th
// milestone in ascending step order.
std::string resolve_checkpoint(const std::string& run_dir, int select);

}  // namespace hpt
