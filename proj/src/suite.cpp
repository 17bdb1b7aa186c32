#include "hpt/suite.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

namespace hpt {
namespace {

namespace fs = std::filesystem;

struct Variant {
  const char* name;
  double alpha, beta;
};
constexpr Variant kVariants[] = {
    {"drur", 0.1, 0.01}, {"none", 0.0, 0.0}, {"dr", 0.1, 0.0}, {"ur", 0.0, 0.01}};

constexpr const char* kXferTasks[] = {"xfer-1", "xfer-2", "xfer-3", "xfer-4"};
constexpr int kQualityPct[] = {10, 25, 50, 100};

class PlanBuilder {
 public:
  explicit PlanBuilder(const SuiteOptions& opt) : opt_(opt) {}

  std::string pretrain_dir(const std::string& variant, int s) const {
    return opt_.root + "/pretrain/" + variant + "_s" + std::to_string(s);
  }

  void add(SuiteCell c) {
    if (seen_.count(c.cfg.out_dir)) return;
    seen_.insert(c.cfg.out_dir);
    cells_.push_back(std::move(c));
  }

  RunConfig base_cfg() const {
    RunConfig cfg;
    cfg.eval_episodes = opt_.eval_episodes;
    cfg.k = opt_.k;
    cfg.hidden = opt_.hidden;
    cfg.ppo = opt_.ppo;
    return cfg;
  }

  void add_pretrain(const Variant& v, int s) {
    SuiteCell c;
    c.suite = "pretrain";
    c.name = std::string("pretrain_") + v.name + "_s" + std::to_string(s);
    c.cfg = base_cfg();
    c.cfg.mode = "pretrain";
    c.cfg.task = "pretrain-front";
    c.cfg.total_steps = opt_.pretrain_steps;
    c.cfg.seed = static_cast<uint64_t>(s);
    c.cfg.regs.alpha = v.alpha;
    c.cfg.regs.beta = v.beta;
    c.cfg.out_dir = pretrain_dir(v.name, s);
    add(std::move(c));
  }

  void add_transfer(const std::string& suite, const std::string& name, const std::string& mode,
                    const std::string& task, uint64_t seed, const std::string& out_dir,
                    const std::string& dep_dir, int dep_select, int p) {
    SuiteCell c;
    c.suite = suite;
    c.name = name;
    c.cfg = base_cfg();
    c.cfg.mode = mode;
    c.cfg.task = task;
    c.cfg.total_steps = opt_.transfer_steps;
    c.cfg.seed = seed;
    c.cfg.p = p;
    c.cfg.out_dir = out_dir;
    if (!dep_dir.empty()) c.cfg.init_checkpoint = "<pending>";  // resolved at run time
    c.dep_dir = dep_dir;
    c.dep_select = dep_select;
    add(std::move(c));
  }

  // ours/mcp/finetune/scratch across the four transfer arcs
  void transfer_range() {
    for (int s = 0; s < opt_.seeds; ++s) add_pretrain(kVariants[0], s);
    for (int ti = 0; ti < 4; ++ti) {
      const std::string task = kXferTasks[ti];
      for (int s = 0; s < opt_.seeds; ++s) {
        const std::string dep = pretrain_dir("drur", s);
        const std::string sfx = "_" + task + "_s" + std::to_string(s);
        const std::string dir = opt_.root + "/transfer/";
        add_transfer("transfer-range", "ours" + sfx, "transfer-ours", task,
                     1000 + 10 * ti + s, dir + "ours" + sfx, dep, -1, 10);
        add_transfer("transfer-range", "mcp" + sfx, "transfer-mcp", task,
                     2000 + 10 * ti + s, dir + "mcp" + sfx, dep, -1, 10);
        add_transfer("transfer-range", "finetune" + sfx, "finetune", task,
                     3000 + 10 * ti + s, dir + "finetune" + sfx, dep, -1, 10);
        add_transfer("transfer-range", "scratch" + sfx, "scratch", task,
                     4000 + 10 * ti + s, dir + "scratch" + sfx, "", -1, 10);
      }
    }
  }

  // the four pretraining variants, plus the transfer-speed arm on xfer-2
  void ablation() {
    for (const Variant& v : kVariants)
      for (int s = 0; s < opt_.seeds; ++s) add_pretrain(v, s);
    for (int s = 0; s < opt_.seeds; ++s) {
      const std::string sfx = "_xfer-2_s" + std::to_string(s);
      add_transfer("transfer-range", "ours" + sfx, "transfer-ours", "xfer-2", 1010 + s,
                   opt_.root + "/transfer/ours" + sfx, pretrain_dir("drur", s), -1, 10);
      add_transfer("ablation", "none2ours_s" + std::to_string(s), "transfer-ours", "xfer-2",
                   8000 + s, opt_.root + "/ablation/none2ours_s" + std::to_string(s),
                   pretrain_dir("none", s), -1, 10);
    }
  }

  // ours vs mcp from each pretraining milestone
  void quality() {
    for (int s = 0; s < opt_.seeds; ++s) add_pretrain(kVariants[0], s);
    for (int li = 0; li < 4; ++li) {
      const std::string pct = std::to_string(kQualityPct[li]);
      for (int s = 0; s < opt_.seeds; ++s) {
        const std::string dep = pretrain_dir("drur", s);
        const std::string sfx = "_q" + pct + "_s" + std::to_string(s);
        add_transfer("quality", "ours" + sfx, "transfer-ours", "xfer-2", 5000 + 10 * li + s,
                     opt_.root + "/quality/ours" + sfx, dep, li, 10);
        add_transfer("quality", "mcp" + sfx, "transfer-mcp", "xfer-2", 6000 + 10 * li + s,
                     opt_.root + "/quality/mcp" + sfx, dep, li, 10);
      }
    }
  }

  // switching period sweep on xfer-2; p = 10 reuses the transfer-range cell
  void period_sweep() {
    for (int s = 0; s < opt_.seeds; ++s) add_pretrain(kVariants[0], s);
    const int periods[] = {5, 20};
    for (int pi = 0; pi < 2; ++pi) {
      for (int s = 0; s < opt_.seeds; ++s) {
        const std::string pname = "p" + std::to_string(periods[pi]) + "_s" + std::to_string(s);
        add_transfer("period-sweep", pname, "transfer-ours", "xfer-2", 7000 + 10 * pi + s,
                     opt_.root + "/period/" + pname, pretrain_dir("drur", s), -1, periods[pi]);
      }
    }
    for (int s = 0; s < opt_.seeds; ++s) {
      const std::string sfx = "_xfer-2_s" + std::to_string(s);
      add_transfer("transfer-range", "ours" + sfx, "transfer-ours", "xfer-2", 1010 + s,
                   opt_.root + "/transfer/ours" + sfx, pretrain_dir("drur", s), -1, 10);
    }
  }

  std::vector<SuiteCell> take() { return std::move(cells_); }

 private:
  const SuiteOptions& opt_;
  std::vector<SuiteCell> cells_;
  std::set<std::string> seen_;
};

bool dep_completed(const std::string& dir) {
  return run_done(dir) && load_run_result(dir).completed;
}

}  // namespace

SuitePlan build_suite_plan(const SuiteOptions& opt) {
  PlanBuilder b(opt);
  for (const std::string& s : opt.suites) {
    if (s == "transfer-range")
      b.transfer_range();
    else if (s == "ablation")
      b.ablation();
    else if (s == "quality")
      b.quality();
    else if (s == "period-sweep")
      b.period_sweep();
    else
      throw std::runtime_error("suite: unknown suite \"" + s + "\"");
  }
  return SuitePlan{opt, b.take()};
}

std::string resolve_checkpoint(const std::string& run_dir, int select) {
  if (select < 0) {
    const RunResult r = load_run_result(run_dir);
    require(!r.final_checkpoint.empty(), "suite: " + run_dir + " has no final checkpoint");
    return r.final_checkpoint;
  }
  std::vector<std::pair<long, std::string>> found;
  const fs::path cdir = fs::path(run_dir) / "checkpoints";
  require(fs::exists(cdir), "suite: " + run_dir + " has no checkpoints");
  for (const auto& e : fs::directory_iterator(cdir)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("step_", 0) != 0) continue;
    found.emplace_back(std::stol(name.substr(5)), e.path().string());
  }
  std::sort(found.begin(), found.end());
  require(select < static_cast<int>(found.size()),
          "suite: " + run_dir + " has fewer milestones than requested");
  return found[static_cast<size_t>(select)].second;
}

SuiteOutcome run_suite(const SuitePlan& plan) {
  const size_t n = plan.cells.size();
  enum State { kPending, kDone, kFailed };
  std::vector<int> state(n, kPending);
  SuiteOutcome out;
  std::mutex mu;

  const auto run_cell = [&](size_t i) {
    SuiteCell c = plan.cells[i];
    try {
      if (!c.dep_dir.empty()) c.cfg.init_checkpoint = resolve_checkpoint(c.dep_dir, c.dep_select);
      const bool had = run_done(c.cfg.out_dir);
      const RunResult r = run_training(c.cfg, false);
      std::lock_guard<std::mutex> lk(mu);
      if (r.completed) {
        state[i] = kDone;
        had ? ++out.skipped : ++out.ran;
        std::cout << "[" << c.suite << "] " << c.name << (had ? " (cached)" : "") << "  R="
                  << std::setprecision(4) << r.final_return_mean << std::endl;
      } else {
        state[i] = kFailed;
        ++out.failed;
        out.failures.push_back(c.name + ": run aborted before the budget");
        std::cout << "[" << c.suite << "] " << c.name << "  FAILED (abort)" << std::endl;
      }
    } catch (const std::exception& e) {
      std::lock_guard<std::mutex> lk(mu);
      state[i] = kFailed;
      ++out.failed;
      out.failures.push_back(c.name + ": " + e.what());
      std::cout << "[" << c.suite << "] " << c.name << "  FAILED: " << e.what() << std::endl;
    }
  };

  while (true) {
    std::vector<size_t> ready;
    bool pending = false;
    for (size_t i = 0; i < n; ++i) {
      if (state[i] != kPending) continue;
      pending = true;
      const std::string& dep = plan.cells[i].dep_dir;
      if (dep.empty() || dep_completed(dep)) ready.push_back(i);
    }
    if (!pending) break;
    if (ready.empty()) {
      for (size_t i = 0; i < n; ++i) {
        if (state[i] != kPending) continue;
        state[i] = kFailed;
        ++out.failed;
        out.failures.push_back(plan.cells[i].name + ": dependency did not complete");
      }
      break;
    }
    const int jobs = std::max(1, plan.opt.jobs);
    for (size_t at = 0; at < ready.size(); at += jobs) {
      std::vector<std::thread> pool;
      for (size_t j = at; j < std::min(ready.size(), at + jobs); ++j)
        pool.emplace_back(run_cell, ready[j]);
      for (auto& t : pool) t.join();
    }
  }
  return out;
}

void write_suite_summary(const SuitePlan& plan, const std::string& csv_path) {
  std::vector<const SuiteCell*> cells;
  for (const SuiteCell& c : plan.cells) cells.push_back(&c);
  std::sort(cells.begin(), cells.end(), [](const SuiteCell* a, const SuiteCell* b) {
    return std::tie(a->suite, a->name) < std::tie(b->suite, b->name);
  });

  std::ofstream csv(csv_path);
  require(bool(csv), "suite: cannot write " + csv_path);
  csv << "suite,name,mode,task,seed,env_steps,completed,return_mean,return_std,out_dir\n"
      << std::setprecision(17);
  for (const SuiteCell* c : cells) {
    if (!run_done(c->cfg.out_dir)) continue;
    const RunResult r = load_run_result(c->cfg.out_dir);
    csv << c->suite << ',' << c->name << ',' << c->cfg.mode << ',' << c->cfg.task << ','
        << c->cfg.seed << ',' << r.env_steps << ',' << (r.completed ? 1 : 0) << ','
        << r.final_return_mean << ',' << r.final_return_std << ',' << c->cfg.out_dir << '\n';
  }
}

}  // namespace hpt
