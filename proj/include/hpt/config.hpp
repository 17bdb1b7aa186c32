#pragma once

#include <string>
#include <vector>

#include "hpt/ppo.hpp"

#include <json.hpp>

namespace hpt {

// One training run, fully declarative. Every quantity an experiment varies
// is a field here so that config + seed pins the run.
struct RunConfig {
  std::string mode;  // pretrain | transfer-ours | transfer-mcp | finetune | scratch
  std::string task;
  long total_steps = 300000;
  uint64_t seed = 0;
  int k = 4;
  std::vector<int> hidden = {64, 64};
  int p = 10;  // updates per freeze phase; p <= 0 means never switch
  bool scratch_composite = true;
  std::string init_checkpoint;
  std::string out_dir;
  int eval_episodes = 100;
  std::vector<double> milestones = {0.1, 0.25, 0.5, 1.0};
  RegConfig regs;
  PpoConfig ppo;
};

// Reads a JSON config file; parse failures throw with file:line anchors.
nlohmann::json load_config_file(const std::string& path);

// Applies "a.b.c=value" overrides; values parse as JSON scalars, falling
// back to strings. Paths must address existing keys.
void apply_overrides(nlohmann::json& j, const std::vector<std::string>& sets);

// Strict conversion: unknown keys anywhere are errors, as are mode/task
// incompatibilities (e.g. a transfer mode without an init checkpoint).
RunConfig config_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const RunConfig& cfg);

void validate(const RunConfig& cfg);

}  // namespace hpt
