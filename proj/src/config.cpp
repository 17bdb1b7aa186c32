#include "hpt/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "hpt/env.hpp"

namespace hpt {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error("config: " + msg); }

void reject_unknown(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) fail("unknown key \"" + where + it.key() + "\"");
  }
}

template <class T>
T get_as(const json& j, const std::string& where, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail("key \"" + where + key + "\" has the wrong type");
  }
}

}  // namespace

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into a line number so editors can jump there.
    size_t line = 1;
    for (size_t i = 0; i < e.byte && i < text.size(); ++i)
      if (text[i] == '\n') ++line;
    fail(path + ":" + std::to_string(line) + ": " + e.what());
  }
}

void apply_overrides(json& j, const std::vector<std::string>& sets) {
  for (const std::string& s : sets) {
    const size_t eq = s.find('=');
    if (eq == std::string::npos) fail("override \"" + s + "\" is not key=value");
    const std::string path = s.substr(0, eq);
    const std::string raw = s.substr(eq + 1);

    json* node = &j;
    size_t pos = 0;
    std::string leaf;
    while (true) {
      const size_t dot = path.find('.', pos);
      const std::string part = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
      if (part.empty()) fail("override path \"" + path + "\" has an empty segment");
      if (dot == std::string::npos) {
        leaf = part;
        break;
      }
      if (!node->contains(part) || !(*node)[part].is_object())
        fail("override path \"" + path + "\" does not address an object");
      node = &(*node)[part];
      pos = dot + 1;
    }
    if (!node->contains(leaf)) fail("override path \"" + path + "\" addresses no existing key");

    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;  // bare strings need no quoting on the command line
    }
    (*node)[leaf] = value;
  }
}

RunConfig config_from_json(const json& j) {
  if (!j.is_object()) fail("top level must be an object");
  reject_unknown(j, "", {"mode", "task", "total_steps", "seed", "k", "hidden", "p",
                         "scratch_composite", "init_checkpoint", "out_dir", "eval_episodes",
                         "milestones", "regs", "ppo"});

  RunConfig cfg;
  cfg.mode = get_as<std::string>(j, "", "mode", "");
  cfg.task = get_as<std::string>(j, "", "task", "");
  cfg.total_steps = get_as<long>(j, "", "total_steps", cfg.total_steps);
  cfg.seed = get_as<uint64_t>(j, "", "seed", cfg.seed);
  cfg.k = get_as<int>(j, "", "k", cfg.k);
  cfg.hidden = get_as<std::vector<int>>(j, "", "hidden", cfg.hidden);
  cfg.p = get_as<int>(j, "", "p", cfg.p);
  cfg.scratch_composite = get_as<bool>(j, "", "scratch_composite", cfg.scratch_composite);
  cfg.init_checkpoint = get_as<std::string>(j, "", "init_checkpoint", "");
  cfg.out_dir = get_as<std::string>(j, "", "out_dir", "");
  cfg.eval_episodes = get_as<int>(j, "", "eval_episodes", cfg.eval_episodes);
  cfg.milestones = get_as<std::vector<double>>(j, "", "milestones", cfg.milestones);

  if (j.contains("regs")) {
    const json& r = j.at("regs");
    if (!r.is_object()) fail("\"regs\" must be an object");
    reject_unknown(r, "regs.", {"alpha", "beta", "kl_clip"});
    cfg.regs.alpha = get_as<double>(r, "regs.", "alpha", cfg.regs.alpha);
    cfg.regs.beta = get_as<double>(r, "regs.", "beta", cfg.regs.beta);
    cfg.regs.kl_clip = get_as<double>(r, "regs.", "kl_clip", cfg.regs.kl_clip);
  }
  if (j.contains("ppo")) {
    const json& p = j.at("ppo");
    if (!p.is_object()) fail("\"ppo\" must be an object");
    reject_unknown(p, "ppo.", {"clip_eps", "gamma", "lambda", "epochs", "minibatch", "value_coef",
                               "kl_stop", "normalize_adv", "steps_per_update", "lr"});
    cfg.ppo.clip_eps = get_as<double>(p, "ppo.", "clip_eps", cfg.ppo.clip_eps);
    cfg.ppo.gamma = get_as<double>(p, "ppo.", "gamma", cfg.ppo.gamma);
    cfg.ppo.lambda = get_as<double>(p, "ppo.", "lambda", cfg.ppo.lambda);
    cfg.ppo.epochs = get_as<int>(p, "ppo.", "epochs", cfg.ppo.epochs);
    cfg.ppo.minibatch = get_as<int>(p, "ppo.", "minibatch", cfg.ppo.minibatch);
    cfg.ppo.value_coef = get_as<double>(p, "ppo.", "value_coef", cfg.ppo.value_coef);
    cfg.ppo.kl_stop = get_as<double>(p, "ppo.", "kl_stop", cfg.ppo.kl_stop);
    cfg.ppo.normalize_adv = get_as<bool>(p, "ppo.", "normalize_adv", cfg.ppo.normalize_adv);
    cfg.ppo.steps_per_update = get_as<int>(p, "ppo.", "steps_per_update", cfg.ppo.steps_per_update);
    cfg.ppo.adam.lr = get_as<double>(p, "ppo.", "lr", cfg.ppo.adam.lr);
  }

  validate(cfg);
  return cfg;
}

void validate(const RunConfig& cfg) {
  static const std::set<std::string> kModes = {"pretrain", "transfer-ours", "transfer-mcp",
                                              "finetune", "scratch"};
  if (!kModes.count(cfg.mode)) fail("mode \"" + cfg.mode + "\" is not one of pretrain, transfer-ours, transfer-mcp, finetune, scratch");
  if (!is_known_task(cfg.task)) fail("task \"" + cfg.task + "\" is not registered");
  if (cfg.total_steps <= 0) fail("total_steps must be positive");
  const bool composite_model = cfg.mode != "scratch" || cfg.scratch_composite;
  if (cfg.mode != "finetune" && composite_model && cfg.k < 2)
    fail("composite modes need k >= 2 primitives");
  if (cfg.k < 1) fail("k must be at least 1");
  if (cfg.hidden.empty()) fail("hidden must name at least one layer");
  for (int h : cfg.hidden)
    if (h < 1) fail("hidden sizes must be positive");
  if (cfg.eval_episodes < 1) fail("eval_episodes must be positive");
  for (double m : cfg.milestones)
    if (!(m > 0.0 && m <= 1.0)) fail("milestones must lie in (0, 1]");
  if (cfg.ppo.steps_per_update < cfg.ppo.minibatch)
    fail("steps_per_update must be at least minibatch");
  if (cfg.ppo.minibatch < 1 || cfg.ppo.epochs < 1) fail("ppo epochs/minibatch must be positive");

  const bool needs_ckpt = cfg.mode == "transfer-ours" || cfg.mode == "transfer-mcp" ||
                          cfg.mode == "finetune";
  if (needs_ckpt && cfg.init_checkpoint.empty())
    fail("mode \"" + cfg.mode + "\" requires init_checkpoint");
  if (needs_ckpt) {
    std::ifstream probe(cfg.init_checkpoint, std::ios::binary);
    if (!probe) fail("init_checkpoint \"" + cfg.init_checkpoint + "\" does not exist");
  }
  if (!needs_ckpt && !cfg.init_checkpoint.empty())
    fail("mode \"" + cfg.mode + "\" must not set init_checkpoint");
  if (cfg.out_dir.empty()) fail("out_dir must be set");
}

json config_to_json(const RunConfig& cfg) {
  json j;
  j["mode"] = cfg.mode;
  j["task"] = cfg.task;
  j["total_steps"] = cfg.total_steps;
  j["seed"] = cfg.seed;
  j["k"] = cfg.k;
  j["hidden"] = cfg.hidden;
  j["p"] = cfg.p;
  j["scratch_composite"] = cfg.scratch_composite;
  j["init_checkpoint"] = cfg.init_checkpoint;
  j["out_dir"] = cfg.out_dir;
  j["eval_episodes"] = cfg.eval_episodes;
  j["milestones"] = cfg.milestones;
  j["regs"] = {{"alpha", cfg.regs.alpha}, {"beta", cfg.regs.beta}, {"kl_clip", cfg.regs.kl_clip}};
  j["ppo"] = {{"clip_eps", cfg.ppo.clip_eps},
              {"gamma", cfg.ppo.gamma},
              {"lambda", cfg.ppo.lambda},
              {"epochs", cfg.ppo.epochs},
              {"minibatch", cfg.ppo.minibatch},
              {"value_coef", cfg.ppo.value_coef},
              {"kl_stop", cfg.ppo.kl_stop},
              {"normalize_adv", cfg.ppo.normalize_adv},
              {"steps_per_update", cfg.ppo.steps_per_update},
              {"lr", cfg.ppo.adam.lr}};
  return j;
}

}  // namespace hpt
