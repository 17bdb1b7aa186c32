#include "hpt/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace hpt {
namespace {

using nlohmann::json;

void write_all(std::ofstream& f, const void* data, size_t n) {
  f.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void read_all(std::ifstream& f, void* data, size_t n) {
  f.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(f.gcount()) != n)
    throw std::runtime_error("checkpoint: truncated file");
}

void write_file(const std::string& path, const json& header, const Vec& params) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  write_all(f, kCheckpointMagic, 4);
  const std::string h = header.dump();
  const uint32_t len = static_cast<uint32_t>(h.size());
  write_all(f, &len, 4);
  write_all(f, h.data(), h.size());
  write_all(f, params.data(), params.size() * sizeof(double));
  f.flush();
  if (!f) throw std::runtime_error("checkpoint: write failed for " + path);
}

json read_header(std::ifstream& f, const std::string& path) {
  char magic[4];
  read_all(f, magic, 4);
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  uint32_t len = 0;
  read_all(f, &len, 4);
  std::string h(len, '\0');
  read_all(f, h.data(), len);
  return json::parse(h);
}

Vec read_params(std::ifstream& f, size_t count) {
  Vec p(count);
  read_all(f, p.data(), count * sizeof(double));
  return p;
}

std::vector<int> hidden_of(const DenseNet& net) {
  std::vector<int> h;
  for (size_t i = 0; i + 1 < net.layers.size(); ++i) h.push_back(net.layers[i].out);
  return h;
}

}  // namespace

void save_checkpoint(const std::string& path, const CompositeModel& m,
                     const json& meta) {
  auto& self = const_cast<CompositeModel&>(m);
  auto spans = prim_param_spans(self.policy.prims);
  for (auto s : param_spans(self.policy.comb.net)) spans.push_back(s);
  for (auto s : param_spans(self.critic)) spans.push_back(s);
  Vec flat;
  size_t total = 0;
  for (auto s : spans) total += s.size();
  flat.reserve(total);
  for (auto s : spans) flat.insert(flat.end(), s.begin(), s.end());

  json header = {{"kind", "composite"},
                 {"state_dim", m.policy.state_dim},
                 {"goal_dim", m.policy.goal_dim},
                 {"action_dim", m.policy.action_dim},
                 {"k", m.policy.prims.k},
                 {"hidden", hidden_of(m.policy.prims.nets.front())},
                 {"param_count", flat.size()},
                 {"meta", meta}};
  write_file(path, header, flat);
}

void save_checkpoint(const std::string& path, const PlainModel& m, const json& meta) {
  auto& self = const_cast<PlainModel&>(m);
  auto spans = param_spans(self.policy.net);
  spans.push_back(std::span<double>(self.policy.log_std));
  for (auto s : param_spans(self.critic)) spans.push_back(s);
  Vec flat;
  for (auto s : spans) flat.insert(flat.end(), s.begin(), s.end());

  json header = {{"kind", "plain"},
                 {"state_dim", m.policy.state_dim},
                 {"goal_dim", m.policy.goal_dim},
                 {"action_dim", m.policy.action_dim},
                 {"hidden", hidden_of(m.policy.net)},
                 {"param_count", flat.size()},
                 {"meta", meta}};
  write_file(path, header, flat);
}

json checkpoint_header(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  return read_header(f, path);
}

CompositeModel load_composite(const std::string& path, const AdamConfig& adam,
                              json* meta) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  const json h = read_header(f, path);
  if (h.at("kind") != "composite")
    throw std::runtime_error("checkpoint: expected a composite policy in " + path);
  Rng rng(0);
  CompositeModel m = make_composite_model(h.at("state_dim"), h.at("goal_dim"),
                                          h.at("action_dim"), h.at("k"),
                                          h.at("hidden").get<std::vector<int>>(), rng,
                                          adam);
  const Vec flat = read_params(f, h.at("param_count").get<size_t>());
  size_t off = 0;
  auto spans = prim_param_spans(m.policy.prims);
  for (auto s : param_spans(m.policy.comb.net)) spans.push_back(s);
  for (auto s : param_spans(m.critic)) spans.push_back(s);
  for (auto s : spans) {
    require(off + s.size() <= flat.size(), "checkpoint: parameter count mismatch");
    std::memcpy(s.data(), flat.data() + off, s.size() * sizeof(double));
    off += s.size();
  }
  require(off == flat.size(), "checkpoint: parameter count mismatch");
  if (meta) *meta = h.value("meta", json::object());
  return m;
}

PlainModel load_plain(const std::string& path, const AdamConfig& adam, json* meta) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  const json h = read_header(f, path);
  if (h.at("kind") != "plain")
    throw std::runtime_error("checkpoint: expected a plain policy in " + path);
  Rng rng(0);
  PlainModel m =
      make_plain_model(h.at("state_dim"), h.at("goal_dim"), h.at("action_dim"),
                       h.at("hidden").get<std::vector<int>>(), rng, adam);
  const Vec flat = read_params(f, h.at("param_count").get<size_t>());
  size_t off = 0;
  auto spans = param_spans(m.policy.net);
  spans.push_back(std::span<double>(m.policy.log_std));
  for (auto s : param_spans(m.critic)) spans.push_back(s);
  for (auto s : spans) {
    require(off + s.size() <= flat.size(), "checkpoint: parameter count mismatch");
    std::memcpy(s.data(), flat.data() + off, s.size() * sizeof(double));
    off += s.size();
  }
  require(off == flat.size(), "checkpoint: parameter count mismatch");
  if (meta) *meta = h.value("meta", json::object());
  return m;
}

}  // namespace hpt
