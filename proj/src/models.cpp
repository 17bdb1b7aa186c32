#include "hpt/models.hpp"

#include <cstring>

namespace hpt {
namespace {

void append_spans(std::vector<std::span<double>>& out, DenseNet& net) {
  for (auto s : param_spans(net)) out.push_back(s);
}

void append_grad_spans(std::vector<std::span<const double>>& out, const NetGrads& g) {
  for (auto s : grad_spans(g)) out.push_back(s);
}

std::size_t total_size(const std::vector<std::span<double>>& spans) {
  std::size_t n = 0;
  for (auto s : spans) n += s.size();
  return n;
}

void copy_out(const std::vector<std::span<double>>& spans, Vec& flat) {
  flat.resize(total_size(spans));
  std::size_t off = 0;
  for (auto s : spans) {
    std::memcpy(flat.data() + off, s.data(), s.size() * sizeof(double));
    off += s.size();
  }
}

void copy_in(const std::vector<std::span<double>>& spans, const Vec& flat) {
  require(flat.size() == total_size(spans), "snapshot size mismatch");
  std::size_t off = 0;
  for (auto s : spans) {
    std::memcpy(s.data(), flat.data() + off, s.size() * sizeof(double));
    off += s.size();
  }
}

void fill_sg(Vec& sg, std::span<const double> s, std::span<const double> g) {
  sg.resize(s.size() + g.size());
  std::memcpy(sg.data(), s.data(), s.size() * sizeof(double));
  std::memcpy(sg.data() + s.size(), g.data(), g.size() * sizeof(double));
}

void snapshot_adams(const std::vector<const Adam*>& opts, ModelSnapshot& snap) {
  for (const Adam* a : opts) {
    snap.adam_m.push_back(a->m());
    snap.adam_v.push_back(a->v());
    snap.adam_t.push_back(a->t());
  }
}

void restore_adams(const std::vector<Adam*>& opts, const ModelSnapshot& snap) {
  require(snap.adam_m.size() == opts.size(), "snapshot optimizer count mismatch");
  for (std::size_t i = 0; i < opts.size(); ++i)
    opts[i]->load(snap.adam_m[i], snap.adam_v[i], snap.adam_t[i]);
}

}  // namespace

std::vector<std::span<double>> prim_param_spans(PrimitiveSet& prims) {
  std::vector<std::span<double>> out;
  for (auto& net : prims.nets) append_spans(out, net);
  for (auto& ls : prims.log_std) out.push_back(std::span<double>(ls));
  return out;
}

std::vector<std::span<const double>> prim_grad_spans(const PrimitiveGrads& g) {
  std::vector<std::span<const double>> out;
  for (const auto& ng : g.nets) append_grad_spans(out, ng);
  for (const auto& ls : g.log_std) out.push_back(std::span<const double>(ls));
  return out;
}

double CompositeModel::critic_forward(std::span<const double> s, std::span<const double> g) {
  fill_sg(sg_buf, s, g);
  forward(critic, sg_buf, critic_cache);
  return critic_cache.act.back()[0];
}

void CompositeModel::critic_backward(double d_value) {
  const Vec dout = {d_value};
  backward(critic, critic_cache, dout, critic_grads);
}

double CompositeModel::value(std::span<const double> s, std::span<const double> g) {
  return critic_forward(s, g);
}

void CompositeModel::opt_step(const FreezeMask& f) {
  if (!f.primitives_frozen)
    opt_prims.step(prim_param_spans(policy.prims), prim_grad_spans(grads.prims));
  if (!f.combiner_frozen) {
    auto p = param_spans(policy.comb.net);
    std::vector<std::span<const double>> gr;
    append_grad_spans(gr, grads.comb);
    opt_comb.step(p, gr);
  }
  {
    auto p = param_spans(critic);
    std::vector<std::span<const double>> gr;
    append_grad_spans(gr, critic_grads);
    opt_critic.step(p, gr);
  }
}

ModelSnapshot CompositeModel::snapshot() const {
  ModelSnapshot snap;
  auto& self = const_cast<CompositeModel&>(*this);
  auto spans = prim_param_spans(self.policy.prims);
  append_spans(spans, self.policy.comb.net);
  append_spans(spans, self.critic);
  copy_out(spans, snap.params);
  snapshot_adams({&opt_prims, &opt_comb, &opt_critic}, snap);
  return snap;
}

void CompositeModel::restore(const ModelSnapshot& snap) {
  auto spans = prim_param_spans(policy.prims);
  append_spans(spans, policy.comb.net);
  append_spans(spans, critic);
  copy_in(spans, snap.params);
  restore_adams({&opt_prims, &opt_comb, &opt_critic}, snap);
}

void CompositeModel::reset_optimizers(const AdamConfig& cfg) {
  opt_prims = Adam(policy.prims.param_count(), cfg);
  opt_comb = Adam(policy.comb.net.param_count(), cfg);
  opt_critic = Adam(critic.param_count(), cfg);
}

void PlainModel::flush(const FreezeMask& f) {
  require(!f.primitives_frozen && !f.combiner_frozen,
          "plain policy has no freezable parts");
  plain_logp_backward(policy, ev, staged_a_, staged_coeff_, grads);
}

double PlainModel::critic_forward(std::span<const double> s, std::span<const double> g) {
  fill_sg(sg_buf, s, g);
  forward(critic, sg_buf, critic_cache);
  return critic_cache.act.back()[0];
}

void PlainModel::critic_backward(double d_value) {
  const Vec dout = {d_value};
  backward(critic, critic_cache, dout, critic_grads);
}

double PlainModel::value(std::span<const double> s, std::span<const double> g) {
  return critic_forward(s, g);
}

void PlainModel::opt_step(const FreezeMask& f) {
  require(!f.primitives_frozen && !f.combiner_frozen,
          "plain policy has no freezable parts");
  {
    auto p = param_spans(policy.net);
    p.push_back(std::span<double>(policy.log_std));
    std::vector<std::span<const double>> gr;
    append_grad_spans(gr, grads.net);
    gr.push_back(std::span<const double>(grads.log_std));
    opt_pol.step(p, gr);
  }
  {
    auto p = param_spans(critic);
    std::vector<std::span<const double>> gr;
    append_grad_spans(gr, critic_grads);
    opt_critic.step(p, gr);
  }
}

ModelSnapshot PlainModel::snapshot() const {
  ModelSnapshot snap;
  auto& self = const_cast<PlainModel&>(*this);
  auto spans = param_spans(self.policy.net);
  spans.push_back(std::span<double>(self.policy.log_std));
  append_spans(spans, self.critic);
  copy_out(spans, snap.params);
  snapshot_adams({&opt_pol, &opt_critic}, snap);
  return snap;
}

void PlainModel::restore(const ModelSnapshot& snap) {
  auto spans = param_spans(policy.net);
  spans.push_back(std::span<double>(policy.log_std));
  append_spans(spans, critic);
  copy_in(spans, snap.params);
  restore_adams({&opt_pol, &opt_critic}, snap);
}

void PlainModel::reset_optimizers(const AdamConfig& cfg) {
  opt_pol = Adam(policy.net.param_count() + policy.log_std.size(), cfg);
  opt_critic = Adam(critic.param_count(), cfg);
}

CompositeModel make_composite_model(int state_dim, int goal_dim, int action_dim, int k,
                                    const std::vector<int>& hidden, Rng& rng,
                                    const AdamConfig& adam) {
  CompositeModel m{
      .policy = make_composite_policy(state_dim, goal_dim, action_dim, k, hidden, rng),
      .critic = make_net(state_dim + goal_dim, hidden, 1, OutputAct::Identity, 1.0, rng),
      .grads = {},
      .critic_grads = {},
      .opt_prims = Adam(0, adam),
      .opt_comb = Adam(0, adam),
      .opt_critic = Adam(0, adam),
      .ev = {},
      .critic_cache = {},
      .sg_buf = {}};
  m.grads = make_composite_grads(m.policy);
  m.critic_grads = make_grads(m.critic);
  m.reset_optimizers(adam);
  return m;
}

PlainModel make_plain_model(int state_dim, int goal_dim, int action_dim,
                            const std::vector<int>& hidden, Rng& rng,
                            const AdamConfig& adam) {
  PlainModel m;
  m.policy = make_plain_policy(state_dim, goal_dim, action_dim, hidden, rng);
  m.critic = make_net(state_dim + goal_dim, hidden, 1, OutputAct::Identity, 1.0, rng);
  m.grads = make_plain_grads(m.policy);
  m.critic_grads = make_grads(m.critic);
  m.reset_optimizers(adam);
  return m;
}

}  // namespace hpt
