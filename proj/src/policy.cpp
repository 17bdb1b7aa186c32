#include "hpt/policy.hpp"

#include <cmath>

namespace hpt {


size_t PrimitiveSet::param_count() const {
  size_t n = 0;
  for (const auto& net : nets) n += net.param_count();
  for (const auto& ls : log_std) n += ls.size();
  return n;
}

void PrimitiveGrads::zero() {
  for (auto& g : nets) g.zero();
  for (auto& v : log_std) std::fill(v.begin(), v.end(), 0.0);
}

void CompositeGrads::zero() {
  prims.zero();
  comb.zero();
}

void PlainGrads::zero() {
  net.zero();
  std::fill(log_std.begin(), log_std.end(), 0.0);
}

CompositePolicy make_composite_policy(int state_dim, int goal_dim, int action_dim,
                                      int k, const std::vector<int>& hidden, Rng& rng) {
  require(k >= 2, "composite policy needs k >= 2 primitives");
  CompositePolicy p;
  p.state_dim = state_dim;
  p.goal_dim = goal_dim;
  p.action_dim = action_dim;
  p.prims.k = k;
  p.prims.state_dim = state_dim;
  p.prims.action_dim = action_dim;
  for (int i = 0; i < k; ++i) {
    p.prims.nets.push_back(make_net(state_dim, hidden, action_dim,
                                    OutputAct::Identity, 0.01, rng));
    p.prims.log_std.emplace_back(static_cast<size_t>(action_dim), 0.0);
  }
  p.comb.net = make_net(state_dim + goal_dim, hidden, k, OutputAct::Sigmoid, 0.01, rng);
  return p;
}

CompositeGrads make_composite_grads(const CompositePolicy& p) {
  CompositeGrads g;
  for (const auto& net : p.prims.nets) g.prims.nets.push_back(make_grads(net));
  for (const auto& ls : p.prims.log_std) g.prims.log_std.emplace_back(ls.size(), 0.0);
  g.comb = make_grads(p.comb.net);
  return g;
}

DiagGaussian primitive_dist(const PrimitiveSet& prims, int i, std::span<const double> s) {
  require(i >= 0 && i < prims.k, "primitive_dist: index out of range");
  DiagGaussian d;
  d.mean = forward(prims.nets[i], s);
  d.std.resize(prims.log_std[i].size());
  for (size_t j = 0; j < d.std.size(); ++j) d.std[j] = clamped_std(prims.log_std[i][j]);
  return d;
}

Vec combine_weights(const CombinationFunction& comb, std::span<const double> s,
                    std::span<const double> g) {
  Vec sg(s.size() + g.size());
  std::copy(s.begin(), s.end(), sg.begin());
  std::copy(g.begin(), g.end(), sg.begin() + s.size());
  Vec w = forward(comb.net, sg);
  for (double& x : w) x = std::max(x, kWeightFloor);
  return w;
}

void CompositeEval::zero_stage() {
  for (auto& v : d_mean) std::fill(v.begin(), v.end(), 0.0);
  for (auto& v : d_std) std::fill(v.begin(), v.end(), 0.0);
  std::fill(d_w.begin(), d_w.end(), 0.0);
}

void composite_eval(const CompositePolicy& p, std::span<const double> s,
                    std::span<const double> g, CompositeEval& ev) {
  require(static_cast<int>(s.size()) == p.state_dim &&
              static_cast<int>(g.size()) == p.goal_dim,
          "composite_eval: dim mismatch");
  const int k = p.prims.k;
  const size_t ad = static_cast<size_t>(p.action_dim);
  ev.prim_caches.resize(k);
  ev.prim_dists.resize(k);
  ev.d_mean.resize(k);
  ev.d_std.resize(k);
  for (int i = 0; i < k; ++i) {
    ev.prim_dists[i].mean = forward(p.prims.nets[i], s, ev.prim_caches[i]);
    ev.prim_dists[i].std.resize(ad);
    for (size_t j = 0; j < ad; ++j)
      ev.prim_dists[i].std[j] = clamped_std(p.prims.log_std[i][j]);
    ev.d_mean[i].assign(ad, 0.0);
    ev.d_std[i].assign(ad, 0.0);
  }
  ev.sg.resize(s.size() + g.size());
  std::copy(s.begin(), s.end(), ev.sg.begin());
  std::copy(g.begin(), g.end(), ev.sg.begin() + s.size());
  ev.weights = forward(p.comb.net, ev.sg, ev.comb_cache);
  for (double& x : ev.weights) x = std::max(x, kWeightFloor);
  ev.d_w.assign(static_cast<size_t>(k), 0.0);
  compose(ev.prim_dists, ev.weights, ev.dist);
}

double stage_logp_grad(const CompositePolicy& p, CompositeEval& ev,
                       std::span<const double> a, double coeff) {
  const size_t ad = static_cast<size_t>(p.action_dim);
  Vec d_mean_c(ad, 0.0), d_lambda(ad, 0.0);
  log_prob_backward(ev.dist, a, coeff, d_mean_c, d_lambda);
  compose_backward(ev.prim_dists, ev.weights, ev.dist, d_mean_c, d_lambda,
                   ev.d_w, ev.d_mean, ev.d_std);
  return log_prob(ev.dist, a);
}

void composite_flush(const CompositePolicy& p, CompositeEval& ev,
                     const FreezeMask& freeze, CompositeGrads& grads) {
  require(!(freeze.primitives_frozen && freeze.combiner_frozen),
          "composite_flush: cannot freeze both parameter sets");
  if (!freeze.primitives_frozen) {
    for (int i = 0; i < p.prims.k; ++i) {
      backward(p.prims.nets[i], ev.prim_caches[i], ev.d_mean[i], grads.prims.nets[i]);
      for (size_t j = 0; j < ev.d_std[i].size(); ++j) {
        const double sd = ev.prim_dists[i].std[j];
        if (std_grad_live(sd)) grads.prims.log_std[i][j] += ev.d_std[i][j] * sd;
      }
    }
  }
  if (!freeze.combiner_frozen) {
    // the weight floor gates the gradient where it binds
    Vec d_sig = ev.d_w;
    const Vec& raw = ev.comb_cache.act.back();
    for (size_t i = 0; i < d_sig.size(); ++i)
      if (raw[i] <= kWeightFloor) d_sig[i] = 0.0;
    backward(p.comb.net, ev.comb_cache, d_sig, grads.comb);
  }
  ev.zero_stage();
}

double composite_logp_backward(const CompositePolicy& p, CompositeEval& ev,
                               std::span<const double> a, double coeff,
                               const FreezeMask& freeze, CompositeGrads& grads) {
  const double lp = stage_logp_grad(p, ev, a, coeff);
  composite_flush(p, ev, freeze, grads);
  return lp;
}

PlainPolicy make_plain_policy(int state_dim, int goal_dim, int action_dim,
                              const std::vector<int>& hidden, Rng& rng) {
  PlainPolicy p;
  p.state_dim = state_dim;
  p.goal_dim = goal_dim;
  p.action_dim = action_dim;
  p.net = make_net(state_dim + goal_dim, hidden, action_dim, OutputAct::Identity, 0.01, rng);
  p.log_std.assign(static_cast<size_t>(action_dim), 0.0);
  return p;
}

PlainGrads make_plain_grads(const PlainPolicy& p) {
  PlainGrads g;
  g.net = make_grads(p.net);
  g.log_std.assign(p.log_std.size(), 0.0);
  return g;
}

void plain_eval(const PlainPolicy& p, std::span<const double> s,
                std::span<const double> g, PlainEval& ev) {
  ev.sg.resize(s.size() + g.size());
  std::copy(s.begin(), s.end(), ev.sg.begin());
  std::copy(g.begin(), g.end(), ev.sg.begin() + s.size());
  ev.dist.mean = forward(p.net, ev.sg, ev.cache);
  ev.dist.std.resize(p.log_std.size());
  for (size_t j = 0; j < p.log_std.size(); ++j) ev.dist.std[j] = clamped_std(p.log_std[j]);
}

double plain_logp_backward(const PlainPolicy& p, PlainEval& ev,
                           std::span<const double> a, double coeff, PlainGrads& grads) {
  const size_t ad = p.log_std.size();
  Vec d_mean(ad);
  for (size_t j = 0; j < ad; ++j) {
    const double sig = ev.dist.std[j];
    const double z = a[j] - ev.dist.mean[j];
    d_mean[j] = coeff * z / (sig * sig);
    if (std_grad_live(sig)) grads.log_std[j] += coeff * (z * z / (sig * sig) - 1.0);
  }
  backward(p.net, ev.cache, d_mean, grads.net);
  return log_prob(ev.dist, a);
}

uint64_t param_checksum(const PrimitiveSet& prims) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& net : prims.nets) h = param_checksum(net, h);
  for (const auto& ls : prims.log_std) h = checksum(ls, h);
  return h;
}

uint64_t param_checksum(const CompositePolicy& p) {
  uint64_t h = param_checksum(p.prims);
  return param_checksum(p.comb.net, h);
}

uint64_t param_checksum(const PlainPolicy& p) {
  uint64_t h = param_checksum(p.net);
  return checksum(p.log_std, h);
}

}  // namespace hpt
