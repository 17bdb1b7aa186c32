#pragma once

#include <span>
#include <vector>

#include "hpt/math.hpp"

namespace hpt {

enum class OutputAct { Identity, Sigmoid };

// Dense feedforward net, tanh hidden activations, 64-bit parameters.
// Weight storage is input-major: w[j * out + o] is the weight from input j to
// output o, so both the forward pass and the weight-gradient accumulation walk
// contiguous memory.
struct DenseNet {
  struct Layer {
    int in = 0, out = 0;
    Vec w;  // in * out, input-major
    Vec b;  // out
  };

  std::vector<Layer> layers;
  OutputAct output_act = OutputAct::Identity;

  int input_dim() const { return layers.front().in; }
  int output_dim() const { return layers.back().out; }

  size_t param_count() const {
    size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
  }
};

// Orthogonal weight init (Gram-Schmidt on a Gaussian draw), zero biases.
// `out_gain` scales the final layer; hidden layers use gain sqrt(2).
DenseNet make_net(int in, const std::vector<int>& hidden, int out,
                  OutputAct act, double out_gain, Rng& rng);

// Per-parameter gradient accumulator mirroring a DenseNet's shapes.
struct NetGrads {
  std::vector<Vec> w, b;
  void zero();
};

NetGrads make_grads(const DenseNet& net);

// Post-activation values recorded by forward; sufficient for backward since
// tanh' = 1 - y^2 and sigmoid' = y (1 - y).
struct FwdCache {
  const DenseNet* owner = nullptr;
  Vec input;
  std::vector<Vec> act;  // one per layer; act.back() is the output
};

// Returns a view of the output held inside the cache.
const Vec& forward(const DenseNet& net, std::span<const double> x, FwdCache& cache);
Vec forward(const DenseNet& net, std::span<const double> x);

// Accumulates d(objective)/d(params) into grads given d(objective)/d(output).
// If dinput is non-null the gradient w.r.t. the input is written there.
void backward(const DenseNet& net, const FwdCache& cache,
              std::span<const double> dout, NetGrads& grads, Vec* dinput = nullptr);

// Flat parameter/gradient views in a stable order (layer 0 w, b, layer 1 ...).
std::vector<std::span<double>> param_spans(DenseNet& net);
std::vector<std::span<const double>> param_spans(const DenseNet& net);
std::vector<std::span<double>> grad_spans(NetGrads& g);
std::vector<std::span<const double>> grad_spans(const NetGrads& g);

uint64_t param_checksum(const DenseNet& net, uint64_t h = 0xcbf29ce484222325ULL);

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam over one parameter group. Rejects non-finite gradients and updates
// that would produce non-finite parameters, leaving the group untouched.
class Adam {
 public:
  Adam() = default;
  Adam(size_t n, AdamConfig cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<const std::span<double>> params,
            std::span<const std::span<const double>> grads);

  long steps() const { return t_; }
  size_t size() const { return m_.size(); }
  const AdamConfig& config() const { return cfg_; }

  // raw state access for update-abort snapshots
  const Vec& m() const { return m_; }
  const Vec& v() const { return v_; }
  long t() const { return t_; }
  void load(const Vec& m, const Vec& v, long t) {
    require(m.size() == m_.size() && v.size() == v_.size(), "adam state size mismatch");
    m_ = m;
    v_ = v;
    t_ = t;
  }

 private:
  AdamConfig cfg_;
  Vec m_, v_;
  long t_ = 0;
};

}  // namespace hpt
