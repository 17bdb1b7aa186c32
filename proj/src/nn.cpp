#include "hpt/nn.hpp"

#include <cmath>
#include <cstring>

namespace hpt {

namespace {

// Orthogonalize the rows (length `cols`) of an n_rows x cols Gaussian matrix.
void gram_schmidt_rows(Vec& m, int n_rows, int cols) {
  for (int r = 0; r < n_rows; ++r) {
    double* row = &m[static_cast<size_t>(r) * cols];
    for (int p = 0; p < r; ++p) {
      const double* prev = &m[static_cast<size_t>(p) * cols];
      double proj = 0;
      for (int c = 0; c < cols; ++c) proj += row[c] * prev[c];
      for (int c = 0; c < cols; ++c) row[c] -= proj * prev[c];
    }
    double norm = 0;
    for (int c = 0; c < cols; ++c) norm += row[c] * row[c];
    norm = std::sqrt(norm);
    if (norm < 1e-12) norm = 1.0;
    for (int c = 0; c < cols; ++c) row[c] /= norm;
  }
}

DenseNet::Layer make_layer(int in, int out, double gain, Rng& rng) {
  DenseNet::Layer l;
  l.in = in;
  l.out = out;
  l.w.resize(static_cast<size_t>(in) * out);
  l.b.assign(static_cast<size_t>(out), 0.0);

  // Draw a row-major out x in Gaussian matrix, orthonormalize along the
  // smaller dimension, then scatter into input-major storage.
  Vec tmp(static_cast<size_t>(in) * out);
  rng.fill_normal(tmp);
  if (out <= in) {
    gram_schmidt_rows(tmp, out, in);  // rows of W
  } else {
    // orthonormalize columns of W = rows of W^T
    Vec t(static_cast<size_t>(in) * out);
    for (int o = 0; o < out; ++o)
      for (int j = 0; j < in; ++j)
        t[static_cast<size_t>(j) * out + o] = tmp[static_cast<size_t>(o) * in + j];
    gram_schmidt_rows(t, in, out);
    for (int o = 0; o < out; ++o)
      for (int j = 0; j < in; ++j)
        tmp[static_cast<size_t>(o) * in + j] = t[static_cast<size_t>(j) * out + o];
  }
  for (int o = 0; o < out; ++o)
    for (int j = 0; j < in; ++j)
      l.w[static_cast<size_t>(j) * out + o] = gain * tmp[static_cast<size_t>(o) * in + j];
  return l;
}

}  // namespace

DenseNet make_net(int in, const std::vector<int>& hidden, int out,
                  OutputAct act, double out_gain, Rng& rng) {
  require(in > 0 && out > 0, "make_net: dims must be positive");
  DenseNet net;
  net.output_act = act;
  int prev = in;
  for (int h : hidden) {
    require(h > 0, "make_net: hidden width must be positive");
    net.layers.push_back(make_layer(prev, h, std::sqrt(2.0), rng));
    prev = h;
  }
  net.layers.push_back(make_layer(prev, out, out_gain, rng));
  return net;
}

NetGrads make_grads(const DenseNet& net) {
  NetGrads g;
  for (const auto& l : net.layers) {
    g.w.emplace_back(l.w.size(), 0.0);
    g.b.emplace_back(l.b.size(), 0.0);
  }
  return g;
}

void NetGrads::zero() {
  for (auto& v : w) std::fill(v.begin(), v.end(), 0.0);
  for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
}

const Vec& forward(const DenseNet& net, std::span<const double> x, FwdCache& cache) {
  require(static_cast<int>(x.size()) == net.input_dim(), "forward: input dim mismatch");
  cache.owner = &net;
  cache.input.assign(x.begin(), x.end());
  cache.act.resize(net.layers.size());

  const double* cur = cache.input.data();
  for (size_t li = 0; li < net.layers.size(); ++li) {
    const auto& l = net.layers[li];
    Vec& y = cache.act[li];
    y.assign(static_cast<size_t>(l.out), 0.0);
    double* yd = y.data();
    for (int j = 0; j < l.in; ++j) {
      const double xj = cur[j];
      const double* wr = &l.w[static_cast<size_t>(j) * l.out];
      for (int o = 0; o < l.out; ++o) yd[o] += xj * wr[o];
    }
    const bool last = li + 1 == net.layers.size();
    if (!last) {
      for (int o = 0; o < l.out; ++o) yd[o] = std::tanh(yd[o] + l.b[o]);
    } else if (net.output_act == OutputAct::Sigmoid) {
      for (int o = 0; o < l.out; ++o) yd[o] = 1.0 / (1.0 + std::exp(-(yd[o] + l.b[o])));
    } else {
      for (int o = 0; o < l.out; ++o) yd[o] += l.b[o];
    }
    cur = yd;
  }
  return cache.act.back();
}

Vec forward(const DenseNet& net, std::span<const double> x) {
  FwdCache c;
  return forward(net, x, c);
}

void backward(const DenseNet& net, const FwdCache& cache,
              std::span<const double> dout, NetGrads& grads, Vec* dinput) {
  require(cache.owner == &net, "backward: cache does not belong to this net");
  require(cache.act.size() == net.layers.size(), "backward: stale cache");
  require(static_cast<int>(dout.size()) == net.output_dim(), "backward: dout dim mismatch");
  require(grads.w.size() == net.layers.size(), "backward: grads shape mismatch");

  Vec dcur(dout.begin(), dout.end());
  Vec dprev;
  for (int li = static_cast<int>(net.layers.size()) - 1; li >= 0; --li) {
    const auto& l = net.layers[li];
    const Vec& y = cache.act[li];
    const bool last = li + 1 == static_cast<int>(net.layers.size());

    // through the activation: dz = dy * act'(z)
    if (!last) {
      for (int o = 0; o < l.out; ++o) dcur[o] *= 1.0 - y[o] * y[o];
    } else if (net.output_act == OutputAct::Sigmoid) {
      for (int o = 0; o < l.out; ++o) dcur[o] *= y[o] * (1.0 - y[o]);
    }

    const double* xin = li == 0 ? cache.input.data() : cache.act[li - 1].data();
    Vec& gw = grads.w[li];
    Vec& gb = grads.b[li];
    for (int o = 0; o < l.out; ++o) gb[o] += dcur[o];

    dprev.assign(static_cast<size_t>(l.in), 0.0);
    for (int j = 0; j < l.in; ++j) {
      const double xj = xin[j];
      double* gwr = &gw[static_cast<size_t>(j) * l.out];
      const double* wr = &l.w[static_cast<size_t>(j) * l.out];
      double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
      int o = 0;
      const int o4 = l.out & ~3;
      for (; o < o4; o += 4) {
        gwr[o] += xj * dcur[o];
        gwr[o + 1] += xj * dcur[o + 1];
        gwr[o + 2] += xj * dcur[o + 2];
        gwr[o + 3] += xj * dcur[o + 3];
        s0 += dcur[o] * wr[o];
        s1 += dcur[o + 1] * wr[o + 1];
        s2 += dcur[o + 2] * wr[o + 2];
        s3 += dcur[o + 3] * wr[o + 3];
      }
      for (; o < l.out; ++o) {
        gwr[o] += xj * dcur[o];
        s0 += dcur[o] * wr[o];
      }
      dprev[j] = (s0 + s1) + (s2 + s3);
    }
    dcur.swap(dprev);
  }
  if (dinput) *dinput = std::move(dcur);
}

std::vector<std::span<double>> param_spans(DenseNet& net) {
  std::vector<std::span<double>> s;
  for (auto& l : net.layers) {
    s.emplace_back(l.w);
    s.emplace_back(l.b);
  }
  return s;
}

std::vector<std::span<const double>> param_spans(const DenseNet& net) {
  std::vector<std::span<const double>> s;
  for (const auto& l : net.layers) {
    s.emplace_back(l.w);
    s.emplace_back(l.b);
  }
  return s;
}

std::vector<std::span<double>> grad_spans(NetGrads& g) {
  std::vector<std::span<double>> s;
  for (size_t i = 0; i < g.w.size(); ++i) {
    s.emplace_back(g.w[i]);
    s.emplace_back(g.b[i]);
  }
  return s;
}

std::vector<std::span<const double>> grad_spans(const NetGrads& g) {
  std::vector<std::span<const double>> s;
  for (size_t i = 0; i < g.w.size(); ++i) {
    s.emplace_back(g.w[i]);
    s.emplace_back(g.b[i]);
  }
  return s;
}

uint64_t param_checksum(const DenseNet& net, uint64_t h) {
  for (const auto& l : net.layers) {
    h = checksum(l.w, h);
    h = checksum(l.b, h);
  }
  return h;
}

void Adam::step(std::span<const std::span<double>> params,
                std::span<const std::span<const double>> grads) {
  require(params.size() == grads.size(), "adam: param/grad group mismatch");
  size_t total = 0;
  for (size_t i = 0; i < params.size(); ++i) {
    require(params[i].size() == grads[i].size(), "adam: span size mismatch");
    if (!all_finite(grads[i])) throw std::runtime_error("adam: non-finite gradient");
    total += params[i].size();
  }
  require(total == m_.size(), "adam: state size mismatch");

  const long t = t_ + 1;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t));

  // stage the update so a rejected step leaves params and moments untouched
  Vec new_m(m_), new_v(v_);
  size_t idx = 0;
  std::vector<Vec> staged(params.size());
  for (size_t i = 0; i < params.size(); ++i) {
    staged[i].resize(params[i].size());
    for (size_t j = 0; j < params[i].size(); ++j, ++idx) {
      const double g = grads[i][j];
      new_m[idx] = cfg_.beta1 * new_m[idx] + (1.0 - cfg_.beta1) * g;
      new_v[idx] = cfg_.beta2 * new_v[idx] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = new_m[idx] / bc1;
      const double vhat = new_v[idx] / bc2;
      const double p = params[i][j] - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
      if (!std::isfinite(p)) throw std::runtime_error("adam: update would produce non-finite parameter");
      staged[i][j] = p;
    }
  }
  for (size_t i = 0; i < params.size(); ++i)
    std::memcpy(params[i].data(), staged[i].data(), staged[i].size() * sizeof(double));
  m_.swap(new_m);
  v_.swap(new_v);
  t_ = t;
}

}  // namespace hpt
