#include <doctest.h>

#include <cmath>

#include "hpt/nn.hpp"

using namespace hpt;

namespace {

// scalar objective J = c . net(x), the standard probe for gradient checks
double probe(const DenseNet& net, const Vec& x, const Vec& c) {
  const Vec y = forward(net, x);
  double s = 0;
  for (size_t i = 0; i < y.size(); ++i) s += c[i] * y[i];
  return s;
}

void check_grads_fd(DenseNet& net, const Vec& x, const Vec& c) {
  NetGrads grads = make_grads(net);
  FwdCache cache;
  forward(net, x, cache);
  Vec dinput(x.size(), 0.0);
  backward(net, cache, c, grads, &dinput);

  const double h = 1e-5;
  auto params = param_spans(net);
  auto gspans = grad_spans(grads);
  REQUIRE(params.size() == gspans.size());
  for (size_t s = 0; s < params.size(); ++s) {
    for (size_t i = 0; i < params[s].size(); ++i) {
      const double saved = params[s][i];
      params[s][i] = saved + h;
      const double up = probe(net, x, c);
      params[s][i] = saved - h;
      const double dn = probe(net, x, c);
      params[s][i] = saved;
      const double fd = (up - dn) / (2 * h);
      CHECK(gspans[s][i] == doctest::Approx(fd).epsilon(1e-5));
    }
  }
  for (size_t i = 0; i < x.size(); ++i) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const double fd = (probe(net, xp, c) - probe(net, xm, c)) / (2 * h);
    CHECK(dinput[i] == doctest::Approx(fd).epsilon(1e-5));
  }
}

}  // namespace

TEST_CASE("forward matches a hand-unrolled 2-2-1 net") {
  Rng rng(0);
  DenseNet net = make_net(2, {2}, 1, OutputAct::Identity, 1.0, rng);
  // overwrite the init with fixed weights; storage is w[j * out + o]
  auto& l0 = net.layers[0];
  l0.w = {0.5, -0.3, 0.2, 0.8};  // w(j=0,o=0), w(0,1), w(1,0), w(1,1)
  l0.b = {0.1, -0.2};
  auto& l1 = net.layers[1];
  l1.w = {1.5, -2.0};
  l1.b = {0.05};

  const Vec x = {0.4, -0.6};
  const double h0 = std::tanh(0.5 * 0.4 + 0.2 * -0.6 + 0.1);
  const double h1 = std::tanh(-0.3 * 0.4 + 0.8 * -0.6 - 0.2);
  const double expect = 1.5 * h0 - 2.0 * h1 + 0.05;
  const Vec y = forward(net, x);
  REQUIRE(y.size() == 1);
  CHECK(y[0] == doctest::Approx(expect).epsilon(1e-15));

  net.output_act = OutputAct::Sigmoid;
  const Vec ys = forward(net, x);
  CHECK(ys[0] == doctest::Approx(1.0 / (1.0 + std::exp(-expect))).epsilon(1e-15));
}

TEST_CASE("backward matches central differences") {
  Rng rng(7);
  SUBCASE("identity output") {
    DenseNet net = make_net(3, {5, 4}, 2, OutputAct::Identity, 0.7, rng);
    Vec x = {0.3, -1.1, 0.8};
    Vec c = {1.3, -0.6};
    check_grads_fd(net, x, c);
  }
  SUBCASE("sigmoid output") {
    DenseNet net = make_net(4, {6}, 3, OutputAct::Sigmoid, 0.9, rng);
    Vec x = {0.2, -0.4, 1.0, -1.3};
    Vec c = {0.9, -1.2, 0.4};
    check_grads_fd(net, x, c);
  }
  SUBCASE("no hidden layers") {
    DenseNet net = make_net(3, {}, 2, OutputAct::Identity, 1.0, rng);
    Vec x = {0.5, 0.1, -0.7};
    Vec c = {-0.8, 0.3};
    check_grads_fd(net, x, c);
  }
}

TEST_CASE("gradients accumulate across backward calls") {
  Rng rng(11);
  DenseNet net = make_net(2, {3}, 1, OutputAct::Identity, 1.0, rng);
  NetGrads g1 = make_grads(net), g2 = make_grads(net);
  FwdCache ca, cb;
  const Vec xa = {0.4, -0.2}, xb = {-0.9, 0.6}, c = {1.0};
  forward(net, xa, ca);
  backward(net, ca, c, g1);
  forward(net, xb, cb);
  backward(net, cb, c, g1);  // accumulated

  forward(net, xa, ca);
  backward(net, ca, c, g2);
  NetGrads g3 = make_grads(net);
  forward(net, xb, cb);
  backward(net, cb, c, g3);

  auto s1 = grad_spans(g1);
  auto s2 = grad_spans(g2);
  auto s3 = grad_spans(g3);
  for (size_t s = 0; s < s1.size(); ++s)
    for (size_t i = 0; i < s1[s].size(); ++i)
      CHECK(s1[s][i] == doctest::Approx(s2[s][i] + s3[s][i]).epsilon(1e-12));
}

TEST_CASE("orthogonal init: scaled orthonormal rows, zero bias, deterministic") {
  Rng rng(21);
  auto check_layer = [](const DenseNet::Layer& l, double gain) {
    // reconstruct the out x in matrix from input-major storage
    std::vector<Vec> W(l.out, Vec(l.in, 0.0));
    for (int j = 0; j < l.in; ++j)
      for (int o = 0; o < l.out; ++o) W[o][j] = l.w[static_cast<size_t>(j) * l.out + o];
    const int small = std::min(l.in, l.out);
    for (int a = 0; a < small; ++a) {
      for (int b = 0; b < small; ++b) {
        double d = 0;
        if (l.out <= l.in) {
          for (int j = 0; j < l.in; ++j) d += W[a][j] * W[b][j];  // W W^T
        } else {
          for (int o = 0; o < l.out; ++o) d += W[o][a] * W[o][b];  // W^T W
        }
        const double want = a == b ? gain * gain : 0.0;
        CHECK(d == doctest::Approx(want).epsilon(1e-9).scale(1.0));
      }
    }
    for (double b : l.b) CHECK(b == 0.0);
  };

  DenseNet net = make_net(6, {8, 5}, 3, OutputAct::Identity, 0.01, rng);
  check_layer(net.layers[0], std::sqrt(2.0));  // 6 -> 8 (out > in)
  check_layer(net.layers[1], std::sqrt(2.0));  // 8 -> 5
  check_layer(net.layers[2], 0.01);            // 5 -> 3

  Rng r1(33), r2(33), r3(34);
  DenseNet a = make_net(4, {16}, 2, OutputAct::Identity, 0.01, r1);
  DenseNet b = make_net(4, {16}, 2, OutputAct::Identity, 0.01, r2);
  DenseNet c = make_net(4, {16}, 2, OutputAct::Identity, 0.01, r3);
  CHECK(param_checksum(a) == param_checksum(b));
  CHECK(param_checksum(a) != param_checksum(c));
}

TEST_CASE("adam follows the textbook recursion") {
  AdamConfig cfg;
  cfg.lr = 0.1;
  Adam opt(1, cfg);
  Vec theta = {1.0};
  const Vec gseq = {0.3, -0.2, 0.5};

  // independent recursion
  double ref = 1.0, m = 0, v = 0;
  for (size_t t = 1; t <= gseq.size(); ++t) {
    const double g = gseq[t - 1];
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mhat = m / (1.0 - std::pow(0.9, static_cast<double>(t)));
    const double vhat = v / (1.0 - std::pow(0.999, static_cast<double>(t)));
    ref -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);

    Vec grad = {g};
    std::vector<std::span<double>> ps = {std::span<double>(theta)};
    std::vector<std::span<const double>> gs = {std::span<const double>(grad)};
    opt.step(ps, gs);
    CHECK(theta[0] == doctest::Approx(ref).epsilon(1e-14));
  }
  CHECK(opt.steps() == 3);
}

TEST_CASE("adam: zero gradient leaves parameters fixed, rejects non-finite") {
  Adam opt(2, {});
  Vec theta = {0.5, -0.25};
  Vec zero = {0.0, 0.0};
  std::vector<std::span<double>> ps = {std::span<double>(theta)};
  std::vector<std::span<const double>> gs = {std::span<const double>(zero)};
  opt.step(ps, gs);
  CHECK(theta[0] == 0.5);
  CHECK(theta[1] == -0.25);
  CHECK(opt.steps() == 1);

  Vec bad = {1.0, std::numeric_limits<double>::quiet_NaN()};
  std::vector<std::span<const double>> gbad = {std::span<const double>(bad)};
  CHECK_THROWS_AS(opt.step(ps, gbad), std::runtime_error);
  CHECK(theta[0] == 0.5);  // untouched after the rejected step
  CHECK(theta[1] == -0.25);
  CHECK(opt.steps() == 1);
}

TEST_CASE("forward cache guards against stale reuse") {
  Rng rng(2);
  DenseNet a = make_net(2, {3}, 1, OutputAct::Identity, 1.0, rng);
  DenseNet b = make_net(2, {3}, 1, OutputAct::Identity, 1.0, rng);
  FwdCache cache;
  forward(a, Vec{0.1, 0.2}, cache);
  NetGrads gb = make_grads(b);
  CHECK_THROWS(backward(b, cache, Vec{1.0}, gb));
}
