#include <doctest.h>

#include <cmath>

#include "hpt/distribution.hpp"

using namespace hpt;

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Simpson integration of f over [lo, hi] with n panels (n even).
template <class F>
double simpson(F f, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

std::vector<DiagGaussian> random_components(Rng& rng, int k, int dim) {
  std::vector<DiagGaussian> ds(k);
  for (auto& d : ds) {
    d.mean.resize(dim);
    d.std.resize(dim);
    for (int j = 0; j < dim; ++j) {
      d.mean[j] = rng.uniform(-2.0, 2.0);
      d.std[j] = rng.uniform(0.3, 1.2);
    }
  }
  return ds;
}

Vec random_weights(Rng& rng, int k) {
  Vec w(k);
  for (double& x : w) x = rng.uniform(0.3, 1.0);
  return w;
}

}  // namespace

TEST_CASE("log_prob: standard normal reference") {
  DiagGaussian d{{0.0}, {1.0}};
  CHECK(log_prob(d, Vec{0.0}) == doctest::Approx(-0.5 * kLog2Pi).epsilon(1e-15));
  CHECK(log_prob(d, Vec{1.3}) ==
        doctest::Approx(-0.5 * 1.3 * 1.3 - 0.5 * kLog2Pi).epsilon(1e-15));
  DiagGaussian d2{{1.0, -2.0}, {0.5, 2.0}};
  const Vec a = {0.7, -1.1};
  double want = 0;
  for (int j = 0; j < 2; ++j) {
    const double z = (a[j] - d2.mean[j]) / d2.std[j];
    want += -0.5 * z * z - std::log(d2.std[j]) - 0.5 * kLog2Pi;
  }
  CHECK(log_prob(d2, a) == doctest::Approx(want).epsilon(1e-15));
}

TEST_CASE("log_prob integrates to one") {
  Rng rng(100);
  for (int trial = 0; trial < 5; ++trial) {
    DiagGaussian d{{rng.uniform(-2, 2)}, {rng.uniform(0.3, 1.5)}};
    const double mass = simpson(
        [&](double x) { return std::exp(log_prob(d, Vec{x})); }, -12.0, 12.0, 4000);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("compose: hand-computed two-component cases") {
  // equal unit stds, weights 1: lambda = 2, mean halfway
  std::vector<DiagGaussian> ds = {{{0.0}, {1.0}}, {{2.0}, {1.0}}};
  Vec w = {1.0, 1.0};
  DiagGaussian c = compose(ds, w);
  CHECK(c.mean[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(c.std[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

  // uneven weights pull the mean toward the heavier component
  w = {2.0, 1.0};
  c = compose(ds, w);
  CHECK(c.mean[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(c.std[0] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));

  // per-dimension independence
  std::vector<DiagGaussian> d2 = {{{0.0, 4.0}, {1.0, 0.5}}, {{2.0, 0.0}, {1.0, 0.5}}};
  w = {1.0, 1.0};
  c = compose(d2, w);
  CHECK(c.mean[0] == doctest::Approx(1.0));
  CHECK(c.mean[1] == doctest::Approx(2.0));
  CHECK(c.std[1] == doctest::Approx(0.5 / std::sqrt(2.0)));
}

TEST_CASE("composite equals the normalized weighted product density") {
  // The composite of k Gaussians under weights w must match
  // p(x) ~ prod_i N(x; mu_i, sigma_i^2)^{w_i} after numeric normalization.
  Rng rng(41);
  for (int trial = 0; trial < 8; ++trial) {
    const int k = 2 + trial % 3;
    auto ds = random_components(rng, k, 1);
    const Vec w = random_weights(rng, k);
    const DiagGaussian c = compose(ds, w);

    auto unnorm = [&](double x) {
      double lp = 0;
      for (int i = 0; i < k; ++i) lp += w[i] * log_prob(ds[i], Vec{x});
      return std::exp(lp);
    };
    const double z = simpson(unnorm, -14.0, 14.0, 8000);
    for (double x : {-1.7, -0.4, 0.0, 0.9, 2.3}) {
      const double want = unnorm(x) / z;
      const double got = std::exp(log_prob(c, Vec{x}));
      CHECK(got == doctest::Approx(want).epsilon(1e-7));
    }

    // numeric moments agree with the closed form
    const double m1 = simpson([&](double x) { return x * unnorm(x) / z; }, -14, 14, 8000);
    const double m2 =
        simpson([&](double x) { return x * x * unnorm(x) / z; }, -14, 14, 8000);
    CHECK(c.mean[0] == doctest::Approx(m1).epsilon(1e-7));
    CHECK(c.std[0] == doctest::Approx(std::sqrt(m2 - m1 * m1)).epsilon(1e-7));
  }
}

TEST_CASE("composite normalization holds in higher dimensions") {
  Rng rng(17);
  auto ds = random_components(rng, 3, 2);
  const Vec w = random_weights(rng, 3);
  const DiagGaussian c = compose(ds, w);
  // product over dims of 1-D masses; diagonal structure factorizes
  for (int j = 0; j < 2; ++j) {
    DiagGaussian c1{{c.mean[j]}, {c.std[j]}};
    const double mass = simpson(
        [&](double x) { return std::exp(log_prob(c1, Vec{x})); }, -12, 12, 4000);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("sample moments track the distribution") {
  Rng rng(55);
  DiagGaussian d{{0.7, -1.2}, {0.6, 1.4}};
  const int n = 200000;
  Vec s(2, 0.0), s2(2, 0.0), a;
  for (int i = 0; i < n; ++i) {
    sample(d, rng, a);
    for (int j = 0; j < 2; ++j) {
      s[j] += a[j];
      s2[j] += a[j] * a[j];
    }
  }
  for (int j = 0; j < 2; ++j) {
    const double m = s[j] / n;
    const double sd = std::sqrt(s2[j] / n - m * m);
    CHECK(m == doctest::Approx(d.mean[j]).epsilon(0.02));
    CHECK(sd == doctest::Approx(d.std[j]).epsilon(0.02));
  }
}

TEST_CASE("kl_divergence: closed-form anchors and properties") {
  DiagGaussian p{{0.0}, {1.0}}, q{{1.0}, {1.0}};
  CHECK(kl_divergence(p, q) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(kl_divergence(p, p) == doctest::Approx(0.0));

  // KL(N(0,a^2) || N(0,b^2)) = ln(b/a) + a^2/(2 b^2) - 1/2
  DiagGaussian pa{{0.0}, {0.5}}, qb{{0.0}, {1.5}};
  const double want = std::log(1.5 / 0.5) + 0.25 / (2 * 2.25) - 0.5;
  CHECK(kl_divergence(pa, qb) == doctest::Approx(want).epsilon(1e-12));

  // multi-dim sums per-dimension terms
  DiagGaussian p2{{0.0, 0.0}, {1.0, 0.5}}, q2{{1.0, 0.0}, {1.0, 1.5}};
  CHECK(kl_divergence(p2, q2) == doctest::Approx(0.5 + want).epsilon(1e-12));

  // nonnegativity and asymmetry on random pairs
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    auto ds = random_components(rng, 2, 3);
    const double ab = kl_divergence(ds[0], ds[1]);
    CHECK(ab >= 0.0);
    CHECK(kl_divergence(ds[0], ds[0]) == doctest::Approx(0.0));
  }
}

TEST_CASE("kl_divergence matches Monte Carlo estimate") {
  Rng rng(77);
  DiagGaussian p{{0.3, -0.6}, {0.8, 1.1}}, q{{-0.2, 0.4}, {1.3, 0.7}};
  const int n = 400000;
  double acc = 0;
  Vec a;
  for (int i = 0; i < n; ++i) {
    sample(p, rng, a);
    acc += log_prob(p, a) - log_prob(q, a);
  }
  CHECK(kl_divergence(p, q) == doctest::Approx(acc / n).epsilon(0.01));
}

TEST_CASE("log_prob_backward matches finite differences") {
  Rng rng(13);
  const int dim = 3;
  auto ds = random_components(rng, 1, dim);
  DiagGaussian d = ds[0];
  Vec a(dim);
  for (int j = 0; j < dim; ++j) a[j] = d.mean[j] + rng.uniform(-1.0, 1.0);

  const double coeff = 1.7;
  Vec d_mean(dim, 0.0), d_lambda(dim, 0.0);
  log_prob_backward(d, a, coeff, d_mean, d_lambda);

  const double h = 1e-6;
  for (int j = 0; j < dim; ++j) {
    DiagGaussian dp = d, dm = d;
    dp.mean[j] += h;
    dm.mean[j] -= h;
    const double fd = coeff * (log_prob(dp, a) - log_prob(dm, a)) / (2 * h);
    CHECK(d_mean[j] == doctest::Approx(fd).epsilon(1e-6));

    // lambda enters through std = lambda^{-1/2}
    const double lam = 1.0 / (d.std[j] * d.std[j]);
    DiagGaussian lp = d, lm = d;
    lp.std[j] = 1.0 / std::sqrt(lam + h);
    lm.std[j] = 1.0 / std::sqrt(lam - h);
    const double fdl = coeff * (log_prob(lp, a) - log_prob(lm, a)) / (2 * h);
    CHECK(d_lambda[j] == doctest::Approx(fdl).epsilon(1e-6));
  }
}

TEST_CASE("compose_backward matches finite differences") {
  Rng rng(29);
  const int k = 3, dim = 2;
  auto ds = random_components(rng, k, dim);
  const Vec w = random_weights(rng, k);
  const DiagGaussian c = compose(ds, w);

  // scalar probe J = sum_j A_j mu_c[j] + B_j lambda[j]
  Vec A(dim), B(dim);
  for (int j = 0; j < dim; ++j) {
    A[j] = rng.uniform(-1, 1);
    B[j] = rng.uniform(-1, 1);
  }
  auto J = [&](std::span<const DiagGaussian> dd, std::span<const double> ww) {
    const DiagGaussian cc = compose(dd, ww);
    double s = 0;
    for (int j = 0; j < dim; ++j) {
      const double lam = 1.0 / (cc.std[j] * cc.std[j]);
      s += A[j] * cc.mean[j] + B[j] * lam;
    }
    return s;
  };

  Vec d_w(k, 0.0);
  std::vector<Vec> d_mean(k, Vec(dim, 0.0)), d_std(k, Vec(dim, 0.0));
  compose_backward(ds, w, c, A, B, d_w, d_mean, d_std);

  const double h = 1e-6;
  for (int i = 0; i < k; ++i) {
    Vec wp = w, wm = w;
    wp[i] += h;
    wm[i] -= h;
    const double fdw = (J(ds, wp) - J(ds, wm)) / (2 * h);
    CHECK(d_w[i] == doctest::Approx(fdw).epsilon(1e-5));
    for (int j = 0; j < dim; ++j) {
      auto dp = ds, dm = ds;
      dp[i].mean[j] += h;
      dm[i].mean[j] -= h;
      CHECK(d_mean[i][j] ==
            doctest::Approx((J(dp, w) - J(dm, w)) / (2 * h)).epsilon(1e-5));
      dp = ds;
      dm = ds;
      dp[i].std[j] += h;
      dm[i].std[j] -= h;
      CHECK(d_std[i][j] ==
            doctest::Approx((J(dp, w) - J(dm, w)) / (2 * h)).epsilon(1e-5));
    }
  }
}

TEST_CASE("composite logp gradient chains through compose") {
  // end-to-end: d/d(mu_i, sigma_i, w_i) of log pi_c(a) via the two backward
  // stages, checked against finite differences of the full expression
  Rng rng(31);
  const int k = 4, dim = 2;
  auto ds = random_components(rng, k, dim);
  const Vec w = random_weights(rng, k);
  Vec a(dim);
  for (int j = 0; j < dim; ++j) a[j] = rng.uniform(-1.5, 1.5);

  auto J = [&](std::span<const DiagGaussian> dd, std::span<const double> ww) {
    return log_prob(compose(dd, ww), a);
  };

  const DiagGaussian c = compose(ds, w);
  Vec d_mean_c(dim, 0.0), d_lambda(dim, 0.0);
  log_prob_backward(c, a, 1.0, d_mean_c, d_lambda);
  Vec d_w(k, 0.0);
  std::vector<Vec> d_mean(k, Vec(dim, 0.0)), d_std(k, Vec(dim, 0.0));
  compose_backward(ds, w, c, d_mean_c, d_lambda, d_w, d_mean, d_std);

  const double h = 1e-6;
  for (int i = 0; i < k; ++i) {
    Vec wp = w, wm = w;
    wp[i] += h;
    wm[i] -= h;
    CHECK(d_w[i] == doctest::Approx((J(ds, wp) - J(ds, wm)) / (2 * h)).epsilon(1e-5));
    for (int j = 0; j < dim; ++j) {
      auto dp = ds, dm = ds;
      dp[i].mean[j] += h;
      dm[i].mean[j] -= h;
      CHECK(d_mean[i][j] ==
            doctest::Approx((J(dp, w) - J(dm, w)) / (2 * h)).epsilon(1e-5));
      dp = ds;
      dm = ds;
      dp[i].std[j] += h;
      dm[i].std[j] -= h;
      CHECK(d_std[i][j] ==
            doctest::Approx((J(dp, w) - J(dm, w)) / (2 * h)).epsilon(1e-5));
    }
  }
}
