#include <doctest.h>

#include <cmath>

#include "hpt/gae.hpp"

using namespace hpt;

namespace {

RolloutBatch synthetic_batch(Rng& rng, int n, std::vector<int> done_at,
                             bool open_ended) {
  RolloutBatch b;
  b.resize(n, 1, 1, 1);
  for (int t = 0; t < n; ++t) {
    b.reward[t] = rng.uniform(-2.0, 2.0);
    b.value[t] = rng.uniform(-1.5, 1.5);
  }
  for (int t : done_at) b.done[static_cast<size_t>(t)] = 1;
  b.final_bootstrap = (open_ended && !b.done[static_cast<size_t>(n - 1)])
                          ? rng.uniform(-1.0, 1.0)
                          : 0.0;
  return b;
}

// direct O(T^2) evaluation of the advantage definition: discounted sum of
// one-step TD residuals, cut at episode ends
Vec brute_force_adv(const RolloutBatch& b, double gamma, double lambda) {
  const int n = b.n;
  Vec adv(n, 0.0);
  for (int t = 0; t < n; ++t) {
    double acc = 0, scale = 1.0;
    for (int l = t; l < n; ++l) {
      const double next_v = (l + 1 < n) ? b.value[l + 1] : b.final_bootstrap;
      const double not_done = b.done[l] ? 0.0 : 1.0;
      const double delta = b.reward[l] + gamma * next_v * not_done - b.value[l];
      acc += scale * delta;
      if (b.done[l]) break;
      scale *= gamma * lambda;
    }
    adv[t] = acc;
  }
  return adv;
}

}  // namespace

TEST_CASE("gae matches the brute-force definition") {
  Rng rng(1);
  SUBCASE("open-ended batch with mid-batch episode cuts") {
    RolloutBatch b = synthetic_batch(rng, 13, {4, 9}, true);
    const Advantages got = compute_gae(b, 0.99, 0.95);
    const Vec want = brute_force_adv(b, 0.99, 0.95);
    for (int t = 0; t < b.n; ++t) {
      CHECK(got.adv[t] == doctest::Approx(want[t]).epsilon(1e-12));
      CHECK(got.ret[t] == doctest::Approx(want[t] + b.value[t]).epsilon(1e-12));
    }
  }
  SUBCASE("batch ending exactly on a done") {
    RolloutBatch b = synthetic_batch(rng, 10, {3, 9}, true);
    CHECK(b.final_bootstrap == 0.0);
    const Advantages got = compute_gae(b, 0.97, 0.9);
    const Vec want = brute_force_adv(b, 0.97, 0.9);
    for (int t = 0; t < b.n; ++t)
      CHECK(got.adv[t] == doctest::Approx(want[t]).epsilon(1e-12));
  }
  SUBCASE("no dones at all") {
    RolloutBatch b = synthetic_batch(rng, 16, {}, true);
    const Advantages got = compute_gae(b, 0.995, 0.97);
    const Vec want = brute_force_adv(b, 0.995, 0.97);
    for (int t = 0; t < b.n; ++t)
      CHECK(got.adv[t] == doctest::Approx(want[t]).epsilon(1e-12));
  }
}

TEST_CASE("lambda=0 reduces to the one-step TD residual") {
  Rng rng(2);
  RolloutBatch b = synthetic_batch(rng, 11, {5}, true);
  const Advantages got = compute_gae(b, 0.99, 0.0);
  for (int t = 0; t < b.n; ++t) {
    const double next_v = (t + 1 < b.n) ? b.value[t + 1] : b.final_bootstrap;
    const double not_done = b.done[t] ? 0.0 : 1.0;
    const double delta = b.reward[t] + 0.99 * next_v * not_done - b.value[t];
    CHECK(got.adv[t] == doctest::Approx(delta).epsilon(1e-13));
  }
}

TEST_CASE("lambda=1 reduces to discounted return minus baseline") {
  Rng rng(3);
  RolloutBatch b = synthetic_batch(rng, 9, {8}, true);  // single full episode
  const double gamma = 0.98;
  const Advantages got = compute_gae(b, gamma, 1.0);
  for (int t = 0; t < b.n; ++t) {
    double ret = 0, scale = 1;
    for (int l = t; l < b.n; ++l) {
      ret += scale * b.reward[l];
      scale *= gamma;
    }
    CHECK(got.adv[t] == doctest::Approx(ret - b.value[t]).epsilon(1e-12));
    CHECK(got.ret[t] == doctest::Approx(ret).epsilon(1e-12));
  }
}

TEST_CASE("episode cuts isolate advantage flow") {
  // rewards after a done must not influence advantages before it
  Rng rng(4);
  RolloutBatch a = synthetic_batch(rng, 12, {6}, true);
  RolloutBatch b = a;
  for (int t = 7; t < 12; ++t) b.reward[t] += 100.0;  // poke the second episode
  const Advantages ga = compute_gae(a, 0.99, 0.95);
  const Advantages gb = compute_gae(b, 0.99, 0.95);
  for (int t = 0; t <= 6; ++t) CHECK(ga.adv[t] == gb.adv[t]);
  CHECK(ga.adv[7] != gb.adv[7]);
}

TEST_CASE("advantage normalization") {
  Vec xs = {3.0, -1.0, 4.0, 1.0, -5.0, 9.0, 2.0, -6.0};
  normalize_advantages(xs);
  CHECK(mean(xs) == doctest::Approx(0.0).epsilon(1e-12));
  double s2 = 0;
  for (double x : xs) s2 += x * x;
  CHECK(std::sqrt(s2 / xs.size()) == doctest::Approx(1.0).epsilon(1e-12));

  Vec flat = {2.5, 2.5, 2.5, 2.5};
  normalize_advantages(flat);
  for (double x : flat) CHECK(x == 0.0);
}
