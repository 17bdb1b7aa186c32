#include "hpt/regularization.hpp"

#include <cmath>

namespace hpt {

double diversity_terms(std::span<const DiagGaussian> dists, double kl_clip,
                       double coeff, std::span<Vec> d_mean, std::span<Vec> d_std) {
  const int k = static_cast<int>(dists.size());
  require(k >= 2, "diversity: k must be >= 2");
  const int dim = dists[0].dim();
  const double pair_scale = 1.0 / (static_cast<double>(k) * (k - 1));
  double value = 0;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      const double kl = kl_divergence(dists[i], dists[j]);
      if (kl >= kl_clip) {
        value += kl_clip * pair_scale;
        continue;  // saturated: no gradient
      }
      if (kl <= 0.0) continue;  // identical pair: exactly stationary
      value += kl * pair_scale;
      const double c = coeff * pair_scale;
      for (int d = 0; d < dim; ++d) {
        const double si = dists[i].std[d], sj = dists[j].std[d];
        const double dm = dists[i].mean[d] - dists[j].mean[d];
        const double inv_vj = 1.0 / (sj * sj);
        d_mean[i][d] += c * dm * inv_vj;
        d_mean[j][d] -= c * dm * inv_vj;
        d_std[i][d] += c * (-1.0 / si + si * inv_vj);
        d_std[j][d] += c * (1.0 / sj - (si * si + dm * dm) * inv_vj / sj);
      }
    }
  }
  return value;
}

double diversity_reg(const PrimitiveSet& prims, std::span<const Vec> states,
                     double kl_clip, PrimitiveGrads& grads) {
  require(!states.empty(), "diversity_reg: empty batch");
  const int k = prims.k;
  const size_t ad = static_cast<size_t>(prims.action_dim);
  const double inv_n = 1.0 / static_cast<double>(states.size());

  std::vector<DiagGaussian> dists(k);
  std::vector<FwdCache> caches(k);
  std::vector<Vec> d_mean(k, Vec(ad)), d_std(k, Vec(ad));

  double value = 0;
  for (const Vec& s : states) {
    for (int i = 0; i < k; ++i) {
      dists[i].mean = forward(prims.nets[i], s, caches[i]);
      dists[i].std.resize(ad);
      for (size_t j = 0; j < ad; ++j)
        dists[i].std[j] = clamped_std(prims.log_std[i][j]);
      std::fill(d_mean[i].begin(), d_mean[i].end(), 0.0);
      std::fill(d_std[i].begin(), d_std[i].end(), 0.0);
    }
    value += inv_n * diversity_terms(dists, kl_clip, inv_n, d_mean, d_std);
    for (int i = 0; i < k; ++i) {
      backward(prims.nets[i], caches[i], d_mean[i], grads.nets[i]);
      for (size_t j = 0; j < ad; ++j) {
        const double sd = dists[i].std[j];
        if (std_grad_live(sd)) grads.log_std[i][j] += d_std[i][j] * sd;
      }
    }
  }
  return value;
}

double utility_entropy(std::span<const double> w, double coeff, std::span<double> d_w) {
  const size_t k = w.size();
  double wmax = w[0];
  for (double x : w) wmax = std::max(wmax, x);
  double z = 0;
  Vec p(k);
  for (size_t i = 0; i < k; ++i) {
    p[i] = std::exp(w[i] - wmax);
    z += p[i];
  }
  double h = 0;
  for (size_t i = 0; i < k; ++i) {
    p[i] /= z;
    h -= p[i] * std::log(p[i]);
  }
  if (!d_w.empty()) {
    for (size_t i = 0; i < k; ++i) d_w[i] += coeff * (-p[i] * (std::log(p[i]) + h));
  }
  return h;
}

double utility_reg(std::span<const Vec> w_batch) {
  require(!w_batch.empty(), "utility_reg: empty batch");
  double v = 0;
  for (const Vec& w : w_batch) v += utility_entropy(w, 0.0, {});
  return v / static_cast<double>(w_batch.size());
}

}  // namespace hpt
