#include "hpt/distribution.hpp"

#include <cmath>

namespace hpt {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2*pi)
}

double log_prob(const DiagGaussian& d, std::span<const double> a) {
  require(static_cast<int>(a.size()) == d.dim(), "log_prob: dim mismatch");
  double lp = 0;
  for (int i = 0; i < d.dim(); ++i) {
    const double z = (a[i] - d.mean[i]) / d.std[i];
    lp += -0.5 * z * z - std::log(d.std[i]) - 0.5 * kLog2Pi;
  }
  return lp;
}

void sample(const DiagGaussian& d, Rng& rng, Vec& out) {
  out.resize(d.mean.size());
  for (int i = 0; i < d.dim(); ++i) out[i] = d.mean[i] + d.std[i] * rng.normal();
}

Vec sample(const DiagGaussian& d, Rng& rng) {
  Vec out;
  sample(d, rng, out);
  return out;
}

double kl_divergence(const DiagGaussian& p, const DiagGaussian& q) {
  require(p.dim() == q.dim(), "kl_divergence: dim mismatch");
  double kl = 0;
  for (int i = 0; i < p.dim(); ++i) {
    const double dm = p.mean[i] - q.mean[i];
    const double vq = q.std[i] * q.std[i];
    kl += std::log(q.std[i] / p.std[i]) + (p.std[i] * p.std[i] + dm * dm) / (2.0 * vq) - 0.5;
  }
  return kl;
}

void compose(std::span<const DiagGaussian> dists, std::span<const double> w,
             DiagGaussian& out) {
  require(!dists.empty() && dists.size() == w.size(), "compose: k mismatch");
  const int dim = dists[0].dim();
  out.mean.assign(static_cast<size_t>(dim), 0.0);
  out.std.resize(static_cast<size_t>(dim));
  Vec lambda(static_cast<size_t>(dim), 0.0);
  for (size_t i = 0; i < dists.size(); ++i) {
    require(dists[i].dim() == dim, "compose: dim mismatch");
    require(w[i] >= kWeightFloor, "compose: weight below floor");
    for (int d = 0; d < dim; ++d) {
      require(dists[i].std[d] >= kStdFloor, "compose: std below floor");
      const double prec = w[i] / (dists[i].std[d] * dists[i].std[d]);
      lambda[d] += prec;
      out.mean[d] += prec * dists[i].mean[d];
    }
  }
  for (int d = 0; d < dim; ++d) {
    out.mean[d] /= lambda[d];
    out.std[d] = 1.0 / std::sqrt(lambda[d]);
  }
}

DiagGaussian compose(std::span<const DiagGaussian> dists, std::span<const double> w) {
  DiagGaussian out;
  compose(dists, w, out);
  return out;
}

void compose_backward(std::span<const DiagGaussian> dists, std::span<const double> w,
                      const DiagGaussian& composite,
                      std::span<const double> d_mean_c, std::span<const double> d_lambda,
                      std::span<double> d_w,
                      std::span<Vec> d_mean, std::span<Vec> d_std) {
  const int dim = composite.dim();
  const size_t k = dists.size();
  for (int d = 0; d < dim; ++d) {
    const double lam = 1.0 / (composite.std[d] * composite.std[d]);
    // composite mean = S / lambda with S the precision-weighted mean sum
    const double dS = d_mean_c[d] / lam;
    const double dlam = d_lambda[d] - d_mean_c[d] * composite.mean[d] / lam;
    for (size_t i = 0; i < k; ++i) {
      const double sig = dists[i].std[d];
      const double inv_var = 1.0 / (sig * sig);
      const double mu = dists[i].mean[d];
      d_w[i] += dS * mu * inv_var + dlam * inv_var;
      d_mean[i][d] += dS * w[i] * inv_var;
      d_std[i][d] += -2.0 * w[i] * inv_var / sig * (dS * mu + dlam);
    }
  }
}

void log_prob_backward(const DiagGaussian& d, std::span<const double> a, double coeff,
                       std::span<double> d_mean_c, std::span<double> d_lambda) {
  for (int i = 0; i < d.dim(); ++i) {
    const double lam = 1.0 / (d.std[i] * d.std[i]);
    const double z = a[i] - d.mean[i];
    d_mean_c[i] += coeff * lam * z;
    d_lambda[i] += coeff * (-0.5 * z * z + 0.5 / lam);
  }
}

}  // namespace hpt
