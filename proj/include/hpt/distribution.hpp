#pragma once

#include <span>

#include "hpt/math.hpp"

namespace hpt {

inline constexpr double kStdFloor = 1e-3;
inline constexpr double kStdCeil = 2.0;
inline constexpr double kWeightFloor = 1e-6;

// Effective std from a learnable log-std. Clamping in std space keeps the
// rail values exact; the clamp gates the log-std gradient wherever it binds.
inline double clamped_std(double log_std) {
  return std::clamp(std::exp(log_std), kStdFloor, kStdCeil);
}
inline bool std_grad_live(double effective_std) {
  return effective_std > kStdFloor && effective_std < kStdCeil;
}

// Per-dimension Gaussian action distribution.
struct DiagGaussian {
  Vec mean;
  Vec std;

  int dim() const { return static_cast<int>(mean.size()); }
};

double log_prob(const DiagGaussian& d, std::span<const double> a);

void sample(const DiagGaussian& d, Rng& rng, Vec& out);
Vec sample(const DiagGaussian& d, Rng& rng);

// KL(p || q), closed form for diagonal Gaussians.
double kl_divergence(const DiagGaussian& p, const DiagGaussian& q);

// Normalized weighted product of diagonal Gaussians. Per dimension the
// composite has precision lambda = sum_i w_i / sigma_i^2 and mean equal to
// the precision-weighted average of the component means, so the partition
// function never has to be materialized.
DiagGaussian compose(std::span<const DiagGaussian> dists, std::span<const double> w);
void compose(std::span<const DiagGaussian> dists, std::span<const double> w,
             DiagGaussian& out);

// Backward through compose. Inputs are gradients w.r.t. the composite mean
// and w.r.t. the per-dimension precision lambda; outputs accumulate into
// d_w (length k), d_mean[i] and d_std[i] (length dim each).
void compose_backward(std::span<const DiagGaussian> dists, std::span<const double> w,
                      const DiagGaussian& composite,
                      std::span<const double> d_mean_c, std::span<const double> d_lambda,
                      std::span<double> d_w,
                      std::span<Vec> d_mean, std::span<Vec> d_std);

// Gradient of coeff * log_prob(d, a) w.r.t. the composite mean and the
// per-dimension precision; feeds compose_backward.
void log_prob_backward(const DiagGaussian& d, std::span<const double> a, double coeff,
                       std::span<double> d_mean_c, std::span<double> d_lambda);

}  // namespace hpt
