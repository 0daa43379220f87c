#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace aalwt {

// Minimal differentiable-operator set: every op has a forward evaluation and
// a hand-written backward that maps an output gradient to input and parameter
// gradients. Backward passes accumulate (+=) into the gradient structs so a
// batch can share one accumulator.

struct ConvParams {
  std::vector<double> kernel;  // 1 or 3 taps
  double bias = 0.0;
};

struct AhtParams {
  std::vector<double> thresholds;  // C_k >= 0, one per position
  std::vector<double> slopes;      // beta_k, one per position
};

struct LinearParams {
  std::size_t out_dim = 0;
  std::size_t in_dim = 0;
  std::vector<double> weights;  // row-major, out_dim x in_dim
  std::vector<double> bias;     // out_dim
};

inline ConvParams zeros_like(const ConvParams& p) {
  return {std::vector<double>(p.kernel.size(), 0.0), 0.0};
}
inline AhtParams zeros_like(const AhtParams& p) {
  return {std::vector<double>(p.thresholds.size(), 0.0),
          std::vector<double>(p.slopes.size(), 0.0)};
}
inline LinearParams zeros_like(const LinearParams& p) {
  return {p.out_dim, p.in_dim, std::vector<double>(p.weights.size(), 0.0),
          std::vector<double>(p.bias.size(), 0.0)};
}

// ---------------------------------------------------------------------------
// 1-D convolution, "same" zero padding, single channel.
// y_i = bias + sum_j kernel_j * x_{i+j-floor(K/2)}

inline std::vector<double> conv1d_same(std::span<const double> x,
                                       const ConvParams& p) {
  const std::size_t k = p.kernel.size();
  if (k != 1 && k != 3)
    throw std::invalid_argument("conv1d_same: kernel length must be 1 or 3");
  if (x.empty()) throw std::invalid_argument("conv1d_same: empty input");
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  const std::ptrdiff_t c = static_cast<std::ptrdiff_t>(k / 2);
  std::vector<double> y(x.size(), p.bias);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(k); ++j) {
      const std::ptrdiff_t src = i + j - c;
      if (src >= 0 && src < n) acc += p.kernel[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(src)];
    }
    y[static_cast<std::size_t>(i)] += acc;
  }
  return y;
}

inline void conv1d_same_backward(std::span<const double> x,
                                 const ConvParams& p,
                                 std::span<const double> gy,
                                 std::vector<double>& gx, ConvParams& gp) {
  const std::size_t k = p.kernel.size();
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  if (gy.size() != x.size())
    throw std::invalid_argument("conv1d_same_backward: gradient length mismatch");
  const std::ptrdiff_t c = static_cast<std::ptrdiff_t>(k / 2);
  gx.assign(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double g = gy[static_cast<std::size_t>(i)];
    gp.bias += g;
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(k); ++j) {
      const std::ptrdiff_t src = i + j - c;
      if (src >= 0 && src < n) {
        gp.kernel[static_cast<std::size_t>(j)] += g * x[static_cast<std::size_t>(src)];
        gx[static_cast<std::size_t>(src)] += g * p.kernel[static_cast<std::size_t>(j)];
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Dense layer: y = Wx + b.

inline std::vector<double> linear_apply(std::span<const double> x,
                                        const LinearParams& p) {
  if (x.size() != p.in_dim)
    throw std::invalid_argument("linear_apply: dimension mismatch");
  std::vector<double> y(p.out_dim);
  for (std::size_t o = 0; o < p.out_dim; ++o) {
    double acc = p.bias[o];
    const double* row = &p.weights[o * p.in_dim];
    for (std::size_t i = 0; i < p.in_dim; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
  return y;
}

inline void linear_backward(std::span<const double> x, const LinearParams& p,
                            std::span<const double> gy,
                            std::vector<double>& gx, LinearParams& gp) {
  if (x.size() != p.in_dim || gy.size() != p.out_dim)
    throw std::invalid_argument("linear_backward: dimension mismatch");
  gx.assign(p.in_dim, 0.0);
  for (std::size_t o = 0; o < p.out_dim; ++o) {
    const double g = gy[o];
    gp.bias[o] += g;
    const double* row = &p.weights[o * p.in_dim];
    double* grow = &gp.weights[o * p.in_dim];
    for (std::size_t i = 0; i < p.in_dim; ++i) {
      grow[i] += g * x[i];
      gx[i] += g * row[i];
    }
  }
}

// ---------------------------------------------------------------------------
// Elementwise tanh. Backward takes the cached output: d tanh = 1 - tanh^2.

inline std::vector<double> tanh_eval(std::span<const double> x) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
  return y;
}

inline std::vector<double> tanh_backward(std::span<const double> y,
                                         std::span<const double> gy) {
  std::vector<double> gx(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) gx[i] = gy[i] * (1.0 - y[i] * y[i]);
  return gx;
}

// ---------------------------------------------------------------------------
// Adaptive hard thresholding. Writing soft thresholding as
// E(x) = sign(x) * relu(|x| - C), the layer computes (E(x) + C*sign(E(x))) * beta,
// which collapses to the piecewise form used here:
//   out_k = beta_k * x_k  when |x_k| >  C_k
//   out_k = 0             when |x_k| <= C_k
//
// The exact derivative wrt C is zero almost everywhere (the soft-threshold
// and C*sign terms cancel), so the backward pass uses the gradient of the
// soft-threshold sub-expression alone as a surrogate:
//   d out_k / d C_k := -beta_k * sign(x_k) * [|x_k| > C_k]
// This is the one sub-path with a nonzero gradient; it lets thresholds grow
// when surviving coefficients are penalized. train_thresholds=false freezes C.

inline std::vector<double> aht_eval(std::span<const double> x,
                                    const AhtParams& p) {
  if (x.size() != p.thresholds.size() || x.size() != p.slopes.size())
    throw std::invalid_argument("aht_eval: length mismatch");
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = std::abs(x[i]) > p.thresholds[i] ? p.slopes[i] * x[i] : 0.0;
  return y;
}

inline void aht_backward(std::span<const double> x, const AhtParams& p,
                         std::span<const double> gy, std::vector<double>& gx,
                         AhtParams& gp, bool train_thresholds = true) {
  if (gy.size() != x.size())
    throw std::invalid_argument("aht_backward: gradient length mismatch");
  gx.assign(x.size(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > p.thresholds[i]) {
      const double g = gy[i];
      gx[i] = g * p.slopes[i];
      gp.slopes[i] += g * x[i];
      if (train_thresholds)
        gp.thresholds[i] += g * (-p.slopes[i] * (x[i] > 0.0 ? 1.0 : -1.0));
    }
  }
}

// ---------------------------------------------------------------------------
// Latent activity: softmax over |z|, stabilized by subtracting max |z|.

inline std::vector<double> activity_softmax(std::span<const double> z) {
  if (z.empty()) throw std::invalid_argument("activity_softmax: empty input");
  double m = 0.0;
  for (double v : z) m = std::max(m, std::abs(v));
  std::vector<double> a(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    a[i] = std::exp(std::abs(z[i]) - m);
    sum += a[i];
  }
  for (double& v : a) v /= sum;
  return a;
}

// ga is the gradient wrt the activities; returns the gradient wrt z.
// sign(0) is taken as 0 (subgradient choice at the |.| kink).
inline std::vector<double> activity_softmax_backward(
    std::span<const double> z, std::span<const double> activity,
    std::span<const double> ga) {
  if (z.size() != activity.size() || z.size() != ga.size())
    throw std::invalid_argument("activity_softmax_backward: length mismatch");
  double dot = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) dot += ga[k] * activity[k];
  std::vector<double> gz(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double gabs = activity[j] * (ga[j] - dot);
    const double sign = z[j] > 0.0 ? 1.0 : (z[j] < 0.0 ? -1.0 : 0.0);
    gz[j] = sign * gabs;
  }
  return gz;
}

// ---------------------------------------------------------------------------
// Bernoulli KL divergence pushing each activity toward lambda. Natural log;
// each term is >= 0 and the sum vanishes iff every activity equals lambda.

inline double kld_penalty(std::span<const double> activity, double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("kld_penalty: lambda must lie in (0,1)");
  double total = 0.0;
  for (double a : activity) {
    if (!(a > 0.0 && a < 1.0))
      throw std::invalid_argument("kld_penalty: activity outside (0,1)");
    total += lambda * std::log(lambda / a) +
             (1.0 - lambda) * std::log((1.0 - lambda) / (1.0 - a));
  }
  return total;
}

inline std::vector<double> kld_penalty_backward(std::span<const double> activity,
                                                double lambda) {
  std::vector<double> ga(activity.size());
  for (std::size_t k = 0; k < activity.size(); ++k)
    ga[k] = -lambda / activity[k] + (1.0 - lambda) / (1.0 - activity[k]);
  return ga;
}

// ---------------------------------------------------------------------------
// Total training loss: mean squared error plus the weighted sparsity penalty.

inline double total_loss(std::span<const double> x, std::span<const double> y,
                         std::span<const double> z, double lambda,
                         double omega) {
  if (x.size() != y.size())
    throw std::invalid_argument("total_loss: dimension mismatch");
  double mse = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    mse += d * d;
  }
  mse /= static_cast<double>(x.size());
  if (omega == 0.0) return mse;
  return mse + omega * kld_penalty(activity_softmax(z), lambda);
}

// ---------------------------------------------------------------------------
// Central-difference gradient check. scalar_fn re-evaluates the objective at
// the current parameter values; params are perturbed in place one at a time.
// Returns max over parameters of |analytic - numeric| / max(|numeric|, 1e-8).

template <class F>
double max_relative_fd_error(F&& scalar_fn, std::span<double> params,
                             std::span<const double> analytic,
                             double eps = 1e-6) {
  if (params.size() != analytic.size())
    throw std::invalid_argument("max_relative_fd_error: size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + eps;
    const double fp = scalar_fn();
    params[i] = saved - eps;
    const double fm = scalar_fn();
    params[i] = saved;
    const double numeric = (fp - fm) / (2.0 * eps);
    const double rel =
        std::abs(analytic[i] - numeric) / std::max(std::abs(numeric), 1e-8);
    worst = std::max(worst, rel);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Adam over a flat parameter vector. Deterministic: no state beyond the
// moment buffers and the step counter.

class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t n, double learning_rate, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8)
      : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps),
        m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
      throw std::invalid_argument("AdamOptimizer: size mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
      v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
      const double mhat = m_[i] / bc1;
      const double vhat = v_[i] / bc2;
      params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

}  // namespace aalwt
