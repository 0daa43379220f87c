#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "aalwt/autodiff.hpp"
#include "aalwt/lifting_wavelet.hpp"
#include "aalwt/random.hpp"
#include "aalwt/signal_io.hpp"

namespace aalwt {

// Encoder: front conv3 -> tanh -> LWT -> two parallel branches in the wavelet
// domain (left: three conv3+AHT stages; right: one conv1+AHT), combined by
// elementwise addition. Decoder: ILWT -> L1 -> tanh -> L2 -> tanh -> L3 on
// [hidden || ILWT output], the concatenation being the residual skip.

struct CodecConfig {
  std::size_t M = 7;            // segment length
  std::size_t hidden = 16;      // decoder hidden width H
  int mu = 3;                   // quantizer exponent
  double alpha = 4.0;           // quantizer divisor
  double lambda = 0.05;         // sparsity target
  double omega = 10.0;          // sparsity penalty weight
  double phi = 0.6;             // stopping-rule threshold
  double learning_rate = 0.001;
  std::size_t batch_size = 30;
  std::uint64_t seed = 0;
  int sample_bits = 32;         // B_in: bits per original sample for CR
};

inline void validate(const CodecConfig& c) {
  if (c.M < 2) throw std::invalid_argument("config: M must be >= 2");
  if (c.hidden < 1) throw std::invalid_argument("config: hidden width must be >= 1");
  if (c.mu < 0 || c.mu > 255) throw std::invalid_argument("config: mu must lie in [0,255]");
  if (!(c.alpha > 0.0)) throw std::invalid_argument("config: alpha must be positive");
  if (!(c.lambda > 0.0 && c.lambda < 1.0))
    throw std::invalid_argument("config: lambda must lie in (0,1)");
  if (!(c.phi > 0.0 && c.phi <= 1.0))
    throw std::invalid_argument("config: phi must lie in (0,1]");
  if (!(c.learning_rate >= 0.0))
    throw std::invalid_argument("config: learning rate must be >= 0");
  if (c.batch_size < 1) throw std::invalid_argument("config: batch size must be >= 1");
  if (c.sample_bits < 1) throw std::invalid_argument("config: sample_bits must be >= 1");
}

struct BranchStage {
  ConvParams conv;
  AhtParams aht;
};

struct EncoderParams {
  ConvParams front;                  // kernel 3
  std::array<BranchStage, 3> left;   // kernel 3 each
  BranchStage right;                 // kernel 1
};

struct DecoderParams {
  LinearParams l1;  // M -> H
  LinearParams l2;  // H -> H
  LinearParams l3;  // (H+M) -> M
};

enum class ParamKind { Weight, Bias, Threshold, Slope };

// Fixed scalar enumeration order shared by the optimizer, the serializer and
// the gradient checks.
template <class Fn>
void visit_params(ConvParams& p, Fn&& fn) {
  for (double& v : p.kernel) fn(v, ParamKind::Weight);
  fn(p.bias, ParamKind::Bias);
}
template <class Fn>
void visit_params(AhtParams& p, Fn&& fn) {
  for (double& v : p.thresholds) fn(v, ParamKind::Threshold);
  for (double& v : p.slopes) fn(v, ParamKind::Slope);
}
template <class Fn>
void visit_params(LinearParams& p, Fn&& fn) {
  for (double& v : p.weights) fn(v, ParamKind::Weight);
  for (double& v : p.bias) fn(v, ParamKind::Bias);
}
template <class Fn>
void visit_params(EncoderParams& p, Fn&& fn) {
  visit_params(p.front, fn);
  for (auto& stage : p.left) {
    visit_params(stage.conv, fn);
    visit_params(stage.aht, fn);
  }
  visit_params(p.right.conv, fn);
  visit_params(p.right.aht, fn);
}
template <class Fn>
void visit_params(DecoderParams& p, Fn&& fn) {
  visit_params(p.l1, fn);
  visit_params(p.l2, fn);
  visit_params(p.l3, fn);
}

template <class Params>
std::size_t count_parameters(const Params& p) {
  Params copy = p;
  std::size_t n = 0;
  visit_params(copy, [&](double&, ParamKind) { ++n; });
  return n;
}

template <class Params>
std::vector<double*> collect_params(Params& p,
                                    std::vector<ParamKind>* kinds = nullptr) {
  std::vector<double*> out;
  visit_params(p, [&](double& v, ParamKind k) {
    out.push_back(&v);
    if (kinds) kinds->push_back(k);
  });
  return out;
}

// Scalar values in visit order; handy for comparisons and validation.
template <class Params>
std::vector<double> param_values(const Params& p) {
  Params copy = p;
  std::vector<double> out;
  visit_params(copy, [&](double& v, ParamKind) { out.push_back(v); });
  return out;
}

// ---------------------------------------------------------------------------
// Initialization: Glorot-uniform weights, zero biases, small thresholds so
// coefficients survive early training, unit slopes.

namespace detail_codec {
inline double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}
inline ConvParams init_conv(std::size_t taps, std::mt19937_64& rng) {
  ConvParams p;
  p.kernel.resize(taps);
  const double lim = glorot_limit(taps, taps);
  for (double& v : p.kernel) v = uniform_in(rng, -lim, lim);
  p.bias = 0.0;
  return p;
}
inline AhtParams init_aht(std::size_t m) {
  AhtParams p;
  p.thresholds.assign(m, 0.01);
  p.slopes.assign(m, 1.0);
  return p;
}
inline LinearParams init_linear(std::size_t out_dim, std::size_t in_dim,
                                std::mt19937_64& rng) {
  LinearParams p;
  p.out_dim = out_dim;
  p.in_dim = in_dim;
  p.weights.resize(out_dim * in_dim);
  const double lim = glorot_limit(in_dim, out_dim);
  for (double& v : p.weights) v = uniform_in(rng, -lim, lim);
  p.bias.assign(out_dim, 0.0);
  return p;
}
}  // namespace detail_codec

inline EncoderParams make_encoder(std::size_t m, std::mt19937_64& rng) {
  EncoderParams e;
  e.front = detail_codec::init_conv(3, rng);
  for (auto& stage : e.left) {
    stage.conv = detail_codec::init_conv(3, rng);
    stage.aht = detail_codec::init_aht(m);
  }
  e.right.conv = detail_codec::init_conv(1, rng);
  e.right.aht = detail_codec::init_aht(m);
  return e;
}

inline DecoderParams make_decoder(std::size_t m, std::size_t hidden,
                                  std::mt19937_64& rng) {
  DecoderParams d;
  d.l1 = detail_codec::init_linear(hidden, m, rng);
  d.l2 = detail_codec::init_linear(hidden, hidden, rng);
  d.l3 = detail_codec::init_linear(m, hidden + m, rng);
  return d;
}

inline EncoderParams zeros_like(const EncoderParams& p) {
  EncoderParams g;
  g.front = zeros_like(p.front);
  for (std::size_t i = 0; i < p.left.size(); ++i) {
    g.left[i].conv = zeros_like(p.left[i].conv);
    g.left[i].aht = zeros_like(p.left[i].aht);
  }
  g.right.conv = zeros_like(p.right.conv);
  g.right.aht = zeros_like(p.right.aht);
  return g;
}

inline DecoderParams zeros_like(const DecoderParams& p) {
  return {zeros_like(p.l1), zeros_like(p.l2), zeros_like(p.l3)};
}

// Projection applied after every optimizer step; a negative threshold has no
// meaning for the magnitude test.
inline void clamp_thresholds(EncoderParams& p) {
  for (auto& stage : p.left)
    for (double& c : stage.aht.thresholds) c = std::max(c, 0.0);
  for (double& c : p.right.aht.thresholds) c = std::max(c, 0.0);
}

// ---------------------------------------------------------------------------
// Branch block: the two parallel convolutional paths over the wavelet-domain
// vector X, combined by addition. Exposed separately so its linearity (with
// zero thresholds and unit slopes) can be tested directly.

struct BranchCache {
  std::vector<double> input;                       // X
  std::array<std::vector<double>, 3> left_conv;    // conv outputs (AHT inputs)
  std::array<std::vector<double>, 3> left_aht;
  std::vector<double> right_conv;
  std::vector<double> right_aht;
};

inline std::vector<double> branch_forward(std::span<const double> x,
                                          const EncoderParams& p,
                                          BranchCache* cache = nullptr) {
  std::vector<double> cur(x.begin(), x.end());
  BranchCache local;
  BranchCache& c = cache ? *cache : local;
  c.input.assign(x.begin(), x.end());
  for (std::size_t s = 0; s < 3; ++s) {
    c.left_conv[s] = conv1d_same(cur, p.left[s].conv);
    c.left_aht[s] = aht_eval(c.left_conv[s], p.left[s].aht);
    cur = c.left_aht[s];
  }
  c.right_conv = conv1d_same(x, p.right.conv);
  c.right_aht = aht_eval(c.right_conv, p.right.aht);
  std::vector<double> z(cur.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = cur[i] + c.right_aht[i];
  return z;
}

inline void branch_backward(const BranchCache& c, const EncoderParams& p,
                            std::span<const double> gz,
                            std::vector<double>& gx, EncoderParams& grads,
                            bool train_thresholds) {
  // Right path.
  std::vector<double> g_rconv;
  aht_backward(c.right_conv, p.right.aht, gz, g_rconv, grads.right.aht,
               train_thresholds);
  std::vector<double> gx_right;
  conv1d_same_backward(c.input, p.right.conv, g_rconv, gx_right,
                       grads.right.conv);
  // Left path, last stage first.
  std::vector<double> g(gz.begin(), gz.end());
  for (std::size_t s = 3; s-- > 0;) {
    std::vector<double> g_conv;
    aht_backward(c.left_conv[s], p.left[s].aht, g, g_conv, grads.left[s].aht,
                 train_thresholds);
    std::span<const double> stage_in =
        s == 0 ? std::span<const double>(c.input)
               : std::span<const double>(c.left_aht[s - 1]);
    conv1d_same_backward(stage_in, p.left[s].conv, g_conv, g,
                         grads.left[s].conv);
  }
  gx.assign(c.input.size(), 0.0);
  for (std::size_t i = 0; i < gx.size(); ++i) gx[i] = g[i] + gx_right[i];
}

// ---------------------------------------------------------------------------
// Full encoder / decoder forward+backward.

struct EncoderCache {
  std::vector<double> input;      // segment values
  std::vector<double> front_out;  // conv output before tanh
  std::vector<double> tanh_out;   // x
  std::vector<double> wavelet;    // X, band-ordered [approx || detail]
  BranchCache branch;
  std::vector<double> z;
};

inline std::vector<double> encoder_forward(std::span<const double> segment,
                                           const EncoderParams& p,
                                           EncoderCache* cache = nullptr) {
  EncoderCache local;
  EncoderCache& c = cache ? *cache : local;
  c.input.assign(segment.begin(), segment.end());
  c.front_out = conv1d_same(segment, p.front);
  c.tanh_out = tanh_eval(c.front_out);
  c.wavelet = flat_from_coeffs(lwt_forward(c.tanh_out));
  c.z = branch_forward(c.wavelet, p, &c.branch);
  return c.z;
}

inline std::vector<double> encode_segment(const Segment& seg,
                                          const EncoderParams& p) {
  return encoder_forward(seg.values, p);
}

inline void encoder_backward(const EncoderCache& c, const EncoderParams& p,
                             std::span<const double> gz, EncoderParams& grads,
                             bool train_thresholds = true) {
  std::vector<double> g_wavelet;
  branch_backward(c.branch, p, gz, g_wavelet, grads, train_thresholds);
  const std::vector<double> g_tanh =
      lwt_adjoint(coeffs_from_flat(g_wavelet, c.input.size()));
  const std::vector<double> g_front = tanh_backward(c.tanh_out, g_tanh);
  std::vector<double> g_input;
  conv1d_same_backward(c.input, p.front, g_front, g_input, grads.front);
}

// Finite-difference probes are only meaningful away from the nonlinearity
// kinks: every AHT input must sit at least `margin` (10x the FD step) from
// its threshold, and every latent component away from the |.| kink inside
// the activity softmax.
inline bool fd_margins_ok(const EncoderCache& cache, const EncoderParams& p,
                          double margin) {
  auto layer_ok = [&](const std::vector<double>& x, const AhtParams& a) {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (std::abs(std::abs(x[i]) - a.thresholds[i]) < margin) return false;
    return true;
  };
  for (std::size_t s = 0; s < 3; ++s)
    if (!layer_ok(cache.branch.left_conv[s], p.left[s].aht)) return false;
  if (!layer_ok(cache.branch.right_conv, p.right.aht)) return false;
  for (double v : cache.z)
    if (std::abs(v) < margin) return false;
  return true;
}

struct DecoderCache {
  std::vector<double> latent;
  std::vector<double> xbar;  // ILWT output
  std::vector<double> h1;    // tanh(L1 xbar)
  std::vector<double> h2;    // tanh(L2 h1)
  std::vector<double> cat;   // [h2 || xbar]
  std::vector<double> y;
};

inline std::vector<double> decoder_forward(std::span<const double> latent,
                                           const DecoderParams& p,
                                           DecoderCache* cache = nullptr) {
  DecoderCache local;
  DecoderCache& c = cache ? *cache : local;
  const std::size_t m = latent.size();
  if (p.l1.in_dim != m || p.l3.out_dim != m)
    throw std::invalid_argument("decoder_forward: dimension mismatch");
  c.latent.assign(latent.begin(), latent.end());
  c.xbar = lwt_inverse(coeffs_from_flat(latent, m));
  c.h1 = tanh_eval(linear_apply(c.xbar, p.l1));
  c.h2 = tanh_eval(linear_apply(c.h1, p.l2));
  c.cat = c.h2;
  c.cat.insert(c.cat.end(), c.xbar.begin(), c.xbar.end());
  c.y = linear_apply(c.cat, p.l3);
  return c.y;
}

inline std::vector<double> decode_latent(std::span<const double> latent,
                                         const DecoderParams& p) {
  return decoder_forward(latent, p);
}

inline void decoder_backward(const DecoderCache& c, const DecoderParams& p,
                             std::span<const double> gy, DecoderParams& grads,
                             std::vector<double>& g_latent) {
  const std::size_t m = c.latent.size();
  const std::size_t h = c.h2.size();
  std::vector<double> g_cat;
  linear_backward(c.cat, p.l3, gy, g_cat, grads.l3);
  std::vector<double> g_h2(g_cat.begin(), g_cat.begin() + static_cast<std::ptrdiff_t>(h));
  std::vector<double> g_xbar(g_cat.begin() + static_cast<std::ptrdiff_t>(h), g_cat.end());

  const std::vector<double> g_l2 = tanh_backward(c.h2, g_h2);
  std::vector<double> g_h1;
  linear_backward(c.h1, p.l2, g_l2, g_h1, grads.l2);
  const std::vector<double> g_l1 = tanh_backward(c.h1, g_h1);
  std::vector<double> g_xbar_main;
  linear_backward(c.xbar, p.l1, g_l1, g_xbar_main, grads.l1);
  for (std::size_t i = 0; i < m; ++i) g_xbar[i] += g_xbar_main[i];

  g_latent = flat_from_coeffs(lwt_inverse_adjoint(g_xbar, m));
}

// ---------------------------------------------------------------------------
// Integer quantization of the latent vector (transmission only, never during
// training). Rounding is half away from zero, fixed for bitstream
// reproducibility.

inline std::vector<std::int32_t> quantize_latent(std::span<const double> z,
                                                 int mu, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("quantize_latent: alpha must be positive");
  const double scale = std::pow(10.0, mu) / alpha;
  std::vector<std::int32_t> q(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double s = z[i] * scale;
    const long long r = std::llround(s);  // halfway cases away from zero
    if (r >= 2147483648LL || r <= -2147483648LL)
      throw std::overflow_error("quantize_latent: value exceeds 32-bit range");
    q[i] = static_cast<std::int32_t>(r);
  }
  return q;
}

inline std::vector<double> dequantize_latent(std::span<const std::int32_t> q,
                                             int mu, double alpha) {
  const double scale = alpha / std::pow(10.0, mu);
  std::vector<double> z(q.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    z[i] = static_cast<double>(q[i]) * scale;
  return z;
}

// ---------------------------------------------------------------------------
// Encoder-side multiply-accumulate count for n segments. "ConvsOnly" counts
// kernel-tap multiplies; "AllMultiplies" adds the lifting constants (two
// multiplies per predicted and per updated sample) and the AHT slope
// multiplies. The per-record basis of published MAC figures varies, so both
// conventions are reported and neither is claimed to match any one table.

enum class MacConvention { ConvsOnly, AllMultiplies };

inline std::uint64_t count_macs(std::size_t m, std::size_t n_segments,
                                MacConvention convention) {
  if (n_segments < 1) throw std::invalid_argument("count_macs: need >= 1 segment");
  const std::uint64_t convs = 3ull * m      // front conv3
                              + 3ull * 3ull * m  // left branch conv3 x3
                              + 1ull * m;   // right conv1
  std::uint64_t per_segment = convs;
  if (convention == MacConvention::AllMultiplies) {
    per_segment += 2ull * m;  // lifting: 0.5 and 0.25 pairs over all samples
    per_segment += 4ull * m;  // one slope multiply per element, four AHT layers
  }
  return per_segment * n_segments;
}

inline std::uint64_t count_macs(const EncoderParams& p, std::size_t n_segments,
                                MacConvention convention) {
  return count_macs(p.right.aht.thresholds.size(), n_segments, convention);
}

}  // namespace aalwt
