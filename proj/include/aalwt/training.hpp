#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aalwt/autodiff.hpp"
#include "aalwt/codec.hpp"
#include "aalwt/signal_io.hpp"

namespace aalwt {

// Offline end-to-end training with the sparsity-penalized loss. The loop is
// single-threaded and fully seeded: initialization, the per-epoch shuffle and
// Adam are all deterministic, so equal seeds give bit-identical parameters.

enum class StopPolicy {
  BelowSustained,  // stop once the nonzero fraction stays <= phi for an epoch
  AboveLiteral,    // stop as soon as the fraction exceeds phi
};

inline StopPolicy stop_policy_from_string(const std::string& s) {
  if (s == "below-sustained") return StopPolicy::BelowSustained;
  if (s == "above-literal") return StopPolicy::AboveLiteral;
  throw std::invalid_argument("unknown stop policy: " + s);
}

struct TrainConfig {
  std::size_t epochs_max = 200;
  std::size_t batch_size = 30;
  double learning_rate = 0.001;
  double lambda = 0.05;
  double omega = 10.0;
  double phi = 0.6;
  std::uint64_t seed = 0;
  StopPolicy stop_policy = StopPolicy::BelowSustained;
  std::size_t monitor_batch = 64;  // leading segments used for the stop signal
  bool train_thresholds = true;
  std::size_t M = 7;
  std::size_t hidden = 16;
};

inline void validate(const TrainConfig& c) {
  if (c.epochs_max < 1 || c.batch_size < 1 || c.monitor_batch < 1)
    throw std::invalid_argument("train config: counts must be positive");
  if (!(c.learning_rate >= 0.0))
    throw std::invalid_argument("train config: learning rate must be >= 0");
  if (!(c.lambda > 0.0 && c.lambda < 1.0))
    throw std::invalid_argument("train config: lambda must lie in (0,1)");
  if (!(c.phi > 0.0 && c.phi <= 1.0))
    throw std::invalid_argument("train config: phi must lie in (0,1]");
  if (c.M < 2) throw std::invalid_argument("train config: M must be >= 2");
  if (c.hidden < 1) throw std::invalid_argument("train config: hidden must be >= 1");
}

struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double mse = 0.0;
  double kld = 0.0;
  double nonzero_fraction = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  EncoderParams encoder;
  DecoderParams decoder;
  TrainLog log;
};

// Fraction of strictly nonzero entries. AHT emits exact zeros, so no epsilon.
inline double sparsity_fraction(
    const std::vector<std::vector<double>>& latents) {
  if (latents.empty())
    throw std::invalid_argument("sparsity_fraction: empty batch");
  std::size_t nonzero = 0, total = 0;
  for (const auto& z : latents) {
    total += z.size();
    for (double v : z)
      if (v != 0.0) ++nonzero;
  }
  if (total == 0) throw std::invalid_argument("sparsity_fraction: empty batch");
  return static_cast<double>(nonzero) / static_cast<double>(total);
}

inline bool stop_check(const TrainLog& log, double phi, StopPolicy policy) {
  if (log.epochs.empty()) return false;
  const double fraction = log.epochs.back().nonzero_fraction;
  if (policy == StopPolicy::AboveLiteral) return fraction > phi;
  return fraction <= phi;
}

namespace detail_train {

struct LossParts {
  double loss, mse, kld;
};

// Forward, loss and backward for one segment; gradients accumulate.
inline LossParts segment_pass(std::span<const double> seg,
                              const EncoderParams& enc,
                              const DecoderParams& dec, double lambda,
                              double omega, EncoderParams* enc_grads,
                              DecoderParams* dec_grads,
                              bool train_thresholds) {
  EncoderCache ec;
  const std::vector<double> z = encoder_forward(seg, enc, &ec);
  DecoderCache dc;
  const std::vector<double> y = decoder_forward(z, dec, &dc);

  const std::size_t m = seg.size();
  double mse = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double d = seg[k] - y[k];
    mse += d * d;
  }
  mse /= static_cast<double>(m);
  const std::vector<double> act = activity_softmax(z);
  const double kld = kld_penalty(act, lambda);
  const double loss = mse + omega * kld;

  if (enc_grads && dec_grads) {
    std::vector<double> gy(m);
    for (std::size_t k = 0; k < m; ++k)
      gy[k] = 2.0 * (y[k] - seg[k]) / static_cast<double>(m);
    std::vector<double> gz;
    decoder_backward(dc, dec, gy, *dec_grads, gz);
    std::vector<double> gact = kld_penalty_backward(act, lambda);
    for (double& g : gact) g *= omega;
    const std::vector<double> gz_kld = activity_softmax_backward(z, act, gact);
    for (std::size_t k = 0; k < m; ++k) gz[k] += gz_kld[k];
    encoder_backward(ec, enc, gz, *enc_grads, train_thresholds);
  }
  return {loss, mse, kld};
}

}  // namespace detail_train

inline TrainResult train_model(const std::vector<Segment>& segments,
                               const TrainConfig& cfg) {
  validate(cfg);
  if (segments.empty())
    throw std::invalid_argument("train_model: empty dataset");
  for (const auto& s : segments)
    if (s.values.size() != cfg.M)
      throw std::invalid_argument("train_model: segment length differs from M");

  std::mt19937_64 init_rng(cfg.seed);
  TrainResult result;
  result.encoder = make_encoder(cfg.M, init_rng);
  result.decoder = make_decoder(cfg.M, cfg.hidden, init_rng);
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9E3779B97F4A7C15ull);

  std::vector<ParamKind> kinds;
  auto enc_ptrs = collect_params(result.encoder, &kinds);
  auto dec_ptrs = collect_params(result.decoder, &kinds);
  std::vector<double*> ptrs = enc_ptrs;
  ptrs.insert(ptrs.end(), dec_ptrs.begin(), dec_ptrs.end());
  AdamOptimizer adam(ptrs.size(), cfg.learning_rate);

  std::vector<std::size_t> order(segments.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const std::size_t monitor =
      std::min(cfg.monitor_batch, segments.size());

  std::vector<double> flat(ptrs.size()), flat_grads(ptrs.size());
  for (std::size_t epoch = 0; epoch < cfg.epochs_max; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    shuffle_indices(order, shuffle_rng);

    double loss_sum = 0.0, mse_sum = 0.0, kld_sum = 0.0;
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      const std::size_t end =
          std::min(order.size(), start + cfg.batch_size);
      EncoderParams enc_grads = zeros_like(result.encoder);
      DecoderParams dec_grads = zeros_like(result.decoder);
      for (std::size_t b = start; b < end; ++b) {
        const auto parts = detail_train::segment_pass(
            segments[order[b]].values, result.encoder, result.decoder,
            cfg.lambda, cfg.omega, &enc_grads, &dec_grads,
            cfg.train_thresholds);
        if (!std::isfinite(parts.loss))
          throw std::runtime_error(
              "train_model: non-finite loss at epoch " + std::to_string(epoch) +
              ", batch " + std::to_string(start / cfg.batch_size));
        loss_sum += parts.loss;
        mse_sum += parts.mse;
        kld_sum += parts.kld;
      }
      // Mean of per-segment losses over the batch.
      const double inv = 1.0 / static_cast<double>(end - start);
      std::size_t gi = 0;
      visit_params(enc_grads, [&](double& g, ParamKind) { flat_grads[gi++] = g * inv; });
      visit_params(dec_grads, [&](double& g, ParamKind) { flat_grads[gi++] = g * inv; });
      for (std::size_t i = 0; i < ptrs.size(); ++i) flat[i] = *ptrs[i];
      adam.step(flat, flat_grads);
      for (std::size_t i = 0; i < ptrs.size(); ++i) *ptrs[i] = flat[i];
      clamp_thresholds(result.encoder);
    }

    // Stopping signal: latents of a fixed leading batch, comparable across
    // epochs.
    std::vector<std::vector<double>> monitor_latents;
    monitor_latents.reserve(monitor);
    for (std::size_t i = 0; i < monitor; ++i)
      monitor_latents.push_back(
          encoder_forward(segments[i].values, result.encoder));

    EpochRecord rec;
    rec.epoch = epoch;
    const double inv_n = 1.0 / static_cast<double>(segments.size());
    rec.loss = loss_sum * inv_n;
    rec.mse = mse_sum * inv_n;
    rec.kld = kld_sum * inv_n;
    rec.nonzero_fraction = sparsity_fraction(monitor_latents);
    rec.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    result.log.epochs.push_back(rec);

    if (stop_check(result.log, cfg.phi, cfg.stop_policy)) break;
  }
  return result;
}

inline void write_train_log_csv(std::ostream& out, const TrainLog& log) {
  out << "epoch,loss,mse,kld,nonzero_fraction,seconds\n";
  out.precision(12);
  for (const auto& e : log.epochs)
    out << e.epoch << ',' << e.loss << ',' << e.mse << ',' << e.kld << ','
        << e.nonzero_fraction << ',' << e.seconds << '\n';
}

}  // namespace aalwt
