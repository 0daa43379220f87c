#pragma once

#include <cmath>
#include <iomanip>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>

#include "aalwt/pipeline.hpp"

namespace aalwt {

// Compression-quality metrics. PRD is energy-normalized, PRDN mean-removed
// normalized, both in percent; CR counts the full container (header included)
// against sample_count * B_in original bits.

struct DistortionMetrics {
  double prd = 0.0;
  double prdn = 0.0;
  double rmse = 0.0;
};

struct MetricsReport {
  double cr = 0.0;
  double prd = 0.0;
  double prdn = 0.0;
  double rmse = 0.0;
  double qs = 0.0;
  std::size_t sample_count = 0;
  std::size_t bitstream_bytes = 0;
};

inline DistortionMetrics distortion_metrics(std::span<const double> x,
                                            std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("distortion_metrics: need equal lengths >= 2");
  double err = 0.0, energy = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    err += d * d;
    energy += x[i] * x[i];
    mean += x[i];
  }
  mean /= static_cast<double>(x.size());
  double centered = 0.0;
  for (double v : x) centered += (v - mean) * (v - mean);

  if (energy == 0.0)
    throw std::invalid_argument("distortion_metrics: PRD undefined for zero-energy signal");
  if (centered == 0.0)
    throw std::invalid_argument("distortion_metrics: PRDN undefined for constant signal");

  DistortionMetrics m;
  m.prd = 100.0 * std::sqrt(err / energy);
  m.prdn = 100.0 * std::sqrt(err / centered);
  m.rmse = std::sqrt(err / static_cast<double>(x.size()));
  return m;
}

inline double compression_ratio(std::size_t sample_count, int bits_per_sample,
                                std::size_t bitstream_bytes) {
  if (sample_count < 1)
    throw std::invalid_argument("compression_ratio: need >= 1 sample");
  if (bitstream_bytes == 0)
    throw std::invalid_argument("compression_ratio: empty bitstream");
  return static_cast<double>(sample_count) *
         static_cast<double>(bits_per_sample) /
         (8.0 * static_cast<double>(bitstream_bytes));
}

inline double quality_score(double cr, double prd) {
  if (prd == 0.0)
    throw std::invalid_argument("quality_score: undefined at PRD == 0");
  return cr / prd;
}

// Full pipeline evaluation: compress, decompress, measure. The reported CR
// uses the actual container size.
inline MetricsReport evaluate_record(const SampleRecord& record,
                                     const EncoderParams& encoder,
                                     const DecoderParams& decoder,
                                     const CodecConfig& cfg) {
  const std::vector<std::uint8_t> bytes = compress_record(record, encoder, cfg);
  const std::vector<double> reconstructed = decompress_stream(bytes, decoder);

  MetricsReport report;
  report.sample_count = record.samples.size();
  report.bitstream_bytes = bytes.size();
  const DistortionMetrics d =
      distortion_metrics(record.samples, reconstructed);
  report.prd = d.prd;
  report.prdn = d.prdn;
  report.rmse = d.rmse;
  report.cr =
      compression_ratio(record.samples.size(), cfg.sample_bits, bytes.size());
  report.qs = quality_score(report.cr, report.prd);
  return report;
}

inline std::string metrics_csv(const MetricsReport& r) {
  std::ostringstream out;
  out.precision(12);
  out << "cr,prd,prdn,rmse,qs,samples,bytes\n"
      << r.cr << ',' << r.prd << ',' << r.prdn << ',' << r.rmse << ',' << r.qs
      << ',' << r.sample_count << ',' << r.bitstream_bytes << '\n';
  return out.str();
}

inline std::string metrics_table(const MetricsReport& r) {
  std::ostringstream out;
  out << std::setw(10) << "cr" << std::setw(10) << "prd" << std::setw(10)
      << "prdn" << std::setw(10) << "rmse" << std::setw(10) << "qs"
      << std::setw(12) << "samples" << std::setw(10) << "bytes" << '\n';
  out << std::fixed << std::setprecision(2);
  out << std::setw(10) << r.cr << std::setw(10) << r.prd << std::setw(10)
      << r.prdn << std::setw(10) << r.rmse << std::setw(10) << r.qs
      << std::setw(12) << r.sample_count << std::setw(10) << r.bitstream_bytes
      << '\n';
  return out.str();
}

}  // namespace aalwt
