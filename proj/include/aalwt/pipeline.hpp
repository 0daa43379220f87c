#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "aalwt/codec.hpp"
#include "aalwt/entropy.hpp"
#include "aalwt/signal_io.hpp"

namespace aalwt {

// Whole-record compression: segment, encode, quantize, entropy-code into the
// container. The header records the zero padding of the last segment so
// decompression can trim back to the original length.

inline std::vector<std::uint8_t> compress_record(const SampleRecord& record,
                                                 const EncoderParams& encoder,
                                                 const CodecConfig& cfg) {
  validate(cfg);
  if (cfg.M > 0xFFFF)
    throw std::invalid_argument("compress_record: M exceeds container limit");
  const std::vector<Segment> segments = segment_record(record, cfg.M);
  if (segments.size() > 0xFFFFFFFFull)
    throw std::invalid_argument("compress_record: segment count exceeds container limit");
  const std::size_t pad = segments.size() * cfg.M - record.samples.size();
  if (pad > 0xFF)
    throw std::invalid_argument("compress_record: pad length exceeds container limit");

  // Quantize with the same float-width alpha the container stores, so the
  // decoder divides by exactly the value the encoder multiplied with.
  const double alpha = static_cast<double>(static_cast<float>(cfg.alpha));
  std::vector<std::int32_t> latents;
  latents.reserve(segments.size() * cfg.M);
  for (const auto& seg : segments) {
    const std::vector<double> z = encode_segment(seg, encoder);
    const std::vector<std::int32_t> q = quantize_latent(z, cfg.mu, alpha);
    latents.insert(latents.end(), q.begin(), q.end());
  }

  StreamHeader header;
  header.m = static_cast<std::uint16_t>(cfg.M);
  header.segment_count = static_cast<std::uint32_t>(segments.size());
  header.original_sample_count = record.samples.size();
  header.pad_length = static_cast<std::uint8_t>(pad);
  header.mu = static_cast<std::uint8_t>(cfg.mu);
  header.alpha = static_cast<float>(cfg.alpha);
  return pack_stream(header, latents);
}

// Inverse pipeline: unpack, dequantize, decode each segment, concatenate and
// trim the final padding.
inline std::vector<double> decompress_stream(
    std::span<const std::uint8_t> bytes, const DecoderParams& decoder) {
  const auto [header, latents] = unpack_stream(bytes);
  const std::size_t m = header.m;
  if (decoder.l1.in_dim != m)
    throw std::runtime_error("decompress_stream: model M differs from stream M");
  const double alpha = static_cast<double>(header.alpha);

  std::vector<double> samples;
  samples.reserve(static_cast<std::size_t>(header.segment_count) * m);
  for (std::uint32_t s = 0; s < header.segment_count; ++s) {
    const std::span<const std::int32_t> q(latents.data() + s * m, m);
    const std::vector<double> z = dequantize_latent(q, header.mu, alpha);
    const std::vector<double> y = decode_latent(z, decoder);
    samples.insert(samples.end(), y.begin(), y.end());
  }
  if (samples.size() < header.original_sample_count)
    throw std::runtime_error("decompress_stream: sample count inconsistent");
  samples.resize(header.original_sample_count);
  return samples;
}

}  // namespace aalwt
