#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aalwt/random.hpp"

namespace aalwt {

struct SampleRecord {
  std::vector<double> samples;  // sensor units, e.g. g
  double sample_rate_hz = 1.0;
  std::string label;
};

struct Segment {
  std::vector<double> values;     // exactly M values
  std::size_t origin_index = 0;   // offset of first sample in source record
};

struct SynthConfig {
  double duration_s = 10.0;
  double sample_rate_hz = 8000.0;
  double fault_freq_hz = 25.0;     // impulse repetition rate
  double resonance_hz = 900.0;     // ring frequency excited by each impulse
  double ring_decay = 350.0;       // exponential envelope decay, 1/s
  double noise_std = 0.05;
  double amplitude = 1.0;
  std::uint64_t seed = 0;
};

enum class SampleFormat { RawF32Le, RawF64Le, Csv };

inline SampleFormat sample_format_from_string(const std::string& s) {
  if (s == "raw-f32-le") return SampleFormat::RawF32Le;
  if (s == "raw-f64-le") return SampleFormat::RawF64Le;
  if (s == "csv") return SampleFormat::Csv;
  throw std::invalid_argument("unknown sample format: " + s);
}

namespace detail_io {

inline std::vector<std::uint8_t> read_all_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw std::runtime_error("read error: " + path);
  return bytes;
}

inline std::uint32_t load_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint64_t load_u64le(const std::uint8_t* p) {
  return static_cast<std::uint64_t>(load_u32le(p)) |
         (static_cast<std::uint64_t>(load_u32le(p + 4)) << 32);
}

inline void store_u32le(std::uint8_t* p, std::uint32_t v) {
  p[0] = static_cast<std::uint8_t>(v);
  p[1] = static_cast<std::uint8_t>(v >> 8);
  p[2] = static_cast<std::uint8_t>(v >> 16);
  p[3] = static_cast<std::uint8_t>(v >> 24);
}

inline void store_u64le(std::uint8_t* p, std::uint64_t v) {
  store_u32le(p, static_cast<std::uint32_t>(v));
  store_u32le(p + 4, static_cast<std::uint32_t>(v >> 32));
}

}  // namespace detail_io

// Reads a whole recording. The raw formats are headerless little-endian
// IEEE-754 streams; CSV is one decimal value per line (no header row).
// sample_rate_hz is not stored in any of these formats, so the caller
// supplies it.
inline SampleRecord load_samples(const std::string& path, SampleFormat format,
                                 double sample_rate_hz = 1.0) {
  if (sample_rate_hz <= 0.0)
    throw std::invalid_argument("sample_rate_hz must be positive");
  SampleRecord rec;
  rec.sample_rate_hz = sample_rate_hz;
  rec.label = path;

  if (format == SampleFormat::Csv) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(line, &pos);
      } catch (const std::exception&) {
        throw std::runtime_error("malformed CSV row " + std::to_string(line_no) +
                                 " in " + path);
      }
      while (pos < line.size() &&
             (line[pos] == ' ' || line[pos] == '\t'))
        ++pos;
      if (pos != line.size())
        throw std::runtime_error("malformed CSV row " + std::to_string(line_no) +
                                 " in " + path);
      rec.samples.push_back(v);
    }
  } else {
    const auto bytes = detail_io::read_all_bytes(path);
    const std::size_t width = format == SampleFormat::RawF32Le ? 4 : 8;
    if (bytes.size() % width != 0)
      throw std::runtime_error("file size not a multiple of sample width: " +
                               path);
    rec.samples.reserve(bytes.size() / width);
    for (std::size_t off = 0; off < bytes.size(); off += width) {
      if (format == SampleFormat::RawF32Le) {
        const float f =
            std::bit_cast<float>(detail_io::load_u32le(bytes.data() + off));
        rec.samples.push_back(static_cast<double>(f));
      } else {
        rec.samples.push_back(
            std::bit_cast<double>(detail_io::load_u64le(bytes.data() + off)));
      }
    }
  }

  if (rec.samples.empty()) throw std::runtime_error("zero samples: " + path);
  for (double v : rec.samples)
    if (!std::isfinite(v))
      throw std::runtime_error("non-finite sample in " + path);
  return rec;
}

inline void save_samples(const std::string& path, const SampleRecord& rec,
                         SampleFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  if (format == SampleFormat::Csv) {
    out.precision(17);
    for (double v : rec.samples) out << v << '\n';
  } else {
    std::uint8_t buf[8];
    for (double v : rec.samples) {
      if (format == SampleFormat::RawF32Le) {
        detail_io::store_u32le(buf,
                               std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        out.write(reinterpret_cast<const char*>(buf), 4);
      } else {
        detail_io::store_u64le(buf, std::bit_cast<std::uint64_t>(v));
        out.write(reinterpret_cast<const char*>(buf), 8);
      }
    }
  }
  if (!out) throw std::runtime_error("write error: " + path);
}

// Non-overlapping consecutive windows of M samples; the final partial window
// is zero-padded to length M.
inline std::vector<Segment> segment_record(const SampleRecord& record,
                                           std::size_t m) {
  if (m < 2) throw std::invalid_argument("segment length M must be >= 2");
  if (record.samples.empty())
    throw std::invalid_argument("cannot segment an empty record");
  const std::size_t n = record.samples.size();
  const std::size_t count = (n + m - 1) / m;
  std::vector<Segment> segs(count);
  for (std::size_t s = 0; s < count; ++s) {
    segs[s].origin_index = s * m;
    segs[s].values.assign(m, 0.0);
    const std::size_t take = std::min(m, n - s * m);
    for (std::size_t i = 0; i < take; ++i)
      segs[s].values[i] = record.samples[s * m + i];
  }
  return segs;
}

// Periodic impulse train at fault_freq_hz, each impulse ringing as an
// exponentially decaying cosine at resonance_hz, plus white Gaussian noise.
// The cosine puts the envelope peak exactly at the impulse onset.
inline SampleRecord synthesize_bearing(const SynthConfig& cfg) {
  if (cfg.duration_s <= 0.0 || cfg.sample_rate_hz <= 0.0 ||
      cfg.fault_freq_hz <= 0.0 || cfg.resonance_hz <= 0.0 ||
      cfg.ring_decay <= 0.0)
    throw std::invalid_argument("synthesize_bearing: rates and durations must be positive");
  if (cfg.noise_std < 0.0)
    throw std::invalid_argument("synthesize_bearing: noise_std must be >= 0");

  const std::size_t n =
      static_cast<std::size_t>(std::llround(cfg.duration_s * cfg.sample_rate_hz));
  SampleRecord rec;
  rec.sample_rate_hz = cfg.sample_rate_hz;
  rec.label = "synthetic-bearing";
  rec.samples.assign(n, 0.0);

  // Ring contributions below this relative level are dropped.
  const double tail_s = -std::log(1e-12) / cfg.ring_decay;
  const double omega = 2.0 * std::numbers::pi * cfg.resonance_hz;
  const double dt = 1.0 / cfg.sample_rate_hz;
  const std::size_t impulses =
      static_cast<std::size_t>(cfg.duration_s * cfg.fault_freq_hz) + 1;
  for (std::size_t k = 0; k < impulses; ++k) {
    const double onset = static_cast<double>(k) / cfg.fault_freq_hz;
    if (onset >= cfg.duration_s) break;
    const auto first = static_cast<std::size_t>(std::ceil(onset / dt - 1e-9));
    const auto last = std::min(
        n, static_cast<std::size_t>(std::ceil((onset + tail_s) / dt)));
    for (std::size_t i = first; i < last; ++i) {
      const double tau = static_cast<double>(i) * dt - onset;
      rec.samples[i] +=
          cfg.amplitude * std::exp(-cfg.ring_decay * tau) * std::cos(omega * tau);
    }
  }

  if (cfg.noise_std > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    for (double& v : rec.samples) v += cfg.noise_std * gaussian(rng);
  }
  return rec;
}

// Leading floor(train_fraction * len) samples vs the remainder; the two parts
// concatenate back to the input.
inline std::pair<SampleRecord, SampleRecord> split_record(
    const SampleRecord& record, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::invalid_argument("train_fraction must lie in (0,1)");
  const std::size_t n = record.samples.size();
  const auto cut = static_cast<std::size_t>(
      std::floor(train_fraction * static_cast<double>(n)));
  SampleRecord head, tail;
  head.sample_rate_hz = tail.sample_rate_hz = record.sample_rate_hz;
  head.label = record.label;
  tail.label = record.label;
  head.samples.assign(record.samples.begin(),
                      record.samples.begin() + static_cast<std::ptrdiff_t>(cut));
  tail.samples.assign(record.samples.begin() + static_cast<std::ptrdiff_t>(cut),
                      record.samples.end());
  return {std::move(head), std::move(tail)};
}

}  // namespace aalwt
