#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "aalwt/crc32.hpp"

namespace aalwt {

// Lossless coding of quantized latents: zero runs collapse to [0, count]
// token pairs, then one canonical Huffman code over the whole token alphabet
// (literals and run counts share it; the decoder disambiguates by grammar
// position). Run counts are capped at 255 so the table stays small.

using Token = std::int64_t;

inline constexpr int kMaxRun = 255;
inline constexpr int kMaxCodeLength = 32;

// ---------------------------------------------------------------------------
// RLE

inline std::vector<Token> rle_encode(std::span<const std::int32_t> values) {
  std::vector<Token> out;
  out.reserve(values.size());
  std::size_t i = 0;
  while (i < values.size()) {
    if (values[i] != 0) {
      out.push_back(values[i]);
      ++i;
      continue;
    }
    std::size_t run = 0;
    while (i < values.size() && values[i] == 0) {
      ++run;
      ++i;
    }
    while (run > 0) {
      const std::size_t chunk = std::min<std::size_t>(run, kMaxRun);
      out.push_back(0);
      out.push_back(static_cast<Token>(chunk));
      run -= chunk;
    }
  }
  return out;
}

inline std::vector<std::int32_t> rle_decode(std::span<const Token> tokens) {
  std::vector<std::int32_t> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const Token t = tokens[i];
    if (t == 0) {
      if (i + 1 >= tokens.size())
        throw std::runtime_error("rle_decode: dangling zero");
      const Token count = tokens[++i];
      if (count < 1 || count > kMaxRun)
        throw std::runtime_error("rle_decode: run count outside 1..255");
      out.insert(out.end(), static_cast<std::size_t>(count), 0);
    } else {
      if (t < std::numeric_limits<std::int32_t>::min() ||
          t > std::numeric_limits<std::int32_t>::max())
        throw std::runtime_error("rle_decode: literal outside 32-bit range");
      out.push_back(static_cast<std::int32_t>(t));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonical Huffman code table. Codes are fully determined by the
// (length asc, symbol asc) ordering, so only lengths travel in the container.

struct CodeTable {
  struct Entry {
    Token symbol;
    std::uint8_t length;       // 1..32
    std::uint32_t code = 0;    // assigned canonically
  };
  std::vector<Entry> entries;  // canonical order

  // Per-length decode acceleration: first canonical code and entry offset.
  std::array<std::uint32_t, kMaxCodeLength + 1> first_code{};
  std::array<std::uint32_t, kMaxCodeLength + 1> count{};
  std::array<std::uint32_t, kMaxCodeLength + 1> offset{};
  std::uint8_t max_length = 0;
  std::unordered_map<Token, std::size_t> index;

  const Entry* find(Token symbol) const {
    const auto it = index.find(symbol);
    return it == index.end() ? nullptr : &entries[it->second];
  }
};

namespace detail_entropy {

// Assign canonical codes to entries already holding (symbol, length); sorts,
// validates Kraft, and builds the decode tables.
inline void canonicalize(CodeTable& table) {
  auto& e = table.entries;
  std::sort(e.begin(), e.end(), [](const auto& a, const auto& b) {
    return a.length != b.length ? a.length < b.length : a.symbol < b.symbol;
  });
  // Exact Kraft check in units of 2^-32.
  std::uint64_t kraft = 0;
  for (const auto& entry : e) {
    if (entry.length < 1 || entry.length > kMaxCodeLength)
      throw std::runtime_error("code table: length outside 1..32");
    kraft += 1ull << (kMaxCodeLength - entry.length);
  }
  if (kraft > (1ull << kMaxCodeLength))
    throw std::runtime_error("code table: Kraft inequality violated");

  table.first_code.fill(0);
  table.count.fill(0);
  table.offset.fill(0);
  table.max_length = 0;
  std::uint64_t code = 0;
  std::uint8_t prev_len = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const std::uint8_t len = e[i].length;
    if (i > 0) code = (code + 1) << (len - prev_len);
    if (code >= (1ull << len))
      throw std::runtime_error("code table: canonical code overflow");
    e[i].code = static_cast<std::uint32_t>(code);
    if (table.count[len] == 0) {
      table.first_code[len] = e[i].code;
      table.offset[len] = static_cast<std::uint32_t>(i);
    }
    ++table.count[len];
    prev_len = len;
    table.max_length = std::max(table.max_length, len);
  }
  table.index.clear();
  for (std::size_t i = 0; i < e.size(); ++i) table.index.emplace(e[i].symbol, i);
}

}  // namespace detail_entropy

// Optimal prefix code from token frequencies, deterministic: leaves enter the
// build sorted by (frequency, symbol); the two-queue merge prefers leaves on
// frequency ties. Single-symbol streams get code length 1.
inline CodeTable build_code_table(std::span<const Token> tokens) {
  if (tokens.empty())
    throw std::invalid_argument("build_code_table: empty token stream");

  std::unordered_map<Token, std::uint64_t> freq;
  for (Token t : tokens) ++freq[t];

  struct Leaf {
    Token symbol;
    std::uint64_t freq;
  };
  std::vector<Leaf> leaves;
  leaves.reserve(freq.size());
  for (const auto& [sym, f] : freq) leaves.push_back({sym, f});
  std::sort(leaves.begin(), leaves.end(), [](const Leaf& a, const Leaf& b) {
    return a.freq != b.freq ? a.freq < b.freq : a.symbol < b.symbol;
  });

  CodeTable table;
  if (leaves.size() == 1) {
    table.entries.push_back({leaves[0].symbol, 1, 0});
    detail_entropy::canonicalize(table);
    return table;
  }

  // Two-queue Huffman: queue one holds the sorted leaves, queue two the
  // internal nodes in creation order (their weights are non-decreasing).
  struct Node {
    std::uint64_t weight;
    int left, right;  // children; -1 for leaves
  };
  std::vector<Node> nodes;
  nodes.reserve(2 * leaves.size());
  for (const Leaf& l : leaves) nodes.push_back({l.freq, -1, -1});
  std::vector<int> internal;
  std::size_t leaf_head = 0, internal_head = 0;
  auto take_min = [&]() -> int {
    const bool leaf_ok = leaf_head < leaves.size();
    const bool int_ok = internal_head < internal.size();
    if (leaf_ok &&
        (!int_ok ||
         nodes[static_cast<std::size_t>(leaf_head)].weight <=
             nodes[static_cast<std::size_t>(internal[internal_head])].weight))
      return static_cast<int>(leaf_head++);
    return internal[internal_head++];
  };
  while (leaves.size() - leaf_head + internal.size() - internal_head > 1) {
    const int a = take_min();
    const int b = take_min();
    nodes.push_back({nodes[static_cast<std::size_t>(a)].weight +
                         nodes[static_cast<std::size_t>(b)].weight,
                     a, b});
    internal.push_back(static_cast<int>(nodes.size()) - 1);
  }

  // Depths from the root down.
  std::vector<std::uint8_t> depth(nodes.size(), 0);
  for (std::size_t i = nodes.size(); i-- > 0;) {
    if (nodes[i].left >= 0) {
      const std::uint8_t d = depth[i];
      if (d + 1 > kMaxCodeLength)
        throw std::runtime_error("build_code_table: code length exceeds 32 bits");
      depth[static_cast<std::size_t>(nodes[i].left)] = d + 1;
      depth[static_cast<std::size_t>(nodes[i].right)] = d + 1;
    }
  }
  for (std::size_t i = 0; i < leaves.size(); ++i)
    table.entries.push_back({leaves[i].symbol, depth[i], 0});
  detail_entropy::canonicalize(table);
  return table;
}

// Rebuild a table from (symbol, length) pairs alone; canonical assignment
// makes this reproduce the encoder's codes exactly.
inline CodeTable code_table_from_lengths(
    std::vector<CodeTable::Entry> entries) {
  CodeTable table;
  table.entries = std::move(entries);
  detail_entropy::canonicalize(table);
  return table;
}

// ---------------------------------------------------------------------------
// Bit-level coding, MSB-first within bytes, zero padding to a byte boundary.

struct EncodedPayload {
  std::vector<std::uint8_t> bytes;
  std::uint64_t bit_count = 0;
};

inline EncodedPayload entropy_encode(std::span<const Token> tokens,
                                     const CodeTable& table) {
  EncodedPayload out;
  std::uint64_t acc = 0;
  int acc_bits = 0;
  for (Token t : tokens) {
    const CodeTable::Entry* e = table.find(t);
    if (!e)
      throw std::runtime_error("entropy_encode: token absent from code table: " +
                               std::to_string(t));
    acc = (acc << e->length) | e->code;
    acc_bits += e->length;
    out.bit_count += e->length;
    while (acc_bits >= 8) {
      out.bytes.push_back(static_cast<std::uint8_t>(acc >> (acc_bits - 8)));
      acc_bits -= 8;
    }
  }
  if (acc_bits > 0)
    out.bytes.push_back(static_cast<std::uint8_t>(acc << (8 - acc_bits)));
  return out;
}

inline std::vector<Token> entropy_decode(std::span<const std::uint8_t> bytes,
                                         std::uint64_t bit_count,
                                         const CodeTable& table,
                                         std::uint64_t token_count) {
  std::vector<Token> out;
  out.reserve(token_count);
  std::uint64_t pos = 0;
  auto next_bit = [&]() -> std::uint32_t {
    if (pos >= bit_count)
      throw std::runtime_error("entropy_decode: bits exhausted early");
    const std::uint8_t byte = bytes[pos >> 3];
    const std::uint32_t bit = (byte >> (7 - (pos & 7))) & 1u;
    ++pos;
    return bit;
  };
  for (std::uint64_t n = 0; n < token_count; ++n) {
    std::uint32_t code = 0;
    bool found = false;
    for (int len = 1; len <= table.max_length && !found; ++len) {
      code = (code << 1) | next_bit();
      const auto l = static_cast<std::size_t>(len);
      if (table.count[l] != 0 && code >= table.first_code[l] &&
          code - table.first_code[l] < table.count[l]) {
        out.push_back(
            table.entries[table.offset[l] + (code - table.first_code[l])].symbol);
        found = true;
      }
    }
    if (!found) throw std::runtime_error("entropy_decode: invalid prefix");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Compressed container. All multi-byte integers little-endian:
//   magic "AALW" | version u8=1 | M u16 | segment_count u32 |
//   original_sample_count u64 | pad_length u8 | mu u8 | alpha f32 |
//   token_count u64 | table_size u16 | (zigzag-varint symbol, u8 length)* |
//   payload_bit_count u64 | payload bytes | crc32 u32 (of everything prior)

struct StreamHeader {
  std::uint16_t m = 0;
  std::uint32_t segment_count = 0;
  std::uint64_t original_sample_count = 0;
  std::uint8_t pad_length = 0;
  std::uint8_t mu = 0;
  float alpha = 1.0f;
};

namespace detail_entropy {

inline constexpr char kMagic[4] = {'A', 'A', 'L', 'W'};
inline constexpr std::uint8_t kVersion = 1;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) { u8(static_cast<std::uint8_t>(v)); u8(static_cast<std::uint8_t>(v >> 8)); }
  void u32(std::uint32_t v) { u16(static_cast<std::uint16_t>(v)); u16(static_cast<std::uint16_t>(v >> 16)); }
  void u64(std::uint64_t v) { u32(static_cast<std::uint32_t>(v)); u32(static_cast<std::uint32_t>(v >> 32)); }
  void f32(float v) {
    std::uint32_t bits;
    static_assert(sizeof bits == sizeof v);
    std::memcpy(&bits, &v, sizeof bits);
    u32(bits);
  }
  void varint(std::uint64_t v) {
    while (v >= 0x80) {
      u8(static_cast<std::uint8_t>(v) | 0x80);
      v >>= 7;
    }
    u8(static_cast<std::uint8_t>(v));
  }
  void raw(std::span<const std::uint8_t> b) {
    bytes_.insert(bytes_.end(), b.begin(), b.end());
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> b) : bytes_(b) {}
  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint16_t u16() { const auto lo = u8(); return static_cast<std::uint16_t>(lo | (u8() << 8)); }
  std::uint32_t u32() { const auto lo = u16(); return lo | (static_cast<std::uint32_t>(u16()) << 16); }
  std::uint64_t u64() { const auto lo = u32(); return lo | (static_cast<std::uint64_t>(u32()) << 32); }
  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::uint64_t varint() {
    std::uint64_t v = 0;
    int shift = 0;
    while (true) {
      const std::uint8_t b = u8();
      v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
      if (!(b & 0x80)) break;
      shift += 7;
      if (shift >= 64) throw std::runtime_error("bitstream: varint overflow");
    }
    return v;
  }
  std::span<const std::uint8_t> raw(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t position() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size())
      throw std::runtime_error("bitstream: truncated");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

inline std::uint64_t zigzag(std::int64_t v) {
  return (static_cast<std::uint64_t>(v) << 1) ^
         static_cast<std::uint64_t>(v >> 63);
}
inline std::int64_t unzigzag(std::uint64_t v) {
  return static_cast<std::int64_t>(v >> 1) ^
         -static_cast<std::int64_t>(v & 1);
}

}  // namespace detail_entropy

inline std::vector<std::uint8_t> pack_stream(
    const StreamHeader& header, std::span<const std::int32_t> latents) {
  if (latents.size() !=
      static_cast<std::size_t>(header.segment_count) * header.m &&
      !(header.segment_count == 0 && latents.empty()))
    throw std::invalid_argument("pack_stream: latent count inconsistent with header");
  if (header.pad_length >= header.m && header.segment_count > 0)
    throw std::invalid_argument("pack_stream: pad length must be < M");

  detail_entropy::ByteWriter w;
  w.raw(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(detail_entropy::kMagic), 4));
  w.u8(detail_entropy::kVersion);
  w.u16(header.m);
  w.u32(header.segment_count);
  w.u64(header.original_sample_count);
  w.u8(header.pad_length);
  w.u8(header.mu);
  w.f32(header.alpha);

  const std::vector<Token> tokens = rle_encode(latents);
  w.u64(tokens.size());
  if (tokens.empty()) {
    w.u16(0);
    w.u64(0);
  } else {
    const CodeTable table = build_code_table(tokens);
    if (table.entries.size() > 0xFFFF)
      throw std::runtime_error("pack_stream: code table too large");
    w.u16(static_cast<std::uint16_t>(table.entries.size()));
    for (const auto& e : table.entries) {
      w.varint(detail_entropy::zigzag(e.symbol));
      w.u8(e.length);
    }
    const EncodedPayload payload = entropy_encode(tokens, table);
    w.u64(payload.bit_count);
    w.raw(payload.bytes);
  }

  std::vector<std::uint8_t> bytes = w.take();
  const std::uint32_t crc = crc32(bytes);
  detail_entropy::ByteWriter tail;
  tail.u32(crc);
  const auto t = tail.take();
  bytes.insert(bytes.end(), t.begin(), t.end());
  return bytes;
}

inline std::pair<StreamHeader, std::vector<std::int32_t>> unpack_stream(
    std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw std::runtime_error("bitstream: truncated");
  const std::uint32_t stored_crc =
      static_cast<std::uint32_t>(bytes[bytes.size() - 4]) |
      (static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 8) |
      (static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 16) |
      (static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24);
  if (crc32(bytes.subspan(0, bytes.size() - 4)) != stored_crc)
    throw std::runtime_error("bitstream: CRC mismatch");

  detail_entropy::ByteReader r(bytes.subspan(0, bytes.size() - 4));
  const auto magic = r.raw(4);
  if (!std::equal(magic.begin(), magic.end(),
                  reinterpret_cast<const std::uint8_t*>(detail_entropy::kMagic)))
    throw std::runtime_error("bitstream: bad magic");
  if (r.u8() != detail_entropy::kVersion)
    throw std::runtime_error("bitstream: unsupported version");

  StreamHeader h;
  h.m = r.u16();
  h.segment_count = r.u32();
  h.original_sample_count = r.u64();
  h.pad_length = r.u8();
  h.mu = r.u8();
  h.alpha = r.f32();

  const std::uint64_t token_count = r.u64();
  const std::uint16_t table_size = r.u16();
  std::vector<Token> tokens;
  if (table_size > 0) {
    std::vector<CodeTable::Entry> entries(table_size);
    for (auto& e : entries) {
      e.symbol = detail_entropy::unzigzag(r.varint());
      e.length = r.u8();
    }
    const CodeTable table = code_table_from_lengths(std::move(entries));
    const std::uint64_t bit_count = r.u64();
    const std::size_t payload_bytes =
        static_cast<std::size_t>((bit_count + 7) / 8);
    tokens = entropy_decode(r.raw(payload_bytes), bit_count, table, token_count);
  } else {
    if (token_count != 0)
      throw std::runtime_error("bitstream: tokens without a code table");
    if (r.u64() != 0)
      throw std::runtime_error("bitstream: payload bits without a code table");
  }

  std::vector<std::int32_t> latents = rle_decode(tokens);
  if (latents.size() !=
      static_cast<std::size_t>(h.segment_count) * h.m)
    throw std::runtime_error("bitstream: latent count inconsistent with header");
  if (static_cast<std::uint64_t>(h.segment_count) * h.m !=
      h.original_sample_count + h.pad_length)
    throw std::runtime_error("bitstream: sample/pad counts inconsistent");
  return {h, std::move(latents)};
}

}  // namespace aalwt
