#pragma once

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "aalwt/codec.hpp"
#include "aalwt/crc32.hpp"

namespace aalwt {

// Model files are JSON: {"model": {format_version, M, H, config, encoder,
// decoder}, "crc32": <u32 of the canonical model dump>}. nlohmann serializes
// doubles with shortest round-trip precision and sorts object keys, so
// save -> load reproduces every scalar bit-exactly and the CRC is stable.

inline constexpr int kModelFormatVersion = 1;

namespace detail_model {

using nlohmann::json;

inline json to_json(const ConvParams& p) {
  return json{{"kernel", p.kernel}, {"bias", p.bias}};
}
inline json to_json(const AhtParams& p) {
  return json{{"thresholds", p.thresholds}, {"slopes", p.slopes}};
}
inline json to_json(const LinearParams& p) {
  return json{{"out", p.out_dim}, {"in", p.in_dim},
              {"weights", p.weights}, {"bias", p.bias}};
}
inline json to_json(const BranchStage& s) {
  json j = to_json(s.conv);
  j["thresholds"] = s.aht.thresholds;
  j["slopes"] = s.aht.slopes;
  return j;
}

inline ConvParams conv_from_json(const json& j) {
  ConvParams p;
  p.kernel = j.at("kernel").get<std::vector<double>>();
  p.bias = j.at("bias").get<double>();
  if (p.kernel.size() != 1 && p.kernel.size() != 3)
    throw std::runtime_error("model file: kernel length must be 1 or 3");
  return p;
}
inline AhtParams aht_from_json(const json& j) {
  AhtParams p;
  p.thresholds = j.at("thresholds").get<std::vector<double>>();
  p.slopes = j.at("slopes").get<std::vector<double>>();
  if (p.thresholds.size() != p.slopes.size())
    throw std::runtime_error("model file: AHT arrays length mismatch");
  return p;
}
inline LinearParams linear_from_json(const json& j) {
  LinearParams p;
  p.out_dim = j.at("out").get<std::size_t>();
  p.in_dim = j.at("in").get<std::size_t>();
  p.weights = j.at("weights").get<std::vector<double>>();
  p.bias = j.at("bias").get<std::vector<double>>();
  if (p.weights.size() != p.out_dim * p.in_dim || p.bias.size() != p.out_dim)
    throw std::runtime_error("model file: linear layer dimensions inconsistent");
  return p;
}
inline BranchStage stage_from_json(const json& j) {
  return {conv_from_json(j), aht_from_json(j)};
}

inline json config_to_json(const CodecConfig& c) {
  return json{{"M", c.M},
              {"hidden", c.hidden},
              {"mu", c.mu},
              {"alpha", c.alpha},
              {"lambda", c.lambda},
              {"omega", c.omega},
              {"phi", c.phi},
              {"learning_rate", c.learning_rate},
              {"batch_size", c.batch_size},
              {"seed", c.seed},
              {"sample_bits", c.sample_bits}};
}

inline CodecConfig config_from_json(const json& j) {
  CodecConfig c;
  c.M = j.at("M").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.mu = j.at("mu").get<int>();
  c.alpha = j.at("alpha").get<double>();
  c.lambda = j.at("lambda").get<double>();
  c.omega = j.at("omega").get<double>();
  c.phi = j.at("phi").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.sample_bits = j.at("sample_bits").get<int>();
  return c;
}

}  // namespace detail_model

struct Model {
  EncoderParams encoder;
  DecoderParams decoder;
  CodecConfig config;
};

inline void save_model(const std::string& path, const Model& model) {
  for (double v : param_values(model.encoder))
    if (!std::isfinite(v))
      throw std::invalid_argument("save_model: non-finite parameter");
  for (double v : param_values(model.decoder))
    if (!std::isfinite(v))
      throw std::invalid_argument("save_model: non-finite parameter");

  using detail_model::json;
  json m;
  m["format_version"] = kModelFormatVersion;
  m["M"] = model.config.M;
  m["H"] = model.config.hidden;
  m["config"] = detail_model::config_to_json(model.config);
  json enc;
  enc["front"] = detail_model::to_json(model.encoder.front);
  enc["left"] = json::array();
  for (const auto& stage : model.encoder.left)
    enc["left"].push_back(detail_model::to_json(stage));
  enc["right"] = detail_model::to_json(model.encoder.right);
  m["encoder"] = enc;
  json dec;
  dec["l1"] = detail_model::to_json(model.decoder.l1);
  dec["l2"] = detail_model::to_json(model.decoder.l2);
  dec["l3"] = detail_model::to_json(model.decoder.l3);
  m["decoder"] = dec;

  json root;
  root["model"] = m;
  root["crc32"] = crc32(m.dump());

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open model file for writing: " + path);
  out << root.dump(2) << '\n';
  if (!out) throw std::runtime_error("write error: " + path);
}

inline Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  detail_model::json root;
  try {
    in >> root;
  } catch (const std::exception& e) {
    throw std::runtime_error("model file corrupted: " + std::string(e.what()));
  }
  if (!root.contains("model") || !root.contains("crc32"))
    throw std::runtime_error("model file: missing model/crc32 fields");
  const auto& m = root.at("model");
  if (crc32(m.dump()) != root.at("crc32").get<std::uint32_t>())
    throw std::runtime_error("model file: CRC mismatch");
  const int version = m.at("format_version").get<int>();
  if (version != kModelFormatVersion)
    throw std::runtime_error("model file: unsupported format version " +
                             std::to_string(version));

  Model model;
  model.config = detail_model::config_from_json(m.at("config"));
  if (m.at("M").get<std::size_t>() != model.config.M ||
      m.at("H").get<std::size_t>() != model.config.hidden)
    throw std::runtime_error("model file: M/H fields disagree with config");

  const auto& enc = m.at("encoder");
  model.encoder.front = detail_model::conv_from_json(enc.at("front"));
  const auto& left = enc.at("left");
  if (!left.is_array() || left.size() != 3)
    throw std::runtime_error("model file: left branch must have 3 stages");
  for (std::size_t i = 0; i < 3; ++i)
    model.encoder.left[i] = detail_model::stage_from_json(left.at(i));
  model.encoder.right = detail_model::stage_from_json(enc.at("right"));

  const auto& dec = m.at("decoder");
  model.decoder.l1 = detail_model::linear_from_json(dec.at("l1"));
  model.decoder.l2 = detail_model::linear_from_json(dec.at("l2"));
  model.decoder.l3 = detail_model::linear_from_json(dec.at("l3"));

  validate(model.config);
  const std::size_t mdim = model.config.M;
  const std::size_t h = model.config.hidden;
  if (model.decoder.l1.in_dim != mdim || model.decoder.l1.out_dim != h ||
      model.decoder.l2.in_dim != h || model.decoder.l2.out_dim != h ||
      model.decoder.l3.in_dim != h + mdim || model.decoder.l3.out_dim != mdim)
    throw std::runtime_error("model file: decoder dimensions inconsistent with M/H");
  for (const auto& stage : model.encoder.left)
    if (stage.aht.thresholds.size() != mdim)
      throw std::runtime_error("model file: AHT length inconsistent with M");
  if (model.encoder.right.aht.thresholds.size() != mdim)
    throw std::runtime_error("model file: AHT length inconsistent with M");
  return model;
}

}  // namespace aalwt
