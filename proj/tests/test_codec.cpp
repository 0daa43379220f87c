#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "aalwt/codec.hpp"
#include "aalwt/model_io.hpp"

using namespace aalwt;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng,
                               double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform_in(rng, lo, hi);
  return v;
}

// Identity wiring: front [0,1,0], branch convs pass-through, AHT transparent.
EncoderParams identity_encoder(std::size_t m) {
  EncoderParams e;
  e.front = {{0.0, 1.0, 0.0}, 0.0};
  for (auto& stage : e.left) {
    stage.conv = {{0.0, 1.0, 0.0}, 0.0};
    stage.aht = {std::vector<double>(m, 0.0), std::vector<double>(m, 1.0)};
  }
  e.right.conv = {{1.0}, 0.0};
  e.right.aht = {std::vector<double>(m, 0.0), std::vector<double>(m, 1.0)};
  return e;
}

}  // namespace

TEST_CASE("encoder parameter count is 74 at M=7") {
  std::mt19937_64 rng(1);
  const auto enc = make_encoder(7, rng);
  CHECK(count_parameters(enc) == 74);
}

TEST_CASE("a single kernel-3 convolution has 4 trainable scalars") {
  ConvParams p{{1, 2, 3}, 0.5};
  CHECK(count_parameters(p) == 4);
}

TEST_CASE("decoder parameter count at H=16, M=7 follows the layer dimensions") {
  std::mt19937_64 rng(2);
  const auto dec = make_decoder(7, 16, rng);
  // L1: 7*16+16, L2: 16*16+16, L3: 23*7+7
  CHECK(count_parameters(dec) == 568);
}

TEST_CASE("zero segment with zero biases encodes to the zero latent") {
  std::mt19937_64 rng(3);
  auto enc = make_encoder(7, rng);
  enc.front.bias = 0.0;
  for (auto& s : enc.left) s.conv.bias = 0.0;
  enc.right.conv.bias = 0.0;
  const std::vector<double> zeros(7, 0.0);
  for (double v : encoder_forward(zeros, enc)) CHECK(v == 0.0);
}

TEST_CASE("identity configuration doubles the wavelet transform of tanh") {
  const auto enc = identity_encoder(7);
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const auto seg = random_vec(7, rng, -1.5, 1.5);
    const auto z = encoder_forward(seg, enc);
    const auto direct = flat_from_coeffs(lwt_forward(tanh_eval(seg)));
    for (std::size_t i = 0; i < 7; ++i)
      CHECK(z[i] == doctest::Approx(2.0 * direct[i]).epsilon(1e-12));
  }
}

TEST_CASE("huge thresholds silence the encoder") {
  std::mt19937_64 rng(5);
  auto enc = make_encoder(7, rng);
  for (auto& s : enc.left)
    s.aht.thresholds.assign(7, 1e6);
  enc.right.aht.thresholds.assign(7, 1e6);
  const auto seg = random_vec(7, rng);
  for (double v : encoder_forward(seg, enc)) CHECK(v == 0.0);
}

TEST_CASE("branch block is homogeneous with zero thresholds and unit slopes") {
  auto enc = identity_encoder(7);
  std::mt19937_64 rng(6);
  enc.front = {{0.3, -0.2, 0.7}, 0.1};  // irrelevant to branch_forward
  for (auto& s : enc.left) s.conv.kernel = random_vec(3, rng);
  enc.right.conv.kernel = random_vec(1, rng);
  const auto x = random_vec(7, rng);
  std::vector<double> x2(7);
  for (std::size_t i = 0; i < 7; ++i) x2[i] = 2.0 * x[i];
  const auto z1 = branch_forward(x, enc);
  const auto z2 = branch_forward(x2, enc);
  for (std::size_t i = 0; i < 7; ++i)
    CHECK(z2[i] == doctest::Approx(2.0 * z1[i]).epsilon(1e-12));
}

TEST_CASE("decoder with zero weights returns the output bias") {
  DecoderParams dec;
  dec.l1 = {16, 7, std::vector<double>(112, 0.0), std::vector<double>(16, 0.0)};
  dec.l2 = {16, 16, std::vector<double>(256, 0.0), std::vector<double>(16, 0.0)};
  dec.l3 = {7, 23, std::vector<double>(161, 0.0), std::vector<double>(7, 3.25)};
  std::mt19937_64 rng(7);
  const auto latent = random_vec(7, rng);
  for (double v : decode_latent(latent, dec)) CHECK(v == 3.25);

  dec.l3.bias.assign(7, 0.0);
  for (double v : decode_latent(std::vector<double>(7, 0.0), dec))
    CHECK(v == 0.0);
}

TEST_CASE("decoder with an identity skip block reproduces the inverse LWT") {
  DecoderParams dec;
  dec.l1 = {16, 7, std::vector<double>(112, 0.0), std::vector<double>(16, 0.0)};
  dec.l2 = {16, 16, std::vector<double>(256, 0.0), std::vector<double>(16, 0.0)};
  // L3 = [0-block over the hidden part || identity over xbar]
  dec.l3 = {7, 23, std::vector<double>(161, 0.0), std::vector<double>(7, 0.0)};
  for (std::size_t r = 0; r < 7; ++r) dec.l3.weights[r * 23 + 16 + r] = 1.0;

  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 10; ++rep) {
    const auto latent = random_vec(7, rng);
    const auto y = decode_latent(latent, dec);
    const auto direct = lwt_inverse(coeffs_from_flat(latent, 7));
    for (std::size_t i = 0; i < 7; ++i)
      CHECK(y[i] == doctest::Approx(direct[i]).epsilon(1e-12));
  }
}

TEST_CASE("encoder and decoder output length is always M") {
  std::mt19937_64 rng(9);
  for (std::size_t m : {std::size_t{4}, std::size_t{7}, std::size_t{12}}) {
    const auto enc = make_encoder(m, rng);
    const auto dec = make_decoder(m, 16, rng);
    const auto z = encoder_forward(random_vec(m, rng), enc);
    CHECK(z.size() == m);
    CHECK(decode_latent(z, dec).size() == m);
  }
}

TEST_CASE("fd margin check flags probe points near the kinks") {
  auto enc = identity_encoder(7);
  std::vector<double> seg{0.4, -0.3, 0.2, 0.5, -0.6, 0.1, 0.3};
  EncoderCache cache;
  encoder_forward(seg, enc, &cache);
  CHECK(fd_margins_ok(cache, enc, 1e-5));  // thresholds 0, all |x| > margin

  // Put a threshold right on top of one conv output: margin violated.
  enc.left[0].aht.thresholds[2] = std::abs(cache.branch.left_conv[0][2]);
  CHECK_FALSE(fd_margins_ok(cache, enc, 1e-5));
}

TEST_CASE("quantizer worked examples") {
  CHECK(quantize_latent(std::vector<double>{0.0}, 3, 4.0)[0] == 0);
  CHECK(quantize_latent(std::vector<double>{0.010}, 3, 4.0)[0] == 3);
  CHECK(quantize_latent(std::vector<double>{-0.0113}, 3, 4.0)[0] == -3);
  CHECK_THROWS_AS(quantize_latent(std::vector<double>{1e9}, 3, 4.0),
                  std::overflow_error);
  CHECK_THROWS_AS(quantize_latent(std::vector<double>{1.0}, 3, 0.0),
                  std::invalid_argument);
}

TEST_CASE("dequantizer worked examples and the half-step bound") {
  const auto z = dequantize_latent(std::vector<std::int32_t>{3}, 3, 4.0);
  CHECK(z[0] == doctest::Approx(0.012).epsilon(1e-15));
  CHECK(std::abs(z[0] - 0.010) == doctest::Approx(0.002).epsilon(1e-12));
  CHECK(dequantize_latent(std::vector<std::int32_t>{0}, 3, 4.0)[0] == 0.0);
}

TEST_CASE("quantize-dequantize round-trip error never exceeds the bound") {
  std::mt19937_64 rng(10);
  const double bound = 4.0 / (2.0 * 1000.0);
  for (int rep = 0; rep < 100000; ++rep) {
    const double z = uniform_in(rng, -5.0, 5.0);
    const auto q = quantize_latent(std::vector<double>{z}, 3, 4.0);
    const double back = dequantize_latent(q, 3, 4.0)[0];
    CHECK(std::abs(back - z) <= bound + 1e-15);
  }
}

TEST_CASE("MAC counting follows both conventions") {
  CHECK(count_macs(7, 1, MacConvention::ConvsOnly) == 91);
  CHECK(count_macs(7, 1, MacConvention::AllMultiplies) == 133);
  CHECK(count_macs(7, 10, MacConvention::ConvsOnly) == 910);
  CHECK_THROWS_AS(count_macs(7, 0, MacConvention::ConvsOnly),
                  std::invalid_argument);
  std::mt19937_64 rng(13);
  const auto enc = make_encoder(7, rng);
  CHECK(count_macs(enc, 3, MacConvention::AllMultiplies) == 399);
}

TEST_CASE("model save/load reproduces every scalar bit-exactly") {
  std::mt19937_64 rng(11);
  Model model;
  model.config = CodecConfig{};
  model.encoder = make_encoder(7, rng);
  model.decoder = make_decoder(7, 16, rng);

  const auto path =
      (std::filesystem::temp_directory_path() / "aalwt_model_rt.json").string();
  save_model(path, model);
  const Model back = load_model(path);

  CHECK(param_values(back.encoder) == param_values(model.encoder));
  CHECK(param_values(back.decoder) == param_values(model.decoder));
  CHECK(back.config.alpha == model.config.alpha);
  CHECK(back.config.seed == model.config.seed);
  std::remove(path.c_str());
}

TEST_CASE("model load rejects corruption, truncation and unknown versions") {
  std::mt19937_64 rng(12);
  Model model;
  model.config = CodecConfig{};
  model.encoder = make_encoder(7, rng);
  model.decoder = make_decoder(7, 16, rng);
  const auto dir = std::filesystem::temp_directory_path();

  const auto good = (dir / "aalwt_model_good.json").string();
  save_model(good, model);
  std::ifstream in(good);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  in.close();

  const auto truncated = (dir / "aalwt_model_trunc.json").string();
  std::ofstream(truncated) << text.substr(0, text.size() / 2);
  CHECK_THROWS_AS(load_model(truncated), std::runtime_error);

  // Flip one digit inside a parameter value: CRC must catch it.
  const auto corrupted = (dir / "aalwt_model_bad.json").string();
  std::string bad_text = text;
  const auto pos = bad_text.find("\"weights\"");
  REQUIRE(pos != std::string::npos);
  for (std::size_t i = pos; i < bad_text.size(); ++i) {
    if (bad_text[i] >= '1' && bad_text[i] <= '8') {
      bad_text[i] = static_cast<char>(bad_text[i] + 1);
      break;
    }
  }
  std::ofstream(corrupted) << bad_text;
  CHECK_THROWS_WITH_AS(load_model(corrupted), doctest::Contains("CRC"),
                       std::runtime_error);

  // Unknown version byte.
  const auto versioned = (dir / "aalwt_model_ver.json").string();
  {
    nlohmann::json root = nlohmann::json::parse(text);
    root["model"]["format_version"] = 99;
    root["crc32"] = crc32(root["model"].dump());
    std::ofstream(versioned) << root.dump(2);
  }
  CHECK_THROWS_WITH_AS(load_model(versioned), doctest::Contains("version"),
                       std::runtime_error);

  for (const auto& p : {good, truncated, corrupted, versioned})
    std::remove(p.c_str());
}
