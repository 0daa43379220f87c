#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "aalwt/metrics.hpp"
#include "aalwt/training.hpp"

using namespace aalwt;

TEST_CASE("distortion metrics vanish for a perfect reconstruction") {
  const std::vector<double> x{1, -2, 3, 0.5};
  const auto m = distortion_metrics(x, x);
  CHECK(m.prd == 0.0);
  CHECK(m.prdn == 0.0);
  CHECK(m.rmse == 0.0);
}

TEST_CASE("distortion metrics on the worked two-sample example") {
  const std::vector<double> x{3, 4};
  const std::vector<double> y{0, 0};
  const auto m = distortion_metrics(x, y);
  CHECK(m.prd == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(m.rmse == doctest::Approx(std::sqrt(12.5)).epsilon(1e-12));
  CHECK(m.prdn == doctest::Approx(100.0 * std::sqrt(25.0 / 0.5)).epsilon(1e-12));
  CHECK(m.prdn == doctest::Approx(707.1067811865476).epsilon(1e-12));
}

TEST_CASE("a constant shift shows up as rmse == |c|") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y(x);
  for (double& v : y) v += -0.75;
  CHECK(distortion_metrics(x, y).rmse == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("distortion metrics reject degenerate signals") {
  const std::vector<double> zero{0, 0, 0};
  CHECK_THROWS_WITH_AS(distortion_metrics(zero, zero),
                       doctest::Contains("PRD"), std::invalid_argument);
  const std::vector<double> constant{2, 2, 2};
  CHECK_THROWS_WITH_AS(distortion_metrics(constant, constant),
                       doctest::Contains("PRDN"), std::invalid_argument);
  CHECK_THROWS_AS(distortion_metrics(std::vector<double>{1.0},
                                     std::vector<double>{1.0}),
                  std::invalid_argument);
}

TEST_CASE("PRDN dominates PRD when the mean is nonzero") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> x(64), y(64);
    const double mean = uniform_in(rng, 0.5, 2.0);
    for (std::size_t i = 0; i < 64; ++i) {
      x[i] = mean + uniform_in(rng, -0.3, 0.3);
      y[i] = x[i] + uniform_in(rng, -0.1, 0.1);
    }
    const auto m = distortion_metrics(x, y);
    CHECK(m.prdn >= m.prd);
  }
}

TEST_CASE("compression ratio arithmetic") {
  CHECK(compression_ratio(1000, 32, 500) == doctest::Approx(8.0));  // 4000 bits
  CHECK(compression_ratio(100, 32, 400) == doctest::Approx(1.0));
  CHECK_THROWS_AS(compression_ratio(0, 32, 10), std::invalid_argument);
  CHECK_THROWS_AS(compression_ratio(10, 32, 0), std::invalid_argument);
}

TEST_CASE("quality score follows the published rows") {
  CHECK(quality_score(9.91, 17.29) == doctest::Approx(0.57).epsilon(0.01));
  CHECK(quality_score(31.37, 16.36) == doctest::Approx(1.92).epsilon(0.01));
  CHECK_THROWS_AS(quality_score(5.0, 0.0), std::invalid_argument);
}

TEST_CASE("qs times prd reproduces cr") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 100; ++rep) {
    const double cr = uniform_in(rng, 0.5, 50.0);
    const double prd = uniform_in(rng, 0.1, 80.0);
    CHECK(std::abs(quality_score(cr, prd) * prd - cr) <= 1e-12);
  }
}

TEST_CASE("evaluate_record runs the full pipeline deterministically") {
  SynthConfig scfg;
  scfg.duration_s = 0.5;
  scfg.sample_rate_hz = 4000.0;
  scfg.seed = 5;
  const auto record = synthesize_bearing(scfg);

  std::mt19937_64 rng(6);
  const auto enc = make_encoder(7, rng);
  const auto dec = make_decoder(7, 16, rng);
  CodecConfig cfg;

  const auto a = evaluate_record(record, enc, dec, cfg);
  const auto b = evaluate_record(record, enc, dec, cfg);
  CHECK(a.prd == b.prd);
  CHECK(a.cr == b.cr);
  CHECK(a.bitstream_bytes == b.bitstream_bytes);
  CHECK(a.sample_count == record.samples.size());
  CHECK(a.qs == doctest::Approx(a.cr / a.prd).epsilon(1e-12));
}

TEST_CASE("evaluate_record propagates the zero-energy error") {
  SampleRecord zero;
  zero.sample_rate_hz = 100.0;
  zero.samples.assign(70, 0.0);
  std::mt19937_64 rng(7);
  const auto enc = make_encoder(7, rng);
  const auto dec = make_decoder(7, 16, rng);
  CodecConfig cfg;
  CHECK_THROWS_AS(evaluate_record(zero, enc, dec, cfg), std::invalid_argument);
}

TEST_CASE("reconstruction length equals the original for awkward lengths") {
  std::mt19937_64 rng(8);
  const auto enc = make_encoder(7, rng);
  const auto dec = make_decoder(7, 16, rng);
  CodecConfig cfg;
  for (std::size_t n : {std::size_t{15}, std::size_t{70}, std::size_t{71}}) {
    SampleRecord rec;
    rec.sample_rate_hz = 100.0;
    for (std::size_t i = 0; i < n; ++i)
      rec.samples.push_back(uniform_in(rng, -1.0, 1.0));
    const auto bytes = compress_record(rec, enc, cfg);
    const auto back = decompress_stream(bytes, dec);
    CHECK(back.size() == n);
  }
}

TEST_CASE("metrics render as CSV and as an aligned table") {
  MetricsReport r;
  r.cr = 9.91;
  r.prd = 17.29;
  r.prdn = 17.50;
  r.rmse = 4.15;
  r.qs = 0.57;
  r.sample_count = 1000;
  r.bitstream_bytes = 404;
  const auto csv = metrics_csv(r);
  CHECK(csv.find("cr,prd,prdn,rmse,qs,samples,bytes") == 0);
  CHECK(csv.find("9.91") != std::string::npos);
  const auto table = metrics_table(r);
  CHECK(table.find("cr") != std::string::npos);
  CHECK(table.find("prdn") != std::string::npos);
  CHECK(table.find("17.29") != std::string::npos);
}
