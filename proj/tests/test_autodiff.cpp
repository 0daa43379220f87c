#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "aalwt/autodiff.hpp"
#include "aalwt/random.hpp"

using namespace aalwt;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng,
                               double lo = -2.0, double hi = 2.0) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform_in(rng, lo, hi);
  return v;
}

}  // namespace

TEST_CASE("conv1d_same: identity kernel") {
  const std::vector<double> x{0.5, -1.0, 2.0, 3.0};
  const ConvParams p{{0.0, 1.0, 0.0}, 0.0};
  CHECK(conv1d_same(x, p) == x);
}

TEST_CASE("conv1d_same: stated correlation with zero padding") {
  const std::vector<double> x{1, 2, 3};
  const ConvParams p{{1.0, 0.0, -1.0}, 0.0};
  const auto y = conv1d_same(x, p);
  REQUIRE(y.size() == 3);
  CHECK(y[0] == -2.0);
  CHECK(y[1] == -2.0);
  CHECK(y[2] == 2.0);
}

TEST_CASE("conv1d_same: one-by-one kernel is an affine map") {
  const std::vector<double> x{1, -2, 4};
  const ConvParams p{{1.5}, 0.25};
  const auto y = conv1d_same(x, p);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(y[i] == doctest::Approx(1.5 * x[i] + 0.25));
}

TEST_CASE("conv1d_same rejects unsupported kernel lengths") {
  CHECK_THROWS_AS(conv1d_same(std::vector<double>{1.0},
                              ConvParams{{1.0, 2.0}, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(conv1d_same(std::vector<double>{1.0},
                              ConvParams{{1, 2, 3, 4, 5}, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("conv1d_same gradients match finite differences") {
  std::mt19937_64 rng(21);
  for (std::size_t klen : {std::size_t{1}, std::size_t{3}}) {
    ConvParams p;
    p.kernel = random_vec(klen, rng);
    p.bias = uniform_in(rng, -1.0, 1.0);
    const auto x = random_vec(9, rng);
    const auto w = random_vec(9, rng);  // random linear functional

    auto objective = [&]() {
      const auto y = conv1d_same(x, p);
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
      return s;
    };

    ConvParams gp = zeros_like(p);
    std::vector<double> gx;
    conv1d_same_backward(x, p, w, gx, gp);

    std::vector<double> analytic = gp.kernel;
    analytic.push_back(gp.bias);
    std::vector<double*> ptrs;
    for (double& v : p.kernel) ptrs.push_back(&v);
    ptrs.push_back(&p.bias);
    for (std::size_t i = 0; i < ptrs.size(); ++i) {
      const double saved = *ptrs[i];
      const double eps = 1e-6;
      *ptrs[i] = saved + eps;
      const double fp = objective();
      *ptrs[i] = saved - eps;
      const double fm = objective();
      *ptrs[i] = saved;
      const double numeric = (fp - fm) / (2 * eps);
      CHECK(std::abs(analytic[i] - numeric) /
                std::max(std::abs(numeric), 1e-8) <
            1e-5);
    }

    // Input gradients through the same functional.
    std::vector<double> xi = x;
    auto objective_x = [&]() {
      const auto y = conv1d_same(xi, p);
      double s = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
      return s;
    };
    CHECK(max_relative_fd_error(objective_x, xi, gx) < 1e-5);
  }
}

TEST_CASE("linear layer: identity, constant and a 2x2 example") {
  LinearParams id{2, 2, {1, 0, 0, 1}, {0, 0}};
  const std::vector<double> x{3.0, -1.0};
  CHECK(linear_apply(x, id) == x);

  LinearParams constant{2, 2, {0, 0, 0, 0}, {5.0, 5.0}};
  for (double v : linear_apply(x, constant)) CHECK(v == 5.0);

  LinearParams w{2, 2, {1, 2, 3, 4}, {0, 0}};
  const auto y = linear_apply(std::vector<double>{1.0, 1.0}, w);
  CHECK(y[0] == 3.0);
  CHECK(y[1] == 7.0);

  CHECK_THROWS_AS(linear_apply(std::vector<double>{1.0}, w),
                  std::invalid_argument);
}

TEST_CASE("linear layer gradients match finite differences") {
  std::mt19937_64 rng(22);
  LinearParams p;
  p.out_dim = 4;
  p.in_dim = 6;
  p.weights = random_vec(24, rng);
  p.bias = random_vec(4, rng);
  const auto x = random_vec(6, rng);
  const auto w = random_vec(4, rng);

  auto objective = [&]() {
    const auto y = linear_apply(x, p);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
    return s;
  };
  LinearParams gp = zeros_like(p);
  std::vector<double> gx;
  linear_backward(x, p, w, gx, gp);

  std::vector<double> flat = p.weights;
  flat.insert(flat.end(), p.bias.begin(), p.bias.end());
  std::vector<double> analytic = gp.weights;
  analytic.insert(analytic.end(), gp.bias.begin(), gp.bias.end());
  auto objective_flat = [&]() {
    std::copy(flat.begin(), flat.begin() + 24, p.weights.begin());
    std::copy(flat.begin() + 24, flat.end(), p.bias.begin());
    return objective();
  };
  CHECK(max_relative_fd_error(objective_flat, flat, analytic) < 1e-5);
}

TEST_CASE("tanh: fixed points, saturation and unit slope at zero") {
  const std::vector<double> x{0.0, 20.0, -20.0};
  const auto y = tanh_eval(x);
  CHECK(y[0] == 0.0);
  CHECK(y[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(y[2] == doctest::Approx(-1.0).epsilon(1e-12));

  std::vector<double> probe{0.0};
  auto objective = [&]() { return tanh_eval(probe)[0]; };
  const auto g = tanh_backward(tanh_eval(probe), std::vector<double>{1.0});
  CHECK(g[0] == 1.0);
  CHECK(max_relative_fd_error(objective, probe, g) < 1e-9);
}

TEST_CASE("AHT forward: the three worked points") {
  AhtParams p{{0.5}, {1.0}};
  CHECK(aht_eval(std::vector<double>{2.0}, p)[0] == 2.0);
  CHECK(aht_eval(std::vector<double>{0.3}, p)[0] == 0.0);
  AhtParams half{{0.5}, {0.5}};
  CHECK(aht_eval(std::vector<double>{-2.0}, half)[0] == -1.0);
}

TEST_CASE("AHT piecewise law holds pointwise around each threshold") {
  AhtParams p{{0.5, 1.0, 0.0}, {2.0, -1.5, 0.7}};
  for (std::size_t k = 0; k < 3; ++k) {
    for (int step = -40; step <= 40; ++step) {
      const double x = p.thresholds[k] + static_cast<double>(step) * 0.005;
      std::vector<double> in(3, 0.0);
      in[k] = x;
      const double out = aht_eval(in, p)[k];
      if (std::abs(x) > p.thresholds[k])
        CHECK(out == p.slopes[k] * x);
      else
        CHECK(out == 0.0);
    }
  }
}

TEST_CASE("AHT input and slope gradients match finite differences") {
  std::mt19937_64 rng(23);
  AhtParams p;
  p.thresholds = random_vec(7, rng, 0.1, 0.5);
  p.slopes = random_vec(7, rng, 0.5, 2.0);
  // Margin-respecting probe: keep ||x|-C| well away from 0.
  std::vector<double> x(7);
  for (std::size_t i = 0; i < 7; ++i) {
    const double sign = i % 2 == 0 ? 1.0 : -1.0;
    const double offset = i % 3 == 0 ? -0.09 : 0.3;  // below or above C
    x[i] = sign * (p.thresholds[i] + offset);
  }
  const auto w = random_vec(7, rng);

  AhtParams gp = zeros_like(p);
  std::vector<double> gx;
  aht_backward(x, p, w, gx, gp);

  auto objective_x = [&]() {
    const auto y = aht_eval(x, p);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
    return s;
  };
  CHECK(max_relative_fd_error(objective_x, x, gx) < 1e-5);

  auto objective_slope = [&]() {
    const auto y = aht_eval(x, p);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
    return s;
  };
  CHECK(max_relative_fd_error(objective_slope, p.slopes, gp.slopes) < 1e-5);
}

TEST_CASE("AHT threshold surrogate equals its declared formula") {
  std::mt19937_64 rng(24);
  AhtParams p;
  p.thresholds = random_vec(7, rng, 0.05, 0.4);
  p.slopes = random_vec(7, rng, -1.5, 1.5);
  const auto x = random_vec(7, rng);
  const auto w = random_vec(7, rng);
  AhtParams gp = zeros_like(p);
  std::vector<double> gx;
  aht_backward(x, p, w, gx, gp);
  for (std::size_t k = 0; k < 7; ++k) {
    const double expected =
        std::abs(x[k]) > p.thresholds[k]
            ? w[k] * (-p.slopes[k] * (x[k] > 0 ? 1.0 : -1.0))
            : 0.0;
    CHECK(gp.thresholds[k] == expected);
  }

  // Frozen thresholds: no C gradient at all.
  AhtParams frozen = zeros_like(p);
  aht_backward(x, p, w, gx, frozen, /*train_thresholds=*/false);
  for (double g : frozen.thresholds) CHECK(g == 0.0);
  CHECK(frozen.slopes == gp.slopes);
}

TEST_CASE("AHT slope gradient worked example: d/dbeta = 2 at x=2, C=0.5") {
  AhtParams p{{0.5}, {1.0}};
  AhtParams gp = zeros_like(p);
  std::vector<double> gx;
  aht_backward(std::vector<double>{2.0}, p, std::vector<double>{1.0}, gx, gp);
  CHECK(gp.slopes[0] == 2.0);
  auto objective = [&]() { return aht_eval(std::vector<double>{2.0}, p)[0]; };
  CHECK(max_relative_fd_error(objective, p.slopes, gp.slopes) < 1e-8);
}

TEST_CASE("activity softmax: uniform at zero input, direct value at a spike") {
  const std::vector<double> zeros(7, 0.0);
  for (double a : activity_softmax(zeros))
    CHECK(a == doctest::Approx(1.0 / 7.0).epsilon(1e-14));

  std::vector<double> spike(7, 0.0);
  spike[0] = 10.0;
  const auto act = activity_softmax(spike);
  const double expected = std::exp(10.0) / (std::exp(10.0) + 6.0);
  CHECK(act[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(act[0] == doctest::Approx(0.999728).epsilon(1e-6));

  std::vector<double> neg(7);
  for (std::size_t i = 0; i < 7; ++i) neg[i] = -spike[i];
  CHECK(activity_softmax(neg) == act);
}

TEST_CASE("activity softmax sums to one") {
  std::mt19937_64 rng(25);
  for (int rep = 0; rep < 200; ++rep) {
    const auto z = random_vec(7, rng, -30.0, 30.0);
    const auto a = activity_softmax(z);
    double sum = 0.0;
    for (double v : a) {
      CHECK(v > 0.0);
      CHECK(v < 1.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("activity softmax backward matches finite differences") {
  std::mt19937_64 rng(26);
  std::vector<double> z = random_vec(7, rng, 0.2, 2.0);
  for (std::size_t i = 0; i < 7; i += 2) z[i] = -z[i];  // mixed signs, away from 0
  const auto w = random_vec(7, rng);
  auto objective = [&]() {
    const auto a = activity_softmax(z);
    double s = 0.0;
    for (std::size_t i = 0; i < 7; ++i) s += w[i] * a[i];
    return s;
  };
  const auto act = activity_softmax(z);
  const auto gz = activity_softmax_backward(z, act, w);
  CHECK(max_relative_fd_error(objective, z, gz) < 1e-5);
}

TEST_CASE("KLD penalty: zero at the matched distribution, positive elsewhere") {
  const std::vector<double> uniform(7, 1.0 / 7.0);
  CHECK(kld_penalty(uniform, 1.0 / 7.0) == doctest::Approx(0.0).epsilon(1e-15));

  // Direct scalar evaluation at lambda = 0.05, natural log.
  const double lambda = 0.05;
  const double zh = 1.0 / 7.0;
  const double per_term = lambda * std::log(lambda / zh) +
                          (1.0 - lambda) * std::log((1.0 - lambda) / (1.0 - zh));
  const double total = kld_penalty(uniform, lambda);
  CHECK(total == doctest::Approx(7.0 * per_term).epsilon(1e-12));
  CHECK(total == doctest::Approx(0.316563869600).epsilon(1e-9));

  std::mt19937_64 rng(27);
  for (int rep = 0; rep < 200; ++rep) {
    const auto z = random_vec(7, rng, -3.0, 3.0);
    CHECK(kld_penalty(activity_softmax(z), 0.05) >= 0.0);
  }

  CHECK_THROWS_AS(kld_penalty(std::vector<double>{0.0, 1.0}, 0.05),
                  std::invalid_argument);
  CHECK_THROWS_AS(kld_penalty(uniform, 1.5), std::invalid_argument);
}

TEST_CASE("KLD backward matches finite differences") {
  std::mt19937_64 rng(28);
  std::vector<double> a = random_vec(7, rng, 0.05, 0.9);
  double sum = 0.0;
  for (double v : a) sum += v;
  for (double& v : a) v /= sum;  // a valid activity vector
  auto objective = [&]() { return kld_penalty(a, 0.05); };
  const auto ga = kld_penalty_backward(a, 0.05);
  CHECK(max_relative_fd_error(objective, a, ga) < 1e-5);
}

TEST_CASE("total loss: perfect reconstruction at target activity is zero") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7};
  const std::vector<double> zeros(7, 0.0);
  // Uniform activity equals lambda = 1/7, so the KLD term vanishes too.
  CHECK(total_loss(x, x, zeros, 1.0 / 7.0, 10.0) ==
        doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("total loss: omega zero reduces to plain MSE") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7};
  std::vector<double> y(7, 0.0);
  for (std::size_t i = 0; i < 7; ++i) y[i] = x[i] - 1.0;  // unit error
  const std::vector<double> z{9, 1, 1, 1, 1, 1, 1};
  CHECK(total_loss(x, y, z, 0.05, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("total loss is non-negative for any nonnegative omega") {
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 200; ++rep) {
    const auto x = random_vec(7, rng);
    const auto y = random_vec(7, rng);
    const auto z = random_vec(7, rng);
    const double omega = uniform_in(rng, 0.0, 20.0);
    CHECK(total_loss(x, y, z, 0.05, omega) >= 0.0);
  }
}

TEST_CASE("adam with zero learning rate leaves parameters unchanged") {
  std::vector<double> params{1.0, -2.0, 3.0};
  const std::vector<double> before = params;
  AdamOptimizer adam(3, 0.0);
  adam.step(params, std::vector<double>{10.0, -5.0, 1.0});
  CHECK(params == before);
}

TEST_CASE("adam takes a descent step on a quadratic") {
  std::vector<double> params{4.0};
  AdamOptimizer adam(1, 0.1);
  for (int i = 0; i < 200; ++i) {
    const std::vector<double> grad{2.0 * params[0]};
    adam.step(params, grad);
  }
  CHECK(std::abs(params[0]) < 1.0);
}
