#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace aalwt {

// Single-level (5,3) lifting wavelet transform for arbitrary-length 1-D
// signals. Layout is band-ordered: all low-pass (approximation) values first,
// then the high-pass (detail) values. Boundaries use whole-sample symmetric
// extension: the missing even neighbour at the right edge repeats the last
// even sample, and the missing detail neighbours repeat the nearest detail.

struct WaveletCoeffs {
  std::vector<double> approx;  // ceil(n/2) low-pass values
  std::vector<double> detail;  // floor(n/2) high-pass values
  std::size_t n = 0;           // original signal length
};

namespace detail_lwt {

inline void check_coeffs(const WaveletCoeffs& c) {
  const std::size_t nu = (c.n + 1) / 2;
  const std::size_t nv = c.n / 2;
  if (c.n < 2 || c.approx.size() != nu || c.detail.size() != nv)
    throw std::invalid_argument(
        "WaveletCoeffs: approx/detail lengths inconsistent with n");
}

}  // namespace detail_lwt

inline WaveletCoeffs lwt_forward(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("lwt_forward: need at least 2 samples");
  for (double v : x)
    if (!std::isfinite(v))
      throw std::invalid_argument("lwt_forward: non-finite input");

  const std::size_t nu = (n + 1) / 2;
  const std::size_t nv = n / 2;
  WaveletCoeffs c;
  c.n = n;
  c.approx.resize(nu);
  c.detail.resize(nv);

  // Lazy split: even samples are the initial low band, odd the high band.
  std::vector<double> u(nu);
  for (std::size_t i = 0; i < nu; ++i) u[i] = x[2 * i];

  // Predict: each odd sample minus the mean of its even neighbours.
  for (std::size_t j = 0; j < nv; ++j) {
    const std::size_t right = std::min(j + 1, nu - 1);
    c.detail[j] = x[2 * j + 1] - 0.5 * (u[j] + u[right]);
  }

  // Update: correct the even samples with neighbouring details.
  for (std::size_t i = 0; i < nu; ++i) {
    const std::size_t cur = std::min(i, nv - 1);
    const std::size_t prev = i == 0 ? 0 : i - 1;
    c.approx[i] = u[i] + 0.25 * (c.detail[cur] + c.detail[prev]);
  }
  return c;
}

inline std::vector<double> lwt_inverse(const WaveletCoeffs& c) {
  detail_lwt::check_coeffs(c);
  const std::size_t nu = c.approx.size();
  const std::size_t nv = c.detail.size();

  std::vector<double> u(nu);
  for (std::size_t i = 0; i < nu; ++i) {
    const std::size_t cur = std::min(i, nv - 1);
    const std::size_t prev = i == 0 ? 0 : i - 1;
    u[i] = c.approx[i] - 0.25 * (c.detail[cur] + c.detail[prev]);
  }

  std::vector<double> x(c.n);
  for (std::size_t i = 0; i < nu; ++i) x[2 * i] = u[i];
  for (std::size_t j = 0; j < nv; ++j) {
    const std::size_t right = std::min(j + 1, nu - 1);
    x[2 * j + 1] = c.detail[j] + 0.5 * (u[j] + u[right]);
  }
  return x;
}

// Transpose of the forward map: returns L^T g, so <Lx, g> == <x, lwt_adjoint(g)>.
// Used as the backward pass of the fixed LWT layer.
inline std::vector<double> lwt_adjoint(const WaveletCoeffs& g) {
  detail_lwt::check_coeffs(g);
  const std::size_t nu = g.approx.size();
  const std::size_t nv = g.detail.size();

  // Transpose of the update step.
  std::vector<double> gu(g.approx);
  std::vector<double> gv(g.detail);
  for (std::size_t i = 0; i < nu; ++i) {
    const std::size_t cur = std::min(i, nv - 1);
    const std::size_t prev = i == 0 ? 0 : i - 1;
    gv[cur] += 0.25 * g.approx[i];
    gv[prev] += 0.25 * g.approx[i];
  }
  // Transpose of the predict step.
  for (std::size_t j = 0; j < nv; ++j) {
    const std::size_t right = std::min(j + 1, nu - 1);
    gu[j] -= 0.5 * gv[j];
    gu[right] -= 0.5 * gv[j];
  }
  // Transpose of the lazy split.
  std::vector<double> gx(g.n);
  for (std::size_t i = 0; i < nu; ++i) gx[2 * i] = gu[i];
  for (std::size_t j = 0; j < nv; ++j) gx[2 * j + 1] = gv[j];
  return gx;
}

// Transpose of the inverse map: given the gradient wrt lwt_inverse(c), returns
// the gradient wrt the coefficients. Backward pass of the decoder's ILWT.
inline WaveletCoeffs lwt_inverse_adjoint(std::span<const double> gx,
                                         std::size_t n) {
  if (gx.size() != n || n < 2)
    throw std::invalid_argument("lwt_inverse_adjoint: length mismatch");
  const std::size_t nu = (n + 1) / 2;
  const std::size_t nv = n / 2;

  // Transpose of the interleave.
  std::vector<double> gu(nu), gv(nv);
  for (std::size_t i = 0; i < nu; ++i) gu[i] = gx[2 * i];
  for (std::size_t j = 0; j < nv; ++j) gv[j] = gx[2 * j + 1];

  WaveletCoeffs g;
  g.n = n;
  g.detail.assign(nv, 0.0);

  // Transpose of the undo-predict step (v0 = d + 0.5*(u0 + u0_right)).
  for (std::size_t j = 0; j < nv; ++j) {
    const std::size_t right = std::min(j + 1, nu - 1);
    g.detail[j] += gv[j];
    gu[j] += 0.5 * gv[j];
    gu[right] += 0.5 * gv[j];
  }
  // Transpose of the undo-update step (u0 = a - 0.25*(d_cur + d_prev)).
  g.approx = gu;
  for (std::size_t i = 0; i < nu; ++i) {
    const std::size_t cur = std::min(i, nv - 1);
    const std::size_t prev = i == 0 ? 0 : i - 1;
    g.detail[cur] -= 0.25 * gu[i];
    g.detail[prev] -= 0.25 * gu[i];
  }
  return g;
}

// Band-ordered flattening used by the codec: [approx || detail].
inline std::vector<double> flat_from_coeffs(const WaveletCoeffs& c) {
  detail_lwt::check_coeffs(c);
  std::vector<double> out;
  out.reserve(c.n);
  out.insert(out.end(), c.approx.begin(), c.approx.end());
  out.insert(out.end(), c.detail.begin(), c.detail.end());
  return out;
}

inline WaveletCoeffs coeffs_from_flat(std::span<const double> flat,
                                      std::size_t n) {
  if (flat.size() != n)
    throw std::invalid_argument("coeffs_from_flat: length mismatch");
  const std::size_t nu = (n + 1) / 2;
  WaveletCoeffs c;
  c.n = n;
  c.approx.assign(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(nu));
  c.detail.assign(flat.begin() + static_cast<std::ptrdiff_t>(nu), flat.end());
  return c;
}

}  // namespace aalwt
