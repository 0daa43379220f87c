#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aalwt/signal_io.hpp"

namespace aalwt {

// Static SVG overlays in the style of published comparison figures: a
// time-domain panel and a magnitude-spectrum panel, original drawn solid red,
// reconstruction dashed blue. A CSV companion holds the plotted series in
// long format (series,index,axis,value).

// In-place iterative radix-2 FFT; size must be a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft_radix2: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

struct Spectrum {
  std::vector<double> freq_hz;    // bins 0..N/2
  std::vector<double> magnitude;
  std::size_t n_fft = 0;
};

// Magnitude spectrum of the zero-padded signal, length next power of two.
inline Spectrum magnitude_spectrum(std::span<const double> samples,
                                   double sample_rate_hz) {
  if (samples.empty())
    throw std::invalid_argument("magnitude_spectrum: empty input");
  const std::size_t n = next_pow2(samples.size());
  std::vector<std::complex<double>> buf(n, {0.0, 0.0});
  for (std::size_t i = 0; i < samples.size(); ++i) buf[i] = {samples[i], 0.0};
  fft_radix2(buf);
  Spectrum s;
  s.n_fft = n;
  s.freq_hz.resize(n / 2 + 1);
  s.magnitude.resize(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    s.freq_hz[k] = static_cast<double>(k) * sample_rate_hz /
                   static_cast<double>(n);
    s.magnitude[k] = std::abs(buf[k]);
  }
  return s;
}

namespace detail_plot {

struct Series {
  std::string name;
  std::vector<double> x, y;
};

// Keep SVG sizes sane for long recordings: min/max decimation above this.
inline constexpr std::size_t kMaxPlotPoints = 4096;

inline Series decimate(const Series& s) {
  if (s.x.size() <= kMaxPlotPoints) return s;
  Series out;
  out.name = s.name;
  const std::size_t buckets = kMaxPlotPoints / 2;
  const double step = static_cast<double>(s.x.size()) / static_cast<double>(buckets);
  for (std::size_t b = 0; b < buckets; ++b) {
    const auto lo = static_cast<std::size_t>(b * step);
    const auto hi = std::min(s.x.size(), static_cast<std::size_t>((b + 1) * step) + 1);
    std::size_t imin = lo, imax = lo;
    for (std::size_t i = lo; i < hi; ++i) {
      if (s.y[i] < s.y[imin]) imin = i;
      if (s.y[i] > s.y[imax]) imax = i;
    }
    const auto a = std::min(imin, imax);
    const auto z = std::max(imin, imax);
    out.x.push_back(s.x[a]);
    out.y.push_back(s.y[a]);
    if (z != a) {
      out.x.push_back(s.x[z]);
      out.y.push_back(s.y[z]);
    }
  }
  return out;
}

inline std::string polyline(const Series& s, double x0, double x1, double y0,
                            double y1, double px, double py, double pw,
                            double ph, const char* color, bool dashed) {
  std::ostringstream out;
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\"";
  if (dashed) out << " stroke-dasharray=\"5,3\"";
  out << " points=\"";
  const double xr = x1 > x0 ? x1 - x0 : 1.0;
  const double yr = y1 > y0 ? y1 - y0 : 1.0;
  out.precision(2);
  out << std::fixed;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    const double sx = px + (s.x[i] - x0) / xr * pw;
    const double sy = py + ph - (s.y[i] - y0) / yr * ph;
    out << sx << ',' << sy << ' ';
  }
  out << "\"/>\n";
  return out.str();
}

inline void panel(std::ostringstream& svg, const Series& a, const Series& b,
                  const std::string& title, const std::string& x_label,
                  double px, double py, double pw, double ph) {
  double x0 = a.x.front(), x1 = a.x.back();
  double y0 = a.y[0], y1 = a.y[0];
  for (const Series* s : {&a, &b}) {
    for (double v : s->y) {
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
  }
  if (y0 == y1) {
    y0 -= 1.0;
    y1 += 1.0;
  }
  svg << "<rect x=\"" << px << "\" y=\"" << py << "\" width=\"" << pw
      << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#999\"/>\n";
  svg << "<text x=\"" << px + pw / 2 << "\" y=\"" << py - 8
      << "\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  svg << "<text x=\"" << px + pw / 2 << "\" y=\"" << py + ph + 28
      << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
  std::ostringstream lab;
  lab.precision(4);
  lab << y0;
  svg << "<text x=\"" << px - 6 << "\" y=\"" << py + ph
      << "\" text-anchor=\"end\" font-size=\"10\">" << lab.str() << "</text>\n";
  lab.str("");
  lab << y1;
  svg << "<text x=\"" << px - 6 << "\" y=\"" << py + 10
      << "\" text-anchor=\"end\" font-size=\"10\">" << lab.str() << "</text>\n";
  svg << polyline(a, x0, x1, y0, y1, px, py, pw, ph, "#d62728", false);
  svg << polyline(b, x0, x1, y0, y1, px, py, pw, ph, "#1f77b4", true);
}

}  // namespace detail_plot

// Writes <out_svg_path> and a companion CSV with ".csv" appended, holding the
// plotted series in long format.
inline void emit_plot(const SampleRecord& original,
                      const SampleRecord& reconstructed,
                      const std::string& out_svg_path) {
  if (original.samples.size() != reconstructed.samples.size())
    throw std::invalid_argument("emit_plot: length mismatch");
  if (original.samples.empty())
    throw std::invalid_argument("emit_plot: empty input");

  using detail_plot::Series;
  const double fs = original.sample_rate_hz;
  Series t_orig{"time_original", {}, {}};
  Series t_reco{"time_reconstructed", {}, {}};
  for (std::size_t i = 0; i < original.samples.size(); ++i) {
    const double t = static_cast<double>(i) / fs;
    t_orig.x.push_back(t);
    t_orig.y.push_back(original.samples[i]);
    t_reco.x.push_back(t);
    t_reco.y.push_back(reconstructed.samples[i]);
  }
  const Spectrum s_orig = magnitude_spectrum(original.samples, fs);
  const Spectrum s_reco = magnitude_spectrum(reconstructed.samples, fs);
  Series f_orig{"spectrum_original", s_orig.freq_hz, s_orig.magnitude};
  Series f_reco{"spectrum_reconstructed", s_reco.freq_hz, s_reco.magnitude};

  const Series pt_orig = detail_plot::decimate(t_orig);
  const Series pt_reco = detail_plot::decimate(t_reco);
  const Series pf_orig = detail_plot::decimate(f_orig);
  const Series pf_reco = detail_plot::decimate(f_reco);

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" "
         "height=\"720\" viewBox=\"0 0 960 720\">\n";
  svg << "<rect width=\"960\" height=\"720\" fill=\"white\"/>\n";
  detail_plot::panel(svg, pt_orig, pt_reco, "time domain", "time (s)", 70, 40,
                     850, 260);
  detail_plot::panel(svg, pf_orig, pf_reco, "magnitude spectrum",
                     "frequency (Hz)", 70, 400, 850, 260);
  svg << "<line x1=\"700\" y1=\"16\" x2=\"730\" y2=\"16\" stroke=\"#d62728\"/>"
         "<text x=\"736\" y=\"20\" font-size=\"12\">original</text>\n";
  svg << "<line x1=\"820\" y1=\"16\" x2=\"850\" y2=\"16\" stroke=\"#1f77b4\" "
         "stroke-dasharray=\"5,3\"/><text x=\"856\" y=\"20\" "
         "font-size=\"12\">reconstructed</text>\n";
  svg << "</svg>\n";

  std::ofstream out(out_svg_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open plot file: " + out_svg_path);
  out << svg.str();
  if (!out) throw std::runtime_error("write error: " + out_svg_path);

  std::ofstream csv(out_svg_path + ".csv", std::ios::binary);
  if (!csv) throw std::runtime_error("cannot open plot CSV: " + out_svg_path + ".csv");
  csv << "series,index,axis,value\n";
  csv.precision(12);
  for (const Series* s : {&pt_orig, &pt_reco, &pf_orig, &pf_reco})
    for (std::size_t i = 0; i < s->x.size(); ++i)
      csv << s->name << ',' << i << ',' << s->x[i] << ',' << s->y[i] << '\n';
  if (!csv) throw std::runtime_error("write error: " + out_svg_path + ".csv");
}

}  // namespace aalwt
