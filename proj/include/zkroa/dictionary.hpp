#pragma once

#include <cmath>
#include <string>

#include "zkroa/types.hpp"

namespace zkroa {

enum class DictFamily { cos_gauss_1d, cos_gauss_nd, complex_fourier_nd };

inline std::string family_name(DictFamily f) {
  switch (f) {
    case DictFamily::cos_gauss_1d: return "cos_gauss_1d";
    case DictFamily::cos_gauss_nd: return "cos_gauss_nd";
    case DictFamily::complex_fourier_nd: return "complex_fourier_nd";
  }
  throw ConfigError("unknown dictionary family");
}

inline DictFamily parse_family(const std::string& s) {
  if (s == "cos_gauss_1d") return DictFamily::cos_gauss_1d;
  if (s == "cos_gauss_nd") return DictFamily::cos_gauss_nd;
  if (s == "complex_fourier_nd") return DictFamily::complex_fourier_nd;
  throw ConfigError("unknown dictionary family '" + s + "'");
}

// A finite observable family indexed by a symmetric per-axis frequency grid
// {0, +1, -1, ..., +(N-1), -(N-1)}^dim, so size = (2N-1)^dim and index 0 is
// the all-zero frequency.
//
// With w = 2*pi/period_scale, k the frequency tuple and y = x - center:
//   cos_gauss_*        z_k(x) = cos(w * k.y) * exp(-|y|^2 / gauss_scale)
//   complex_fourier_nd z_k(x) = exp(i * w * k.y)
struct Dictionary {
  DictFamily family = DictFamily::cos_gauss_1d;
  int freq_count = 1;    // N: per-axis frequencies 0..N-1 in both signs
  double period_scale = 3.0;
  double gauss_scale = 4.0;
  int dim = 1;
  Vec center;
  Eigen::MatrixXi freq;  // size x dim

  int size() const { return static_cast<int>(freq.rows()); }

  double omega() const { return 2.0 * M_PI / period_scale; }

  std::string descriptor() const {
    std::string s = family_name(family) + " N=" + std::to_string(freq_count) +
                    " P=" + std::to_string(period_scale) +
                    " G=" + std::to_string(gauss_scale) +
                    " dim=" + std::to_string(dim);
    return s;
  }
};

namespace detail {
// Interleaved symmetric sequence 0, +1, -1, +2, -2, ...
inline Eigen::VectorXi symmetric_freqs(int n) {
  Eigen::VectorXi s(2 * n - 1);
  s[0] = 0;
  for (int i = 1; i < n; ++i) {
    s[2 * i - 1] = i;
    s[2 * i] = -i;
  }
  return s;
}
}  // namespace detail

inline Dictionary make_dictionary(DictFamily family, int freq_count, int dim,
                                  double period_scale, double gauss_scale,
                                  Vec center = Vec()) {
  if (freq_count < 1) throw ConfigError("dictionary freq_count must be >= 1");
  if (!(period_scale > 0.0)) throw ConfigError("dictionary period_scale must be > 0");
  if (!(gauss_scale > 0.0)) throw ConfigError("dictionary gauss_scale must be > 0");
  if (family == DictFamily::cos_gauss_1d && dim != 1) {
    throw ConfigError("cos_gauss_1d requires dim == 1");
  }
  Dictionary d;
  d.family = family;
  d.freq_count = freq_count;
  d.period_scale = period_scale;
  d.gauss_scale = gauss_scale;
  d.dim = dim;
  d.center = center.size() == dim ? std::move(center) : Vec::Zero(dim);

  const Eigen::VectorXi axis = detail::symmetric_freqs(freq_count);
  const int per_axis = static_cast<int>(axis.size());
  long total = 1;
  for (int a = 0; a < dim; ++a) total *= per_axis;
  d.freq.resize(total, dim);
  // Row-major product over axes, axis 0 slowest.
  for (long r = 0; r < total; ++r) {
    long rem = r;
    for (int a = dim - 1; a >= 0; --a) {
      d.freq(r, a) = axis[rem % per_axis];
      rem /= per_axis;
    }
  }
  return d;
}

// Evaluate all basis functions at x. Real families are embedded into the
// complex field so every downstream path is uniformly complex.
inline CVec eval(const Dictionary& d, const Vec& x) {
  const Vec y = x - d.center;
  const double w = d.omega();
  CVec out(d.size());
  if (d.family == DictFamily::complex_fourier_nd) {
    for (int i = 0; i < d.size(); ++i) {
      double phase = 0.0;
      for (int a = 0; a < d.dim; ++a) phase += d.freq(i, a) * y[a];
      phase *= w;
      out[i] = Complex(std::cos(phase), std::sin(phase));
    }
  } else {
    const double g = std::exp(-y.squaredNorm() / d.gauss_scale);
    for (int i = 0; i < d.size(); ++i) {
      double phase = 0.0;
      for (int a = 0; a < d.dim; ++a) phase += d.freq(i, a) * y[a];
      phase *= w;
      out[i] = Complex(std::cos(phase) * g, 0.0);
    }
  }
  return out;
}

// Analytic partial derivatives, size x dim.
//   cos_gauss:  d z_k / d x_a = [-w k_a sin(th) - (2 y_a / G) cos(th)] * exp(-|y|^2/G)
//   fourier:    d z_k / d x_a = i w k_a z_k(x)
inline CMat grad(const Dictionary& d, const Vec& x) {
  const Vec y = x - d.center;
  const double w = d.omega();
  CMat out(d.size(), d.dim);
  if (d.family == DictFamily::complex_fourier_nd) {
    for (int i = 0; i < d.size(); ++i) {
      double phase = 0.0;
      for (int a = 0; a < d.dim; ++a) phase += d.freq(i, a) * y[a];
      phase *= w;
      const Complex z(std::cos(phase), std::sin(phase));
      for (int a = 0; a < d.dim; ++a) {
        out(i, a) = Complex(0.0, w * d.freq(i, a)) * z;
      }
    }
  } else {
    const double G = d.gauss_scale;
    const double g = std::exp(-y.squaredNorm() / G);
    for (int i = 0; i < d.size(); ++i) {
      double phase = 0.0;
      for (int a = 0; a < d.dim; ++a) phase += d.freq(i, a) * y[a];
      phase *= w;
      const double st = std::sin(phase);
      const double ct = std::cos(phase);
      for (int a = 0; a < d.dim; ++a) {
        out(i, a) = Complex((-w * d.freq(i, a) * st - (2.0 * y[a] / G) * ct) * g, 0.0);
      }
    }
  }
  return out;
}

// Index of the real-valued basis function equal to 1 at x_eq: the all-zero
// frequency entry, provided the dictionary is centered at x_eq.
inline int unit_index(const Dictionary& d, const Vec& x_eq) {
  constexpr int idx = 0;  // all-zero frequency by construction
  const CVec z = eval(d, x_eq);
  if (std::abs(z[idx] - Complex(1.0, 0.0)) > 1e-12) {
    throw ConfigError(
        "dictionary has no unit element at x_eq; set the dictionary center to x_eq");
  }
  return idx;
}

}  // namespace zkroa
