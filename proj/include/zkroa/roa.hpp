#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "zkroa/dictionary.hpp"
#include "zkroa/edmd.hpp"
#include "zkroa/parallel.hpp"
#include "zkroa/systems.hpp"
#include "zkroa/types.hpp"

namespace zkroa {

// Finite-dictionary approximation of the bounded dual solution: the real part
// of eval(dict, x) . coeffs. The imaginary residue is kept as a diagnostic.
struct UApprox {
  Dictionary dict;
  CVec coeffs;
  int iterations = 0;
  double final_residual = 0.0;
  bool vector_mode = false;

  double value(const Vec& x) const {
    return (eval(dict, x).transpose() * coeffs)(0).real();
  }
  double imag_residue(const Vec& x) const {
    return (eval(dict, x).transpose() * coeffs)(0).imag();
  }
  // Gradient of value: real part of grad(dict,x)^T coeffs, one entry per axis.
  Vec gradient(const Vec& x) const {
    const CMat g = grad(dict, x);
    Vec out(dict.dim);
    for (int a = 0; a < dict.dim; ++a) {
      out[a] = (g.col(a).transpose() * coeffs)(0).real();
    }
    return out;
  }
};

// Differentiable scalar field interface; adapters exist for UApprox, the
// smooth regressor, and closed-form references.
struct ScalarField {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
};

inline ScalarField as_field(const UApprox& u) {
  return ScalarField{[u](const Vec& x) { return u.value(x); },
                     [u](const Vec& x) { return u.gradient(x); }};
}

// Iterate matrix powers of the learned operator, seeded by the unit basis
// vector, until the step difference reaches tol or the iteration cap K.
inline UApprox build_u_zk(const OperatorMatrix& op, const Dictionary& dict,
                          const Vec& x_eq, double tol, int max_iterations,
                          bool vector_mode = false) {
  if (op.T.rows() != dict.size()) {
    throw ConfigError("build_u_zk: operator size does not match dictionary");
  }
  if (!(tol > 0.0)) throw ConfigError("build_u_zk: tol must be > 0");
  if (max_iterations < 1) throw ConfigError("build_u_zk: need K >= 1");

  const int n = dict.size();
  const int seed = unit_index(dict, x_eq);
  CVec w = CVec::Zero(n);
  w[seed] = Complex(1.0, 0.0);

  UApprox out;
  out.dict = dict;
  out.vector_mode = vector_mode;

  int k = 0;
  double diff = 0.0;
  if (vector_mode) {
    CVec wk = w;
    while (k < max_iterations) {
      auto [next, d] = vector_power_step(op.T, wk);
      wk = std::move(next);
      diff = d;
      ++k;
      if (wk.norm() > 1e6) {
        throw DivergenceError(
            "build_u_zk: coefficients exceed 1e6 after " + std::to_string(k) +
            " iterations; try a smaller time interval or more samples");
      }
      if (diff <= tol) break;
    }
    out.coeffs = wk;
  } else {
    CMat wk = CMat::Identity(n, n);
    while (k < max_iterations) {
      auto [next, d] = matrix_power_step(op.T, wk);
      wk = std::move(next);
      diff = d;
      ++k;
      if ((wk * w).norm() > 1e6) {
        throw DivergenceError(
            "build_u_zk: coefficients exceed 1e6 after " + std::to_string(k) +
            " iterations; try a smaller time interval or more samples");
      }
      if (diff <= tol) break;
    }
    out.coeffs = wk * w;
  }
  out.iterations = k;
  out.final_residual = diff;
  return out;
}

// Uniform cell grid over a box. Cell (i_0,...,i_{d-1}) has its center at
// lo + (i + 0.5) * width; the flat index runs row-major with the last axis
// fastest.
struct GridSpec {
  Box box;
  std::vector<int> resolution;

  int dim() const { return box.dim(); }

  long cell_count() const {
    long total = 1;
    for (int r : resolution) total *= r;
    return total;
  }

  double cell_width(int axis) const {
    return box.width(axis) / resolution[axis];
  }

  Vec center(const std::vector<int>& idx) const {
    Vec x(dim());
    for (int a = 0; a < dim(); ++a) {
      x[a] = box.lo[a] + (idx[a] + 0.5) * cell_width(a);
    }
    return x;
  }

  Vec center_flat(long flat) const { return center(unflatten(flat)); }

  long flatten(const std::vector<int>& idx) const {
    long f = 0;
    for (int a = 0; a < dim(); ++a) f = f * resolution[a] + idx[a];
    return f;
  }

  std::vector<int> unflatten(long flat) const {
    std::vector<int> idx(dim());
    for (int a = dim() - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(flat % resolution[a]);
      flat /= resolution[a];
    }
    return idx;
  }

  std::vector<int> cell_of(const Vec& x) const {
    std::vector<int> idx(dim());
    for (int a = 0; a < dim(); ++a) {
      int i = static_cast<int>(std::floor((x[a] - box.lo[a]) / cell_width(a)));
      idx[a] = std::min(std::max(i, 0), resolution[a] - 1);
    }
    return idx;
  }
};

// Connected superlevel-set mask: cells with value >= threshold reachable from
// the equilibrium cell through shared faces.
struct RoaMask {
  GridSpec grid;
  std::vector<std::uint8_t> mask;
  double threshold = 0.0;
  double volume_fraction = 0.0;
};

inline std::vector<double> eval_on_grid(const ScalarField& field,
                                        const GridSpec& grid, int workers = 0) {
  std::vector<double> vals(grid.cell_count());
  parallel_for(
      grid.cell_count(),
      [&](long i) { vals[i] = field.value(grid.center_flat(i)); }, workers);
  return vals;
}

inline RoaMask extract_roa(const ScalarField& field, const SystemSpec& sys,
                           const std::vector<int>& resolution, double threshold,
                           int workers = 0,
                           const std::vector<double>* precomputed = nullptr) {
  if (!(threshold > 0.0)) throw ConfigError("extract_roa: threshold must be > 0");
  if (static_cast<int>(resolution.size()) != sys.dim) {
    throw ConfigError("extract_roa: resolution must list one count per axis");
  }
  RoaMask out;
  out.grid = GridSpec{sys.region, resolution};
  out.threshold = threshold;
  const long total = out.grid.cell_count();
  out.mask.assign(total, 0);

  const std::vector<double> vals =
      precomputed ? *precomputed : eval_on_grid(field, out.grid, workers);

  const std::vector<int> seed_idx = out.grid.cell_of(sys.x_eq);
  const long seed = out.grid.flatten(seed_idx);
  if (vals[seed] < threshold) {
    throw DomainError("extract_roa: equilibrium cell value " +
                      std::to_string(vals[seed]) + " is below the threshold");
  }

  // Flood fill over face-adjacent cells.
  std::deque<long> queue;
  out.mask[seed] = 1;
  queue.push_back(seed);
  const int dim = out.grid.dim();
  std::vector<long> stride(dim, 1);
  for (int a = dim - 2; a >= 0; --a) {
    stride[a] = stride[a + 1] * resolution[a + 1];
  }
  while (!queue.empty()) {
    const long cur = queue.front();
    queue.pop_front();
    const std::vector<int> idx = out.grid.unflatten(cur);
    for (int a = 0; a < dim; ++a) {
      for (int step : {-1, +1}) {
        const int ni = idx[a] + step;
        if (ni < 0 || ni >= resolution[a]) continue;
        const long nb = cur + step * stride[a];
        if (!out.mask[nb] && vals[nb] >= threshold) {
          out.mask[nb] = 1;
          queue.push_back(nb);
        }
      }
    }
  }
  long count = 0;
  for (auto b : out.mask) count += b;
  out.volume_fraction = static_cast<double>(count) / static_cast<double>(total);
  return out;
}

inline RoaMask extract_roa(const UApprox& u, const SystemSpec& sys,
                           const std::vector<int>& resolution, double threshold,
                           int workers = 0) {
  return extract_roa(as_field(u), sys, resolution, threshold, workers);
}

// Per-axis extents of the masked cells (outer cell edges), useful to report
// the predicted set as an interval/box summary.
inline std::pair<Vec, Vec> mask_extent(const RoaMask& m) {
  const int dim = m.grid.dim();
  Vec lo = Vec::Constant(dim, std::numeric_limits<double>::quiet_NaN());
  Vec hi = lo;
  bool any = false;
  for (long i = 0; i < m.grid.cell_count(); ++i) {
    if (!m.mask[i]) continue;
    const std::vector<int> idx = m.grid.unflatten(i);
    for (int a = 0; a < dim; ++a) {
      const double c_lo = m.grid.box.lo[a] + idx[a] * m.grid.cell_width(a);
      const double c_hi = c_lo + m.grid.cell_width(a);
      if (!any) {
        lo[a] = c_lo;
        hi[a] = c_hi;
      } else {
        lo[a] = std::min(lo[a], c_lo);
        hi[a] = std::max(hi[a], c_hi);
      }
    }
    any = true;
  }
  return {lo, hi};
}

// Rate of change of the field along the flow: grad(field)(x) . f(x).
inline double lie_derivative(const SystemSpec& sys, const ScalarField& field,
                             const Vec& x) {
  return field.gradient(x).dot(sys.field(x));
}

inline double lie_derivative(const SystemSpec& sys, const UApprox& u, const Vec& x) {
  return u.gradient(x).dot(sys.field(x));
}

// Fraction of masked cells (outside the exclusion ball around x_eq) whose
// center satisfies the strict increase condition lie_derivative > margin.
inline double verified_fraction(const SystemSpec& sys, const ScalarField& field,
                                const RoaMask& mask, double exclusion_radius,
                                double margin = 0.0, int workers = 0) {
  const long total = mask.grid.cell_count();
  std::vector<std::uint8_t> ok(total, 0);
  std::vector<std::uint8_t> considered(total, 0);
  parallel_for(
      total,
      [&](long i) {
        if (!mask.mask[i]) return;
        const Vec x = mask.grid.center_flat(i);
        if ((x - sys.x_eq).norm() <= exclusion_radius) return;
        considered[i] = 1;
        ok[i] = lie_derivative(sys, field, x) > margin ? 1 : 0;
      },
      workers);
  long n_ok = 0, n_all = 0;
  for (long i = 0; i < total; ++i) {
    n_all += considered[i];
    n_ok += ok[i];
  }
  if (n_all == 0) return 0.0;
  return static_cast<double>(n_ok) / static_cast<double>(n_all);
}

// Lyapunov-style transform -log(max(value, floor)). With flooring disabled
// (floor <= 0) a non-positive value is a domain error.
inline double v_zk(const UApprox& u, const Vec& x, double floor_value) {
  const double val = u.value(x);
  if (floor_value > 0.0) return -std::log(std::max(val, floor_value));
  if (val <= 0.0) {
    throw DomainError("v_zk: value is non-positive and flooring is disabled");
  }
  return -std::log(val);
}

// Lie derivative of -log(value): exactly -lie_u / value, so the sign is the
// exact negation of the sign of lie_u wherever value > 0.
inline double lie_derivative_v(const SystemSpec& sys, const UApprox& u,
                               const Vec& x) {
  return -lie_derivative(sys, u, x) / u.value(x);
}

}  // namespace zkroa
