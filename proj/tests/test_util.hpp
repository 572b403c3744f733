#pragma once

#include <cstdint>
#include <vector>

#include "zkroa/roa.hpp"
#include "zkroa/systems.hpp"
#include "zkroa/types.hpp"

namespace zkroa::testutil {

// Deterministic generator for test data (SplitMix64 based).
struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next_u64() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  Vec point_in(const Box& box) {
    Vec x(box.dim());
    for (int a = 0; a < box.dim(); ++a) x[a] = uniform(box.lo[a], box.hi[a]);
    return x;
  }
};

// Test-only linear system x' = -x in any dimension.
inline SystemSpec linear_decay(int dim, double half_width = 10.0) {
  SystemSpec s;
  s.dim = dim;
  s.field = [](const Vec& x) { return Vec(-x); };
  s.x_eq = Vec::Zero(dim);
  s.eta = [](const Vec& x) { return x.norm(); };
  Box b;
  b.lo = Vec::Constant(dim, -half_width);
  b.hi = Vec::Constant(dim, half_width);
  s.region = b;
  s.name = "linear-decay";
  return s;
}

// Independent component labeling over the full grid (union-find), used as the
// oracle for the flood fill.
inline std::vector<int> label_components(const GridSpec& grid,
                                         const std::vector<double>& values,
                                         double threshold) {
  const long total = grid.cell_count();
  std::vector<long> parent(total);
  for (long i = 0; i < total; ++i) parent[i] = i;
  std::function<long(long)> find = [&](long a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  auto unite = [&](long a, long b) { parent[find(a)] = find(b); };

  const int dim = grid.dim();
  std::vector<long> stride(dim, 1);
  for (int a = dim - 2; a >= 0; --a) stride[a] = stride[a + 1] * grid.resolution[a + 1];
  for (long i = 0; i < total; ++i) {
    if (values[i] < threshold) continue;
    const std::vector<int> idx = grid.unflatten(i);
    for (int a = 0; a < dim; ++a) {
      if (idx[a] + 1 < grid.resolution[a]) {
        const long nb = i + stride[a];
        if (values[nb] >= threshold) unite(i, nb);
      }
    }
  }
  std::vector<int> label(total, -1);
  for (long i = 0; i < total; ++i) {
    if (values[i] >= threshold) label[i] = static_cast<int>(find(i));
  }
  return label;
}

// Central finite difference of a scalar function.
template <typename F>
Vec fd_gradient(const F& f, const Vec& x, double h = 1e-5) {
  Vec g(x.size());
  for (Eigen::Index a = 0; a < x.size(); ++a) {
    Vec xp = x, xm = x;
    xp[a] += h;
    xm[a] -= h;
    g[a] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

}  // namespace zkroa::testutil
