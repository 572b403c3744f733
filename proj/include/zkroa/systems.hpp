#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "zkroa/types.hpp"

namespace zkroa {

// One autonomous ODE problem: vector field f, decay weight eta >= 0 with
// eta(x_eq) = 0, the equilibrium, and the box region of interest.
struct SystemSpec {
  int dim = 0;
  std::function<Vec(const Vec&)> field;
  std::function<double(const Vec&)> eta;
  Vec x_eq;
  Box region;
  std::string name;
};

enum class BenchmarkId {
  cubic1d,
  vdp_reversed,
  polynomial,
  power2m,
  sys3d,
  stiff_vdp,
  stiff2,
};

// Overrides applied on top of a builtin definition.
struct SystemOverrides {
  std::optional<double> mu;                 // stiff_vdp stiffness
  std::optional<std::string> eta_kind;      // "abs" or "sqnorm"
  std::optional<double> eta_scale;          // eta = |x-x_eq|/s or |x-x_eq|^2/s
};

inline std::function<double(const Vec&)> make_eta(const std::string& kind,
                                                  double scale, Vec x_eq) {
  if (kind == "abs") {
    return [scale, x_eq = std::move(x_eq)](const Vec& x) {
      return (x - x_eq).norm() / scale;
    };
  }
  if (kind == "sqnorm") {
    return [scale, x_eq = std::move(x_eq)](const Vec& x) {
      return (x - x_eq).squaredNorm() / scale;
    };
  }
  throw ConfigError("unknown eta kind '" + kind + "' (want abs|sqnorm)");
}

inline std::optional<BenchmarkId> parse_benchmark_id(const std::string& s) {
  if (s == "cubic1d") return BenchmarkId::cubic1d;
  if (s == "vdp-reversed" || s == "vdp_reversed") return BenchmarkId::vdp_reversed;
  if (s == "polynomial") return BenchmarkId::polynomial;
  if (s == "power2m") return BenchmarkId::power2m;
  if (s == "sys3d") return BenchmarkId::sys3d;
  if (s == "stiff-vdp" || s == "stiff_vdp") return BenchmarkId::stiff_vdp;
  if (s == "stiff2") return BenchmarkId::stiff2;
  return std::nullopt;
}

inline std::string benchmark_name(BenchmarkId id) {
  switch (id) {
    case BenchmarkId::cubic1d: return "cubic1d";
    case BenchmarkId::vdp_reversed: return "vdp-reversed";
    case BenchmarkId::polynomial: return "polynomial";
    case BenchmarkId::power2m: return "power2m";
    case BenchmarkId::sys3d: return "sys3d";
    case BenchmarkId::stiff_vdp: return "stiff-vdp";
    case BenchmarkId::stiff2: return "stiff2";
  }
  throw ConfigError("unknown benchmark id");
}

inline Box make_box(std::initializer_list<std::pair<double, double>> axes) {
  Box b;
  b.lo.resize(static_cast<Eigen::Index>(axes.size()));
  b.hi.resize(static_cast<Eigen::Index>(axes.size()));
  int d = 0;
  for (auto [l, h] : axes) {
    b.lo[d] = l;
    b.hi[d] = h;
    ++d;
  }
  return b;
}

inline SystemSpec builtin(BenchmarkId id, const SystemOverrides& ov = {}) {
  SystemSpec s;
  switch (id) {
    case BenchmarkId::cubic1d: {
      s.dim = 1;
      s.field = [](const Vec& x) {
        Vec f(1);
        f[0] = -x[0] + x[0] * x[0] * x[0];
        return f;
      };
      s.x_eq = Vec::Zero(1);
      s.eta = make_eta("abs", 1.0, s.x_eq);
      s.region = make_box({{-1.5, 1.5}});
      break;
    }
    case BenchmarkId::vdp_reversed: {
      s.dim = 2;
      s.field = [](const Vec& x) {
        Vec f(2);
        f[0] = -x[1];
        f[1] = x[0] - (1.0 - x[0] * x[0]) * x[1];
        return f;
      };
      s.x_eq = Vec::Zero(2);
      s.eta = make_eta("sqnorm", 5.0, s.x_eq);
      s.region = make_box({{-3.0, 3.0}, {-3.0, 3.0}});
      break;
    }
    case BenchmarkId::polynomial: {
      s.dim = 2;
      s.field = [](const Vec& x) {
        Vec f(2);
        f[0] = x[1];
        f[1] = -2.0 * x[0] + x[0] * x[0] * x[0] / 3.0 - x[1];
        return f;
      };
      s.x_eq = Vec::Zero(2);
      s.eta = make_eta("sqnorm", 5.0, s.x_eq);
      s.region = make_box({{-6.0, 6.0}, {-6.0, 6.0}});
      break;
    }
    case BenchmarkId::power2m: {
      s.dim = 2;
      const double delta = M_PI / 3.0;
      s.field = [delta](const Vec& x) {
        Vec f(2);
        f[0] = x[1];
        f[1] = -0.5 * x[1] - (std::sin(x[0] + delta) - std::sin(delta));
        return f;
      };
      s.x_eq = Vec::Zero(2);
      s.eta = make_eta("sqnorm", 5.0, s.x_eq);
      s.region = make_box({{-2.0, 3.0}, {-3.0, 2.0}});
      break;
    }
    case BenchmarkId::sys3d: {
      s.dim = 3;
      s.field = [](const Vec& x) {
        Vec f(3);
        f[0] = x[1] + 2.0 * x[1] * x[2];
        f[1] = x[2];
        f[2] = -0.5 * x[0] - 2.0 * x[1] - x[2];
        return f;
      };
      s.x_eq = Vec::Zero(3);
      s.eta = make_eta("sqnorm", 5.0, s.x_eq);
      s.region = make_box({{-2.0, 2.0}, {-2.0, 2.0}, {-2.0, 2.0}});
      break;
    }
    case BenchmarkId::stiff_vdp: {
      s.dim = 2;
      const double mu = ov.mu.value_or(4.0);
      s.field = [mu](const Vec& x) {
        Vec f(2);
        f[0] = -x[1];
        f[1] = x[0] - mu * (1.0 - x[0] * x[0]) * x[1];
        return f;
      };
      s.x_eq = Vec::Zero(2);
      s.eta = make_eta("sqnorm", 5.0, s.x_eq);
      s.region = make_box({{-3.0, 3.0}, {-3.0, 3.0}});
      break;
    }
    case BenchmarkId::stiff2: {
      s.dim = 2;
      s.field = [](const Vec& x) {
        Vec f(2);
        f[0] = -2.0 * x[0] + x[0] * x[0] - x[1] * x[1];
        f[1] = -2.5 * x[1] + 2.0 * x[0] * x[1];
        return f;
      };
      s.x_eq = Vec::Zero(2);
      s.eta = make_eta("sqnorm", 5.0, s.x_eq);
      s.region = make_box({{-4.0, 4.0}, {-4.0, 4.0}});
      break;
    }
  }
  s.name = benchmark_name(id);
  if (ov.eta_kind || ov.eta_scale) {
    const std::string kind = ov.eta_kind.value_or(
        id == BenchmarkId::cubic1d ? std::string("abs") : std::string("sqnorm"));
    const double scale =
        ov.eta_scale.value_or(id == BenchmarkId::cubic1d ? 1.0 : 5.0);
    s.eta = make_eta(kind, scale, s.x_eq);
  }
  return s;
}

inline SystemSpec builtin_named(const std::string& name,
                                const SystemOverrides& ov = {}) {
  auto id = parse_benchmark_id(name);
  if (!id) throw ConfigError("unknown system '" + name + "'");
  return builtin(*id, ov);
}

// Closed-form bounded dual solution for the cubic 1D system:
// sqrt((1-|x|)/(1+|x|)) inside (-1,1), 0 elsewhere.
inline double closed_form_u_1d(double x) {
  const double a = std::abs(x);
  if (a >= 1.0) return 0.0;
  return std::sqrt((1.0 - a) / (1.0 + a));
}

}  // namespace zkroa
