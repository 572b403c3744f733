#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace zkroa {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using Complex = std::complex<double>;

// Axis-aligned box region, closed on both sides.
struct Box {
  Vec lo;
  Vec hi;

  int dim() const { return static_cast<int>(lo.size()); }

  bool contains(const Vec& x) const {
    for (int d = 0; d < dim(); ++d) {
      if (x[d] < lo[d] || x[d] > hi[d]) return false;
    }
    return true;
  }

  double width(int axis) const { return hi[axis] - lo[axis]; }

  double max_width() const {
    double w = 0.0;
    for (int d = 0; d < dim(); ++d) w = std::max(w, width(d));
    return w;
  }
};

// Error hierarchy. The CLI maps these onto exit codes.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IntegrationBlowup : std::runtime_error {
  int step_index;
  IntegrationBlowup(const std::string& msg, int index)
      : std::runtime_error(msg), step_index(index) {}
};

struct DegenerateData : std::runtime_error {
  explicit DegenerateData(const std::string& msg) : std::runtime_error(msg) {}
};

struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct MissingArtifact : std::runtime_error {
  explicit MissingArtifact(const std::string& msg) : std::runtime_error(msg) {}
};

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace zkroa
