#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "zkroa/dictionary.hpp"
#include "zkroa/edmd.hpp"
#include "zkroa/integrate.hpp"
#include "zkroa/roa.hpp"
#include "zkroa/smooth.hpp"
#include "zkroa/types.hpp"

namespace zkroa {

// All floating-point output uses 17 significant digits so text round-trips
// reproduce doubles exactly.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw MissingArtifact("cannot open for writing: " + path);
  return f;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw MissingArtifact("cannot open: " + path);
  return f;
}

inline std::string expect_key(std::istream& in, const std::string& key,
                              const std::string& path) {
  std::string k;
  if (!(in >> k) || k != key) {
    throw ConfigError("malformed file " + path + ": expected '" + key + "'");
  }
  std::string rest;
  std::getline(in, rest);
  if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
  return rest;
}

inline void write_dict_header(std::ostream& out, const Dictionary& d) {
  out << "dict " << family_name(d.family) << ' ' << d.freq_count << ' '
      << fmt17(d.period_scale) << ' ' << fmt17(d.gauss_scale) << ' ' << d.dim
      << '\n';
  out << "center";
  for (int a = 0; a < d.dim; ++a) out << ' ' << fmt17(d.center[a]);
  out << '\n';
}

inline Dictionary read_dict_header(std::istream& in, const std::string& path) {
  const std::string dict_line = expect_key(in, "dict", path);
  std::istringstream ds(dict_line);
  std::string fam;
  int freq_count = 0, dim = 0;
  double period = 0.0, gauss = 0.0;
  if (!(ds >> fam >> freq_count >> period >> gauss >> dim)) {
    throw ConfigError("malformed dict line in " + path);
  }
  const std::string center_line = expect_key(in, "center", path);
  std::istringstream cs(center_line);
  Vec center(dim);
  for (int a = 0; a < dim; ++a) {
    if (!(cs >> center[a])) throw ConfigError("malformed center in " + path);
  }
  return make_dictionary(parse_family(fam), freq_count, dim, period, gauss,
                         center);
}

}  // namespace detail

// ---- operator file: header + row-major "re,im" pairs --------------------

inline void write_operator(const std::string& path, const OperatorMatrix& op,
                           const Dictionary& dict, const DataMeta& meta) {
  auto f = detail::open_out(path);
  const int n = static_cast<int>(op.T.rows());
  f << "zkroa operator v1\n";
  f << "size " << n << '\n';
  f << "dt " << fmt17(meta.dt_total) << '\n';
  f << "nsteps " << meta.nsteps << '\n';
  detail::write_dict_header(f, dict);
  f << "reg " << fmt17(op.reg) << '\n';
  f << "rank " << op.rank << '\n';
  f << "residual " << fmt17(op.residual) << '\n';
  f << "data\n";
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      f << fmt17(op.T(i, j).real()) << ',' << fmt17(op.T(i, j).imag()) << '\n';
    }
  }
}

struct OperatorFile {
  OperatorMatrix op;
  Dictionary dict;
  DataMeta meta;
};

inline OperatorFile read_operator(const std::string& path) {
  auto f = detail::open_in(path);
  std::string line;
  std::getline(f, line);
  if (line != "zkroa operator v1") {
    throw ConfigError("not an operator file: " + path);
  }
  OperatorFile out;
  const int n = std::stoi(detail::expect_key(f, "size", path));
  out.meta.dt_total = std::stod(detail::expect_key(f, "dt", path));
  out.meta.nsteps = std::stoi(detail::expect_key(f, "nsteps", path));
  out.dict = detail::read_dict_header(f, path);
  out.meta.dict_descriptor = out.dict.descriptor();
  out.op.reg = std::stod(detail::expect_key(f, "reg", path));
  out.op.rank = std::stoi(detail::expect_key(f, "rank", path));
  out.op.residual = std::stod(detail::expect_key(f, "residual", path));
  detail::expect_key(f, "data", path);
  out.op.T.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!std::getline(f, line)) throw ConfigError("truncated data in " + path);
      const auto comma = line.find(',');
      if (comma == std::string::npos) {
        throw ConfigError("malformed data line in " + path);
      }
      out.op.T(i, j) = Complex(std::stod(line.substr(0, comma)),
                               std::stod(line.substr(comma + 1)));
    }
  }
  return out;
}

// ---- coefficient (iterated approximation) file ---------------------------

inline void write_ucoeffs(const std::string& path, const UApprox& u,
                          double dt_total) {
  auto f = detail::open_out(path);
  f << "zkroa ucoeffs v1\n";
  f << "size " << u.coeffs.size() << '\n';
  f << "dt " << fmt17(dt_total) << '\n';
  detail::write_dict_header(f, u.dict);
  f << "iterations " << u.iterations << '\n';
  f << "final_residual " << fmt17(u.final_residual) << '\n';
  f << "mode " << (u.vector_mode ? "vector" : "matrix") << '\n';
  f << "data\n";
  for (Eigen::Index i = 0; i < u.coeffs.size(); ++i) {
    f << fmt17(u.coeffs[i].real()) << ',' << fmt17(u.coeffs[i].imag()) << '\n';
  }
}

struct UCoeffsFile {
  UApprox u;
  double dt_total = 0.0;
};

inline UCoeffsFile read_ucoeffs(const std::string& path) {
  auto f = detail::open_in(path);
  std::string line;
  std::getline(f, line);
  if (line != "zkroa ucoeffs v1") throw ConfigError("not a ucoeffs file: " + path);
  UCoeffsFile out;
  const int n = std::stoi(detail::expect_key(f, "size", path));
  out.dt_total = std::stod(detail::expect_key(f, "dt", path));
  out.u.dict = detail::read_dict_header(f, path);
  out.u.iterations = std::stoi(detail::expect_key(f, "iterations", path));
  out.u.final_residual = std::stod(detail::expect_key(f, "final_residual", path));
  out.u.vector_mode = detail::expect_key(f, "mode", path) == "vector";
  detail::expect_key(f, "data", path);
  out.u.coeffs.resize(n);
  for (int i = 0; i < n; ++i) {
    if (!std::getline(f, line)) throw ConfigError("truncated data in " + path);
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("malformed data in " + path);
    out.u.coeffs[i] = Complex(std::stod(line.substr(0, comma)),
                              std::stod(line.substr(comma + 1)));
  }
  return out;
}

// ---- smooth regressor file ------------------------------------------------

inline void write_model(const std::string& path, const SmoothModel& m) {
  auto f = detail::open_out(path);
  f << "zkroa smooth-model v1\n";
  f << "layers";
  for (int s : m.layer_sizes) f << ' ' << s;
  f << '\n';
  f << "activation tanh\n";
  f << "in_mean";
  for (Eigen::Index a = 0; a < m.in_mean.size(); ++a) f << ' ' << fmt17(m.in_mean[a]);
  f << '\n';
  f << "in_scale";
  for (Eigen::Index a = 0; a < m.in_scale.size(); ++a) f << ' ' << fmt17(m.in_scale[a]);
  f << '\n';
  f << "out_mean " << fmt17(m.out_mean) << '\n';
  f << "out_scale " << fmt17(m.out_scale) << '\n';
  f << "epochs " << m.epochs_run << '\n';
  f << "final_mse " << fmt17(m.final_mse) << '\n';
  f << "data\n";
  for (size_t l = 0; l < m.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < m.weights[l].rows(); ++i) {
      for (Eigen::Index j = 0; j < m.weights[l].cols(); ++j) {
        f << fmt17(m.weights[l](i, j)) << '\n';
      }
    }
    for (Eigen::Index j = 0; j < m.biases[l].size(); ++j) {
      f << fmt17(m.biases[l][j]) << '\n';
    }
  }
}

inline SmoothModel read_model(const std::string& path) {
  auto f = detail::open_in(path);
  std::string line;
  std::getline(f, line);
  if (line != "zkroa smooth-model v1") {
    throw ConfigError("not a smooth-model file: " + path);
  }
  SmoothModel m;
  {
    std::istringstream ls(detail::expect_key(f, "layers", path));
    int s;
    while (ls >> s) m.layer_sizes.push_back(s);
    if (m.layer_sizes.size() < 2) throw ConfigError("bad layers in " + path);
  }
  if (detail::expect_key(f, "activation", path) != "tanh") {
    throw ConfigError("unsupported activation in " + path);
  }
  const int n = m.layer_sizes.front();
  {
    std::istringstream s(detail::expect_key(f, "in_mean", path));
    m.in_mean.resize(n);
    for (int a = 0; a < n; ++a) s >> m.in_mean[a];
  }
  {
    std::istringstream s(detail::expect_key(f, "in_scale", path));
    m.in_scale.resize(n);
    for (int a = 0; a < n; ++a) s >> m.in_scale[a];
  }
  m.out_mean = std::stod(detail::expect_key(f, "out_mean", path));
  m.out_scale = std::stod(detail::expect_key(f, "out_scale", path));
  m.epochs_run = std::stoi(detail::expect_key(f, "epochs", path));
  m.final_mse = std::stod(detail::expect_key(f, "final_mse", path));
  detail::expect_key(f, "data", path);
  auto next_value = [&]() {
    if (!std::getline(f, line)) throw ConfigError("truncated model " + path);
    return std::stod(line);
  };
  for (size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    Mat w(m.layer_sizes[l], m.layer_sizes[l + 1]);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = next_value();
    }
    Vec b(m.layer_sizes[l + 1]);
    for (Eigen::Index j = 0; j < b.size(); ++j) b[j] = next_value();
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::move(b));
  }
  return m;
}

// ---- CSV dumps -------------------------------------------------------------

inline void write_trajectory_csv(const std::string& path,
                                 const ClippedTrajectory& traj) {
  auto f = detail::open_out(path);
  const int dim = static_cast<int>(traj.states.cols());
  f << "t";
  for (int a = 1; a <= dim; ++a) f << ",x_" << a;
  f << ",I\n";
  for (Eigen::Index j = 0; j < traj.times.size(); ++j) {
    f << fmt17(traj.times[j]);
    for (int a = 0; a < dim; ++a) f << ',' << fmt17(traj.states(j, a));
    f << ',' << fmt17(traj.integrals[j]) << '\n';
  }
}

// One row per grid cell (row-major, last axis fastest): coordinates of the
// cell center, field value, Lie derivative, mask bit.
inline void write_field_csv(const std::string& path, const GridSpec& grid,
                            const std::vector<double>& values,
                            const std::vector<double>& lie,
                            const std::vector<std::uint8_t>& mask) {
  auto f = detail::open_out(path);
  const int dim = grid.dim();
  for (int a = 1; a <= dim; ++a) f << "x_" << a << ',';
  f << "u,lie,mask\n";
  for (long i = 0; i < grid.cell_count(); ++i) {
    const Vec x = grid.center_flat(i);
    for (int a = 0; a < dim; ++a) f << fmt17(x[a]) << ',';
    f << fmt17(values[i]) << ',' << fmt17(lie[i]) << ','
      << static_cast<int>(mask[i]) << '\n';
  }
}

inline void write_mask_csv(const std::string& path, const RoaMask& m) {
  auto f = detail::open_out(path);
  const int dim = m.grid.dim();
  for (int a = 1; a <= dim; ++a) f << "i_" << a << ',';
  f << "mask\n";
  for (long i = 0; i < m.grid.cell_count(); ++i) {
    const std::vector<int> idx = m.grid.unflatten(i);
    for (int a = 0; a < dim; ++a) f << idx[a] << ',';
    f << static_cast<int>(m.mask[i]) << '\n';
  }
}

inline void write_spectrum_csv(const std::string& path,
                               const std::vector<EigenPair>& pairs) {
  auto f = detail::open_out(path);
  f << "index,re_mu,im_mu,re_log_scale,im_log_scale,converged\n";
  for (size_t i = 0; i < pairs.size(); ++i) {
    f << i << ',' << fmt17(pairs[i].mu.real()) << ',' << fmt17(pairs[i].mu.imag())
      << ',' << fmt17(pairs[i].log_scale.real()) << ','
      << fmt17(pairs[i].log_scale.imag()) << ',' << (pairs[i].converged ? 1 : 0)
      << '\n';
  }
}

}  // namespace zkroa
