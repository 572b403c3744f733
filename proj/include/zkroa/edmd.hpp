#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "zkroa/dictionary.hpp"
#include "zkroa/integrate.hpp"
#include "zkroa/parallel.hpp"
#include "zkroa/systems.hpp"
#include "zkroa/types.hpp"

namespace zkroa {

struct DataMeta {
  double dt_total = 0.0;
  int nsteps = 0;
  std::string dict_descriptor;
};

// Stacked feature/label matrices: X[m,i] = z_i(x_m), Y[m,i] the operator
// applied to z_i at x_m. One clipped trajectory per sample is shared by all
// basis functions.
struct DataMatrices {
  CMat X;
  CMat Y;
  std::vector<Vec> samples;
  DataMeta meta;
};

inline DataMatrices stack_data(const SystemSpec& sys, const Dictionary& dict,
                               const std::vector<Vec>& samples, double dt_total,
                               int nsteps, int workers = 0) {
  const long m_count = static_cast<long>(samples.size());
  DataMatrices out;
  out.X.resize(m_count, dict.size());
  out.Y.resize(m_count, dict.size());
  out.samples = samples;
  out.meta = DataMeta{dt_total, nsteps, dict.descriptor()};

  parallel_for(
      m_count,
      [&](long m) {
        const Vec& x0 = samples[m];
        if (!sys.region.contains(x0)) {
          throw ConfigError("stack_data: sample " + std::to_string(m) +
                            " lies outside the region");
        }
        ClippedTrajectory traj;
        try {
          traj = simulate_clipped(sys, x0, dt_total, nsteps);
        } catch (const IntegrationBlowup& e) {
          throw IntegrationBlowup("stack_data: sample " + std::to_string(m) +
                                      ": " + e.what(),
                                  e.step_index);
        }
        const int last = static_cast<int>(traj.times.size()) - 1;
        const double damping = std::exp(-traj.integrals[last]);
        out.X.row(m) = eval(dict, x0).transpose();
        out.Y.row(m) =
            damping * eval(dict, traj.states.row(last).transpose()).transpose();
      },
      workers);
  return out;
}

// Eigendecomposition A = V diag(values) V^H of a Hermitian matrix by cyclic
// Jacobi rotations with a fixed sweep order (deterministic).
struct HermitianEig {
  Vec values;
  CMat vectors;
  int sweeps = 0;
};

inline HermitianEig jacobi_eigh(CMat a, int max_sweeps = 60) {
  const int n = static_cast<int>(a.rows());
  HermitianEig res;
  res.vectors = CMat::Identity(n, n);
  res.values.resize(n);
  if (n == 0) return res;

  const double fro = a.norm();
  auto off_norm = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };

  int sweep = 0;
  for (; sweep < max_sweeps && fro > 0.0; ++sweep) {
    if (off_norm() <= 1e-14 * fro) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double m = std::abs(apq);
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        if (m <= 1e-18 * (std::abs(app) + std::abs(aqq)) || m == 0.0) continue;

        const Complex w = apq / m;  // e^{i arg(apq)}
        const double tau = (app - aqq) / (2.0 * m);
        const double t = tau >= 0.0 ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                    : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const Complex sw = s * w;
        const Complex swc = s * std::conj(w);

        // a <- a * U, where U differs from identity in the (p,q) block.
        for (int k = 0; k < n; ++k) {
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = c * akp + swc * akq;
          a(k, q) = -sw * akp + c * akq;
        }
        // a <- U^H * a.
        for (int k = 0; k < n; ++k) {
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = c * apk + sw * aqk;
          a(q, k) = -swc * apk + c * aqk;
        }
        a(p, q) = Complex(0.0, 0.0);
        a(q, p) = Complex(0.0, 0.0);
        a(p, p) = Complex(a(p, p).real(), 0.0);
        a(q, q) = Complex(a(q, q).real(), 0.0);
        // Accumulate eigenvectors: V <- V * U.
        for (int k = 0; k < n; ++k) {
          const Complex vkp = res.vectors(k, p);
          const Complex vkq = res.vectors(k, q);
          res.vectors(k, p) = c * vkp + swc * vkq;
          res.vectors(k, q) = -sw * vkp + c * vkq;
        }
      }
    }
  }
  res.sweeps = sweep;
  for (int i = 0; i < n; ++i) res.values[i] = a(i, i).real();
  return res;
}

// Pseudo-inverse of a Hermitian PSD matrix: invert eigenvalues above
// rel_tol * lambda_max, zero the rest.
inline CMat pinv_hermitian(const CMat& g, double rel_tol,
                           int* rank_out = nullptr) {
  const HermitianEig eig = jacobi_eigh(g);
  const int n = static_cast<int>(g.rows());
  const double lmax = eig.values.size() > 0 ? eig.values.maxCoeff() : 0.0;
  if (!(lmax > 0.0)) {
    throw DegenerateData("pinv_hermitian: no eigenvalue above zero");
  }
  const double cut = rel_tol * lmax;
  Vec inv = Vec::Zero(n);
  int rank = 0;
  for (int i = 0; i < n; ++i) {
    if (eig.values[i] > cut) {
      inv[i] = 1.0 / eig.values[i];
      ++rank;
    }
  }
  if (rank == 0) {
    throw DegenerateData("pinv_hermitian: all eigenvalues below threshold");
  }
  if (rank_out) *rank_out = rank;
  return eig.vectors * inv.asDiagonal() * eig.vectors.adjoint();
}

struct OperatorMatrix {
  CMat T;
  double reg = 0.0;        // relative eigenvalue threshold used
  double residual = 0.0;   // ||Y - X T||_F
  int rank = 0;            // retained eigenvalues of the Gram matrix
};

// Least-squares operator fit T = (X^H X)^+ X^H Y through the thresholded
// Gram eigendecomposition.
inline OperatorMatrix fit_operator(const DataMatrices& data,
                                   double svd_tol = 1e-12) {
  if (data.X.rows() == 0 || data.X.cols() == 0) {
    throw DegenerateData("fit_operator: empty data");
  }
  OperatorMatrix op;
  op.reg = svd_tol;
  const CMat gram = data.X.adjoint() * data.X;
  const CMat gram_pinv = pinv_hermitian(gram, svd_tol, &op.rank);
  op.T = gram_pinv * (data.X.adjoint() * data.Y);
  op.residual = (data.Y - data.X * op.T).norm();
  return op;
}

// One matrix-power step: returns (T * w_prev, ||T * w_prev - w_prev||_F).
inline std::pair<CMat, double> matrix_power_step(const CMat& t, const CMat& w_prev) {
  if (t.rows() != t.cols() || t.cols() != w_prev.rows()) {
    throw ConfigError("matrix_power_step: dimension mismatch");
  }
  CMat next = t * w_prev;
  const double diff = (next - w_prev).norm();
  return {std::move(next), diff};
}

inline std::pair<CVec, double> vector_power_step(const CMat& t, const CVec& w_prev) {
  if (t.rows() != t.cols() || t.cols() != w_prev.size()) {
    throw ConfigError("vector_power_step: dimension mismatch");
  }
  CVec next = t * w_prev;
  const double diff = (next - w_prev).norm();
  return {std::move(next), diff};
}

struct EigenPair {
  Complex mu;                 // eigenvalue of T
  Complex log_scale;          // log(mu) / dt
  CVec vec;
  bool converged = false;
};

// Leading eigenpairs by |mu| via power iteration with Householder deflation.
// Diagnostics-grade: near-ties in |mu| stall the iteration and are reported
// with converged=false. tol is the residual bound relative to the block norm.
inline std::vector<EigenPair> spectrum(const CMat& t, int top_k, double dt_total,
                                       int max_iters = 5000,
                                       double tol = 1e-10) {
  const int n = static_cast<int>(t.rows());
  if (t.rows() != t.cols()) throw ConfigError("spectrum: matrix must be square");
  if (top_k > n) throw ConfigError("spectrum: top_k exceeds matrix size");
  std::vector<EigenPair> out;
  if (top_k <= 0) return out;

  const double scale = t.norm();
  CMat a = t;
  struct Level {
    CVec house;     // Householder unit vector in the level's dimension
    Complex mu;
    CVec coupling;  // first row of the deflated block, length dim-1
  };
  std::vector<Level> levels;

  for (int step = 0; step < top_k; ++step) {
    const int m = static_cast<int>(a.rows());
    // Deterministic start vector.
    CVec v(m);
    for (int i = 0; i < m; ++i) {
      v[i] = Complex(1.0 + 0.37 * ((i * 2654435761u + step) % 97) / 97.0,
                     0.21 * ((i * 40503u + 7u * step) % 89) / 89.0);
    }
    v.normalize();

    Complex mu(0.0, 0.0);
    bool converged = false;
    const double block_scale = std::max(a.norm(), 1e-300);
    for (int it = 0; it < max_iters; ++it) {
      const CVec w = a * v;
      mu = v.dot(w);  // Rayleigh quotient v^H A v with ||v|| = 1
      const double resid = (w - mu * v).norm();
      if (resid <= tol * block_scale) {
        converged = true;
        break;
      }
      const double nw = w.norm();
      if (nw == 0.0) {
        mu = Complex(0.0, 0.0);  // v is an exact null vector
        converged = true;
        break;
      }
      v = w / nw;
    }

    EigenPair pair;
    pair.mu = mu;
    pair.log_scale = std::log(mu) / dt_total;
    pair.converged = converged;

    // Lift the eigenvector back through the deflation levels.
    CVec y = v;
    for (int l = static_cast<int>(levels.size()) - 1; l >= 0; --l) {
      const Level& lv = levels[l];
      const Complex denom = mu - lv.mu;
      Complex alpha(0.0, 0.0);
      if (std::abs(denom) > 1e-14 * std::max(1.0, std::abs(mu))) {
        // b^T y, unconjugated
        alpha = (lv.coupling.array() * y.array()).sum() / denom;
      }
      CVec y2(y.size() + 1);
      y2[0] = alpha;
      y2.tail(y.size()) = y;
      y2 -= 2.0 * lv.house * (lv.house.dot(y2));
      y = y2;
    }
    y.normalize();
    pair.vec = y;
    // Flag against the original matrix: lifting can degrade inexact levels.
    if (scale > 0.0) {
      pair.converged =
          converged && (t * pair.vec - pair.mu * pair.vec).norm() <= 1e-8 * scale;
    }
    out.push_back(std::move(pair));

    if (step + 1 == top_k || m == 1) break;

    // Householder reflection H = I - 2 u u^H with H v proportional to e1;
    // then H A H = [[mu, b^T], [0, B]] and we recurse on B.
    CVec u = v;
    const Complex a0 = u[0];
    const Complex phase = std::abs(a0) > 0.0 ? a0 / std::abs(a0) : Complex(1.0, 0.0);
    u[0] += phase * v.norm();
    const double un = u.norm();
    if (un == 0.0) break;
    u /= un;
    CMat ha = a - 2.0 * u * (u.adjoint() * a);
    CMat hah = ha - 2.0 * (ha * u) * u.adjoint();
    Level lv;
    lv.house = u;
    lv.mu = mu;
    lv.coupling = hah.row(0).tail(m - 1).transpose();
    levels.push_back(std::move(lv));
    a = hah.block(1, 1, m - 1, m - 1).eval();
  }
  return out;
}

}  // namespace zkroa
