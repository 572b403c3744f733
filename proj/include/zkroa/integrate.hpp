#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <utility>

#include "zkroa/systems.hpp"
#include "zkroa/types.hpp"

namespace zkroa {

// Uniform-time samples of the augmented system (state, running eta-integral).
// states.row(j) is the state at times[j]; integrals[j] = I(times[j]).
struct RawTrajectory {
  Vec times;
  Mat states;     // nsteps x dim
  Vec integrals;  // nsteps
};

// Trajectory after boundary clipping: once the sampled path leaves the region,
// all later samples are replaced by the boundary intersection point and the
// integral accrues at rate eta(boundary_point).
struct ClippedTrajectory {
  Vec times;
  Mat states;
  Vec integrals;
  bool exited = false;
  std::optional<int> exit_index;
  std::optional<Vec> boundary_point;
};

// Classical fixed-step RK4 on the (dim+1)-dimensional augmented system
//   x' = f(x),  I' = eta(x),  I(0) = 0
// over [0, dt_total] with nsteps uniform samples (step dt_total/(nsteps-1)).
inline RawTrajectory simulate_augmented(const SystemSpec& sys, const Vec& x0,
                                        double dt_total, int nsteps) {
  if (nsteps < 2) throw ConfigError("simulate_augmented: nsteps must be >= 2");
  if (!(dt_total > 0.0)) throw ConfigError("simulate_augmented: dt_total must be > 0");

  const double h = dt_total / (nsteps - 1);
  RawTrajectory out;
  out.times = Vec::LinSpaced(nsteps, 0.0, dt_total);
  out.states.resize(nsteps, sys.dim);
  out.integrals.resize(nsteps);

  Vec x = x0;
  double intval = 0.0;
  out.states.row(0) = x.transpose();
  out.integrals[0] = 0.0;

  Vec k1, k2, k3, k4;
  for (int j = 1; j < nsteps; ++j) {
    k1 = sys.field(x);
    const double e1 = sys.eta(x);
    Vec x2 = x + (0.5 * h) * k1;
    k2 = sys.field(x2);
    const double e2 = sys.eta(x2);
    Vec x3 = x + (0.5 * h) * k2;
    k3 = sys.field(x3);
    const double e3 = sys.eta(x3);
    Vec x4 = x + h * k3;
    k4 = sys.field(x4);
    const double e4 = sys.eta(x4);

    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    intval += (h / 6.0) * (e1 + 2.0 * e2 + 2.0 * e3 + e4);

    if (!x.allFinite() || !std::isfinite(intval)) {
      throw IntegrationBlowup(
          "simulate_augmented: non-finite state at step " + std::to_string(j) +
              " (system " + sys.name + ")",
          j);
    }
    out.states.row(j) = x.transpose();
    out.integrals[j] = intval;
  }
  return out;
}

// Intersection of the segment p -> q with the boundary of the box, as the
// smallest s in [0,1] at which any face is crossed. Assumes p inside, q not.
// The crossing coordinate is snapped exactly onto the face value.
inline Vec box_segment_intersection(const Box& box, const Vec& p, const Vec& q) {
  const int n = box.dim();
  double s_min = 1.0;
  int face_axis = -1;
  double face_val = 0.0;
  for (int d = 0; d < n; ++d) {
    const double delta = q[d] - p[d];
    if (delta > 0.0 && q[d] > box.hi[d]) {
      const double s = (box.hi[d] - p[d]) / delta;
      if (s >= 0.0 && s <= s_min) {
        s_min = s;
        face_axis = d;
        face_val = box.hi[d];
      }
    } else if (delta < 0.0 && q[d] < box.lo[d]) {
      const double s = (box.lo[d] - p[d]) / delta;
      if (s >= 0.0 && s <= s_min) {
        s_min = s;
        face_axis = d;
        face_val = box.lo[d];
      }
    }
  }
  Vec sect = p + s_min * (q - p);
  if (face_axis >= 0) sect[face_axis] = face_val;
  // Clamp roundoff so the point is a member of the closed box.
  for (int d = 0; d < n; ++d) {
    sect[d] = std::min(std::max(sect[d], box.lo[d]), box.hi[d]);
  }
  return sect;
}

// Boundary clipping: find the first sample outside the region, replace it and
// all later samples by the segment/boundary intersection point, and continue
// the integral at the constant rate eta(intersection).
inline ClippedTrajectory clip_to_region(RawTrajectory traj, const SystemSpec& sys) {
  const int nsteps = static_cast<int>(traj.times.size());
  ClippedTrajectory out;
  out.times = std::move(traj.times);
  out.states = std::move(traj.states);
  out.integrals = std::move(traj.integrals);

  int iota = -1;
  for (int j = 0; j < nsteps; ++j) {
    if (!sys.region.contains(out.states.row(j).transpose())) {
      iota = j;
      break;
    }
  }
  if (iota < 0) return out;
  if (iota == 0) {
    throw ConfigError("clip_to_region: initial state lies outside the region");
  }

  const Vec prev = out.states.row(iota - 1).transpose();
  const Vec next = out.states.row(iota).transpose();
  const Vec sect = box_segment_intersection(sys.region, prev, next);
  const double eta_b = sys.eta(sect);
  const double h = out.times[1] - out.times[0];
  const double base = out.integrals[iota - 1];

  for (int j = iota; j < nsteps; ++j) {
    out.states.row(j) = sect.transpose();
    out.integrals[j] = base + static_cast<double>(j - iota + 1) * eta_b * h;
  }
  out.exited = true;
  out.exit_index = iota;
  out.boundary_point = sect;
  return out;
}

// Fused stopped-flow simulation: identical to clip_to_region applied to
// simulate_augmented, except that stepping halts at the first sample outside
// the region. Without the early stop, trajectories that leave the region of a
// repelling vector field can reach a finite-time blowup before the horizon
// (cubic system from |x| >= 1.2 over a unit horizon) even though the stopped
// flow itself is well defined.
inline ClippedTrajectory simulate_clipped(const SystemSpec& sys, const Vec& x0,
                                          double dt_total, int nsteps) {
  if (nsteps < 2) throw ConfigError("simulate_clipped: nsteps must be >= 2");
  if (!(dt_total > 0.0)) throw ConfigError("simulate_clipped: dt_total must be > 0");
  if (!sys.region.contains(x0)) {
    throw ConfigError("simulate_clipped: initial state lies outside the region");
  }

  const double h = dt_total / (nsteps - 1);
  ClippedTrajectory out;
  out.times = Vec::LinSpaced(nsteps, 0.0, dt_total);
  out.states.resize(nsteps, sys.dim);
  out.integrals.resize(nsteps);
  out.states.row(0) = x0.transpose();
  out.integrals[0] = 0.0;

  Vec x = x0;
  double intval = 0.0;
  Vec k1, k2, k3, k4;
  for (int j = 1; j < nsteps; ++j) {
    k1 = sys.field(x);
    const double e1 = sys.eta(x);
    Vec x2 = x + (0.5 * h) * k1;
    k2 = sys.field(x2);
    const double e2 = sys.eta(x2);
    Vec x3 = x + (0.5 * h) * k2;
    k3 = sys.field(x3);
    const double e3 = sys.eta(x3);
    Vec x4 = x + h * k3;
    k4 = sys.field(x4);
    const double e4 = sys.eta(x4);

    Vec x_next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double int_next = intval + (h / 6.0) * (e1 + 2.0 * e2 + 2.0 * e3 + e4);
    if (!x_next.allFinite() || !std::isfinite(int_next)) {
      throw IntegrationBlowup(
          "simulate_clipped: non-finite state at step " + std::to_string(j) +
              " (system " + sys.name + ")",
          j);
    }

    if (!sys.region.contains(x_next)) {
      const Vec sect = box_segment_intersection(sys.region, x, x_next);
      const double eta_b = sys.eta(sect);
      for (int r = j; r < nsteps; ++r) {
        out.states.row(r) = sect.transpose();
        out.integrals[r] = intval + static_cast<double>(r - j + 1) * eta_b * h;
      }
      out.exited = true;
      out.exit_index = j;
      out.boundary_point = sect;
      return out;
    }
    x = std::move(x_next);
    intval = int_next;
    out.states.row(j) = x.transpose();
    out.integrals[j] = intval;
  }
  return out;
}

// One application of the finite-horizon operator to an observable:
//   exp(-I(dt_total)) * obs(stopped_state(dt_total)).
inline Complex evaluate_T_delta(const SystemSpec& sys,
                                const std::function<Complex(const Vec&)>& obs,
                                const Vec& x, double dt_total, int nsteps) {
  const ClippedTrajectory traj = simulate_clipped(sys, x, dt_total, nsteps);
  const int last = static_cast<int>(traj.times.size()) - 1;
  return std::exp(-traj.integrals[last]) * obs(traj.states.row(last).transpose());
}

}  // namespace zkroa
