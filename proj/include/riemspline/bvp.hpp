#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "riemspline/control.hpp"
#include "riemspline/models.hpp"
#include "riemspline/types.hpp"

namespace riemspline {

/// Fixed-step classical RK4. Returns steps+1 samples including both
/// endpoints; throws BlowUpError when the state stops being finite.
struct Trajectory {
  std::vector<double> t;
  std::vector<Vec> x;
};
Trajectory integrate(const std::function<Vec(double, const Vec&)>& rhs, const Vec& x0, double t0,
                     double tf, int steps);

/// Two-point boundary-value problem for the extremal flow.
struct BvpProblem {
  MechModel model;
  CostModel cost;
  double t0 = 0.0, tf = 1.0;
  Vec q0, v0, qf, vf;
  int segments = 5;
  int steps_per_segment = 40;

  int dim() const { return model.dim; }
  void validate() const;
};

/// Per-segment initial states of the multiple-shooting system. Segment 0 has
/// (q, qdot) pinned to the boundary data, so only its costates are unknowns;
/// every later segment contributes a full ExtremalState block.
struct ShootingUnknowns {
  Vec flat;

  static int count(int dim, int segments) { return 2 * dim + 4 * dim * (segments - 1); }
  static ShootingUnknowns zero(int dim, int segments) {
    return {Vec::Zero(count(dim, segments))};
  }
  /// Initial state of segment s implied by these unknowns.
  ExtremalState segment_state(const BvpProblem& problem, int s) const;
};

/// Flat-space extremal guess: the cubic Hermite between the boundary states
/// with its matching costates through the induced metric.
ShootingUnknowns default_guess(const BvpProblem& problem);

/// Continuity defects between segments followed by the terminal defects
/// q(tf) - qf, qdot(tf) - vf; same length as the unknown vector.
Vec shooting_residual(const BvpProblem& problem, const ShootingUnknowns& unknowns,
                      double force_scale = 1.0);

struct BvpOptions {
  double tolerance = 1e-8;          // on the residual max-abs
  int max_iterations = 50;          // damped-Newton iterations per stage
  double force_scale = 1.0;         // external-force scale of the target problem
  std::vector<double> continuation = {0.0, 0.25, 0.5, 0.75, 1.0};  // fractions of force_scale
  double jacobian_step = 1e-7;      // forward-difference step scale
  double min_line_search = 9.5367431640625e-07;  // 2^-20
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double final_residual_norm = 0.0;  // max-abs
  int continuation_steps = 0;
  double hamiltonian_drift = 0.0;
  std::string failure;  // empty when converged
};

struct SolvedTrajectory {
  std::vector<double> t;
  std::vector<ExtremalState> states;
  std::vector<Vec> u;
  std::vector<double> cost_rate;
  std::vector<double> cost_accum;
  std::vector<double> hamiltonian;
  double total_cost = 0.0;

  int samples() const { return static_cast<int>(t.size()); }
};

struct SolveResult {
  SolvedTrajectory trajectory;
  SolveReport report;
  ShootingUnknowns unknowns;
};

/// Damped-Newton multiple shooting with forward-difference Jacobian. Without
/// a caller guess, external forces are ramped through the continuation
/// schedule, each stage warm-starting the next from the flat-space /
/// zero-costate start. Solver failures are carried in the report, not thrown.
SolveResult solve(const BvpProblem& problem, const std::optional<ShootingUnknowns>& guess,
                  const BvpOptions& opts);

/// Densely sampled trajectory obtained by re-integrating from converged
/// unknowns (used internally and by validation tests).
SolvedTrajectory sample_trajectory(const BvpProblem& problem, const ShootingUnknowns& unknowns,
                                   double force_scale, int steps_per_segment);

/// Cubic-Hermite interpolant between the boundary states executed through
/// inverse dynamics u = nabla_qdot qdot - a~, costed under the same model.
SolvedTrajectory euclidean_baseline(const BvpProblem& problem, int total_steps,
                                    double force_scale = 1.0);

}  // namespace riemspline
