#include "riemspline/bvp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

namespace riemspline {

Trajectory integrate(const std::function<Vec(double, const Vec&)>& rhs, const Vec& x0, double t0,
                     double tf, int steps) {
  if (steps < 1) throw std::invalid_argument("integrate needs at least one step");
  Trajectory traj;
  traj.t.reserve(steps + 1);
  traj.x.reserve(steps + 1);
  const double h = (tf - t0) / steps;
  Vec x = x0;
  traj.t.push_back(t0);
  traj.x.push_back(x);
  for (int n = 0; n < steps; ++n) {
    const double t = t0 + n * h;
    const Vec k1 = rhs(t, x);
    const Vec k2 = rhs(t + 0.5 * h, Vec(x + 0.5 * h * k1));
    const Vec k3 = rhs(t + 0.5 * h, Vec(x + 0.5 * h * k2));
    const Vec k4 = rhs(t + h, Vec(x + h * k3));
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double tn = t0 + (n + 1) * h;
    if (!x.allFinite()) throw BlowUpError(tn);
    traj.t.push_back(tn);
    traj.x.push_back(x);
  }
  return traj;
}

void BvpProblem::validate() const {
  if (!(tf > t0)) throw std::invalid_argument("tf must exceed t0");
  const int d = dim();
  if (q0.size() != d || v0.size() != d || qf.size() != d || vf.size() != d)
    throw std::invalid_argument("boundary vectors must match the model dimension");
  if (segments < 1 || steps_per_segment < 1 || segments * steps_per_segment < 10)
    throw std::invalid_argument("discretization too coarse (segments*steps >= 10)");
}

ExtremalState ShootingUnknowns::segment_state(const BvpProblem& problem, int s) const {
  const int d = problem.dim();
  ExtremalState state;
  if (s == 0) {
    state.q = problem.q0;
    state.qdot = problem.v0;
    state.lam = flat.segment(0, d);
    state.mu = flat.segment(d, d);
  } else {
    const int base = 2 * d + 4 * d * (s - 1);
    state = ExtremalState::unpack(flat.segment(base, 4 * d));
  }
  return state;
}

namespace {

/// Cubic-Hermite jet between the boundary states at normalized time s.
struct HermiteJet {
  Vec q, qdot, qddot, qdddot;
};

HermiteJet hermite_jet(const BvpProblem& p, double s) {
  const double T = p.tf - p.t0;
  const double h00 = 2 * s * s * s - 3 * s * s + 1;
  const double h10 = s * s * s - 2 * s * s + s;
  const double h01 = -2 * s * s * s + 3 * s * s;
  const double h11 = s * s * s - s * s;
  const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1;
  const double d01 = -6 * s * s + 6 * s, d11 = 3 * s * s - 2 * s;
  const double e00 = 12 * s - 6, e10 = 6 * s - 4, e01 = -12 * s + 6, e11 = 6 * s - 2;
  HermiteJet jet;
  jet.q = h00 * p.q0 + h10 * T * p.v0 + h01 * p.qf + h11 * T * p.vf;
  jet.qdot = (d00 * p.q0 + d10 * T * p.v0 + d01 * p.qf + d11 * T * p.vf) / T;
  jet.qddot = (e00 * p.q0 + e10 * T * p.v0 + e01 * p.qf + e11 * T * p.vf) / (T * T);
  jet.qdddot = (12.0 * p.q0 + 6.0 * T * p.v0 - 12.0 * p.qf + 6.0 * T * p.vf) / (T * T * T);
  return jet;
}

}  // namespace

ShootingUnknowns default_guess(const BvpProblem& problem) {
  // The flat-space extremal: cubic Hermite between the boundary states with
  // the matching costates lam = 2 I u, mu = -d(lam)/dt. Solves force-free
  // constant-metric problems exactly and seeds the curved ones well.
  const int d = problem.dim();
  ShootingUnknowns u = ShootingUnknowns::zero(d, problem.segments);
  auto costates = [&](const HermiteJet& jet, Vec& lam, Vec& mu) {
    const Mat induced = problem.cost.induced.eval(jet.q);
    lam = 2.0 * induced * jet.qddot;
    const auto di = problem.cost.induced.partials_at(jet.q);
    Mat induced_dot = Mat::Zero(d, d);
    for (int k = 0; k < d; ++k) induced_dot += di[k] * jet.qdot[k];
    mu = -2.0 * (induced_dot * jet.qddot + induced * jet.qdddot);
  };
  Vec lam, mu;
  costates(hermite_jet(problem, 0.0), lam, mu);
  u.flat.segment(0, d) = lam;
  u.flat.segment(d, d) = mu;
  for (int s = 1; s < problem.segments; ++s) {
    const HermiteJet jet = hermite_jet(problem, static_cast<double>(s) / problem.segments);
    costates(jet, lam, mu);
    const int base = 2 * d + 4 * d * (s - 1);
    u.flat.segment(base, d) = jet.q;
    u.flat.segment(base + d, d) = jet.qdot;
    u.flat.segment(base + 2 * d, d) = lam;
    u.flat.segment(base + 3 * d, d) = mu;
  }
  return u;
}

namespace {

struct Shooter {
  const BvpProblem& problem;
  double force_scale;
  ForceField force;

  Shooter(const BvpProblem& p, double scale)
      : problem(p), force_scale(scale),
        force(scale_force_field(make_force_field(p.model), scale)) {}

  Vec rhs(const Vec& x) const {
    return hamiltonian_rhs_with_force(problem.model, problem.cost, force,
                                      ExtremalState::unpack(x))
        .pack();
  }

  double segment_start(int s) const {
    return problem.t0 + (problem.tf - problem.t0) * s / problem.segments;
  }

  /// Endpoint of segment s flowed from its initial state.
  ExtremalState flow(int s, const ExtremalState& start) const {
    auto f = [this](double, const Vec& x) { return rhs(x); };
    Trajectory traj = integrate(f, start.pack(), segment_start(s), segment_start(s + 1),
                                problem.steps_per_segment);
    return ExtremalState::unpack(traj.x.back());
  }

  /// Residual built from precomputed segment flows.
  Vec assemble(const ShootingUnknowns& u, const std::vector<ExtremalState>& flows) const {
    const int d = problem.dim();
    const int s_count = problem.segments;
    Vec r(ShootingUnknowns::count(d, s_count));
    int row = 0;
    for (int s = 0; s + 1 < s_count; ++s) {
      const ExtremalState next = u.segment_state(problem, s + 1);
      r.segment(row, 4 * d) = next.pack() - flows[s].pack();
      row += 4 * d;
    }
    r.segment(row, d) = flows[s_count - 1].q - problem.qf;
    r.segment(row + d, d) = flows[s_count - 1].qdot - problem.vf;
    return r;
  }

  std::vector<ExtremalState> all_flows(const ShootingUnknowns& u) const {
    std::vector<ExtremalState> flows(problem.segments);
    for (int s = 0; s < problem.segments; ++s)
      flows[s] = flow(s, u.segment_state(problem, s));
    return flows;
  }

  Vec residual(const ShootingUnknowns& u) const { return assemble(u, all_flows(u)); }

  /// Owning segment of unknown index j.
  int owner_segment(int j) const {
    const int d = problem.dim();
    return j < 2 * d ? 0 : 1 + (j - 2 * d) / (4 * d);
  }

  /// Forward-difference Jacobian; each column only re-integrates the segment
  /// the perturbed unknown belongs to, which reproduces the brute-force
  /// result exactly (all other flows are bitwise unchanged).
  Mat jacobian(const ShootingUnknowns& u, const Vec& r0,
               const std::vector<ExtremalState>& flows, double step_scale) const {
    const int n = static_cast<int>(u.flat.size());
    Mat jac(n, n);
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(n));
    auto column = [&](int j) {
      const double h = step_scale * (1.0 + std::abs(u.flat[j]));
      ShootingUnknowns up = u;
      up.flat[j] += h;
      const int seg = owner_segment(j);
      std::vector<ExtremalState> pflows = flows;
      pflows[seg] = flow(seg, up.segment_state(problem, seg));
      jac.col(j) = (assemble(up, pflows) - r0) / h;
    };
    if (workers <= 1) {
      for (int j = 0; j < n; ++j) column(j);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
          for (int j = static_cast<int>(w); j < n; j += static_cast<int>(workers)) column(j);
        });
      for (auto& th : pool) th.join();
    }
    return jac;
  }
};

struct NewtonOutcome {
  ShootingUnknowns unknowns;
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;
  std::string failure;
};

NewtonOutcome newton_stage(const Shooter& shooter, ShootingUnknowns u, const BvpOptions& opts) {
  NewtonOutcome out;
  std::vector<ExtremalState> flows;
  Vec r;
  try {
    flows = shooter.all_flows(u);
    r = shooter.assemble(u, flows);
  } catch (const BlowUpError& e) {
    out.unknowns = u;
    out.failure = std::string("blow-up during shooting: ") + e.what();
    return out;
  }
  double rnorm = r.lpNorm<Eigen::Infinity>();

  while (rnorm > opts.tolerance && out.iterations < opts.max_iterations) {
    Mat jac;
    try {
      jac = shooter.jacobian(u, r, flows, opts.jacobian_step);
    } catch (const BlowUpError& e) {
      out.failure = std::string("blow-up during shooting: ") + e.what();
      break;
    }
    const Vec dx = jac.colPivHouseholderQr().solve(-r);
    if (!dx.allFinite()) {
      out.failure = "line search failed: singular Jacobian";
      break;
    }

    const double r2 = r.norm();
    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= opts.min_line_search) {
      ShootingUnknowns trial{Vec(u.flat + alpha * dx)};
      try {
        auto tflows = shooter.all_flows(trial);
        const Vec rt = shooter.assemble(trial, tflows);
        if (rt.norm() < r2) {
          u = trial;
          r = rt;
          flows = std::move(tflows);
          rnorm = r.lpNorm<Eigen::Infinity>();
          accepted = true;
          break;
        }
      } catch (const BlowUpError&) {
        // shrink and retry
      }
      alpha *= 0.5;
    }
    ++out.iterations;
    if (!accepted) {
      out.failure = "line search failed";
      break;
    }
    log_debug("newton iter " + std::to_string(out.iterations) + " residual " +
              std::to_string(rnorm));
  }

  out.unknowns = u;
  out.residual_norm = rnorm;
  out.converged = rnorm <= opts.tolerance;
  if (!out.converged && out.failure.empty())
    out.failure = "max iterations exceeded (best residual " + std::to_string(rnorm) + ")";
  return out;
}

}  // namespace

Vec shooting_residual(const BvpProblem& problem, const ShootingUnknowns& unknowns,
                      double force_scale) {
  problem.validate();
  if (unknowns.flat.size() != ShootingUnknowns::count(problem.dim(), problem.segments))
    throw std::invalid_argument("unknown vector size mismatch");
  return Shooter(problem, force_scale).residual(unknowns);
}

SolvedTrajectory sample_trajectory(const BvpProblem& problem, const ShootingUnknowns& unknowns,
                                   double force_scale, int steps_per_segment) {
  Shooter shooter(problem, force_scale);
  SolvedTrajectory traj;
  auto f = [&shooter](double, const Vec& x) { return shooter.rhs(x); };
  for (int s = 0; s < problem.segments; ++s) {
    Trajectory part = integrate(f, unknowns.segment_state(problem, s).pack(),
                                shooter.segment_start(s), shooter.segment_start(s + 1),
                                steps_per_segment);
    const size_t begin = (s == 0) ? 0 : 1;  // drop duplicated segment boundary
    for (size_t i = begin; i < part.t.size(); ++i) {
      traj.t.push_back(part.t[i]);
      traj.states.push_back(ExtremalState::unpack(part.x[i]));
    }
  }
  const int n = traj.samples();
  traj.u.resize(n);
  traj.cost_rate.resize(n);
  traj.cost_accum.resize(n);
  traj.hamiltonian.resize(n);
  for (int i = 0; i < n; ++i) {
    const ExtremalState& s = traj.states[i];
    traj.u[i] = control_from_costate(problem.cost, s.q, s.lam);
    traj.cost_rate[i] = cost_rate(problem.cost, s.q, traj.u[i]);
    traj.hamiltonian[i] = hamiltonian_value(problem.model, problem.cost, s, force_scale);
  }
  traj.cost_accum[0] = 0.0;
  for (int i = 1; i < n; ++i)
    traj.cost_accum[i] = traj.cost_accum[i - 1] +
                         0.5 * (traj.cost_rate[i - 1] + traj.cost_rate[i]) *
                             (traj.t[i] - traj.t[i - 1]);
  traj.total_cost = traj.cost_accum[n - 1];
  return traj;
}

SolveResult solve(const BvpProblem& problem, const std::optional<ShootingUnknowns>& guess,
                  const BvpOptions& opts) {
  problem.validate();
  if (opts.tolerance <= 0.0) throw std::invalid_argument("tolerance must be positive");

  std::vector<double> scales;
  if (guess || !problem.model.has_external_force() || opts.force_scale == 0.0) {
    scales = {opts.force_scale};
  } else {
    for (double c : opts.continuation) scales.push_back(c * opts.force_scale);
    if (scales.empty()) scales = {opts.force_scale};
    scales.erase(std::unique(scales.begin(), scales.end()), scales.end());
  }

  SolveResult result;
  ShootingUnknowns u = guess ? *guess : default_guess(problem);
  for (double scale : scales) {
    Shooter shooter(problem, scale);
    log_info("solving stage at force scale " + std::to_string(scale));
    NewtonOutcome outcome = newton_stage(shooter, u, opts);
    result.report.iterations += outcome.iterations;
    result.report.continuation_steps += 1;
    u = outcome.unknowns;
    if (!outcome.converged) {
      result.report.converged = false;
      result.report.final_residual_norm = outcome.residual_norm;
      std::ostringstream msg;
      msg << outcome.failure << " [force scale " << scale << "]";
      result.report.failure = msg.str();
      result.unknowns = u;
      return result;
    }
    result.report.final_residual_norm = outcome.residual_norm;
  }

  result.report.converged = true;
  result.unknowns = u;
  result.trajectory = sample_trajectory(problem, u, opts.force_scale, problem.steps_per_segment);
  double h0 = result.trajectory.hamiltonian.empty() ? 0.0 : result.trajectory.hamiltonian.front();
  double drift = 0.0;
  for (double h : result.trajectory.hamiltonian) drift = std::max(drift, std::abs(h - h0));
  result.report.hamiltonian_drift = drift / (1.0 + std::abs(h0));
  return result;
}

SolvedTrajectory euclidean_baseline(const BvpProblem& problem, int total_steps,
                                    double force_scale) {
  problem.validate();
  const int n = total_steps + 1;
  const double T = problem.tf - problem.t0;
  const ForceField force = scale_force_field(make_force_field(problem.model), force_scale);

  SolvedTrajectory traj;
  traj.t.resize(n);
  traj.states.resize(n);
  traj.u.resize(n);
  traj.cost_rate.resize(n);
  traj.cost_accum.resize(n);
  traj.hamiltonian.resize(n);
  for (int i = 0; i < n; ++i) {
    const double s = static_cast<double>(i) / total_steps;
    const HermiteJet jet = hermite_jet(problem, s);
    ExtremalState state;
    state.q = jet.q;
    state.qdot = jet.qdot;

    const Vec a = force.accel(state.q, state.qdot);
    const Vec u = covariant_accel(problem.model.inertia, state.q, state.qdot, jet.qddot) - a;
    state.lam = 2.0 * problem.cost.induced.eval(state.q) * u;
    state.mu = Vec::Zero(problem.dim());

    traj.t[i] = problem.t0 + s * T;
    traj.u[i] = u;
    traj.cost_rate[i] = cost_rate(problem.cost, state.q, u);
    traj.hamiltonian[i] = hamiltonian_value(problem.model, problem.cost, state, force_scale);
    traj.states[i] = std::move(state);
  }
  traj.cost_accum[0] = 0.0;
  for (int i = 1; i < n; ++i)
    traj.cost_accum[i] = traj.cost_accum[i - 1] +
                         0.5 * (traj.cost_rate[i - 1] + traj.cost_rate[i]) *
                             (traj.t[i] - traj.t[i - 1]);
  traj.total_cost = traj.cost_accum[n - 1];
  return traj;
}

}  // namespace riemspline
