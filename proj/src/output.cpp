#include "riemspline/output.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace riemspline {

namespace fs = std::filesystem;

TissotSample tissot_indicatrix(const MetricField& metric, const Vec& q) {
  const Mat g = metric.eval(q);
  require_spd(g);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (g + g.transpose()));
  const int d = static_cast<int>(g.rows());
  TissotSample sample;
  sample.q = q;
  sample.axes = Mat(d, d);
  // Ascending eigenvalues give descending semi-axes.
  for (int k = 0; k < d; ++k) {
    sample.semi_axis_lengths.push_back(1.0 / std::sqrt(es.eigenvalues()(k)));
    Vec axis = es.eigenvectors().col(k);
    int imax = 0;
    for (int i = 1; i < d; ++i)
      if (std::abs(axis[i]) > std::abs(axis[imax])) imax = i;
    if (axis[imax] < 0.0) axis = -axis;
    sample.axes.col(k) = axis;
  }
  return sample;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Atomic write: temp file in the same directory, then rename.
void write_file(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    if (!out.good()) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string trajectory_csv(const SolvedTrajectory& traj, int d) {
  std::string out;
  out += "t";
  auto cols = [&out, d](const std::string& name) {
    for (int i = 1; i <= d; ++i) out += "," + name + std::to_string(i);
  };
  cols("q");
  cols("qdot");
  cols("lambda");
  cols("mu");
  cols("u");
  out += ",cost_rate,cost_accum,hamiltonian\n";
  for (int n = 0; n < traj.samples(); ++n) {
    out += fmt(traj.t[n]);
    const ExtremalState& s = traj.states[n];
    for (int i = 0; i < d; ++i) out += "," + fmt(s.q[i]);
    for (int i = 0; i < d; ++i) out += "," + fmt(s.qdot[i]);
    for (int i = 0; i < d; ++i) out += "," + fmt(s.lam[i]);
    for (int i = 0; i < d; ++i) out += "," + fmt(s.mu[i]);
    for (int i = 0; i < d; ++i) out += "," + fmt(traj.u[n][i]);
    out += "," + fmt(traj.cost_rate[n]);
    out += "," + fmt(traj.cost_accum[n]);
    out += "," + fmt(traj.hamiltonian[n]);
    out += "\n";
  }
  return out;
}

std::string tissot_csv(const SolvedTrajectory& traj, const MechModel& model, int n_samples) {
  const int d = model.dim;
  std::string out = "t";
  for (int i = 1; i <= d; ++i) out += ",q" + std::to_string(i);
  for (int k = 1; k <= d; ++k) {
    out += ",len" + std::to_string(k);
    for (int i = 1; i <= d; ++i) out += ",ax" + std::to_string(k) + "_" + std::to_string(i);
  }
  out += "\n";
  const int total = traj.samples();
  for (int j = 0; j < n_samples; ++j) {
    const int idx = static_cast<int>(std::llround(
        static_cast<double>(j) * (total - 1) / std::max(1, n_samples - 1)));
    const TissotSample sample = tissot_indicatrix(model.inertia, traj.states[idx].q);
    out += fmt(traj.t[idx]);
    for (int i = 0; i < d; ++i) out += "," + fmt(sample.q[i]);
    for (int k = 0; k < d; ++k) {
      out += "," + fmt(sample.semi_axis_lengths[k]);
      for (int i = 0; i < d; ++i) out += "," + fmt(sample.axes(i, k));
    }
    out += "\n";
  }
  return out;
}

std::string task_csv(const SolvedTrajectory& traj, const MechModel& model) {
  const int td = model.chain->task_dim();
  std::string out = td == 2 ? "t,x,y\n" : "t,x,y,z\n";
  for (int n = 0; n < traj.samples(); ++n) {
    const Vec pos = *model.task_position(traj.states[n].q);
    out += fmt(traj.t[n]);
    for (int i = 0; i < td; ++i) out += "," + fmt(pos[i]);
    out += "\n";
  }
  return out;
}

double path_length_euclidean(const SolvedTrajectory& traj) {
  double len = 0.0;
  for (int n = 1; n < traj.samples(); ++n)
    len += (traj.states[n].q - traj.states[n - 1].q).norm();
  return len;
}

double path_length_drag(const SolvedTrajectory& traj, const MechModel& model) {
  if (!model.has_drag()) return 0.0;
  double len = 0.0;
  for (int n = 1; n < traj.samples(); ++n) {
    const Vec dq = traj.states[n].q - traj.states[n - 1].q;
    const Vec mid = 0.5 * (traj.states[n].q + traj.states[n - 1].q);
    len += std::sqrt(std::max(0.0, dq.dot(model.drag(mid) * dq)));
  }
  return len;
}

}  // namespace

std::vector<std::string> export_outputs(const ScenarioRun& run, const Scenario& scenario,
                                        const MechModel& model, const std::string& out_dir) {
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + out_dir);

  const SolvedTrajectory& traj = run.solved.trajectory;
  const SolveReport& report = run.solved.report;
  std::vector<std::string> written;

  if (report.converged) {
    write_file(dir / "trajectory.csv", trajectory_csv(traj, model.dim));
    written.push_back((dir / "trajectory.csv").string());
    write_file(dir / "tissot.csv", tissot_csv(traj, model, scenario.tissot_samples));
    written.push_back((dir / "tissot.csv").string());
    if (model.chain) {
      write_file(dir / "task.csv", task_csv(traj, model));
      written.push_back((dir / "task.csv").string());
    }
  }
  if (run.baseline) {
    write_file(dir / "baseline_trajectory.csv", trajectory_csv(*run.baseline, model.dim));
    written.push_back((dir / "baseline_trajectory.csv").string());
  }

  nlohmann::ordered_json j;
  j["converged"] = report.converged;
  j["iterations"] = report.iterations;
  j["final_residual_norm"] = report.final_residual_norm;
  j["continuation_steps"] = report.continuation_steps;
  j["hamiltonian_drift"] = report.hamiltonian_drift;
  if (!report.failure.empty()) j["failure"] = report.failure;
  if (report.converged) {
    j["total_cost"] = traj.total_cost;
    j["path_length_euclidean"] = path_length_euclidean(traj);
    j["path_length_drag"] = path_length_drag(traj, model);
    j["samples"] = traj.samples();
  }
  if (run.baseline) j["baseline_total_cost"] = run.baseline->total_cost;
  write_file(dir / "report.json", j.dump(2) + "\n");
  written.push_back((dir / "report.json").string());
  return written;
}

}  // namespace riemspline
