#include "riemspline/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "riemspline/output.hpp"
#include "riemspline/scenario.hpp"

namespace riemspline {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct SolveArgs {
  std::string scenario_file;
  std::string out_dir;
  double force_scale = std::nan("");
  int segments = -1;
  int steps = -1;
  double tol = std::nan("");
  bool baseline = false;
  int tissot = -1;
};

int do_solve(const SolveArgs& args) {
  std::string contents;
  try {
    contents = read_file(args.scenario_file);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }

  Scenario scenario;
  try {
    scenario = parse_scenario(contents);
  } catch (const ParseError& e) {
    std::cerr << "error: " << args.scenario_file << ": " << e.what() << "\n";
    return 2;
  }
  if (!args.out_dir.empty()) scenario.out_dir = args.out_dir;
  if (!std::isnan(args.force_scale)) scenario.force_scale = args.force_scale;
  if (args.segments > 0) scenario.segments = args.segments;
  if (args.steps > 0) scenario.steps = args.steps;
  if (!std::isnan(args.tol)) scenario.tolerance = args.tol;
  if (args.baseline) scenario.baseline = true;
  if (args.tissot > 0) scenario.tissot_samples = args.tissot;

  ScenarioRun run;
  MechModel model;
  try {
    model = build_model(scenario);
    run = run_scenario(scenario);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: solve failed: " << e.what() << "\n";
    return 3;
  }

  int exit_code = 0;
  if (!run.solved.report.converged) {
    std::cerr << "error: solver did not converge: " << run.solved.report.failure << "\n";
    exit_code = 3;
  }
  try {
    export_outputs(run, scenario, model, scenario.out_dir);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  if (exit_code == 0) {
    std::cout << "converged in " << run.solved.report.iterations << " iterations ("
              << run.solved.report.continuation_steps << " continuation stages), residual "
              << run.solved.report.final_residual_norm << "\n";
    std::cout << "total cost " << run.solved.trajectory.total_cost;
    if (run.baseline) std::cout << " (baseline " << run.baseline->total_cost << ")";
    std::cout << "\noutputs in " << scenario.out_dir << "\n";
  }
  return exit_code;
}

// ---------------------------------------------------------------------------
// `riemspline check`: quick invariant sweep over random metric fields plus
// the frozen model and solver checks.

struct RandomMetric {
  MetricField field;
  Vec base_point;
};

RandomMetric random_metric_field(std::mt19937& rng, int dim) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.1, 0.5);
  std::uniform_real_distribution<double> freq(0.3, 1.5);

  const int modes = 3;
  std::vector<Mat> shapes;
  std::vector<Vec> waves;
  std::vector<double> phases;
  double bound = 0.0;
  for (int m = 0; m < modes; ++m) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = unit(rng);
    v.normalize();
    const double amp = pos(rng);
    shapes.push_back(amp * v * v.transpose());
    Vec w(dim);
    for (int i = 0; i < dim; ++i) w[i] = freq(rng) * (unit(rng) > 0 ? 1.0 : -1.0);
    waves.push_back(w);
    phases.push_back(M_PI * unit(rng));
    bound += amp;
  }
  Mat base = (1.2 + bound) * Mat::Identity(dim, dim);
  for (int i = 0; i < dim; ++i) base(i, i) += pos(rng);

  auto eval = [=](const Vec& q) {
    Mat g = base;
    for (int m = 0; m < modes; ++m) g += std::sin(waves[m].dot(q) + phases[m]) * shapes[m];
    return g;
  };
  auto partials = [=](const Vec& q) {
    std::vector<Mat> dg(dim, Mat::Zero(dim, dim));
    for (int m = 0; m < modes; ++m) {
      const double c = std::cos(waves[m].dot(q) + phases[m]);
      for (int k = 0; k < dim; ++k) dg[k] += c * waves[m][k] * shapes[m];
    }
    return dg;
  };
  Vec q0(dim);
  for (int i = 0; i < dim; ++i) q0[i] = unit(rng);
  return {MetricField{dim, eval, partials}, q0};
}

bool report_check(const std::string& name, bool ok, double value, double threshold) {
  std::cout << (ok ? "[ ok ] " : "[FAIL] ") << name << " (value " << value << ", threshold "
            << threshold << ")\n";
  return ok;
}

}  // namespace

int run_check_suite() {
  int failures = 0;
  std::mt19937 rng(20240914u);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  // Musical isomorphisms invert each other.
  {
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      auto rm = random_metric_field(rng, 2 + trial % 3);
      Vec f(rm.field.dim);
      for (int i = 0; i < rm.field.dim; ++i) f[i] = unit(rng);
      const Vec back = lower_index(rm.field, rm.base_point,
                                   raise_index(rm.field, rm.base_point, f));
      worst = std::max(worst, (back - f).norm() / std::max(1.0, f.norm()));
    }
    if (!report_check("raise/lower round-trip", worst < 1e-12, worst, 1e-12)) ++failures;
  }

  // Curvature antisymmetry and first Bianchi identity.
  {
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      auto rm = random_metric_field(rng, 2 + trial % 3);
      const int d = rm.field.dim;
      const CurvatureArray r = curvature(rm.field, rm.base_point);
      for (int l = 0; l < d; ++l)
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
              worst = std::max(worst, std::abs(r(l, i, j, k) + r(l, j, i, k)));
              worst = std::max(worst,
                               std::abs(r(l, i, j, k) + r(l, j, k, i) + r(l, k, i, j)));
            }
    }
    if (!report_check("curvature antisymmetry + Bianchi", worst < 1e-5, worst, 1e-5)) ++failures;
  }

  // Metric compatibility product rule along random curves.
  {
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      auto rm = random_metric_field(rng, 2 + trial % 3);
      const int d = rm.field.dim;
      Vec v(d), ax(d), bx(d), ay(d), by(d);
      for (int i = 0; i < d; ++i) {
        v[i] = unit(rng);
        ax[i] = unit(rng);
        bx[i] = unit(rng);
        ay[i] = unit(rng);
        by[i] = unit(rng);
      }
      auto curve = [&](double t) { return Vec(rm.base_point + t * v); };
      auto fx = [&](double t) { return Vec(ax + t * bx); };
      auto fy = [&](double t) { return Vec(ay + t * by); };
      auto pairing = [&](double t) { return fx(t).dot(rm.field.eval(curve(t)) * fy(t)); };
      const double dt = 1e-5;
      const double lhs = (pairing(dt) - pairing(-dt)) / (2 * dt);
      const ChristoffelArray gam = christoffel(rm.field, rm.base_point);
      // covariant derivative of the fields along the curve at t = 0
      Vec nx = bx, ny = by;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
          for (int k = 0; k < d; ++k) {
            nx[i] += gam(i, j, k) * v[j] * ax[k];
            ny[i] += gam(i, j, k) * v[j] * ay[k];
          }
      const Mat g = rm.field.eval(rm.base_point);
      const double rhs = nx.dot(g * ay) + ax.dot(g * ny);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    if (!report_check("metric compatibility product rule", worst < 1e-6, worst, 1e-6)) ++failures;
  }

  // tau vanishes for the dual of the metric itself.
  {
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      auto rm = random_metric_field(rng, 2 + trial % 3);
      const CostModel cost = CostModel::acceleration(rm.field);
      const Tensor3 tau = tau_tensor(cost.induced_dual, rm.field, rm.base_point);
      worst = std::max(worst, tau.max_abs());
    }
    if (!report_check("tau vanishes in acceleration mode", worst < 1e-10, worst, 1e-10))
      ++failures;
  }

  // Frozen two-link mass matrix at qe = 0 (uniform unit rods).
  {
    const MechModel model = two_link_model(TwoLinkParams{}, true, DragConfig{});
    Vec q(2);
    q << 0.3, 0.0;
    const Mat g = model.inertia.eval(q);
    Mat expected(2, 2);
    expected << 8.0 / 3.0, 5.0 / 6.0, 5.0 / 6.0, 1.0 / 3.0;
    const double err = (g - expected).cwiseAbs().maxCoeff();
    if (!report_check("two-link mass matrix", err < 1e-10, err, 1e-10)) ++failures;
  }

  // Flat BVP solves to the cubic interpolant.
  {
    const MechModel model = flat_model(2);
    BvpProblem problem;
    problem.model = model;
    problem.cost = CostModel::acceleration(model.inertia);
    problem.q0 = Vec::Zero(2);
    problem.v0 = Vec::Zero(2);
    problem.qf = Vec::Ones(2);
    problem.vf = Vec::Zero(2);
    const SolveResult result = solve(problem, std::nullopt, BvpOptions{});
    double worst = result.report.converged ? 0.0 : 1.0;
    for (int n = 0; n < result.trajectory.samples(); ++n) {
      const double s = result.trajectory.t[n];
      const double expect = 3 * s * s - 2 * s * s * s;
      worst = std::max(worst,
                       (result.trajectory.states[n].q - Vec::Constant(2, expect)).norm());
    }
    if (!report_check("flat space solves to the cubic", worst < 1e-8, worst, 1e-8)) ++failures;
  }

  std::cout << (failures == 0 ? "all checks passed\n"
                              : std::to_string(failures) + " check(s) failed\n");
  return failures;
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Force-aware optimal trajectories on Riemannian configuration manifolds"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve a scenario file and export results");
  solve_cmd->add_option("scenario", solve_args.scenario_file, "Scenario file")->required();
  solve_cmd->add_option("--out", solve_args.out_dir, "Output directory override");
  solve_cmd->add_option("--force-scale", solve_args.force_scale, "External force scale");
  solve_cmd->add_option("--segments", solve_args.segments, "Shooting segment count");
  solve_cmd->add_option("--steps", solve_args.steps, "RK4 steps per segment");
  solve_cmd->add_option("--tol", solve_args.tol, "Residual tolerance");
  solve_cmd->add_flag("--baseline", solve_args.baseline,
                      "Also run the Euclidean-interpolation baseline");
  solve_cmd->add_option("--tissot", solve_args.tissot, "Tissot sample count");

  CLI::App* check_cmd = app.add_subcommand("check", "Run the built-in invariant suite");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  if (solve_cmd->parsed()) return do_solve(solve_args);
  if (check_cmd->parsed()) return run_check_suite() == 0 ? 0 : 1;
  return 2;
}

}  // namespace riemspline
