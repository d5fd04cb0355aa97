#pragma once

#include <optional>
#include <string>
#include <vector>

#include "riemspline/bvp.hpp"
#include "riemspline/control.hpp"
#include "riemspline/models.hpp"

namespace riemspline {

enum class SystemKind { two_link, ur5, custom };

/// A declarative solver run: system, force toggles, cost mode, boundary
/// conditions and solver options. Parsed from the strict key = value scenario
/// format (see the README for the schema).
struct Scenario {
  SystemKind system = SystemKind::two_link;
  int dim = 2;
  CostMode cost_mode = CostMode::acceleration;
  bool gravity = true;
  DragConfig drag;
  Vec q0, v0, qf, vf;
  double t0 = 0.0, tf = 1.0;
  int segments = 5;
  int steps = 40;
  double tolerance = 1e-8;
  std::vector<double> continuation = {0.0, 0.25, 0.5, 0.75, 1.0};
  double force_scale = 1.0;
  bool baseline = false;
  int tissot_samples = 9;
  Vec3 wrist = Vec3(0.1, 0.1, 0.1);
  TwoLinkParams two_link_params;
  std::string out_dir = "riemspline_out";
};

/// Parse and validate a scenario document. Unknown keys, missing required
/// keys, wrong dimensions and malformed values all throw ParseError with the
/// offending line. Applied defaults are echoed to the run log.
Scenario parse_scenario(const std::string& text);

MechModel build_model(const Scenario& scenario);
BvpProblem build_problem(const Scenario& scenario);
BvpOptions build_options(const Scenario& scenario);

struct ScenarioRun {
  SolveResult solved;
  std::optional<SolvedTrajectory> baseline;
};

/// Solve the scenario BVP (plus the Euclidean-interpolation baseline when
/// requested). Solver failures are reported, not thrown.
ScenarioRun run_scenario(const Scenario& scenario);

}  // namespace riemspline
