#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "riemspline/cli.hpp"
#include "riemspline/output.hpp"
#include "riemspline/scenario.hpp"
#include "test_util.hpp"

using namespace riemspline;
using namespace rstest;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string shipped(const std::string& name) {
  return read_file(fs::path(RIEMSPLINE_SOURCE_DIR) / "scenarios" / name);
}

fs::path fresh_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("riemspline_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string parse_error_of(const std::string& text) {
  try {
    (void)parse_scenario(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "no error";
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_CASE("parse_scenario: minimal file gets the documented defaults") {
  const Scenario sc = parse_scenario(
      "system = two_link\nq0 = [0.1, 0.2]\nqf = [0.4, -0.2]\n");
  CHECK(sc.system == SystemKind::two_link);
  CHECK(sc.v0.norm() == 0.0);
  CHECK(sc.vf.norm() == 0.0);
  CHECK(sc.t0 == 0.0);
  CHECK(sc.tf == 1.0);
  CHECK(sc.gravity);
  CHECK(sc.drag.kind == DragKind::none);
  CHECK(sc.cost_mode == CostMode::acceleration);
  CHECK(sc.segments == 5);
  CHECK(sc.steps == 40);
  CHECK(sc.tolerance == 1e-8);
  CHECK(sc.force_scale == 1.0);
  CHECK(!sc.baseline);
}

TEST_CASE("parse_scenario: shipped files carry the published boundary conditions") {
  const Scenario s1 = parse_scenario(shipped("two_link_s1.scn"));
  CHECK(s1.q0[0] == 0.5 * M_PI);
  CHECK(s1.q0[1] == -0.75 * M_PI);
  CHECK(s1.qf[0] == 0.75 * M_PI);
  CHECK(s1.qf[1] == -0.75 * M_PI);
  CHECK(s1.v0.norm() == 0.0);
  CHECK(s1.vf.norm() == 0.0);
  CHECK(s1.cost_mode == CostMode::actuation);
  CHECK(s1.gravity);

  const Scenario s2 = parse_scenario(shipped("two_link_s2.scn"));
  CHECK(s2.q0[0] == 2.0);
  CHECK(s2.q0[1] == -2.3);
  CHECK(s2.qf[0] == 2.0);
  CHECK(s2.qf[1] == -1.7);

  const Scenario u1 = parse_scenario(shipped("ur5_s1.scn"));
  CHECK(u1.system == SystemKind::ur5);
  CHECK(u1.q0[0] == 0.1);
  CHECK(u1.q0[1] == 0.1);
  CHECK(u1.q0[2] == 0.5 * M_PI);
  CHECK(u1.qf[0] == 0.5 * M_PI);
  CHECK(u1.qf[1] == -1.0);
  CHECK(u1.qf[2] == 1.0);
  CHECK((u1.wrist - Vec3(0.1, 0.1, 0.1)).norm() == 0.0);
  CHECK(u1.drag.kind == DragKind::joint);
  CHECK(u1.drag.joint_coeffs[0] == 1.0);
  CHECK(u1.baseline);
}

TEST_CASE("parse_scenario: strictness and diagnostics") {
  // unknown key, with the line number
  const std::string unknown = parse_error_of(
      "system = two_link\nq0 = [0, 0]\nqf = [1, 1]\nwarp_speed = 9\n");
  CHECK(unknown.find("unknown key 'warp_speed'") != std::string::npos);
  CHECK(unknown.find("line 4") != std::string::npos);

  // wrong dimension names the key
  CHECK(parse_error_of("system = two_link\nq0 = [0, 0, 0]\nqf = [1, 1]\n")
            .find("'q0' must have 2 entries") != std::string::npos);
  // missing required key
  CHECK(parse_error_of("system = two_link\nqf = [1, 1]\n").find("missing required key 'q0'") !=
        std::string::npos);
  // unparseable value
  CHECK(parse_error_of("system = two_link\nq0 = [zero, 0]\nqf = [1, 1]\n")
            .find("unparseable") != std::string::npos);
  // duplicate key
  CHECK(parse_error_of("system = two_link\nq0 = [0,0]\nq0 = [0,0]\nqf = [1,1]\n")
            .find("duplicate key 'q0'") != std::string::npos);
  // bad horizon
  CHECK(parse_error_of("system = two_link\nq0 = [0,0]\nqf = [1,1]\ntf = 0\n")
            .find("tf must exceed t0") != std::string::npos);
  // system-specific keys rejected elsewhere
  CHECK(parse_error_of("system = two_link\nq0 = [0,0]\nqf = [1,1]\nwrist = [0,0,0]\n")
            .find("only valid for the ur5") != std::string::npos);
  // custom systems need dim and reject gravity
  CHECK(parse_error_of("system = custom\nq0 = [0,0]\nqf = [1,1]\n")
            .find("require 'dim'") != std::string::npos);
  CHECK(parse_error_of("system = custom\ndim = 2\ngravity = on\nq0 = [0,0]\nqf = [1,1]\n")
            .find("gravity = off") != std::string::npos);
}

TEST_CASE("parse_scenario: pi expressions") {
  const Scenario sc = parse_scenario(
      "system = two_link\nq0 = [pi/2, -0.75*pi]\nqf = [0.75*pi, -pi]\ntf = 2\n");
  CHECK(sc.q0[0] == M_PI / 2);
  CHECK(sc.q0[1] == -0.75 * M_PI);
  CHECK(sc.qf[0] == 0.75 * M_PI);
  CHECK(sc.qf[1] == -M_PI);
}

TEST_CASE("tissot indicatrix: identity, diagonal, rotated") {
  const TissotSample id = tissot_indicatrix(MetricField::identity(2), vec2(0.4, 0.5));
  CHECK(id.semi_axis_lengths[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(id.semi_axis_lengths[1] == doctest::Approx(1.0).epsilon(1e-12));

  const MetricField diag = MetricField::constant(Vec(vec2(4, 1)).asDiagonal());
  const TissotSample ds = tissot_indicatrix(diag, vec2(0, 0));
  CHECK(ds.semi_axis_lengths[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ds.semi_axis_lengths[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(ds.axes(1, 0)) == doctest::Approx(1.0).epsilon(1e-12));  // long axis along q2
  CHECK(std::abs(ds.axes(0, 1)) == doctest::Approx(1.0).epsilon(1e-12));

  // rotation changes axes, not lengths; axes stay orthonormal
  const double th = 0.61;
  Mat rot(2, 2);
  rot << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  const Mat rotated = rot * Vec(vec2(4, 1)).asDiagonal() * rot.transpose();
  const TissotSample rs = tissot_indicatrix(MetricField::constant(rotated), vec2(0, 0));
  CHECK(rs.semi_axis_lengths[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rs.semi_axis_lengths[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK((rs.axes.transpose() * rs.axes - Mat::Identity(2, 2)).norm() < 1e-12);
  // descending order and unit-kinetic-energy normalization
  CHECK(rs.semi_axis_lengths[0] >= rs.semi_axis_lengths[1]);
  for (int k = 0; k < 2; ++k) {
    const Vec v = rs.semi_axis_lengths[k] * rs.axes.col(k);
    CHECK(v.dot(rotated * v) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("run_scenario + export: flat scenario, schema, round-trip") {
  Scenario sc = parse_scenario(
      "system = custom\ndim = 2\ngravity = off\nq0 = [0, 0]\nqf = [1, 1]\n"
      "baseline = euclidean_interpolation\nsegments = 4\nsteps = 10\n");
  const fs::path dir = fresh_dir("flat");
  sc.out_dir = dir.string();
  const ScenarioRun run = run_scenario(sc);
  REQUIRE(run.solved.report.converged);
  REQUIRE(run.baseline.has_value());

  // optimal and baseline coincide pointwise in flat space
  double worst = 0.0;
  for (int n = 0; n < run.solved.trajectory.samples(); ++n)
    worst = std::max(worst, (run.solved.trajectory.states[n].q -
                             run.baseline->states[n].q).lpNorm<Eigen::Infinity>());
  CHECK(worst < 1e-8);

  const MechModel model = build_model(sc);
  const auto written = export_outputs(run, sc, model, sc.out_dir);
  CHECK(fs::exists(dir / "trajectory.csv"));
  CHECK(fs::exists(dir / "report.json"));
  CHECK(fs::exists(dir / "tissot.csv"));
  CHECK(fs::exists(dir / "baseline_trajectory.csv"));
  CHECK(!fs::exists(dir / "task.csv"));  // no chain behind the flat model

  // column count = 1 + 4d + d + 3
  const std::string csv = read_file(dir / "trajectory.csv");
  std::istringstream lines(csv);
  std::string header;
  std::getline(lines, header);
  CHECK(std::count(header.begin(), header.end(), ',') + 1 == 1 + 4 * 2 + 2 + 3);

  // cost_accum non-decreasing, hamiltonian nearly constant, round-trip precision
  std::string line;
  double prev_accum = -1.0;
  double hmin = 1e300, hmax = -1e300;
  int row = 0;
  while (std::getline(lines, line)) {
    std::vector<double> vals;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) vals.push_back(std::stod(tok));
    REQUIRE(vals.size() == 14);
    CHECK(vals[12] >= prev_accum);
    prev_accum = vals[12];
    hmin = std::min(hmin, vals[13]);
    hmax = std::max(hmax, vals[13]);
    // CSV reproduces the in-memory states to printed precision
    const ExtremalState& s = run.solved.trajectory.states[row];
    CHECK(vals[1] == s.q[0]);
    CHECK(vals[2] == s.q[1]);
    CHECK(vals[3] == s.qdot[0]);
    ++row;
  }
  CHECK(row == run.solved.trajectory.samples());
  CHECK(hmax - hmin <= 1e-6 * (1.0 + std::abs(run.solved.trajectory.hamiltonian.front())));
}

TEST_CASE("export: task.csv for chain systems and tissot row count") {
  Scenario sc = parse_scenario(shipped("two_link_s1.scn"));
  sc.segments = 4;
  sc.steps = 10;
  sc.tissot_samples = 7;
  const fs::path dir = fresh_dir("twolink");
  sc.out_dir = dir.string();
  const ScenarioRun run = run_scenario(sc);
  REQUIRE(run.solved.report.converged);
  const MechModel model = build_model(sc);
  export_outputs(run, sc, model, sc.out_dir);

  const std::string task = read_file(dir / "task.csv");
  CHECK(task.rfind("t,x,y\n", 0) == 0);
  CHECK(std::count(task.begin(), task.end(), '\n') == run.solved.trajectory.samples() + 1);

  const std::string tissot = read_file(dir / "tissot.csv");
  CHECK(std::count(tissot.begin(), tissot.end(), '\n') == 7 + 1);

  // deterministic rerun: byte-identical outputs
  const fs::path dir2 = fresh_dir("twolink2");
  sc.out_dir = dir2.string();
  const ScenarioRun run2 = run_scenario(sc);
  export_outputs(run2, sc, model, sc.out_dir);
  for (const char* name : {"trajectory.csv", "report.json", "tissot.csv", "task.csv"})
    CHECK(read_file(dir / name) == read_file(dir2 / name));
}

TEST_CASE("cli: exit codes") {
  const fs::path dir = fresh_dir("cli");
  const std::string flat_scn = (fs::path(RIEMSPLINE_SOURCE_DIR) / "scenarios" / "flat_2d.scn").string();

  // 0: success
  CHECK(run_cli({"solve", flat_scn, "--out", (dir / "ok").string(), "--steps", "10",
                 "--segments", "4"}) == 0);
  CHECK(fs::exists(dir / "ok" / "report.json"));

  // 2: parse errors (bad scenario contents and unknown flags)
  const fs::path bad = dir / "bad.scn";
  std::ofstream(bad) << "system = two_link\nq0 = [0,0]\nqf = [1,1]\nbogus = 1\n";
  CHECK(run_cli({"solve", bad.string(), "--out", (dir / "bad").string()}) == 2);
  CHECK(run_cli({"solve", flat_scn, "--frobnicate"}) == 2);

  // 3: solver non-convergence (tolerance beyond attainable precision)
  const fs::path hard = dir / "hard.scn";
  std::ofstream(hard) << "system = two_link\nq0 = [0.5*pi, -0.75*pi]\nqf = [0.75*pi, -0.75*pi]\n"
                      << "segments = 1\nsteps = 12\ncontinuation = [1]\n";
  CHECK(run_cli({"solve", hard.string(), "--out", (dir / "hard").string(), "--tol", "1e-30"}) == 3);
  CHECK(fs::exists(dir / "hard" / "report.json"));  // failure report still written

  // 4: unwritable output directory
  CHECK(run_cli({"solve", flat_scn, "--out", "/proc/riemspline_nowhere", "--steps", "10",
                 "--segments", "4"}) == 4);

  // missing scenario file
  CHECK(run_cli({"solve", (dir / "absent.scn").string()}) == 4);
}

TEST_CASE("cli: check subcommand passes") {
  CHECK(run_cli({"check"}) == 0);
}
