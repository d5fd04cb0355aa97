#include "riemspline/scenario.hpp"

#include <map>
#include <set>
#include <sstream>

#include "text_util.hpp"

namespace riemspline {

namespace {

struct RawEntry {
  std::string value;
  int line = 0;
};

int to_int(const std::string& value, int line) {
  const double v = text::parse_double(value, line);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) throw ParseError("expected an integer, got '" + value + "'", line);
  return i;
}

bool to_bool(const std::string& value, int line) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  throw ParseError("expected on/off, got '" + value + "'", line);
}

const std::set<std::string> kKnownKeys = {
    "system",     "dim",        "cost",        "gravity",     "drag",
    "drag_coeff", "drag_coeffs", "q0",         "qf",          "v0",
    "vf",         "t0",         "tf",          "segments",    "steps",
    "tolerance",  "continuation", "force_scale", "baseline",  "tissot_samples",
    "wrist",      "link_mass",  "link_length", "out"};

}  // namespace

Scenario parse_scenario(const std::string& text) {
  std::map<std::string, RawEntry> entries;
  {
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
      ++lineno;
      std::string key, value;
      if (!text::parse_kv(raw, key, value)) continue;
      if (!kKnownKeys.count(key)) throw ParseError("unknown key '" + key + "'", lineno);
      if (entries.count(key)) throw ParseError("duplicate key '" + key + "'", lineno);
      entries[key] = {value, lineno};
    }
  }

  auto take = [&entries](const std::string& key) -> std::optional<RawEntry> {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    RawEntry e = it->second;
    entries.erase(it);
    return e;
  };
  std::vector<std::string> defaulted;
  auto note_default = [&defaulted](const std::string& key, const std::string& value) {
    defaulted.push_back(key + " = " + value);
  };

  Scenario sc;

  const auto system = take("system");
  if (!system) throw ParseError("missing required key 'system'");
  if (system->value == "two_link") {
    sc.system = SystemKind::two_link;
    sc.dim = 2;
  } else if (system->value == "ur5") {
    sc.system = SystemKind::ur5;
    sc.dim = 3;
  } else if (system->value == "custom") {
    sc.system = SystemKind::custom;
  } else {
    throw ParseError("unknown system '" + system->value + "'", system->line);
  }

  if (const auto dim = take("dim")) {
    if (sc.system != SystemKind::custom)
      throw ParseError("key 'dim' is only valid for custom systems", dim->line);
    sc.dim = to_int(dim->value, dim->line);
    if (sc.dim < 1) throw ParseError("dim must be positive", dim->line);
  } else if (sc.system == SystemKind::custom) {
    throw ParseError("custom systems require 'dim'");
  }

  if (const auto cost = take("cost")) {
    if (cost->value == "acceleration")
      sc.cost_mode = CostMode::acceleration;
    else if (cost->value == "actuation")
      sc.cost_mode = CostMode::actuation;
    else
      throw ParseError("unknown cost mode '" + cost->value + "'", cost->line);
  } else {
    note_default("cost", "acceleration");
  }

  if (const auto gravity = take("gravity")) {
    sc.gravity = to_bool(gravity->value, gravity->line);
    if (sc.system == SystemKind::custom && sc.gravity)
      throw ParseError("custom systems have no potential; set gravity = off", gravity->line);
  } else {
    sc.gravity = sc.system != SystemKind::custom;
    note_default("gravity", sc.gravity ? "on" : "off");
  }

  const auto drag = take("drag");
  const auto drag_coeff = take("drag_coeff");
  const auto drag_coeffs = take("drag_coeffs");
  std::string drag_kind;
  if (drag) {
    drag_kind = drag->value;
  } else {
    // UR5 runs default to unit joint friction; other systems to no drag.
    drag_kind = sc.system == SystemKind::ur5 ? "joint" : "none";
    note_default("drag", drag_kind);
  }
  if (drag_kind == "none") {
    sc.drag.kind = DragKind::none;
    if (drag_coeff || drag_coeffs)
      throw ParseError("drag coefficients given but drag = none",
                       drag_coeff ? drag_coeff->line : drag_coeffs->line);
  } else if (drag_kind == "joint") {
    sc.drag.kind = DragKind::joint;
    if (drag_coeffs) {
      sc.drag.joint_coeffs = text::parse_vector_expr(drag_coeffs->value, drag_coeffs->line);
      if (sc.drag.joint_coeffs.size() != sc.dim)
        throw ParseError("drag_coeffs must have " + std::to_string(sc.dim) + " entries",
                         drag_coeffs->line);
    } else if (drag_coeff) {
      sc.drag.joint_coeffs =
          Vec::Constant(sc.dim, text::parse_number_expr(drag_coeff->value, drag_coeff->line));
    } else {
      sc.drag.joint_coeffs = Vec::Constant(sc.dim, 1.0);
      note_default("drag_coeff", "1");
    }
  } else if (drag_kind == "endpoint") {
    if (sc.system == SystemKind::custom)
      throw ParseError("endpoint drag needs a kinematic chain", drag ? drag->line : 0);
    sc.drag.kind = DragKind::endpoint;
    if (drag_coeffs) throw ParseError("endpoint drag takes 'drag_coeff'", drag_coeffs->line);
    if (drag_coeff) {
      sc.drag.endpoint_coeff = text::parse_number_expr(drag_coeff->value, drag_coeff->line);
    } else {
      sc.drag.endpoint_coeff = 1.0;
      note_default("drag_coeff", "1");
    }
  } else {
    throw ParseError("unknown drag kind '" + drag_kind + "'", drag ? drag->line : 0);
  }

  auto boundary = [&](const std::string& key, bool required,
                      const Vec& fallback) -> Vec {
    const auto entry = take(key);
    if (!entry) {
      if (required) throw ParseError("missing required key '" + key + "'");
      note_default(key, "zeros");
      return fallback;
    }
    Vec v = text::parse_vector_expr(entry->value, entry->line);
    if (v.size() != sc.dim)
      throw ParseError("'" + key + "' must have " + std::to_string(sc.dim) + " entries",
                       entry->line);
    return v;
  };
  sc.q0 = boundary("q0", true, Vec());
  sc.qf = boundary("qf", true, Vec());
  sc.v0 = boundary("v0", false, Vec::Zero(sc.dim));
  sc.vf = boundary("vf", false, Vec::Zero(sc.dim));

  if (const auto t0 = take("t0"))
    sc.t0 = text::parse_number_expr(t0->value, t0->line);
  else
    note_default("t0", "0");
  if (const auto tf = take("tf"))
    sc.tf = text::parse_number_expr(tf->value, tf->line);
  else
    note_default("tf", "1");
  if (!(sc.tf > sc.t0)) throw ParseError("tf must exceed t0");

  const int default_segments = sc.system == SystemKind::ur5 ? 8 : 5;
  const int default_steps = sc.system == SystemKind::ur5 ? 50 : 40;
  if (const auto segments = take("segments"))
    sc.segments = to_int(segments->value, segments->line);
  else {
    sc.segments = default_segments;
    note_default("segments", std::to_string(default_segments));
  }
  if (const auto steps = take("steps"))
    sc.steps = to_int(steps->value, steps->line);
  else {
    sc.steps = default_steps;
    note_default("steps", std::to_string(default_steps));
  }
  if (sc.segments < 1 || sc.steps < 1)
    throw ParseError("segments and steps must be positive");

  if (const auto tol = take("tolerance"))
    sc.tolerance = text::parse_number_expr(tol->value, tol->line);
  else
    note_default("tolerance", "1e-8");
  if (!(sc.tolerance > 0.0)) throw ParseError("tolerance must be positive");

  if (const auto cont = take("continuation")) {
    const Vec stages = text::parse_vector_expr(cont->value, cont->line);
    sc.continuation.assign(stages.data(), stages.data() + stages.size());
    if (sc.continuation.empty()) throw ParseError("continuation must not be empty", cont->line);
  } else {
    note_default("continuation", "[0, 0.25, 0.5, 0.75, 1]");
  }

  if (const auto fs = take("force_scale"))
    sc.force_scale = text::parse_number_expr(fs->value, fs->line);
  else
    note_default("force_scale", "1");

  if (const auto baseline = take("baseline")) {
    if (baseline->value == "euclidean_interpolation")
      sc.baseline = true;
    else if (baseline->value == "none")
      sc.baseline = false;
    else
      throw ParseError("unknown baseline '" + baseline->value + "'", baseline->line);
  } else {
    note_default("baseline", "none");
  }

  if (const auto tissot = take("tissot_samples")) {
    sc.tissot_samples = to_int(tissot->value, tissot->line);
    if (sc.tissot_samples < 2) throw ParseError("tissot_samples must be at least 2", tissot->line);
  } else {
    note_default("tissot_samples", "9");
  }

  if (const auto wrist = take("wrist")) {
    if (sc.system != SystemKind::ur5)
      throw ParseError("key 'wrist' is only valid for the ur5 system", wrist->line);
    const Vec w = text::parse_vector_expr(wrist->value, wrist->line);
    if (w.size() != 3) throw ParseError("'wrist' must have 3 entries", wrist->line);
    sc.wrist = Vec3(w[0], w[1], w[2]);
  } else if (sc.system == SystemKind::ur5) {
    note_default("wrist", "[0.1, 0.1, 0.1]");
  }

  if (const auto mass = take("link_mass")) {
    if (sc.system != SystemKind::two_link)
      throw ParseError("key 'link_mass' is only valid for the two_link system", mass->line);
    sc.two_link_params.m1 = sc.two_link_params.m2 = text::parse_number_expr(mass->value, mass->line);
  }
  if (const auto length = take("link_length")) {
    if (sc.system != SystemKind::two_link)
      throw ParseError("key 'link_length' is only valid for the two_link system", length->line);
    const double l = text::parse_number_expr(length->value, length->line);
    sc.two_link_params.l1 = sc.two_link_params.l2 = l;
    sc.two_link_params.com1 = sc.two_link_params.com2 = 0.5 * l;
    sc.two_link_params.rot_inertia1 = sc.two_link_params.m1 * l * l / 12.0;
    sc.two_link_params.rot_inertia2 = sc.two_link_params.m2 * l * l / 12.0;
  }

  if (const auto out = take("out"))
    sc.out_dir = out->value;
  else
    note_default("out", sc.out_dir);

  for (const std::string& line : defaulted) log_info("default applied: " + line);
  return sc;
}

MechModel build_model(const Scenario& sc) {
  switch (sc.system) {
    case SystemKind::two_link:
      return two_link_model(sc.two_link_params, sc.gravity, sc.drag);
    case SystemKind::ur5:
      return ur5_model_default(sc.wrist, sc.gravity, sc.drag);
    case SystemKind::custom:
      return flat_model(sc.dim, sc.drag);
  }
  throw std::logic_error("unreachable");
}

BvpProblem build_problem(const Scenario& sc) {
  BvpProblem problem;
  problem.model = build_model(sc);
  problem.cost = CostModel::make(sc.cost_mode, problem.model.inertia,
                                 problem.model.actuation_cometric);
  problem.t0 = sc.t0;
  problem.tf = sc.tf;
  problem.q0 = sc.q0;
  problem.v0 = sc.v0;
  problem.qf = sc.qf;
  problem.vf = sc.vf;
  problem.segments = sc.segments;
  problem.steps_per_segment = sc.steps;
  problem.validate();
  return problem;
}

BvpOptions build_options(const Scenario& sc) {
  BvpOptions opts;
  opts.tolerance = sc.tolerance;
  opts.force_scale = sc.force_scale;
  opts.continuation = sc.continuation;
  return opts;
}

ScenarioRun run_scenario(const Scenario& sc) {
  const BvpProblem problem = build_problem(sc);
  const BvpOptions opts = build_options(sc);
  ScenarioRun run;
  run.solved = solve(problem, std::nullopt, opts);
  if (sc.baseline)
    run.baseline = euclidean_baseline(problem, sc.segments * sc.steps, sc.force_scale);
  return run;
}

}  // namespace riemspline
