#pragma once

#include <string>
#include <vector>

#include "riemspline/bvp.hpp"
#include "riemspline/scenario.hpp"

namespace riemspline {

/// Ellipse of unit-kinetic-energy velocities at q: metric eigenpairs with
/// semi-axis lengths 1/sqrt(eigenvalue), sorted descending.
struct TissotSample {
  Vec q;
  std::vector<double> semi_axis_lengths;  // descending
  Mat axes;                               // column k pairs with semi_axis_lengths[k]
};

TissotSample tissot_indicatrix(const MetricField& metric, const Vec& q);

/// Write trajectory.csv, report.json, tissot.csv, task.csv (chain systems)
/// and baseline_trajectory.csv (when a baseline ran) into out_dir. Writes are
/// atomic (temp file + rename) and byte-deterministic. Returns the paths
/// written; throws IoError when the directory is unusable.
std::vector<std::string> export_outputs(const ScenarioRun& run, const Scenario& scenario,
                                        const MechModel& model, const std::string& out_dir);

}  // namespace riemspline
