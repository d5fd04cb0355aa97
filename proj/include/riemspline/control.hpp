#pragma once

#include <functional>
#include <vector>

#include "riemspline/geometry.hpp"
#include "riemspline/models.hpp"
#include "riemspline/types.hpp"

namespace riemspline {

/// Unknowns of the extremal flow stacked as one state: configuration q,
/// velocity qdot, and the costate covectors lam, mu.
struct ExtremalState {
  Vec q, qdot, lam, mu;

  int dim() const { return static_cast<int>(q.size()); }
  bool finite() const {
    return q.allFinite() && qdot.allFinite() && lam.allFinite() && mu.allFinite();
  }
  Vec pack() const;
  static ExtremalState unpack(const Vec& x);
  static ExtremalState zero(int dim);
};

enum class CostMode { acceleration, actuation };

/// Quadratic control cost |u|^2_I. In acceleration mode the induced tensor I
/// is the inertia metric itself; in actuation mode I = g^T Mhat g, so the
/// cost is the torque norm |g u|^2_Mhat.
struct CostModel {
  CostMode mode = CostMode::acceleration;
  MetricField induced;       // I(q)
  MetricField induced_dual;  // I*(q) = I(q)^{-1}, with partials for tau

  static CostModel acceleration(const MetricField& inertia);
  static CostModel actuation(const MetricField& inertia, const Mat& cometric);
  static CostModel make(CostMode mode, const MetricField& inertia, const Mat& cometric);
};

/// Velocity-dependent external acceleration field and the two derivative maps
/// the costate equations need.
struct ForceField {
  std::function<Vec(const Vec&, const Vec&)> accel;         // a~(q, qdot)
  std::function<Mat(const Vec&, const Vec&)> vel_jacobian;  // (i,j) = d a~^j / d qdot^i
  std::function<Mat(const Vec&, const Vec&)> pos_cov_deriv; // (i,k) = (nabla_i a~)^k, qdot frozen
  bool none = false;
};

struct ForceEval {
  Vec accel;
  Mat vel_jacobian;
  Mat pos_cov_deriv;
};

/// a~ = -g^{-1} (dV + D qdot), with d a~/d qdot = -g^{-1} D and the covariant
/// position derivative taken at frozen qdot.
ForceField make_force_field(const MechModel& model);
ForceField scale_force_field(const ForceField& field, double scale);
ForceEval external_acceleration(const MechModel& model, const Vec& q, const Vec& qdot);

/// u = 1/2 I*(q) lam.
Vec control_from_costate(const CostModel& cost, const Vec& q, const Vec& lam);

/// |u|^2_I = u^T I(q) u.
double cost_rate(const CostModel& cost, const Vec& q, const Vec& u);

/// Right-hand side of the extremal Hamiltonian system, unrolled to plain time
/// derivatives:
///   qdot' = -Gamma qdot qdot + 1/2 I* lam + a~
///   lam'  =  Gamma lam qdot - mu - (d a~/d qdot) lam
///   mu'   =  Gamma mu qdot - 1/4 tau lam lam + R qdot qdot lam
///           - [ lam (nabla a~) - Gamma qdot (d a~/d qdot) lam ]
ExtremalState hamiltonian_rhs(const MechModel& model, const CostModel& cost,
                              const ExtremalState& state, double force_scale = 1.0);

/// Same equations with a caller-prepared (e.g. prescaled) force field; the
/// hot path of the shooting solver.
ExtremalState hamiltonian_rhs_with_force(const MechModel& model, const CostModel& cost,
                                         const ForceField& force, const ExtremalState& state);

/// H = 1/4 I*^{ij} lam_i lam_j + lam_i a~^i + mu_i qdot^i; constant along
/// exact solutions of hamiltonian_rhs.
double hamiltonian_value(const MechModel& model, const CostModel& cost,
                         const ExtremalState& state, double force_scale = 1.0);

/// Residual of the Riemannian spline equation
///   (nabla^2_qdot a)^i + R^i_{ljk} a^l qdot^j qdot^k = 0,  a = nabla_qdot qdot,
/// evaluated from uniformly spaced (q, qdot) samples by nested second-order
/// differences. Residuals are produced for samples first_index .. first_index
/// + residual.size() - 1.
struct SplineResidual {
  std::vector<Vec> residual;
  std::vector<Vec> second_covderiv;  // (nabla^2_qdot a) at the same samples
  int first_index = 0;
};
SplineResidual spline_residual(const MechModel& model, const std::vector<double>& t,
                               const std::vector<Vec>& q, const std::vector<Vec>& qdot);

/// |u|^2_g split into covariant-acceleration, force, and coupling parts for
/// u = nabla_qdot qdot - a~. The parts sum to cost_rate in acceleration mode
/// exactly; with pure drag the force part is qdot^T D^T g^{-1} D qdot and the
/// coupling part +2 (D qdot)_j (nabla_qdot qdot)^j (the expanded square).
struct CostDecomposition {
  double accel_term = 0.0;
  double drag_term = 0.0;
  double cross_term = 0.0;
  double total() const { return accel_term + drag_term + cross_term; }
};
CostDecomposition drag_cost_decomposition(const MechModel& model, const Vec& q, const Vec& qdot,
                                          const Vec& qddot);

}  // namespace riemspline
