#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "riemspline/types.hpp"

namespace riemspline {

/// Position-dependent symmetric positive-definite (0,2)-tensor field g(q),
/// with access to its coordinate partials d_k g. Models that know their
/// derivatives in closed form supply `partials`; otherwise they are filled in
/// by the 4th-order central-difference backend.
struct MetricField {
  int dim = 0;
  std::function<Mat(const Vec&)> eval;
  std::function<std::vector<Mat>(const Vec&)> partials;  // optional analytic override
  // optional analytic second partials, entry [m][p] = d_m d_p g
  std::function<std::vector<std::vector<Mat>>(const Vec&)> second_partials;

  Mat operator()(const Vec& q) const { return eval(q); }

  /// Analytic partials when available, finite differences of eval otherwise.
  std::vector<Mat> partials_at(const Vec& q) const;

  /// Analytic second partials when available, finite differences of
  /// partials_at otherwise; symmetric in the two derivative slots.
  std::vector<std::vector<Mat>> second_partials_at(const Vec& q) const;

  static MetricField constant(const Mat& g);
  static MetricField identity(int dim);
  static MetricField from_eval(int dim, std::function<Mat(const Vec&)> eval);
};

/// Smooth scalar field V(q) with coordinate gradient and Hessian access.
struct ScalarField {
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> grad_coords;      // optional analytic override
  std::function<Mat(const Vec&)> hess_coords;      // optional analytic override

  double operator()(const Vec& q) const { return eval(q); }
  Vec grad_at(const Vec& q) const;
  Mat hess_at(const Vec& q) const;   // always exactly symmetric

  static ScalarField zero();
  static ScalarField from_eval(std::function<double(const Vec&)> eval);
};

/// Levi-Civita connection coefficients Gamma^i_{jk}; symmetric in (j,k).
struct ChristoffelArray {
  Tensor3 gamma;  // gamma(i, j, k) = Gamma^i_{jk}

  double operator()(int i, int j, int k) const { return gamma(i, j, k); }
  int dim() const { return gamma.dim(); }
};

/// Curvature coefficients R^l_{ijk}, antisymmetric in (i,j).
struct CurvatureArray {
  Tensor4 r;  // r(l, i, j, k) = R^l_{ijk}

  double operator()(int l, int i, int j, int k) const { return r(l, i, j, k); }
  int dim() const { return r.dim(); }
};

/// Symmetric inverse of an SPD matrix. Throws DegenerateMetricError when the
/// smallest eigenvalue drops below 1e-10 times the largest.
Mat spd_inverse(const Mat& g);

/// Eigen-decomposition check only (no inverse needed).
void require_spd(const Mat& g);

// Levi-Civita symbols Gamma^i_{jk} = 1/2 g^{il} (d_j g_{lk} + d_k g_{jl} - d_l g_{jk}).
ChristoffelArray christoffel(const MetricField& metric, const Vec& q);

// Same contraction from precomputed pieces (hot path).
ChristoffelArray christoffel_from(const Mat& g_inv, const std::vector<Mat>& partials);

// R^l_{ijk} = d_i Gamma^l_{jk} - d_j Gamma^l_{ik}
//           + Gamma^n_{jk} Gamma^l_{in} - Gamma^n_{ik} Gamma^l_{jn}.
// Gamma partials are closed-form when the field carries second partials and
// come from the central-difference backend otherwise.
CurvatureArray curvature(const MetricField& metric, const Vec& q);

// Closed-form curvature from metric derivatives (hot path).
CurvatureArray curvature_from(const Mat& g_inv, const std::vector<Mat>& dg,
                              const std::vector<std::vector<Mat>>& d2g);

/// (nabla_qdot qdot)^i = qddot^i + Gamma^i_{jk} qdot^j qdot^k.
Vec covariant_accel(const MetricField& metric, const Vec& q, const Vec& qdot, const Vec& qddot);
Vec covariant_accel(const ChristoffelArray& gam, const Vec& qdot, const Vec& qddot);

/// (nabla*_qdot f)_i = fdot_i - Gamma^k_{ij} f_k qdot^j.
Vec covariant_coderiv(const MetricField& metric, const Vec& q, const Vec& qdot, const Vec& f,
                      const Vec& fdot);
Vec covariant_coderiv(const ChristoffelArray& gam, const Vec& qdot, const Vec& f, const Vec& fdot);

/// Force covector -> acceleration vector: g^{-1}(q) f.
Vec raise_index(const MetricField& metric, const Vec& q, const Vec& f);

/// Acceleration vector -> force covector: g(q) a.
Vec lower_index(const MetricField& metric, const Vec& q, const Vec& a);

/// (grad V)^i = g^{ij} d_j V.
Vec riemannian_gradient(const MetricField& metric, const ScalarField& V, const Vec& q);

/// (Hess V)_{ij} = d_i d_j V - Gamma^k_{ij} d_k V; exactly symmetric.
Mat riemannian_hessian(const MetricField& metric, const ScalarField& V, const Vec& q);

/// tau^{jk}_i = d_i I*^{jk} + Gamma^j_{il} I*^{lk} + Gamma^k_{il} I*^{jl},
/// the dual covariant derivative of the dual induced tensor I* along d_i.
/// Result indexed tau(i, j, k); symmetric in (j, k). Christoffels are those
/// of `metric`.
Tensor3 tau_tensor(const MetricField& induced_dual, const MetricField& metric, const Vec& q);
Tensor3 tau_tensor_from(const std::vector<Mat>& induced_dual_partials, const Mat& induced_dual,
                        const ChristoffelArray& gam);

}  // namespace riemspline
