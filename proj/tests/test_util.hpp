#pragma once

#include <cmath>
#include <random>

#include "riemspline/control.hpp"
#include "riemspline/geometry.hpp"
#include "riemspline/models.hpp"

namespace rstest {

using namespace riemspline;

struct RandomMetric {
  MetricField field;
  Vec base_point;
};

/// Smooth random SPD metric field with closed-form partials: a diagonally
/// dominant constant part plus low-rank sinusoidal modes.
inline RandomMetric random_spd_field(std::mt19937& rng, int dim) {
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

inline Vec random_vec(std::mt19937& rng, int dim, double scale = 1.0) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = scale * unit(rng);
  return v;
}

/// Round-sphere chart metric diag(1, sin^2 q1), valid for q1 in (0, pi).
inline MetricField sphere_metric() {
  auto eval = [](const Vec& q) {
    Mat g = Mat::Identity(2, 2);
    g(1, 1) = std::sin(q[0]) * std::sin(q[0]);
    return g;
  };
  auto partials = [](const Vec& q) {
    std::vector<Mat> dg(2, Mat::Zero(2, 2));
    dg[0](1, 1) = 2.0 * std::sin(q[0]) * std::cos(q[0]);
    return dg;
  };
  return MetricField{2, eval, partials};
}

/// Closed-form Levi-Civita symbols of the round sphere (the oracle for the
/// numeric Christoffel path): Gamma^1_{22} = -sin q1 cos q1,
/// Gamma^2_{12} = Gamma^2_{21} = cot q1, all others zero.
inline double sphere_gamma_122(double q1) { return -std::sin(q1) * std::cos(q1); }
inline double sphere_gamma_212(double q1) { return std::cos(q1) / std::sin(q1); }

/// diag(e^{2 q1}, 1): only Gamma^1_{11} = 1 survives.
inline MetricField exp_metric() {
  auto eval = [](const Vec& q) {
    Mat g = Mat::Identity(2, 2);
    g(0, 0) = std::exp(2.0 * q[0]);
    return g;
  };
  auto partials = [](const Vec& q) {
    std::vector<Mat> dg(2, Mat::Zero(2, 2));
    dg[0](0, 0) = 2.0 * std::exp(2.0 * q[0]);
    return dg;
  };
  return MetricField{2, eval, partials};
}

/// Textbook closed-form planar-2R mass matrix (independent of the pullback
/// implementation): the oracle for the models module.
inline Mat planar2r_mass(const TwoLinkParams& p, double q2) {
  const double c2 = std::cos(q2);
  Mat g(2, 2);
  g(0, 0) = p.m1 * p.com1 * p.com1 + p.rot_inertia1 +
            p.m2 * (p.l1 * p.l1 + p.com2 * p.com2 + 2.0 * p.l1 * p.com2 * c2) + p.rot_inertia2;
  g(0, 1) = g(1, 0) = p.m2 * (p.com2 * p.com2 + p.l1 * p.com2 * c2) + p.rot_inertia2;
  g(1, 1) = p.m2 * p.com2 * p.com2 + p.rot_inertia2;
  return g;
}

inline double planar2r_potential(const TwoLinkParams& p, const Vec& q) {
  const double s1 = std::sin(q[0]);
  const double s12 = std::sin(q[0] + q[1]);
  return p.gravity_accel * (p.m1 * p.com1 * s1 + p.m2 * (p.l1 * s1 + p.com2 * s12));
}

inline Vec planar2r_gravity_grad(const TwoLinkParams& p, const Vec& q) {
  const double c1 = std::cos(q[0]);
  const double c12 = std::cos(q[0] + q[1]);
  Vec grad(2);
  grad[0] = p.gravity_accel * (p.m1 * p.com1 * c1 + p.m2 * (p.l1 * c1 + p.com2 * c12));
  grad[1] = p.gravity_accel * p.m2 * p.com2 * c12;
  return grad;
}

inline DragConfig joint_drag(std::initializer_list<double> coeffs) {
  DragConfig cfg;
  cfg.kind = DragKind::joint;
  cfg.joint_coeffs = Vec(static_cast<int>(coeffs.size()));
  int i = 0;
  for (double c : coeffs) cfg.joint_coeffs[i++] = c;
  return cfg;
}

inline DragConfig endpoint_drag(double coeff) {
  DragConfig cfg;
  cfg.kind = DragKind::endpoint;
  cfg.endpoint_coeff = coeff;
  return cfg;
}

}  // namespace rstest
