#include "riemspline/geometry.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>

#include "riemspline/fd.hpp"

namespace riemspline {

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("RIEMSPLINE_LOG");
    if (!env) return LogLevel::info;
    std::string s(env);
    if (s == "quiet") return LogLevel::quiet;
    if (s == "debug") return LogLevel::debug;
    return LogLevel::info;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::info) std::cerr << "[riemspline] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::debug) std::cerr << "[riemspline] " << msg << "\n";
}

std::vector<Mat> MetricField::partials_at(const Vec& q) const {
  if (partials) return partials(q);
  std::vector<Mat> out(dim);
  for (int k = 0; k < dim; ++k) {
    Mat p = fd::partial(eval, q, k);
    out[k] = 0.5 * (p + p.transpose());
  }
  return out;
}

std::vector<std::vector<Mat>> MetricField::second_partials_at(const Vec& q) const {
  if (second_partials) {
    auto d2 = second_partials(q);
    for (int m = 0; m < dim; ++m)
      for (int p = m; p < dim; ++p) {
        Mat s = 0.25 * (d2[m][p] + d2[m][p].transpose() + d2[p][m] + d2[p][m].transpose());
        d2[m][p] = s;
        d2[p][m] = s;
      }
    return d2;
  }
  std::vector<std::vector<Mat>> out(dim, std::vector<Mat>(dim));
  auto dg = [this](const Vec& p) { return partials_at(p); };
  for (int p = 0; p < dim; ++p) {
    const double h = fd::step(q[p]);
    Vec qp = q;
    auto at = [&](double off) {
      qp[p] = q[p] + off;
      return dg(qp);
    };
    const auto f1 = at(h), fm1 = at(-h), f2 = at(2 * h), fm2 = at(-2 * h);
    for (int m = 0; m < dim; ++m)
      out[m][p] = ((fm2[m] - f2[m]) + 8.0 * (f1[m] - fm1[m])) / (12.0 * h);
  }
  for (int m = 0; m < dim; ++m)
    for (int p = m; p < dim; ++p) {
      Mat s = 0.25 * (out[m][p] + out[m][p].transpose() + out[p][m] + out[p][m].transpose());
      out[m][p] = s;
      out[p][m] = s;
    }
  return out;
}

MetricField MetricField::constant(const Mat& g) {
  const int d = static_cast<int>(g.rows());
  std::vector<Mat> zeros(d, Mat::Zero(d, d));
  std::vector<std::vector<Mat>> zeros2(d, zeros);
  return MetricField{d, [g](const Vec&) { return g; }, [zeros](const Vec&) { return zeros; },
                     [zeros2](const Vec&) { return zeros2; }};
}

MetricField MetricField::identity(int dim) { return constant(Mat::Identity(dim, dim)); }

MetricField MetricField::from_eval(int dim, std::function<Mat(const Vec&)> eval) {
  return MetricField{dim, std::move(eval), nullptr};
}

Vec ScalarField::grad_at(const Vec& q) const {
  if (grad_coords) return grad_coords(q);
  const int d = static_cast<int>(q.size());
  Vec g(d);
  for (int k = 0; k < d; ++k) g[k] = fd::partial(eval, q, k);
  return g;
}

Mat ScalarField::hess_at(const Vec& q) const {
  if (hess_coords) {
    Mat h = hess_coords(q);
    return 0.5 * (h + h.transpose());
  }
  const int d = static_cast<int>(q.size());
  auto grad = [this](const Vec& p) { return grad_at(p); };
  Mat h(d, d);
  for (int k = 0; k < d; ++k) h.col(k) = fd::partial(grad, q, k);
  return 0.5 * (h + h.transpose());
}

ScalarField ScalarField::zero() {
  return ScalarField{[](const Vec&) { return 0.0; },
                     [](const Vec& q) { return Vec(Vec::Zero(q.size())); },
                     [](const Vec& q) { return Mat(Mat::Zero(q.size(), q.size())); }};
}

ScalarField ScalarField::from_eval(std::function<double(const Vec&)> eval) {
  return ScalarField{std::move(eval), nullptr, nullptr};
}

namespace {

Eigen::SelfAdjointEigenSolver<Mat> spd_solver(const Mat& g) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (g + g.transpose()));
  const double lo = es.eigenvalues()(0);
  const double hi = es.eigenvalues()(g.rows() - 1);
  if (lo <= 1e-10 * std::max(hi, 0.0)) throw DegenerateMetricError(lo, hi);
  return es;
}

}  // namespace

Mat spd_inverse(const Mat& g) {
  auto es = spd_solver(g);
  return es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

void require_spd(const Mat& g) { spd_solver(g); }

ChristoffelArray christoffel_from(const Mat& g_inv, const std::vector<Mat>& partials) {
  const int d = static_cast<int>(g_inv.rows());
  ChristoffelArray out{Tensor3(d)};
  for (int j = 0; j < d; ++j) {
    for (int k = j; k < d; ++k) {
      Vec rhs(d);
      for (int l = 0; l < d; ++l) rhs[l] = partials[j](l, k) + partials[k](j, l) - partials[l](j, k);
      Vec gi = 0.5 * (g_inv * rhs);
      for (int i = 0; i < d; ++i) {
        out.gamma(i, j, k) = gi[i];
        out.gamma(i, k, j) = gi[i];
      }
    }
  }
  return out;
}

ChristoffelArray christoffel(const MetricField& metric, const Vec& q) {
  return christoffel_from(spd_inverse(metric.eval(q)), metric.partials_at(q));
}

namespace {

CurvatureArray curvature_from_gamma(int d, const ChristoffelArray& gam,
                                    const std::vector<Tensor3>& dgam) {
  CurvatureArray out{Tensor4(d)};
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) {
          double v = dgam[i](l, j, k) - dgam[j](l, i, k);
          for (int n = 0; n < d; ++n)
            v += gam(n, j, k) * gam(l, i, n) - gam(n, i, k) * gam(l, j, n);
          out.r(l, i, j, k) = v;
        }
  return out;
}

}  // namespace

CurvatureArray curvature_from(const Mat& g_inv, const std::vector<Mat>& dg,
                              const std::vector<std::vector<Mat>>& d2g) {
  const int d = static_cast<int>(g_inv.rows());
  const ChristoffelArray gam = christoffel_from(g_inv, dg);
  std::vector<Mat> dginv(d);
  for (int i = 0; i < d; ++i) dginv[i] = -g_inv * dg[i] * g_inv;

  // d_i Gamma^l_{jk} = 1/2 (d_i g^{lm}) S_{mjk} + 1/2 g^{lm} d_i S_{mjk},
  // S_{mjk} = d_j g_{mk} + d_k g_{jm} - d_m g_{jk}.
  std::vector<Tensor3> dgam(d, Tensor3(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = j; k < d; ++k) {
        for (int l = 0; l < d; ++l) {
          double v = 0.0;
          for (int m = 0; m < d; ++m) {
            const double s = dg[j](m, k) + dg[k](j, m) - dg[m](j, k);
            const double ds = d2g[i][j](m, k) + d2g[i][k](j, m) - d2g[i][m](j, k);
            v += dginv[i](l, m) * s + g_inv(l, m) * ds;
          }
          dgam[i](l, j, k) = 0.5 * v;
          dgam[i](l, k, j) = 0.5 * v;
        }
      }
  return curvature_from_gamma(d, gam, dgam);
}

CurvatureArray curvature(const MetricField& metric, const Vec& q) {
  const int d = metric.dim;
  if (metric.second_partials)
    return curvature_from(spd_inverse(metric.eval(q)), metric.partials_at(q),
                          metric.second_partials_at(q));

  const ChristoffelArray gam = christoffel(metric, q);
  // Gamma partials by the central-difference backend.
  std::vector<Tensor3> dgam(d);
  auto gamma_at = [&](const Vec& p) { return christoffel(metric, p).gamma; };
  for (int k = 0; k < d; ++k) dgam[k] = fd::partial(gamma_at, q, k);
  return curvature_from_gamma(d, gam, dgam);
}

Vec covariant_accel(const ChristoffelArray& gam, const Vec& qdot, const Vec& qddot) {
  const int d = gam.dim();
  Vec out = qddot;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) out[i] += gam(i, j, k) * qdot[j] * qdot[k];
  return out;
}

Vec covariant_accel(const MetricField& metric, const Vec& q, const Vec& qdot, const Vec& qddot) {
  return covariant_accel(christoffel(metric, q), qdot, qddot);
}

Vec covariant_coderiv(const ChristoffelArray& gam, const Vec& qdot, const Vec& f, const Vec& fdot) {
  const int d = gam.dim();
  Vec out = fdot;
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      for (int j = 0; j < d; ++j) out[i] -= gam(k, i, j) * f[k] * qdot[j];
  return out;
}

Vec covariant_coderiv(const MetricField& metric, const Vec& q, const Vec& qdot, const Vec& f,
                      const Vec& fdot) {
  return covariant_coderiv(christoffel(metric, q), qdot, f, fdot);
}

Vec raise_index(const MetricField& metric, const Vec& q, const Vec& f) {
  return spd_inverse(metric.eval(q)) * f;
}

Vec lower_index(const MetricField& metric, const Vec& q, const Vec& a) {
  Mat g = metric.eval(q);
  require_spd(g);
  return 0.5 * (g + g.transpose()) * a;
}

Vec riemannian_gradient(const MetricField& metric, const ScalarField& V, const Vec& q) {
  return spd_inverse(metric.eval(q)) * V.grad_at(q);
}

Mat riemannian_hessian(const MetricField& metric, const ScalarField& V, const Vec& q) {
  const int d = metric.dim;
  const ChristoffelArray gam = christoffel(metric, q);
  const Vec grad = V.grad_at(q);
  Mat h = V.hess_at(q);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) h(i, j) -= gam(k, i, j) * grad[k];
  return 0.5 * (h + h.transpose());
}

Tensor3 tau_tensor_from(const std::vector<Mat>& induced_dual_partials, const Mat& induced_dual,
                        const ChristoffelArray& gam) {
  const int d = gam.dim();
  Tensor3 tau(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        double v = induced_dual_partials[i](j, k);
        for (int l = 0; l < d; ++l)
          v += gam(j, i, l) * induced_dual(l, k) + gam(k, i, l) * induced_dual(j, l);
        tau(i, j, k) = v;
      }
  return tau;
}

Tensor3 tau_tensor(const MetricField& induced_dual, const MetricField& metric, const Vec& q) {
  return tau_tensor_from(induced_dual.partials_at(q), induced_dual.eval(q),
                         christoffel(metric, q));
}

}  // namespace riemspline
