#include "riemspline/control.hpp"

#include <cmath>

namespace riemspline {

Vec ExtremalState::pack() const {
  const int d = dim();
  Vec x(4 * d);
  x << q, qdot, lam, mu;
  return x;
}

ExtremalState ExtremalState::unpack(const Vec& x) {
  const int d = static_cast<int>(x.size()) / 4;
  ExtremalState s;
  s.q = x.segment(0, d);
  s.qdot = x.segment(d, d);
  s.lam = x.segment(2 * d, d);
  s.mu = x.segment(3 * d, d);
  return s;
}

ExtremalState ExtremalState::zero(int dim) {
  return {Vec::Zero(dim), Vec::Zero(dim), Vec::Zero(dim), Vec::Zero(dim)};
}

CostModel CostModel::acceleration(const MetricField& inertia) {
  CostModel cost;
  cost.mode = CostMode::acceleration;
  cost.induced = inertia;
  cost.induced_dual = MetricField{
      inertia.dim,
      [inertia](const Vec& q) { return spd_inverse(inertia.eval(q)); },
      [inertia](const Vec& q) {
        const Mat inv = spd_inverse(inertia.eval(q));
        const auto dg = inertia.partials_at(q);
        std::vector<Mat> out(dg.size());
        for (size_t k = 0; k < dg.size(); ++k) {
          Mat p = -inv * dg[k] * inv;
          out[k] = 0.5 * (p + p.transpose());
        }
        return out;
      }};
  return cost;
}

CostModel CostModel::actuation(const MetricField& inertia, const Mat& cometric) {
  CostModel cost;
  cost.mode = CostMode::actuation;
  const Mat mhat = 0.5 * (cometric + cometric.transpose());
  require_spd(mhat);
  auto induced_eval = [inertia, mhat](const Vec& q) {
    const Mat g = inertia.eval(q);
    Mat i = g.transpose() * mhat * g;
    return Mat(0.5 * (i + i.transpose()));
  };
  auto induced_partials = [inertia, mhat](const Vec& q) {
    const Mat g = inertia.eval(q);
    const auto dg = inertia.partials_at(q);
    std::vector<Mat> out(dg.size());
    for (size_t k = 0; k < dg.size(); ++k) {
      Mat p = dg[k].transpose() * mhat * g + g.transpose() * mhat * dg[k];
      out[k] = 0.5 * (p + p.transpose());
    }
    return out;
  };
  cost.induced = MetricField{inertia.dim, induced_eval, induced_partials};
  const MetricField induced = cost.induced;
  cost.induced_dual = MetricField{
      inertia.dim,
      [induced_eval](const Vec& q) { return spd_inverse(induced_eval(q)); },
      [induced_eval, induced_partials](const Vec& q) {
        const Mat inv = spd_inverse(induced_eval(q));
        const auto di = induced_partials(q);
        std::vector<Mat> out(di.size());
        for (size_t k = 0; k < di.size(); ++k) {
          Mat p = -inv * di[k] * inv;
          out[k] = 0.5 * (p + p.transpose());
        }
        return out;
      }};
  return cost;
}

CostModel CostModel::make(CostMode mode, const MetricField& inertia, const Mat& cometric) {
  return mode == CostMode::acceleration ? acceleration(inertia) : actuation(inertia, cometric);
}

ForceField make_force_field(const MechModel& model) {
  ForceField field;
  const int d = model.dim;
  if (!model.has_external_force()) {
    field.none = true;
    field.accel = [d](const Vec&, const Vec&) { return Vec(Vec::Zero(d)); };
    field.vel_jacobian = [d](const Vec&, const Vec&) { return Mat(Mat::Zero(d, d)); };
    field.pos_cov_deriv = [d](const Vec&, const Vec&) { return Mat(Mat::Zero(d, d)); };
    return field;
  }
  const MetricField inertia = model.inertia;
  const ScalarField potential = model.potential;
  const auto drag = model.drag;
  const auto drag_partials = model.drag_partials;
  const bool has_drag = model.has_drag();

  field.accel = [=](const Vec& q, const Vec& qdot) {
    Vec w = potential.grad_at(q);
    if (has_drag) w += drag(q) * qdot;
    return Vec(-spd_inverse(inertia.eval(q)) * w);
  };
  field.vel_jacobian = [=](const Vec& q, const Vec&) {
    if (!has_drag) return Mat(Mat::Zero(d, d));
    // (i,j) entry is d a~^j / d qdot^i = -(g^{-1} D)^j_i.
    return Mat((-spd_inverse(inertia.eval(q)) * drag(q)).transpose());
  };
  field.pos_cov_deriv = [=](const Vec& q, const Vec& qdot) {
    const Mat ginv = spd_inverse(inertia.eval(q));
    const auto dg = inertia.partials_at(q);
    Vec w = potential.grad_at(q);
    if (has_drag) w += drag(q) * qdot;
    const Vec a = -ginv * w;
    const Mat hess = potential.hess_at(q);
    std::vector<Mat> dd;
    if (has_drag) dd = drag_partials(q);
    const ChristoffelArray gam = christoffel_from(ginv, dg);
    Mat out(d, d);  // (i, k) = (nabla_i a~)^k
    for (int i = 0; i < d; ++i) {
      Vec dw = hess.col(i);
      if (has_drag) dw += dd[i] * qdot;
      Vec da = -ginv * (dg[i] * a + dw);  // plain partial d a~ / d q^i
      for (int k = 0; k < d; ++k) {
        double v = da[k];
        for (int l = 0; l < d; ++l) v += gam(k, i, l) * a[l];
        out(i, k) = v;
      }
    }
    return out;
  };
  return field;
}

ForceField scale_force_field(const ForceField& field, double scale) {
  if (field.none || scale == 1.0) return field;
  ForceField scaled = field;
  auto accel = field.accel;
  auto velj = field.vel_jacobian;
  auto posd = field.pos_cov_deriv;
  scaled.accel = [accel, scale](const Vec& q, const Vec& qd) { return Vec(scale * accel(q, qd)); };
  scaled.vel_jacobian = [velj, scale](const Vec& q, const Vec& qd) {
    return Mat(scale * velj(q, qd));
  };
  scaled.pos_cov_deriv = [posd, scale](const Vec& q, const Vec& qd) {
    return Mat(scale * posd(q, qd));
  };
  if (scale == 0.0) scaled.none = true;
  return scaled;
}

ForceEval external_acceleration(const MechModel& model, const Vec& q, const Vec& qdot) {
  const ForceField field = make_force_field(model);
  return ForceEval{field.accel(q, qdot), field.vel_jacobian(q, qdot),
                   field.pos_cov_deriv(q, qdot)};
}

Vec control_from_costate(const CostModel& cost, const Vec& q, const Vec& lam) {
  return 0.5 * cost.induced_dual.eval(q) * lam;
}

double cost_rate(const CostModel& cost, const Vec& q, const Vec& u) {
  return u.dot(cost.induced.eval(q) * u);
}

ExtremalState hamiltonian_rhs_with_force(const MechModel& model, const CostModel& cost,
                                         const ForceField& force, const ExtremalState& s) {
  if (!s.finite()) throw std::invalid_argument("non-finite state");
  const int d = s.dim();
  const Mat g = model.inertia.eval(s.q);
  const auto dg = model.inertia.partials_at(s.q);
  const Mat ginv = spd_inverse(g);
  const ChristoffelArray gam = christoffel_from(ginv, dg);
  const CurvatureArray curv =
      model.inertia.second_partials
          ? curvature_from(ginv, dg, model.inertia.second_partials_at(s.q))
          : curvature(model.inertia, s.q);

  const Mat idual = cost.induced_dual.eval(s.q);
  const Vec u = 0.5 * idual * s.lam;

  Vec a = Vec::Zero(d);
  Mat velj = Mat::Zero(d, d);
  Mat posd = Mat::Zero(d, d);
  if (!force.none) {
    a = force.accel(s.q, s.qdot);
    velj = force.vel_jacobian(s.q, s.qdot);
    posd = force.pos_cov_deriv(s.q, s.qdot);
  }

  ExtremalState out;
  out.q = s.qdot;

  // qddot^i = -Gamma^i_{jk} qdot^j qdot^k + u^i + a~^i
  out.qdot = u + a;
  for (int i = 0; i < d; ++i) {
    double v = 0.0;
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) v += gam(i, j, k) * s.qdot[j] * s.qdot[k];
    out.qdot[i] -= v;
  }

  // lam'_i = Gamma^k_{ij} lam_k qdot^j - mu_i - lam_j d a~^j / d qdot^i
  out.lam = -s.mu - velj * s.lam;
  for (int i = 0; i < d; ++i) {
    double v = 0.0;
    for (int k = 0; k < d; ++k)
      for (int j = 0; j < d; ++j) v += gam(k, i, j) * s.lam[k] * s.qdot[j];
    out.lam[i] += v;
  }

  // mu'_i = Gamma^k_{ij} mu_k qdot^j - 1/4 tau^{jk}_i lam_j lam_k
  //        + R^l_{ijk} qdot^j qdot^k lam_l
  //        - [ lam_k (nabla_i a~)^k - Gamma^k_{ij} qdot^j (d a~^l/d qdot^k) lam_l ]
  out.mu = Vec::Zero(d);
  for (int i = 0; i < d; ++i) {
    double v = 0.0;
    for (int k = 0; k < d; ++k)
      for (int j = 0; j < d; ++j) v += gam(k, i, j) * s.mu[k] * s.qdot[j];
    for (int l = 0; l < d; ++l)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) v += curv(l, i, j, k) * s.qdot[j] * s.qdot[k] * s.lam[l];
    out.mu[i] = v;
  }
  if (cost.mode != CostMode::acceleration) {
    // tau vanishes identically when I = g; skip the contraction there.
    const Tensor3 tau =
        tau_tensor_from(cost.induced_dual.partials_at(s.q), idual, gam);
    for (int i = 0; i < d; ++i) {
      double v = 0.0;
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) v += tau(i, j, k) * s.lam[j] * s.lam[k];
      out.mu[i] -= 0.25 * v;
    }
  }
  if (!force.none) {
    const Vec vl = velj * s.lam;  // (d a~/d qdot) lam, component k
    for (int i = 0; i < d; ++i) {
      double ext = posd.row(i).dot(s.lam);  // lam_k (nabla_i a~)^k
      for (int k = 0; k < d; ++k)
        for (int j = 0; j < d; ++j) ext -= gam(k, i, j) * s.qdot[j] * vl[k];
      out.mu[i] -= ext;
    }
  }
  return out;
}

ExtremalState hamiltonian_rhs(const MechModel& model, const CostModel& cost,
                              const ExtremalState& state, double force_scale) {
  const ForceField force = scale_force_field(make_force_field(model), force_scale);
  return hamiltonian_rhs_with_force(model, cost, force, state);
}

double hamiltonian_value(const MechModel& model, const CostModel& cost,
                         const ExtremalState& state, double force_scale) {
  if (!state.finite()) throw std::invalid_argument("non-finite state");
  const Mat idual = cost.induced_dual.eval(state.q);
  double h = 0.25 * state.lam.dot(idual * state.lam) + state.mu.dot(state.qdot);
  if (model.has_external_force() && force_scale != 0.0) {
    const ForceField force = make_force_field(model);
    h += force_scale * state.lam.dot(force.accel(state.q, state.qdot));
  }
  return h;
}

namespace {

/// Second-order time derivative of a sampled sequence: central differences in
/// the interior, one-sided at the two ends.
std::vector<Vec> sampled_derivative(const std::vector<Vec>& f, double dt) {
  const size_t n = f.size();
  std::vector<Vec> out(n);
  out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt);
  for (size_t i = 1; i + 1 < n; ++i) out[i] = (f[i + 1] - f[i - 1]) / (2.0 * dt);
  out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt);
  return out;
}

}  // namespace

SplineResidual spline_residual(const MechModel& model, const std::vector<double>& t,
                               const std::vector<Vec>& q, const std::vector<Vec>& qdot) {
  const size_t n = t.size();
  if (n < 5) throw std::invalid_argument("spline residual needs at least 5 samples");
  if (q.size() != n || qdot.size() != n) throw std::invalid_argument("sample count mismatch");
  const double dt = t[1] - t[0];
  for (size_t i = 1; i < n; ++i)
    if (std::abs((t[i] - t[i - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
      throw std::invalid_argument("non-uniform sample spacing");

  std::vector<ChristoffelArray> gam(n);
  for (size_t i = 0; i < n; ++i) gam[i] = christoffel(model.inertia, q[i]);

  const std::vector<Vec> qddot = sampled_derivative(qdot, dt);
  std::vector<Vec> a(n);
  for (size_t i = 0; i < n; ++i) a[i] = covariant_accel(gam[i], qdot[i], qddot[i]);

  const std::vector<Vec> adot = sampled_derivative(a, dt);
  std::vector<Vec> na(n);  // nabla_qdot a
  for (size_t i = 0; i < n; ++i) {
    na[i] = adot[i];
    const int d = static_cast<int>(q[i].size());
    for (int ii = 0; ii < d; ++ii)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) na[i][ii] += gam[i](ii, j, k) * qdot[i][j] * a[i][k];
  }

  const std::vector<Vec> nadot = sampled_derivative(na, dt);
  SplineResidual out;
  out.first_index = 2;
  for (size_t i = 2; i + 2 < n; ++i) {
    const int d = static_cast<int>(q[i].size());
    Vec nna = nadot[i];
    for (int ii = 0; ii < d; ++ii)
      for (int j = 0; j < d; ++j)
        for (int k = 0; k < d; ++k) nna[ii] += gam[i](ii, j, k) * qdot[i][j] * na[i][k];

    const CurvatureArray curv = curvature(model.inertia, q[i]);
    Vec res = nna;
    for (int ii = 0; ii < d; ++ii)
      for (int l = 0; l < d; ++l)
        for (int j = 0; j < d; ++j)
          for (int k = 0; k < d; ++k)
            res[ii] += curv(ii, l, j, k) * a[i][l] * qdot[i][j] * qdot[i][k];
    out.second_covderiv.push_back(nna);
    out.residual.push_back(res);
  }
  return out;
}

CostDecomposition drag_cost_decomposition(const MechModel& model, const Vec& q, const Vec& qdot,
                                          const Vec& qddot) {
  const Mat g = model.inertia.eval(q);
  const auto dg = model.inertia.partials_at(q);
  const Mat ginv = spd_inverse(g);
  const ChristoffelArray gam = christoffel_from(ginv, dg);
  const Vec cov = covariant_accel(gam, qdot, qddot);

  Vec a = Vec::Zero(model.dim);
  if (model.has_external_force()) {
    Vec w = model.potential.grad_at(q);
    if (model.has_drag()) w += model.drag(q) * qdot;
    a = -ginv * w;
  }
  CostDecomposition parts;
  parts.accel_term = cov.dot(g * cov);
  parts.drag_term = a.dot(g * a);
  parts.cross_term = -2.0 * cov.dot(g * a);
  return parts;
}

}  // namespace riemspline
