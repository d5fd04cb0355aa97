#include "riemspline/models.hpp"

#include <cmath>
#include <sstream>

namespace riemspline {

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return s;
}

void check_dim(const KinematicChain& chain, const Vec& q) {
  if (q.size() != chain.joint_count())
    throw std::invalid_argument("dimension mismatch: chain has " +
                                std::to_string(chain.joint_count()) + " joints, got " +
                                std::to_string(q.size()));
}

/// First derivatives of the world-frame chain quantities.
struct ChainDerivs {
  // dc[i][k] = d com_k / d q_i, zero unless i <= k
  std::vector<std::vector<Vec3>> dc;
  // dz[i][j] = d axis_j / d q_i, zero unless i < j
  std::vector<std::vector<Vec3>> dz;
  // dend[i] = d end / d q_i
  std::vector<Vec3> dend;
};

ChainDerivs chain_derivs(const KinematicChain& chain, const FkResult& fk) {
  const int n = chain.joint_count();
  ChainDerivs d;
  d.dc.assign(n, std::vector<Vec3>(n, Vec3::Zero()));
  d.dz.assign(n, std::vector<Vec3>(n, Vec3::Zero()));
  d.dend.assign(n, Vec3::Zero());
  for (int i = 0; i < n; ++i) {
    const Vec3& zi = fk.joint_axis[i];
    const Vec3& oi = fk.joint_origin[i];
    for (int k = i; k < n; ++k) d.dc[i][k] = zi.cross(fk.com[k] - oi);
    for (int j = i + 1; j < n; ++j) d.dz[i][j] = zi.cross(fk.joint_axis[j]);
    d.dend[i] = zi.cross(fk.end - oi);
  }
  return d;
}

// Second derivative of a point p rigidly attached at/after joint `attach`:
// d2p(i,m) = d/dq_m [ z_i x (p - o_i) ], valid for i, m <= attach.
Vec3 point_second_deriv(const FkResult& fk, const Vec3& p, int attach, int i, int m) {
  if (i > attach || m > attach) return Vec3::Zero();
  const Vec3& zi = fk.joint_axis[i];
  const Vec3& oi = fk.joint_origin[i];
  Vec3 out = Vec3::Zero();
  if (m < i) out += fk.joint_axis[m].cross(zi).cross(p - oi);
  Vec3 dp = fk.joint_axis[m].cross(p - fk.joint_origin[m]);  // m <= attach
  Vec3 doi = (m < i) ? Vec3(fk.joint_axis[m].cross(oi - fk.joint_origin[m])) : Vec3(Vec3::Zero());
  out += zi.cross(dp - doi);
  return out;
}

// Symmetrized table of second com derivatives for link k: entry (i, m).
std::vector<std::vector<Vec3>> com_second_derivs(const FkResult& fk, int k, int n) {
  std::vector<std::vector<Vec3>> d2(n, std::vector<Vec3>(n, Vec3::Zero()));
  for (int i = 0; i <= k; ++i)
    for (int m = i; m <= k; ++m) {
      Vec3 v = 0.5 * (point_second_deriv(fk, fk.com[k], k, i, m) +
                      point_second_deriv(fk, fk.com[k], k, m, i));
      d2[i][m] = v;
      d2[m][i] = v;
    }
  return d2;
}

/// Chain quantities with derivatives up to third order in the leading
/// `act` coordinates; all tables are zero outside their validity range.
/// Everything follows from the rigid-attachment rules
///   d z_j / d q_m = z_m x z_j            (m < j)
///   d o_j / d q_m = z_m x (o_j - o_m)    (m < j)
///   d c_k / d q_m = z_m x (c_k - o_m)    (m <= k)
/// applied recursively.
struct ChainJet {
  int n = 0;    // joints
  int act = 0;  // derivative directions in play
  FkResult fk;
  std::vector<Mat3> w;  // R I R^T per link

  // index order: derivative directions first, joint/link index last
  std::vector<std::vector<Vec3>> dz, do_, dc;
  std::vector<std::vector<std::vector<Vec3>>> d2z, d2o, d2c;
  std::vector<std::vector<std::vector<std::vector<Vec3>>>> d3c;
  std::vector<std::vector<Mat3>> dw;
  std::vector<std::vector<std::vector<Mat3>>> d2w;

  /// depth: 1 = first derivatives, 2 = +second, 3 = +third.
  ChainJet(const KinematicChain& chain, const Vec& q, int active, int depth)
      : n(chain.joint_count()), act(active), fk(forward_kinematics(chain, q)) {
    const auto& z = fk.joint_axis;
    const auto& o = fk.joint_origin;
    const auto& c = fk.com;

    w.resize(n);
    for (int k = 0; k < n; ++k)
      w[k] = fk.link_rot[k] * chain.links[k].rot_inertia * fk.link_rot[k].transpose();

    dz.assign(act, std::vector<Vec3>(n, Vec3::Zero()));
    do_.assign(act, std::vector<Vec3>(n, Vec3::Zero()));
    dc.assign(act, std::vector<Vec3>(n, Vec3::Zero()));
    for (int m = 0; m < act; ++m)
      for (int j = 0; j < n; ++j) {
        if (m < j) {
          dz[m][j] = z[m].cross(z[j]);
          do_[m][j] = z[m].cross(o[j] - o[m]);
        }
        if (m <= j) dc[m][j] = z[m].cross(c[j] - o[m]);
      }
    if (depth < 2) return;

    d2z.assign(act, std::vector<std::vector<Vec3>>(act, std::vector<Vec3>(n, Vec3::Zero())));
    d2o = d2z;
    d2c = d2z;
    for (int p = 0; p < act; ++p)
      for (int m = 0; m < act; ++m)
        for (int j = 0; j < n; ++j) {
          if (m < j) {
            d2z[p][m][j] = dz[p][m].cross(z[j]) + z[m].cross(dz[p][j]);
            d2o[p][m][j] = dz[p][m].cross(o[j] - o[m]) + z[m].cross(do_[p][j] - do_[p][m]);
          }
          if (m <= j) d2c[p][m][j] = dz[p][m].cross(c[j] - o[m]) + z[m].cross(dc[p][j] - do_[p][m]);
        }

    dw.assign(act, std::vector<Mat3>(n, Mat3::Zero()));
    for (int m = 0; m < act; ++m)
      for (int k = m; k < n; ++k) {
        const Mat3 zx = skew(z[m]);
        dw[m][k] = zx * w[k] - w[k] * zx;
      }
    if (depth < 3) return;

    d3c.assign(act, std::vector<std::vector<std::vector<Vec3>>>(
                        act, std::vector<std::vector<Vec3>>(act, std::vector<Vec3>(n, Vec3::Zero()))));
    for (int r = 0; r < act; ++r)
      for (int p = 0; p < act; ++p)
        for (int m = 0; m < act; ++m)
          for (int k = 0; k < n; ++k) {
            if (m > k) continue;
            d3c[r][p][m][k] = d2z[r][p][m].cross(c[k] - o[m]) +
                              dz[p][m].cross(dc[r][k] - do_[r][m]) +
                              dz[r][m].cross(dc[p][k] - do_[p][m]) +
                              z[m].cross(d2c[r][p][k] - d2o[r][p][m]);
          }

    d2w.assign(act, std::vector<std::vector<Mat3>>(act, std::vector<Mat3>(n, Mat3::Zero())));
    for (int p = 0; p < act; ++p)
      for (int m = 0; m < act; ++m)
        for (int k = m; k < n; ++k) {
          const Mat3 zx = skew(z[m]);
          const Mat3 dzx = skew(dz[p][m]);
          d2w[p][m][k] = dzx * w[k] - w[k] * dzx + zx * dw[p][k] - dw[p][k] * zx;
        }
  }

  Mat metric(const KinematicChain& chain) const {
    Mat g = Mat::Zero(act, act);
    for (int k = 0; k < n; ++k) {
      const double m = chain.links[k].mass;
      for (int a = 0; a <= std::min(k, act - 1); ++a)
        for (int b = a; b <= std::min(k, act - 1); ++b)
          g(a, b) += m * dc[a][k].dot(dc[b][k]) + fk.joint_axis[a].dot(w[k] * fk.joint_axis[b]);
    }
    for (int a = 0; a < act; ++a)
      for (int b = a + 1; b < act; ++b) g(b, a) = g(a, b);
    return g;
  }

  std::vector<Mat> metric_partials(const KinematicChain& chain) const {
    std::vector<Mat> dg(act, Mat::Zero(act, act));
    const auto& z = fk.joint_axis;
    for (int k = 0; k < n; ++k) {
      const double m = chain.links[k].mass;
      for (int mm = 0; mm < act; ++mm)
        for (int a = 0; a <= std::min(k, act - 1); ++a)
          for (int b = a; b <= std::min(k, act - 1); ++b) {
            double v = m * (d2c[mm][a][k].dot(dc[b][k]) + dc[a][k].dot(d2c[mm][b][k]));
            v += dz[mm][a].dot(w[k] * z[b]) + z[a].dot(dw[mm][k] * z[b]) +
                 z[a].dot(w[k] * dz[mm][b]);
            dg[mm](a, b) += v;
            if (b != a) dg[mm](b, a) += v;
          }
    }
    return dg;
  }

  std::vector<std::vector<Mat>> metric_second_partials(const KinematicChain& chain) const {
    std::vector<std::vector<Mat>> d2g(act, std::vector<Mat>(act, Mat::Zero(act, act)));
    const auto& z = fk.joint_axis;
    for (int k = 0; k < n; ++k) {
      const double m = chain.links[k].mass;
      for (int p = 0; p < act; ++p)
        for (int mm = 0; mm < act; ++mm)
          for (int a = 0; a <= std::min(k, act - 1); ++a)
            for (int b = 0; b <= std::min(k, act - 1); ++b) {
              double v = m * (d3c[p][mm][a][k].dot(dc[b][k]) + d2c[mm][a][k].dot(d2c[p][b][k]) +
                              d2c[p][a][k].dot(d2c[mm][b][k]) + dc[a][k].dot(d3c[p][mm][b][k]));
              v += d2z[p][mm][a].dot(w[k] * z[b]) + dz[mm][a].dot(dw[p][k] * z[b]) +
                   dz[mm][a].dot(w[k] * dz[p][b]);
              v += dz[p][a].dot(dw[mm][k] * z[b]) + z[a].dot(d2w[p][mm][k] * z[b]) +
                   z[a].dot(dw[mm][k] * dz[p][b]);
              v += dz[p][a].dot(w[k] * dz[mm][b]) + z[a].dot(dw[p][k] * dz[mm][b]) +
                   z[a].dot(w[k] * d2z[p][mm][b]);
              d2g[p][mm](a, b) += v;
            }
    }
    // symmetrize in the derivative pair and the matrix indices
    for (int p = 0; p < act; ++p)
      for (int mm = p; mm < act; ++mm) {
        Mat s = 0.5 * (d2g[p][mm] + d2g[mm][p]);
        s = 0.5 * (s + s.transpose());
        d2g[p][mm] = s;
        d2g[mm][p] = s;
      }
    return d2g;
  }
};

}  // namespace

void KinematicChain::validate() const {
  const size_t n = joints.size();
  if (n == 0) throw std::invalid_argument("chain has no joints");
  if (links.size() != n || link_lengths.size() != n)
    throw std::invalid_argument("per-link arrays inconsistent with joint count");
  for (size_t k = 0; k < n; ++k) {
    if (!(links[k].mass > 0.0)) throw std::invalid_argument("link mass must be positive");
    if (!(link_lengths[k] > 0.0)) throw std::invalid_argument("link length must be positive");
    Eigen::SelfAdjointEigenSolver<Mat3> es(links[k].rot_inertia);
    if (es.eigenvalues()(0) < 0.0)
      throw std::invalid_argument("rotational inertia must be positive semidefinite");
  }
  if (std::abs(gravity_dir.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("gravity direction must be a unit vector");
}

FkResult forward_kinematics(const KinematicChain& chain, const Vec& q) {
  check_dim(chain, q);
  const int n = chain.joint_count();
  FkResult fk;
  fk.link_rot.resize(n);
  fk.link_origin.resize(n);
  fk.joint_origin.resize(n);
  fk.joint_axis.resize(n);
  fk.com.resize(n);
  Eigen::Isometry3d T = Eigen::Isometry3d::Identity();
  for (int j = 0; j < n; ++j) {
    T = T * chain.joints[j].pre;
    fk.joint_origin[j] = T.translation();
    fk.joint_axis[j] = T.linear() * chain.joints[j].axis;
    T = T * Eigen::AngleAxisd(q[j], chain.joints[j].axis);
    T = T * chain.joints[j].post;
    fk.link_rot[j] = T.linear();
    fk.link_origin[j] = T.translation();
    fk.com[j] = T * chain.links[j].com;
  }
  fk.end = T * chain.end_offset;
  fk.task_position = chain.planar ? Vec(fk.end.head<2>()) : Vec(fk.end);
  return fk;
}

LinkJacobians link_jacobians(const KinematicChain& chain, const Vec& q) {
  const int n = chain.joint_count();
  const FkResult fk = forward_kinematics(chain, q);
  const ChainDerivs d = chain_derivs(chain, fk);
  LinkJacobians jac;
  jac.linear.assign(n, Mat::Zero(3, n));
  jac.angular.assign(n, Mat::Zero(3, n));
  for (int k = 0; k < n; ++k)
    for (int i = 0; i <= k; ++i) {
      jac.linear[k].col(i) = d.dc[i][k];
      jac.angular[k].col(i) = fk.joint_axis[i];
    }
  jac.end_linear = Mat::Zero(chain.task_dim(), n);
  for (int i = 0; i < n; ++i)
    jac.end_linear.col(i) = d.dend[i].head(chain.task_dim());
  return jac;
}

Mat mass_matrix(const KinematicChain& chain, const Vec& q) {
  return ChainJet(chain, q, chain.joint_count(), 1).metric(chain);
}

std::vector<Mat> mass_matrix_partials(const KinematicChain& chain, const Vec& q) {
  return ChainJet(chain, q, chain.joint_count(), 2).metric_partials(chain);
}

std::vector<std::vector<Mat>> mass_matrix_second_partials(const KinematicChain& chain,
                                                          const Vec& q) {
  return ChainJet(chain, q, chain.joint_count(), 3).metric_second_partials(chain);
}

double potential_energy(const KinematicChain& chain, const Vec& q) {
  const FkResult fk = forward_kinematics(chain, q);
  const Vec3 up = -chain.gravity_dir;
  double v = 0.0;
  for (int k = 0; k < chain.joint_count(); ++k)
    v += chain.links[k].mass * chain.gravity_accel * up.dot(fk.com[k]);
  return v;
}

Vec potential_gradient(const KinematicChain& chain, const Vec& q) {
  const int n = chain.joint_count();
  const FkResult fk = forward_kinematics(chain, q);
  const ChainDerivs d = chain_derivs(chain, fk);
  const Vec3 up = -chain.gravity_dir;
  Vec grad = Vec::Zero(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i <= k; ++i)
      grad[i] += chain.links[k].mass * chain.gravity_accel * up.dot(d.dc[i][k]);
  return grad;
}

Mat potential_hessian(const KinematicChain& chain, const Vec& q) {
  const int n = chain.joint_count();
  const FkResult fk = forward_kinematics(chain, q);
  const Vec3 up = -chain.gravity_dir;
  Mat h = Mat::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const auto d2c = com_second_derivs(fk, k, n);
    const double w = chain.links[k].mass * chain.gravity_accel;
    for (int i = 0; i <= k; ++i)
      for (int m = i; m <= k; ++m) {
        const double v = w * up.dot(d2c[i][m]);
        h(i, m) += v;
        if (m != i) h(m, i) += v;
      }
  }
  return h;
}

Mat joint_drag_tensor(const Vec& coeffs) {
  for (int i = 0; i < coeffs.size(); ++i)
    if (coeffs[i] < 0.0) throw std::invalid_argument("negative drag coefficient");
  return coeffs.asDiagonal();
}

Mat endpoint_drag_tensor(const KinematicChain& chain, const Vec& q, double coeff) {
  if (coeff < 0.0) throw std::invalid_argument("negative drag coefficient");
  const Mat je = link_jacobians(chain, q).end_linear;
  Mat d = coeff * je.transpose() * je;
  return 0.5 * (d + d.transpose());
}

std::vector<Mat> endpoint_drag_partials(const KinematicChain& chain, const Vec& q, double coeff) {
  const int n = chain.joint_count();
  const FkResult fk = forward_kinematics(chain, q);
  const ChainDerivs d = chain_derivs(chain, fk);
  const int td = chain.task_dim();
  Mat je = Mat::Zero(td, n);
  for (int i = 0; i < n; ++i) je.col(i) = d.dend[i].head(td);
  std::vector<Mat> out(n);
  for (int m = 0; m < n; ++m) {
    Mat dje = Mat::Zero(td, n);
    for (int a = 0; a < n; ++a) {
      Vec3 v = 0.5 * (point_second_deriv(fk, fk.end, n - 1, a, m) +
                      point_second_deriv(fk, fk.end, n - 1, m, a));
      dje.col(a) = v.head(td);
    }
    Mat dd = coeff * (dje.transpose() * je + je.transpose() * dje);
    out[m] = 0.5 * (dd + dd.transpose());
  }
  return out;
}

Vec MechModel::full_config(const Vec& q) const {
  if (frozen_tail.size() == 0) return q;
  Vec full(q.size() + frozen_tail.size());
  full << q, frozen_tail;
  return full;
}

std::optional<Vec> MechModel::task_position(const Vec& q) const {
  if (!chain) return std::nullopt;
  return forward_kinematics(*chain, full_config(q)).task_position;
}

namespace {

/// Inertia metric of a chain restricted to the leading `dim` coordinates,
/// with the remaining joints frozen at `tail`.
MetricField chain_inertia_field(const KinematicChain& chain, int dim, const Vec& tail) {
  auto pad = [tail, dim](const Vec& q) {
    Vec full(dim + tail.size());
    full << q, tail;
    return full;
  };
  auto eval = [chain, pad, dim](const Vec& q) {
    return ChainJet(chain, pad(q), dim, 1).metric(chain);
  };
  auto partials = [chain, pad, dim](const Vec& q) {
    return ChainJet(chain, pad(q), dim, 2).metric_partials(chain);
  };
  auto second = [chain, pad, dim](const Vec& q) {
    return ChainJet(chain, pad(q), dim, 3).metric_second_partials(chain);
  };
  return MetricField{dim, eval, partials, second};
}

ScalarField chain_potential_field(const KinematicChain& chain, int dim, const Vec& tail) {
  auto pad = [tail, dim](const Vec& q) {
    Vec full(dim + tail.size());
    full << q, tail;
    return full;
  };
  return ScalarField{
      [chain, pad](const Vec& q) { return potential_energy(chain, pad(q)); },
      [chain, pad, dim](const Vec& q) { return Vec(potential_gradient(chain, pad(q)).head(dim)); },
      [chain, pad, dim](const Vec& q) {
        return Mat(potential_hessian(chain, pad(q)).topLeftCorner(dim, dim));
      }};
}

void attach_drag(MechModel& model, const DragConfig& drag) {
  const int dim = model.dim;
  model.drag_kind = drag.kind;
  switch (drag.kind) {
    case DragKind::none: {
      model.drag = [dim](const Vec&) { return Mat(Mat::Zero(dim, dim)); };
      model.drag_partials = [dim](const Vec&) {
        return std::vector<Mat>(dim, Mat::Zero(dim, dim));
      };
      break;
    }
    case DragKind::joint: {
      Vec coeffs = drag.joint_coeffs;
      if (coeffs.size() == 1 && dim > 1) coeffs = Vec::Constant(dim, coeffs[0]);
      if (coeffs.size() != dim) throw std::invalid_argument("joint drag coefficient count");
      const Mat d = joint_drag_tensor(coeffs);
      model.drag = [d](const Vec&) { return d; };
      model.drag_partials = [dim](const Vec&) {
        return std::vector<Mat>(dim, Mat::Zero(dim, dim));
      };
      if (coeffs.isZero(0.0)) model.drag_kind = DragKind::none;
      break;
    }
    case DragKind::endpoint: {
      if (!model.chain) throw std::invalid_argument("endpoint drag needs a kinematic chain");
      const KinematicChain chain = *model.chain;
      const double c = drag.endpoint_coeff;
      const MechModel* self = nullptr;
      (void)self;
      const Vec tail = model.frozen_tail;
      auto pad = [tail](const Vec& q) {
        Vec full(q.size() + tail.size());
        full << q, tail;
        return full;
      };
      model.drag = [chain, c, pad, dim](const Vec& q) {
        return Mat(endpoint_drag_tensor(chain, pad(q), c).topLeftCorner(dim, dim));
      };
      model.drag_partials = [chain, c, pad, dim](const Vec& q) {
        auto full = endpoint_drag_partials(chain, pad(q), c);
        std::vector<Mat> out(dim);
        for (int m = 0; m < dim; ++m) out[m] = full[m].topLeftCorner(dim, dim);
        return out;
      };
      if (c == 0.0) model.drag_kind = DragKind::none;
      break;
    }
  }
}

}  // namespace

KinematicChain two_link_chain(const TwoLinkParams& p) {
  KinematicChain chain;
  Joint j0;
  Joint j1;
  j1.pre.translate(Vec3(p.l1, 0, 0));
  chain.joints = {j0, j1};
  LinkBody b1{p.m1, Vec3(p.com1, 0, 0), Vec3(0, p.rot_inertia1, p.rot_inertia1).asDiagonal()};
  LinkBody b2{p.m2, Vec3(p.com2, 0, 0), Vec3(0, p.rot_inertia2, p.rot_inertia2).asDiagonal()};
  chain.links = {b1, b2};
  chain.link_lengths = {p.l1, p.l2};
  chain.end_offset = Vec3(p.l2, 0, 0);
  chain.gravity_accel = p.gravity_accel;
  chain.gravity_dir = -Vec3::UnitY();
  chain.planar = true;
  chain.validate();
  return chain;
}

MechModel two_link_model(const TwoLinkParams& params, bool gravity, const DragConfig& drag) {
  MechModel model;
  model.name = "two_link";
  model.dim = 2;
  model.chain = two_link_chain(params);
  model.frozen_tail = Vec();
  model.inertia = chain_inertia_field(*model.chain, 2, Vec());
  model.gravity_on = gravity;
  model.potential = gravity ? chain_potential_field(*model.chain, 2, Vec()) : ScalarField::zero();
  model.actuation_cometric = Mat::Identity(2, 2);
  attach_drag(model, drag);
  return model;
}

MechModel ur5_model(const Ur5Params& params, const Vec3& fixed_wrist, bool gravity,
                    const DragConfig& drag) {
  if (!fixed_wrist.allFinite()) throw std::invalid_argument("wrist values must be finite");
  MechModel model;
  model.name = "ur5";
  model.dim = 3;
  model.chain = ur5_chain(params);
  model.frozen_tail = Vec(3);
  model.frozen_tail << fixed_wrist.x(), fixed_wrist.y(), fixed_wrist.z();
  model.inertia = chain_inertia_field(*model.chain, 3, model.frozen_tail);
  model.gravity_on = gravity;
  model.potential =
      gravity ? chain_potential_field(*model.chain, 3, model.frozen_tail) : ScalarField::zero();
  model.actuation_cometric = Mat::Identity(3, 3);
  attach_drag(model, drag);
  return model;
}

MechModel ur5_model_default(const Vec3& fixed_wrist, bool gravity, const DragConfig& drag) {
  return ur5_model(parse_ur5_params(ur5_params_text()), fixed_wrist, gravity, drag);
}

MechModel flat_model(int dim, const DragConfig& drag) {
  MechModel model;
  model.name = "flat";
  model.dim = dim;
  model.inertia = MetricField::identity(dim);
  model.potential = ScalarField::zero();
  model.gravity_on = false;
  model.actuation_cometric = Mat::Identity(dim, dim);
  attach_drag(model, drag);
  return model;
}

}  // namespace riemspline
