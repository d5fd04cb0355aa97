#include <doctest.h>

#include <random>

#include "riemspline/fd.hpp"
#include "riemspline/models.hpp"
#include "test_util.hpp"

using namespace riemspline;
using namespace rstest;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

/// Independent homogeneous-transform stack for the UR5 oracle: plain 4x4
/// matrix products Rz(q) * Tz(d) * Tx(a) * Rx(alpha), nothing shared with the
/// production forward kinematics.
Eigen::Matrix4d dh_step(double q, double d, double a, double alpha) {
  const double cq = std::cos(q), sq = std::sin(q);
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  Eigen::Matrix4d t;
  t << cq, -sq * ca, sq * sa, a * cq,
       sq, cq * ca, -cq * sa, a * sq,
       0.0, sa, ca, d,
       0.0, 0.0, 0.0, 1.0;
  return t;
}

Vec3 ur5_end_oracle(const Ur5Params& params, const Vec& q6) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  for (int k = 0; k < 6; ++k)
    t *= dh_step(q6[k], params.links[k].d, params.links[k].a, params.links[k].alpha);
  return t.block<3, 1>(0, 3);
}

}  // namespace

TEST_CASE("forward kinematics: two-link geometry") {
  const KinematicChain chain = two_link_chain(TwoLinkParams{});
  const FkResult straight = forward_kinematics(chain, vec2(0, 0));
  CHECK((straight.end - Vec3(2, 0, 0)).norm() < 1e-14);
  CHECK(straight.task_position.size() == 2);

  const FkResult bent = forward_kinematics(chain, vec2(M_PI / 2, -M_PI / 2));
  CHECK((bent.end - Vec3(1, 1, 0)).norm() < 1e-14);

  CHECK_THROWS_AS((void)forward_kinematics(chain, Vec::Zero(3)), std::invalid_argument);
}

TEST_CASE("forward kinematics: UR5 against an independent transform stack") {
  const Ur5Params params = parse_ur5_params(ur5_params_text());
  const KinematicChain chain = ur5_chain(params);
  Vec q(6);
  q << 0.1, 0.1, M_PI / 2, 0.1, 0.1, 0.1;
  const FkResult fk = forward_kinematics(chain, q);
  CHECK((fk.end - ur5_end_oracle(params, q)).norm() < 1e-12);

  std::mt19937 rng(8001);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec qr = random_vec(rng, 6, 2.0);
    CHECK((forward_kinematics(chain, qr).end - ur5_end_oracle(params, qr)).norm() < 1e-12);
  }
}

TEST_CASE("link jacobians: analytic rows and finite-difference check") {
  const KinematicChain chain = two_link_chain(TwoLinkParams{});
  const LinkJacobians jac = link_jacobians(chain, vec2(0, 0));
  // analytic differentiation of (cos q1 + cos(q1+q2), sin q1 + sin(q1+q2))
  CHECK(jac.end_linear(0, 0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(jac.end_linear(0, 1) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(jac.end_linear(1, 0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(jac.end_linear(1, 1) == doctest::Approx(1.0).epsilon(1e-14));

  // column distal to the link is zero
  CHECK(jac.linear[0].col(1).norm() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(jac.angular[0].col(1).norm() == doctest::Approx(0.0).epsilon(1e-14));

  // finite difference of forward kinematics matches the end rows
  std::mt19937 rng(8002);
  const Ur5Params params = parse_ur5_params(ur5_params_text());
  const KinematicChain ur5 = ur5_chain(params);
  for (const KinematicChain* c : {&chain, &ur5}) {
    const int n = c->joint_count();
    const Vec q = random_vec(rng, n, 1.5);
    const LinkJacobians j = link_jacobians(*c, q);
    for (int col = 0; col < n; ++col) {
      const Vec fd_col = fd::partial(
          [&](const Vec& p) { return forward_kinematics(*c, p).task_position; }, q, col);
      CHECK((j.end_linear.col(col) - fd_col).norm() < 1e-6);
    }
  }
}

TEST_CASE("mass matrix: closed-form planar-2R oracle") {
  const TwoLinkParams params{};
  const KinematicChain chain = two_link_chain(params);

  // frozen spot value at q2 = 0
  Mat expected(2, 2);
  expected << 8.0 / 3.0, 5.0 / 6.0, 5.0 / 6.0, 1.0 / 3.0;
  CHECK((mass_matrix(chain, vec2(0.7, 0.0)) - expected).cwiseAbs().maxCoeff() < 1e-12);

  // textbook expression on a q2 grid, any base angle
  std::mt19937 rng(8003);
  std::uniform_real_distribution<double> angle(-M_PI, M_PI);
  for (int i = 0; i <= 40; ++i) {
    const double q2 = -M_PI + 2 * M_PI * i / 40.0;
    const Vec q = vec2(angle(rng), q2);
    CHECK((mass_matrix(chain, q) - planar2r_mass(params, q2)).cwiseAbs().maxCoeff() < 1e-10);
    // base-joint invariance and cosine evenness
    CHECK((mass_matrix(chain, vec2(0.0, q2)) - mass_matrix(chain, q)).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK((mass_matrix(chain, vec2(q[0], -q2)) - mass_matrix(chain, q)).cwiseAbs().maxCoeff() <
          1e-12);
  }
}

TEST_CASE("pullback inertia: kinetic energy matches direct link twists") {
  std::mt19937 rng(8004);
  const Ur5Params params = parse_ur5_params(ur5_params_text());
  const KinematicChain ur5 = ur5_chain(params);
  const KinematicChain two = two_link_chain(TwoLinkParams{});
  for (const KinematicChain* chain : {&two, &ur5}) {
    const int n = chain->joint_count();
    for (int trial = 0; trial < 50; ++trial) {
      const Vec q = random_vec(rng, n, 2.0);
      const Vec qdot = random_vec(rng, n, 1.5);
      const double ke_metric = 0.5 * qdot.dot(mass_matrix(*chain, q) * qdot);

      // independent: com velocities and body angular rates from FD of FK
      const double h = 1e-6;
      auto fk_at = [&](double t) { return forward_kinematics(*chain, Vec(q + t * qdot)); };
      const FkResult fp = fk_at(h), fm = fk_at(-h), f0 = fk_at(0.0);
      double ke_direct = 0.0;
      for (int k = 0; k < n; ++k) {
        const Vec3 v = (fp.com[k] - fm.com[k]) / (2 * h);
        const Mat3 rdot = (fp.link_rot[k] - fm.link_rot[k]) / (2 * h);
        const Mat3 wx = rdot * f0.link_rot[k].transpose();
        const Vec3 omega(wx(2, 1), wx(0, 2), wx(1, 0));
        const Mat3 inertia_world =
            f0.link_rot[k] * chain->links[k].rot_inertia * f0.link_rot[k].transpose();
        ke_direct += 0.5 * chain->links[k].mass * v.squaredNorm() +
                     0.5 * omega.dot(inertia_world * omega);
      }
      CHECK(std::abs(ke_metric - ke_direct) < 1e-9 * std::max(1.0, std::abs(ke_metric)));
    }
  }
}

TEST_CASE("mass matrix partials: analytic vs finite differences") {
  std::mt19937 rng(8005);
  const Ur5Params params = parse_ur5_params(ur5_params_text());
  const KinematicChain ur5 = ur5_chain(params);
  const KinematicChain two = two_link_chain(TwoLinkParams{});
  for (const KinematicChain* chain : {&two, &ur5}) {
    const int n = chain->joint_count();
    const Vec q = random_vec(rng, n, 1.5);
    const auto dg = mass_matrix_partials(*chain, q);
    const auto d2g = mass_matrix_second_partials(*chain, q);
    for (int m = 0; m < n; ++m) {
      const Mat fd1 = fd::partial([&](const Vec& p) { return mass_matrix(*chain, p); }, q, m);
      CHECK((dg[m] - fd1).cwiseAbs().maxCoeff() < 1e-8);
      for (int p = 0; p < n; ++p) {
        const Mat fd2 = fd::partial(
            [&](const Vec& pp) { return mass_matrix_partials(*chain, pp)[m]; }, q, p);
        CHECK((d2g[m][p] - fd2).cwiseAbs().maxCoeff() < 1e-7);
      }
    }
  }
}

TEST_CASE("potential energy: datum, hand values, equilibrium, gravity covector") {
  const TwoLinkParams params{};
  const KinematicChain chain = two_link_chain(params);

  CHECK(potential_energy(chain, vec2(0, 0)) == doctest::Approx(0.0).epsilon(1e-14));
  // arm hanging straight down: heights -0.5 and -1.5
  CHECK(potential_energy(chain, vec2(-M_PI / 2, 0)) == doctest::Approx(-19.62).epsilon(1e-12));
  // upright equilibrium
  CHECK(potential_gradient(chain, vec2(M_PI / 2, 0)).norm() < 1e-12);

  std::mt19937 rng(8006);
  const Ur5Params up = parse_ur5_params(ur5_params_text());
  const KinematicChain ur5 = ur5_chain(up);
  for (const KinematicChain* c : {&chain, &ur5}) {
    const int n = c->joint_count();
    for (int trial = 0; trial < 20; ++trial) {
      const Vec q = random_vec(rng, n, 2.0);
      // closed-form oracle for the two-link
      if (c == &chain)
        CHECK(potential_energy(*c, q) ==
              doctest::Approx(planar2r_potential(params, q)).epsilon(1e-12));
      // gravity covector: -dV equals the summed per-link torques J^T (m g dir)
      const LinkJacobians jac = link_jacobians(*c, q);
      Vec torque = Vec::Zero(n);
      for (int k = 0; k < n; ++k)
        torque += jac.linear[k].transpose() *
                  (c->links[k].mass * c->gravity_accel * c->gravity_dir);
      CHECK((torque + potential_gradient(*c, q)).norm() < 1e-6);
      // Hessian consistency with FD of the gradient
      const Mat hess = potential_hessian(*c, q);
      for (int m = 0; m < n; ++m) {
        const Vec fdg = fd::partial([&](const Vec& p) { return potential_gradient(*c, p); }, q, m);
        CHECK((hess.col(m) - fdg).norm() < 1e-7);
      }
    }
  }
  // two-link closed-form gradient
  const Vec q = vec2(0.8, -1.9);
  CHECK((potential_gradient(chain, q) - planar2r_gravity_grad(params, q)).norm() < 1e-12);
}

TEST_CASE("drag tensors: joint and endpoint") {
  CHECK((joint_drag_tensor(vec2(0.5, 0.5)) - 0.5 * Mat::Identity(2, 2)).norm() < 1e-15);
  CHECK(joint_drag_tensor(vec2(0, 0)).norm() == 0.0);
  const Mat d12 = joint_drag_tensor(vec2(1, 2));
  CHECK((d12 * vec2(1, 1) - vec2(1, 2)).norm() < 1e-15);
  CHECK_THROWS_AS((void)joint_drag_tensor(vec2(-1, 1)), std::invalid_argument);

  const KinematicChain chain = two_link_chain(TwoLinkParams{});
  Mat expected(2, 2);
  expected << 4, 2, 2, 1;  // J^T J with rows ((0,0),(2,1))
  CHECK((endpoint_drag_tensor(chain, vec2(0, 0), 1.0) - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(endpoint_drag_tensor(chain, vec2(0.3, 0.7), 0.0).norm() == 0.0);

  std::mt19937 rng(8007);
  for (int trial = 0; trial < 30; ++trial) {
    const Vec q = random_vec(rng, 2, M_PI);
    const Mat d = endpoint_drag_tensor(chain, q, 0.8);
    CHECK((d - d.transpose()).norm() < 1e-14);
    Eigen::SelfAdjointEigenSolver<Mat> es(d);
    CHECK(es.eigenvalues()(0) > -1e-12);
    // analytic partials against FD
    const auto dd = endpoint_drag_partials(chain, q, 0.8);
    for (int m = 0; m < 2; ++m) {
      const Mat fdd = fd::partial(
          [&](const Vec& p) { return endpoint_drag_tensor(chain, p, 0.8); }, q, m);
      CHECK((dd[m] - fdd).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("two_link_model: assembled fields and toggles") {
  const MechModel model = two_link_model(TwoLinkParams{}, true, joint_drag({0.5, 0.5}));
  Mat expected(2, 2);
  expected << 8.0 / 3.0, 5.0 / 6.0, 5.0 / 6.0, 1.0 / 3.0;
  CHECK((model.inertia.eval(vec2(1.1, 0.0)) - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(model.actuation_cometric.isIdentity(1e-14));
  CHECK(model.gravity_on);
  CHECK(model.has_drag());

  const MechModel nograv = two_link_model(TwoLinkParams{}, false, DragConfig{});
  std::mt19937 rng(8008);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec q = random_vec(rng, 2, M_PI);
    CHECK(nograv.potential.eval(q) == 0.0);
    CHECK(nograv.potential.grad_at(q).norm() == 0.0);
    CHECK(nograv.drag(q).norm() == 0.0);
  }
  CHECK(!nograv.has_external_force());

  CHECK_THROWS_AS((void)two_link_model(TwoLinkParams{-1.0}, true, DragConfig{}),
                  std::invalid_argument);
}

TEST_CASE("ur5_model: frozen wrist restriction") {
  const Ur5Params params = parse_ur5_params(ur5_params_text());
  const Vec3 wrist(0.1, 0.1, 0.1);
  const MechModel model = ur5_model(params, wrist, true, joint_drag({1, 1, 1}));
  CHECK(model.dim == 3);

  Vec q(3);
  q << 0.1, 0.1, M_PI / 2;
  const Mat g = model.inertia.eval(q);
  CHECK((g - g.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  Eigen::SelfAdjointEigenSolver<Mat> es(g);
  CHECK(es.eigenvalues()(0) > 0.0);

  // restriction equals the top-left block of the full 6x6 matrix
  const KinematicChain full = ur5_chain(params);
  Vec q6(6);
  q6 << q[0], q[1], q[2], 0.1, 0.1, 0.1;
  CHECK((g - mass_matrix(full, q6).topLeftCorner(3, 3)).cwiseAbs().maxCoeff() < 1e-12);

  // potential difference equals the kinematic height change
  std::mt19937 rng(8009);
  for (int trial = 0; trial < 10; ++trial) {
    const Vec qa = random_vec(rng, 3, 1.5), qb = random_vec(rng, 3, 1.5);
    const double dv = model.potential.eval(qa) - model.potential.eval(qb);
    Vec qa6(6), qb6(6);
    qa6 << qa, 0.1, 0.1, 0.1;
    qb6 << qb, 0.1, 0.1, 0.1;
    const FkResult fa = forward_kinematics(full, qa6), fb = forward_kinematics(full, qb6);
    double dh = 0.0;
    for (int k = 0; k < 6; ++k)
      dh += full.links[k].mass * full.gravity_accel * (fa.com[k].z() - fb.com[k].z());
    CHECK(dv == doctest::Approx(dh).epsilon(1e-9));
  }

  // different wrist values keep the invariants intact
  const MechModel other = ur5_model(params, Vec3(0.5, -0.2, 0.9), true, DragConfig{});
  const Mat g2 = other.inertia.eval(q);
  CHECK((g2 - g2.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  Eigen::SelfAdjointEigenSolver<Mat> es2(g2);
  CHECK(es2.eigenvalues()(0) > 0.0);
  CHECK(std::abs(other.potential.eval(q) - model.potential.eval(q)) > 1e-6);
}

TEST_CASE("ur5 parameter file: schema errors") {
  CHECK_THROWS_AS((void)parse_ur5_params("links = 1\n"), ParseError);
  auto message_of = [](const std::string& text) {
    try {
      (void)parse_ur5_params(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  const std::string missing_mass =
      "links = 1\ngravity = 9.81\n[link 1]\na = 0\nd = 0.1\nalpha = 0\ncom = [0,0,0]\n"
      "inertia = [1e-3,1e-3,1e-3]\n";
  CHECK(message_of(missing_mass).find("missing entry 'mass'") != std::string::npos);
  const std::string missing_gravity =
      "links = 1\n[link 1]\na = 0\nd = 0.1\nalpha = 0\nmass = 1\ncom = [0,0,0]\n"
      "inertia = [1e-3,1e-3,1e-3]\n";
  CHECK(message_of(missing_gravity).find("missing entry 'gravity'") != std::string::npos);

  // the shipped file parses to the same chain as the embedded copy
  const Ur5Params embedded = parse_ur5_params(ur5_params_text());
  CHECK(embedded.links.size() == 6);
  CHECK(embedded.links[1].mass == doctest::Approx(8.393));
}
