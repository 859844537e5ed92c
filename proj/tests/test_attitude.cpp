#include "modsat/attitude.hpp"

#include "doctest.h"

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace modsat;

namespace {

Quaternion random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Quaternion q{n(rng), Vec3(n(rng), n(rng), n(rng))};
  return q.normalized();
}

// Relative rotation angle from rotation matrices: acos((tr(R_t^T R) - 1) / 2).
double matrix_angle(const Quaternion& q, const Quaternion& target) {
  const Mat3 rel = target.to_rotation_matrix().transpose() * q.to_rotation_matrix();
  const double c = std::clamp((rel.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

AttitudeState integrate(AttitudeState s, const Vec3& I, double dt, double horizon) {
  const int n = static_cast<int>(std::lround(horizon / dt));
  for (int i = 0; i < n; ++i) s = step(s, I, {}, dt, false);
  return s;
}

double state_error(const AttitudeState& a, const AttitudeState& b) {
  Eigen::Matrix<double, 7, 1> d;
  d << a.q.w - b.q.w, a.q.v - b.q.v, a.omega - b.omega;
  return d.norm();
}

}  // namespace

TEST_CASE("cross matrix") {
  CHECK(cross_matrix(Vec3::Zero()).isZero());
  Mat3 expected;
  expected << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  CHECK(cross_matrix(Vec3(1, 2, 3)) == expected);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  for (int t = 0; t < 10; ++t) {
    const Vec3 v(n(rng), n(rng), n(rng));
    CHECK((cross_matrix(v) * v).norm() < 1e-14);
  }
}

TEST_CASE("quaternion kinematics") {
  const QuatRate zero = quat_derivative(Quaternion::identity(), Vec3::Zero());
  CHECK(zero.w == 0.0);
  CHECK(zero.v.isZero());
  const QuatRate r = quat_derivative(Quaternion::identity(), Vec3(0.2, 0, 0));
  CHECK(r.w == doctest::Approx(0.0));
  CHECK(r.v.x() == doctest::Approx(0.1));
  CHECK(r.v.y() == doctest::Approx(0.0));
  CHECK(r.v.z() == doctest::Approx(0.0));

  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  for (int t = 0; t < 20; ++t) {
    const Quaternion q = random_unit(rng);
    const Vec3 w(n(rng), n(rng), n(rng));
    const QuatRate d = quat_derivative(q, w);
    CHECK(std::abs(2 * q.w * d.w + 2 * q.v.dot(d.v)) < 1e-14);
  }
}

TEST_CASE("kinematics agree with the Hamilton product form") {
  // dq/dt = 1/2 q (x) (0, w) for body rates.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (int t = 0; t < 10; ++t) {
    const Quaternion q = random_unit(rng);
    const Vec3 w(n(rng), n(rng), n(rng));
    const Quaternion p = q * Quaternion{0.0, w};
    const QuatRate d = quat_derivative(q, w);
    CHECK(d.w == doctest::Approx(0.5 * p.w));
    CHECK((d.v - 0.5 * p.v).norm() < 1e-14);
  }
}

TEST_CASE("Euler equation") {
  const Vec3 I600 = Vec3::Constant(1.0 / 600.0);
  const Vec3 a = omega_derivative(I600, Vec3::Zero(), Vec3(0.001, 0, 0), Vec3::Zero());
  CHECK(a.x() == doctest::Approx(0.6));
  CHECK(a.y() == 0.0);
  CHECK(a.z() == 0.0);

  const Vec3 spin = omega_derivative(Vec3(1, 2, 3), Vec3(0.7, 0, 0), Vec3::Zero(), Vec3::Zero());
  CHECK(spin.isZero());

  // Component form of I^-1 (-w x I w) for diagonal I.
  const Vec3 I(1, 2, 3), w(0.1, 0.2, 0.3);
  const Vec3 oracle((I.y() - I.z()) * w.y() * w.z() / I.x(), (I.z() - I.x()) * w.z() * w.x() / I.y(),
                    (I.x() - I.y()) * w.x() * w.y() / I.z());
  const Vec3 got = omega_derivative(I, w, Vec3::Zero(), Vec3::Zero());
  CHECK((got - oracle).norm() < 1e-15);
  CHECK(got.x() == doctest::Approx(-0.06));
  CHECK(got.y() == doctest::Approx(0.03));
  CHECK(got.z() == doctest::Approx(-0.02 / 3.0));

  const Vec3 dist = omega_derivative(I600, Vec3::Zero(), Vec3::Zero(), Vec3(0, 0.002, 0));
  CHECK(dist.y() == doctest::Approx(1.2));
  CHECK_THROWS_AS(omega_derivative(Vec3(1, 0, 1), w, Vec3::Zero(), Vec3::Zero()), DynamicsError);
}

TEST_CASE("equilibrium is an exact fixed point") {
  const AttitudeState s0;
  const AttitudeState s1 = step(s0, Vec3(1, 2, 3), {}, 0.01);
  CHECK(s1.q.w == 1.0);
  CHECK(s1.q.v.isZero());
  CHECK(s1.omega.isZero());
}

TEST_CASE("RK4 converges at fourth order") {
  AttitudeState s0;
  s0.q = Quaternion::from_axis_angle(Vec3(1, 1, 0).normalized(), 0.4);
  s0.omega = Vec3(0.8, -0.5, 0.6);
  const Vec3 I(1.0, 2.0, 3.0);
  const double T = 4.0;
  const AttitudeState ref = integrate(s0, I, 0.001, T);
  const double e1 = state_error(integrate(s0, I, 0.1, T), ref);
  const double e2 = state_error(integrate(s0, I, 0.05, T), ref);
  const double ratio = e1 / e2;
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("constant torque about a principal axis") {
  const Vec3 I = Vec3::Constant(0.5);
  AttitudeState s;
  TorqueInput u;
  u.control = Vec3(0.1, 0, 0);
  for (int i = 0; i < 100; ++i) s = step(s, I, u, 0.01);
  // omega = a t, angle = a t^2 / 2 with a = 0.2 rad/s^2 over 1 s.
  CHECK(s.omega.x() == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(s.q.angle() == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(s.q.v.x() > 0.0);
}

TEST_CASE("divergence is reported") {
  AttitudeState s;
  s.omega = Vec3(std::nan(""), 0, 0);
  CHECK_THROWS_WITH_AS(step(s, Vec3(1, 1, 1), {}, 0.01), "dynamics diverged", DynamicsError);
}

TEST_CASE("error quaternion") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 50; ++t) {
    const Quaternion q = random_unit(rng);
    const Quaternion target = random_unit(rng);
    const Quaternion self = quat_error(q, q);
    CHECK(self.w == doctest::Approx(1.0));
    CHECK(self.v.norm() < 1e-12);
    const Quaternion same = quat_error(q, Quaternion::identity());
    const double sign = q.w >= 0 ? 1.0 : -1.0;
    CHECK(same.w == doctest::Approx(sign * q.w));
    CHECK((same.v - sign * q.v).norm() < 1e-15);
    const Quaternion e = quat_error(q, target);
    CHECK(e.w >= 0.0);
    CHECK(std::abs(error_angle(e) - matrix_angle(q, target)) < 1e-9);
  }
}

TEST_CASE("target sampling") {
  std::mt19937_64 rng(13);
  const int n = 100000;
  double sum = 0.0;
  Vec3 axis_mean = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    const Quaternion q = sample_target(rng);
    const double deg = q.angle() * 180.0 / M_PI;
    REQUIRE(std::abs(q.norm() - 1.0) < 1e-12);
    REQUIRE(deg >= 30.0 - 1e-9);
    REQUIRE(deg <= 150.0 + 1e-9);
    sum += deg;
    axis_mean += q.v.normalized();
  }
  CHECK(std::abs(sum / n - 90.0) < 1.0);
  CHECK((axis_mean / n).norm() < 0.02);
}
