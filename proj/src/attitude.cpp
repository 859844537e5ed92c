#include "modsat/attitude.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace modsat {

Quaternion Quaternion::from_axis_angle(const Vec3& axis, double angle) {
  const Vec3 e = axis.normalized();
  return {std::cos(angle / 2.0), e * std::sin(angle / 2.0)};
}

double Quaternion::norm() const { return std::sqrt(w * w + v.squaredNorm()); }

Quaternion Quaternion::normalized() const {
  const double n = norm();
  return {w / n, v / n};
}

double Quaternion::angle() const { return 2.0 * std::acos(std::clamp(w, -1.0, 1.0)); }

Mat3 Quaternion::to_rotation_matrix() const {
  const Mat3 vx = cross_matrix(v);
  return (w * w - v.squaredNorm()) * Mat3::Identity() + 2.0 * v * v.transpose() + 2.0 * w * vx;
}

Quaternion Quaternion::operator*(const Quaternion& rhs) const {
  return {w * rhs.w - v.dot(rhs.v), w * rhs.v + rhs.w * v + v.cross(rhs.v)};
}

Mat3 cross_matrix(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

QuatRate quat_derivative(const Quaternion& q, const Vec3& omega) {
  return {-0.5 * q.v.dot(omega), 0.5 * (cross_matrix(q.v) + q.w * Mat3::Identity()) * omega};
}

Vec3 omega_derivative(const Vec3& inertia, const Vec3& omega, const Vec3& control,
                      const Vec3& disturbance) {
  if ((inertia.array() <= 0.0).any()) throw DynamicsError("nonpositive inertia entry");
  const Vec3 h = inertia.cwiseProduct(omega);
  return (control + disturbance - omega.cross(h)).cwiseQuotient(inertia);
}

namespace {

struct Derivative {
  QuatRate q;
  Vec3 omega;
};

Derivative derivative(const AttitudeState& s, const Vec3& inertia, const TorqueInput& torque) {
  return {quat_derivative(s.q, s.omega),
          omega_derivative(inertia, s.omega, torque.control, torque.disturbance)};
}

AttitudeState advance(const AttitudeState& s, const Derivative& d, double h) {
  return {{s.q.w + h * d.q.w, s.q.v + h * d.q.v}, s.omega + h * d.omega};
}

}  // namespace

AttitudeState step(const AttitudeState& state, const Vec3& inertia, const TorqueInput& torque,
                   double dt, bool renormalize) {
  if (!(dt > 0.0)) throw DynamicsError("dt must be positive");
  const Derivative k1 = derivative(state, inertia, torque);
  const Derivative k2 = derivative(advance(state, k1, dt / 2.0), inertia, torque);
  const Derivative k3 = derivative(advance(state, k2, dt / 2.0), inertia, torque);
  const Derivative k4 = derivative(advance(state, k3, dt), inertia, torque);

  AttitudeState next;
  next.q.w = state.q.w + dt / 6.0 * (k1.q.w + 2.0 * k2.q.w + 2.0 * k3.q.w + k4.q.w);
  next.q.v = state.q.v + dt / 6.0 * (k1.q.v + 2.0 * k2.q.v + 2.0 * k3.q.v + k4.q.v);
  next.omega = state.omega + dt / 6.0 * (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega);

  if (!std::isfinite(next.q.w) || !next.q.v.allFinite() || !next.omega.allFinite()) {
    throw DynamicsError("dynamics diverged");
  }
  if (renormalize) next.q = next.q.normalized();
  return next;
}

Quaternion quat_error(const Quaternion& q, const Quaternion& target) {
  Quaternion e = target.conjugate() * q;
  if (e.w < 0.0) e = {-e.w, -e.v};
  return e;
}

double error_angle(const Quaternion& q_error) {
  return 2.0 * std::atan2(q_error.v.norm(), std::abs(q_error.w));
}

Quaternion sample_target(std::mt19937_64& rng, double min_deg, double max_deg) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec3 axis;
  do {
    axis = {normal(rng), normal(rng), normal(rng)};
  } while (axis.norm() < 1e-12);
  std::uniform_real_distribution<double> angle(min_deg, max_deg);
  return Quaternion::from_axis_angle(axis, angle(rng) * std::numbers::pi / 180.0);
}

}  // namespace modsat
