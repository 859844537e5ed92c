#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <random>
#include <stdexcept>

namespace modsat {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Unit quaternion (scalar part w, vector part v) describing the body frame
/// relative to the target frame.
struct Quaternion {
  double w = 1.0;
  Vec3 v = Vec3::Zero();

  static Quaternion identity() { return {}; }
  static Quaternion from_axis_angle(const Vec3& axis, double angle);

  double norm() const;
  Quaternion normalized() const;
  Quaternion conjugate() const { return {w, -v}; }
  /// Rotation angle in [0, 2*pi].
  double angle() const;
  Mat3 to_rotation_matrix() const;

  Quaternion operator*(const Quaternion& rhs) const;
};

struct QuatRate {
  double w = 0.0;
  Vec3 v = Vec3::Zero();
};

struct AttitudeState {
  Quaternion q;
  Vec3 omega = Vec3::Zero();
};

struct TorqueInput {
  Vec3 control = Vec3::Zero();
  Vec3 disturbance = Vec3::Zero();
};

class DynamicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Mat3 cross_matrix(const Vec3& v);

/// Norm-preserving quaternion kinematics:
///   dq0/dt = -1/2 qv . w,   dqv/dt = 1/2 (qv^x + q0 E) w.
QuatRate quat_derivative(const Quaternion& q, const Vec3& omega);

/// Euler's equation for a diagonal inertia: I^-1 (Mc + Md - w x (I w)).
Vec3 omega_derivative(const Vec3& inertia, const Vec3& omega, const Vec3& control,
                      const Vec3& disturbance);

/// One classical RK4 step of the coupled (q, omega) system.
AttitudeState step(const AttitudeState& state, const Vec3& inertia, const TorqueInput& torque,
                   double dt, bool renormalize = true);

/// conj(target) * q, sign-flipped so the scalar part is non-negative.
Quaternion quat_error(const Quaternion& q, const Quaternion& target);

/// Attitude error angle 2*acos(q_e0) in radians, in [0, pi].
double error_angle(const Quaternion& q_error);

/// Random slew target: axis uniform on the sphere, angle uniform in
/// [min_deg, max_deg].
Quaternion sample_target(std::mt19937_64& rng, double min_deg = 30.0, double max_deg = 150.0);

}  // namespace modsat
