/*
 * Copyright 2026 The Forge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Calibrated camera space and the primitive 3D measurements built on it.
//
// Conventions:
//   camera frame      x right, y down, z forward (optical axis)
//   world frame       z up, ground plane at z = 0
//   calibrated frame  x right, y forward (optical axis projected on the
//                     ground), z up; origin on the ground below the camera
//
// Distances are meters, angles degrees.

#include <string>
#include <string_view>

#include <Eigen/Core>

namespace forge {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr std::string_view kCalibratedConvention = "x-right,y-forward,z-up";

/// Direction with Euclidean norm 1 (within 1e-9).
class UnitVec3 {
 public:
  /// Normalizes `v`; throws InvalidDirection for zero or non-finite input.
  static UnitVec3 normalize(const Vec3& v);

  /// Accepts `v` as-is after checking that it is already unit-norm.
  static UnitVec3 from_unit(const Vec3& v);

  const Vec3& vec() const noexcept { return v_; }
  double x() const noexcept { return v_.x(); }
  double y() const noexcept { return v_.y(); }
  double z() const noexcept { return v_.z(); }

  UnitVec3 operator-() const { return UnitVec3(-v_); }
  friend bool operator==(const UnitVec3& a, const UnitVec3& b) { return a.v_ == b.v_; }

 private:
  explicit UnitVec3(Vec3 v) : v_(std::move(v)) {}
  Vec3 v_;
};

/// Camera pose: rotation maps camera-frame vectors into the world frame,
/// position is the optical center in world coordinates.
class CameraExtrinsics {
 public:
  /// Throws InvalidExtrinsics unless `rotation` is orthonormal with
  /// determinant +1 (within 1e-9) and `position` is finite.
  CameraExtrinsics(const Mat3& rotation, const Vec3& position);

  /// Builds a pose from yaw (counter-clockwise about world up), pitch
  /// (positive tilts the optical axis down) and roll (about the optical axis).
  /// All-zero angles give the level camera looking along world +y.
  static CameraExtrinsics from_angles(double yaw_deg, double pitch_deg, double roll_deg,
                                      const Vec3& position);

  const Mat3& rotation() const noexcept { return rotation_; }
  const Vec3& position() const noexcept { return position_; }
  double height() const noexcept { return position_.z(); }

  friend bool operator==(const CameraExtrinsics& a, const CameraExtrinsics& b) {
    return a.rotation_ == b.rotation_ && a.position_ == b.position_;
  }

 private:
  Mat3 rotation_;
  Vec3 position_;
};

struct CalibratedFrame {
  Vec3 camera_position;
  UnitVec3 forward;
  std::string convention{kCalibratedConvention};

  friend bool operator==(const CalibratedFrame& a, const CalibratedFrame& b) {
    return a.camera_position == b.camera_position && a.forward == b.forward &&
           a.convention == b.convention;
  }
};

/// The calibrated frame induced by `extr`: camera at (0, 0, h), forward +y.
/// Throws InvalidExtrinsics when the optical axis is vertical.
CalibratedFrame calibrated_frame(const CameraExtrinsics& extr);

/// Throws InvalidDirection when `frame.forward` is not horizontal.
void validate_frame(const CalibratedFrame& frame);

Vec3 calibrate_point(const Vec3& camera_point, const CameraExtrinsics& extr);
UnitVec3 calibrate_direction(const Vec3& camera_direction, const CameraExtrinsics& extr);

/// Inverse of calibrate_direction.
Vec3 uncalibrate_direction(const UnitVec3& calibrated, const CameraExtrinsics& extr);

double distance(const Vec3& p, const Vec3& q);

/// Angle between two directions, degrees in [0, 180].
double angular_difference(const UnitVec3& a, const UnitVec3& b);

inline double height_of(const Vec3& calibrated_point) { return calibrated_point.z(); }

double camera_distance(const Vec3& p, const CalibratedFrame& frame);

double horizontal_distance(const Vec3& p, const Vec3& q);

/// Signed angle in (-180, 180] between the frame's forward direction and the
/// ground-projected ray from the camera to `p`; positive to the viewer's right.
/// Throws DegenerateGeometry when `p` is directly above or below the camera.
double horizontal_bearing(const CalibratedFrame& frame, const Vec3& p);

void require_finite(const Vec3& v, std::string_view what);

// Canonical 2-decimal text used in questions and reasoning traces.
double round2(double value);
std::string format_fixed2(double value);
/// "[x, y, z]" with 2 decimals per component.
std::string format_vec(const Vec3& v);

double deg_to_rad(double deg);
double rad_to_deg(double rad);

}  // namespace forge
