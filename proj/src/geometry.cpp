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

#include "forge/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>
#include <fmt/format.h>

#include "forge/error.hpp"

namespace forge {
namespace {

constexpr double kUnitTolerance = 1e-9;
constexpr double kOrthoTolerance = 1e-9;
constexpr double kDegenerate = 1e-9;

bool finite(const Vec3& v) { return v.allFinite(); }

// Horizontal axes of the calibrated frame expressed in world coordinates.
struct GroundAxes {
  Eigen::Vector2d right;
  Eigen::Vector2d forward;
};

GroundAxes ground_axes(const CameraExtrinsics& extr) {
  const Vec3 optical = extr.rotation().col(2);
  Eigen::Vector2d fwd(optical.x(), optical.y());
  const double n = fwd.norm();
  if (n < kDegenerate) {
    throw InvalidExtrinsics("optical axis is vertical; ground-projected forward is undefined");
  }
  fwd /= n;
  return {Eigen::Vector2d(fwd.y(), -fwd.x()), fwd};
}

Vec3 to_calibrated(const Vec3& world_vec, const GroundAxes& axes) {
  const Eigen::Vector2d h(world_vec.x(), world_vec.y());
  return {axes.right.dot(h), axes.forward.dot(h), world_vec.z()};
}

}  // namespace

UnitVec3 UnitVec3::normalize(const Vec3& v) {
  if (!finite(v)) throw InvalidDirection("direction has non-finite components");
  const double n = v.norm();
  if (n < kDegenerate) throw InvalidDirection("zero-norm direction");
  return UnitVec3(v / n);
}

UnitVec3 UnitVec3::from_unit(const Vec3& v) {
  if (!finite(v)) throw InvalidDirection("direction has non-finite components");
  if (std::abs(v.norm() - 1.0) > kUnitTolerance) {
    throw InvalidDirection("direction is not unit-norm (norm " + std::to_string(v.norm()) + ")");
  }
  return UnitVec3(v);
}

CameraExtrinsics::CameraExtrinsics(const Mat3& rotation, const Vec3& position)
    : rotation_(rotation), position_(position) {
  if (!rotation_.allFinite() || !position_.allFinite()) {
    throw InvalidExtrinsics("extrinsics contain non-finite values");
  }
  const double ortho_err = (rotation_.transpose() * rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > kOrthoTolerance) {
    throw InvalidExtrinsics("rotation is not orthonormal (max deviation " +
                            std::to_string(ortho_err) + ")");
  }
  if (std::abs(rotation_.determinant() - 1.0) > kOrthoTolerance) {
    throw InvalidExtrinsics("rotation determinant is not +1");
  }
}

CameraExtrinsics CameraExtrinsics::from_angles(double yaw_deg, double pitch_deg, double roll_deg,
                                               const Vec3& position) {
  // Level camera: x -> world x, y (down) -> world -z, z (forward) -> world +y.
  Mat3 level;
  level << 1, 0, 0,
           0, 0, 1,
           0, -1, 0;
  const double yaw = deg_to_rad(yaw_deg);
  const double pitch = deg_to_rad(pitch_deg);
  const double roll = deg_to_rad(roll_deg);
  // Pitch about camera x; positive sends the optical axis toward +y (down).
  const Mat3 pitch_m = Eigen::AngleAxisd(-pitch, Vec3::UnitX()).toRotationMatrix();
  const Mat3 roll_m = Eigen::AngleAxisd(roll, Vec3::UnitZ()).toRotationMatrix();
  const Mat3 yaw_m = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
  return CameraExtrinsics(yaw_m * level * pitch_m * roll_m, position);
}

CalibratedFrame calibrated_frame(const CameraExtrinsics& extr) {
  ground_axes(extr);  // rejects a vertical optical axis
  return CalibratedFrame{Vec3(0.0, 0.0, extr.height()), UnitVec3::from_unit(Vec3::UnitY()),
                         std::string(kCalibratedConvention)};
}

void validate_frame(const CalibratedFrame& frame) {
  require_finite(frame.camera_position, "camera_position");
  if (std::abs(frame.forward.z()) > kUnitTolerance) {
    throw InvalidDirection("calibrated forward must be horizontal");
  }
}

Vec3 calibrate_point(const Vec3& camera_point, const CameraExtrinsics& extr) {
  require_finite(camera_point, "point");
  const GroundAxes axes = ground_axes(extr);
  const Vec3 world = extr.rotation() * camera_point + extr.position();
  const Vec3 origin(extr.position().x(), extr.position().y(), 0.0);
  return to_calibrated(world - origin, axes);
}

UnitVec3 calibrate_direction(const Vec3& camera_direction, const CameraExtrinsics& extr) {
  const UnitVec3 d = UnitVec3::normalize(camera_direction);
  const GroundAxes axes = ground_axes(extr);
  return UnitVec3::normalize(to_calibrated(extr.rotation() * d.vec(), axes));
}

Vec3 uncalibrate_direction(const UnitVec3& calibrated, const CameraExtrinsics& extr) {
  const GroundAxes axes = ground_axes(extr);
  const Vec3 world(axes.right.x() * calibrated.x() + axes.forward.x() * calibrated.y(),
                   axes.right.y() * calibrated.x() + axes.forward.y() * calibrated.y(),
                   calibrated.z());
  return extr.rotation().transpose() * world;
}

double distance(const Vec3& p, const Vec3& q) {
  require_finite(p, "p");
  require_finite(q, "q");
  return (p - q).norm();
}

double angular_difference(const UnitVec3& a, const UnitVec3& b) {
  const double dot = std::clamp(a.vec().dot(b.vec()), -1.0, 1.0);
  return rad_to_deg(std::acos(dot));
}

double camera_distance(const Vec3& p, const CalibratedFrame& frame) {
  return distance(p, frame.camera_position);
}

double horizontal_distance(const Vec3& p, const Vec3& q) {
  require_finite(p, "p");
  require_finite(q, "q");
  return std::hypot(p.x() - q.x(), p.y() - q.y());
}

double horizontal_bearing(const CalibratedFrame& frame, const Vec3& p) {
  require_finite(p, "p");
  const double rx = p.x() - frame.camera_position.x();
  const double ry = p.y() - frame.camera_position.y();
  if (std::hypot(rx, ry) < kDegenerate) {
    throw DegenerateGeometry("point is vertically aligned with the camera; bearing undefined");
  }
  const double fx = frame.forward.x();
  const double fy = frame.forward.y();
  // right = forward x up
  const double along = rx * fx + ry * fy;
  const double across = rx * fy - ry * fx;
  double bearing = rad_to_deg(std::atan2(across, along));
  if (bearing <= -180.0) bearing += 360.0;
  return bearing;
}

void require_finite(const Vec3& v, std::string_view what) {
  if (!finite(v)) throw NonFiniteInput(std::string(what) + " has non-finite components");
}

double round2(double value) {
  const double r = std::round(value * 100.0) / 100.0;
  return r == 0.0 ? 0.0 : r;  // no "-0.00"
}

std::string format_fixed2(double value) { return fmt::format("{:.2f}", round2(value)); }

std::string format_vec(const Vec3& v) {
  return fmt::format("[{}, {}, {}]", format_fixed2(v.x()), format_fixed2(v.y()),
                     format_fixed2(v.z()));
}

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace forge
