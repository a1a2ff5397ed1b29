#pragma once

#include "imitation/pose/skeleton.hpp"

namespace imitation::pose {

// Planar articulated body used to render analytic poses. Lengths are in
// torso units (neck to mid-hip = 1).
struct BodyProportions {
  double shoulder_half_width = 0.25;
  double hip_half_width = 0.15;
  double upper_arm = 0.55;
  double forearm = 0.50;
  double thigh = 0.85;
  double shin = 0.80;
  double nose_height = 0.30;
};

struct ArmPose {
  // Upper-arm direction measured from the torso-down axis; positive swings
  // away from the body, so |swing| is the shoulder elevation.
  double swing = 0.0;
  double elbow = 3.141592653589793;  // interior angle, pi = straight
  // Out-of-plane angle toward the camera; projected bone lengths scale by cos(depth).
  double depth = 0.0;
};

struct BodyPose {
  ArmPose right;
  ArmPose left;
  double bend = 0.0;  // upper-body lean about the mid-hip, radians, positive toward image right
};

struct Placement {
  Point mid_hip = Point(320.0, 300.0);
  double torso_px = 120.0;
  double confidence = 0.9;
};

BodyPose neutral_pose();
BodyPose lerp(const BodyPose& a, const BodyPose& b, double t);

// Person faces the camera: their right side appears at smaller image x.
Skeleton render(const BodyPose& pose, const Placement& placement = {},
                const BodyProportions& body = {});

}  // namespace imitation::pose
