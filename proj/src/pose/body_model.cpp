#include "imitation/pose/body_model.hpp"

#include <cmath>

namespace imitation::pose {

namespace {

Point arm_direction(const ArmPose& arm, const Point& down, const Point& outward) {
  return std::cos(arm.swing) * down + std::sin(arm.swing) * outward;
}

// Unit vector perpendicular to `along`, leaning toward `hint` when possible.
Point perpendicular_toward(const Point& along, const Point& hint) {
  Point n = hint - hint.dot(along) * along;
  if (n.norm() < 1e-9) n = Point(-along.y(), along.x());
  return n.normalized();
}

void render_arm(Skeleton& s, const ArmPose& arm, Joint shoulder, Joint elbow, Joint wrist,
                const Point& shoulder_px, const Point& down, const Point& outward,
                double torso_px, double confidence, const BodyProportions& body) {
  const double foreshortening = std::cos(arm.depth);
  const Point a = arm_direction(arm, down, outward);
  const Point n = perpendicular_toward(a, -outward - down);
  const double bend = 3.141592653589793 - arm.elbow;
  const Point f = std::cos(bend) * a + std::sin(bend) * n;
  const Point e = shoulder_px + torso_px * body.upper_arm * foreshortening * a;
  const Point w = e + torso_px * body.forearm * foreshortening * f;
  s.set(shoulder, shoulder_px, confidence);
  s.set(elbow, e, confidence);
  s.set(wrist, w, confidence);
}

}  // namespace

BodyPose neutral_pose() {
  BodyPose p;
  p.right = {0.12, 2.9, 0.0};
  p.left = {0.12, 2.9, 0.0};
  return p;
}

BodyPose lerp(const BodyPose& a, const BodyPose& b, double t) {
  auto mix = [t](double x, double y) { return x + (y - x) * t; };
  auto mix_arm = [&](const ArmPose& x, const ArmPose& y) {
    return ArmPose{mix(x.swing, y.swing), mix(x.elbow, y.elbow), mix(x.depth, y.depth)};
  };
  return {mix_arm(a.right, b.right), mix_arm(a.left, b.left), mix(a.bend, b.bend)};
}

Skeleton render(const BodyPose& pose, const Placement& place, const BodyProportions& body) {
  Skeleton s;
  const double L = place.torso_px;
  const double c = place.confidence;
  const Point up(std::sin(pose.bend), -std::cos(pose.bend));
  const Point down = -up;
  const Point across(std::cos(pose.bend), std::sin(pose.bend));  // toward the person's left
  const Point& hip = place.mid_hip;
  const Point neck = hip + L * up;

  s.set(Joint::Neck, neck, c);
  const Point nose = neck + L * body.nose_height * up;
  s.set(Joint::Nose, nose, c);
  s.set(Joint::REye, nose + L * (0.06 * up - 0.06 * across), c);
  s.set(Joint::LEye, nose + L * (0.06 * up + 0.06 * across), c);
  s.set(Joint::REar, neck + L * (0.25 * up - 0.12 * across), c);
  s.set(Joint::LEar, neck + L * (0.25 * up + 0.12 * across), c);

  render_arm(s, pose.right, Joint::RShoulder, Joint::RElbow, Joint::RWrist,
             neck - L * body.shoulder_half_width * across, down, -across, L, c, body);
  render_arm(s, pose.left, Joint::LShoulder, Joint::LElbow, Joint::LWrist,
             neck + L * body.shoulder_half_width * across, down, across, L, c, body);

  const Point image_down(0.0, 1.0);
  const Point r_hip = hip - Point(L * body.hip_half_width, 0.0);
  const Point l_hip = hip + Point(L * body.hip_half_width, 0.0);
  s.set(Joint::RHip, r_hip, c);
  s.set(Joint::LHip, l_hip, c);
  s.set(Joint::RKnee, r_hip + L * body.thigh * image_down, c);
  s.set(Joint::LKnee, l_hip + L * body.thigh * image_down, c);
  s.set(Joint::RAnkle, r_hip + L * (body.thigh + body.shin) * image_down, c);
  s.set(Joint::LAnkle, l_hip + L * (body.thigh + body.shin) * image_down, c);
  return s;
}

}  // namespace imitation::pose
