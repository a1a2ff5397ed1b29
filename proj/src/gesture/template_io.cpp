#include "imitation/gesture/template_io.hpp"

#include "imitation/error.hpp"

#include <fstream>

namespace imitation::gesture {

using nlohmann::json;

namespace {

ConstraintKind kind_from_name(const std::string& name) {
  for (const auto k : {ConstraintKind::Near, ConstraintKind::AtLeast, ConstraintKind::AtMost,
                       ConstraintKind::IsTrue, ConstraintKind::IsFalse}) {
    if (constraint_kind_name(k) == name) return k;
  }
  throw Error(Errc::InvalidTemplate, "unknown constraint kind '" + name + "'");
}

json arm_to_json(const pose::ArmPose& a) {
  return {{"swing", a.swing}, {"elbow", a.elbow}, {"depth", a.depth}};
}

pose::ArmPose arm_from_json(const json& j) {
  pose::ArmPose a;
  a.swing = j.value("swing", a.swing);
  a.elbow = j.value("elbow", a.elbow);
  a.depth = j.value("depth", a.depth);
  return a;
}

}  // namespace

json to_json(const pose::BodyPose& p) {
  return {{"bend", p.bend}, {"right", arm_to_json(p.right)}, {"left", arm_to_json(p.left)}};
}

pose::BodyPose body_pose_from_json(const json& j) {
  pose::BodyPose p;
  p.bend = j.value("bend", 0.0);
  if (j.contains("right")) p.right = arm_from_json(j.at("right"));
  if (j.contains("left")) p.left = arm_from_json(j.at("left"));
  return p;
}

json to_json(const GestureTemplate& t) {
  json keyframes = json::array();
  for (const auto& kf : t.keyframes) {
    json constraints = json::array();
    for (const auto& c : kf.constraints) {
      json jc = {{"feature", pose::feature_name(c.feature)},
                 {"kind", constraint_kind_name(c.kind)}};
      if (c.kind != ConstraintKind::IsTrue && c.kind != ConstraintKind::IsFalse) {
        jc["target"] = c.target;
      }
      if (c.kind == ConstraintKind::Near) jc["tolerance"] = c.tolerance;
      constraints.push_back(std::move(jc));
    }
    json limbs = json::array();
    for (const auto l : kf.required_limbs) limbs.push_back(scene::limb_name(l));
    json jk = {{"hold_ms", kf.hold_ms}, {"required_limbs", limbs}, {"constraints", constraints}};
    if (kf.exemplar) jk["exemplar"] = to_json(*kf.exemplar);
    keyframes.push_back(std::move(jk));
  }
  return {{"name", t.name}, {"timeout_ms", t.timeout_ms}, {"keyframes", keyframes}};
}

GestureTemplate template_from_json(const json& j) {
  GestureTemplate t;
  try {
    t.name = j.at("name").get<std::string>();
    t.timeout_ms = j.value("timeout_ms", t.timeout_ms);
    for (const auto& jk : j.at("keyframes")) {
      KeyframeSpec kf;
      kf.hold_ms = jk.value("hold_ms", kf.hold_ms);
      for (const auto& jl : jk.value("required_limbs", json::array())) {
        scene::Limb limb{};
        const auto name = jl.get<std::string>();
        if (!scene::limb_from_name(name, limb)) {
          throw Error(Errc::InvalidTemplate, "unknown limb '" + name + "'");
        }
        kf.required_limbs.push_back(limb);
      }
      for (const auto& jc : jk.at("constraints")) {
        Constraint c;
        const auto fname = jc.at("feature").get<std::string>();
        const auto feature = pose::feature_from_name(fname);
        if (!feature) throw Error(Errc::InvalidTemplate, "unknown feature '" + fname + "'");
        c.feature = *feature;
        c.kind = kind_from_name(jc.at("kind").get<std::string>());
        c.target = jc.value("target", c.kind == ConstraintKind::IsFalse ? 0.0 : 1.0);
        c.tolerance = jc.value("tolerance", c.tolerance);
        kf.constraints.push_back(c);
      }
      if (jk.contains("exemplar")) kf.exemplar = body_pose_from_json(jk.at("exemplar"));
      t.keyframes.push_back(std::move(kf));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidTemplate, e.what());
  }
  validate(t);
  return t;
}

std::vector<GestureTemplate> load_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidTemplate, path.string() + ": " + e.what());
  }
  std::vector<GestureTemplate> out;
  if (doc.contains("templates")) {
    for (const auto& jt : doc.at("templates")) out.push_back(template_from_json(jt));
  } else {
    out.push_back(template_from_json(doc));
  }
  return out;
}

}  // namespace imitation::gesture
