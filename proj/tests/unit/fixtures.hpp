#pragma once

#include "imitation/pose/skeleton.hpp"
#include "imitation/store/registry.hpp"

#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>
#include <utility>

namespace fixtures {

using imitation::pose::Joint;
using imitation::pose::Skeleton;

struct Placed {
  Joint joint;
  double x;
  double y;
};

inline Skeleton skeleton(std::initializer_list<Placed> joints, double confidence = 0.9) {
  Skeleton s;
  for (const auto& p : joints) s.set(p.joint, p.x, p.y, confidence);
  return s;
}

// Upright trunk: neck (200,100), shoulders 30 px either side, hips at y=200,
// nose 20 px above the neck, eyes beside it.
inline Skeleton trunk() {
  return skeleton({{Joint::Nose, 200, 80},
                   {Joint::Neck, 200, 100},
                   {Joint::RShoulder, 170, 100},
                   {Joint::LShoulder, 230, 100},
                   {Joint::RHip, 185, 200},
                   {Joint::LHip, 215, 200},
                   {Joint::REye, 195, 75},
                   {Joint::LEye, 205, 75}});
}

inline Skeleton with_arms(Skeleton s, double rex, double rey, double rwx, double rwy, double lex,
                          double ley, double lwx, double lwy) {
  s.set(Joint::RElbow, rex, rey, 0.9);
  s.set(Joint::RWrist, rwx, rwy, 0.9);
  s.set(Joint::LElbow, lex, ley, 0.9);
  s.set(Joint::LWrist, lwx, lwy, 0.9);
  return s;
}

inline Skeleton t_pose() { return with_arms(trunk(), 140, 100, 110, 100, 260, 100, 290, 100); }
inline Skeleton arms_down() { return with_arms(trunk(), 170, 150, 170, 200, 230, 150, 230, 200); }
inline Skeleton arms_up() { return with_arms(trunk(), 170, 50, 170, 0, 230, 50, 230, 0); }

inline Skeleton with_legs(Skeleton s) {
  s.set(Joint::RKnee, 185, 280, 0.9);
  s.set(Joint::RAnkle, 185, 360, 0.9);
  s.set(Joint::LKnee, 215, 280, 0.9);
  s.set(Joint::LAnkle, 215, 360, 0.9);
  s.set(Joint::REar, 190, 80, 0.9);
  s.set(Joint::LEar, 210, 80, 0.9);
  return s;
}

// Random skeleton with coordinates on a 1/1024 px grid and random visibility.
inline Skeleton random_skeleton(std::mt19937_64& rng, double visible_probability = 0.85) {
  std::uniform_int_distribution<int> coord(0, 640 * 1024);
  std::bernoulli_distribution shown(visible_probability);
  Skeleton s;
  for (int j = 0; j < imitation::pose::kJointCount; ++j) {
    const bool on = shown(rng);
    s.set(static_cast<Joint>(j), coord(rng) / 1024.0, coord(rng) / 1024.0, on ? 0.8 : 0.0);
  }
  return s;
}

inline imitation::store::ParticipantProfile profile(const std::string& id) {
  if (id == "F") return {"F", 18, 9, 33, false, ""};
  if (id == "G") return {"G", 14, 4, 46, false, ""};
  if (id == "H") return {"H", 13, 5, 38, false, ""};
  if (id == "I") return {"I", 12, 0.5, 47, false, ""};
  return {id, 10, 5, 35, false, ""};
}

inline imitation::store::ParticipantRegistry registry() {
  imitation::store::ParticipantRegistry r;
  for (const char* id : {"F", "G", "H", "I"}) r.register_participant(profile(id));
  return r;
}

// Fresh, empty directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("imitation-test-" + std::to_string(rd()) + "-" + std::to_string(++counter));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path source_dir() { return IMITATION_SOURCE_DIR; }

}  // namespace fixtures
