#include "ihgen/pose_synthesis.hpp"

#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "ihgen/errors.hpp"

namespace ihgen {

namespace {
double deg(double d) { return d * std::numbers::pi / 180.0; }
}  // namespace

JointLimits JointLimits::defaults() {
  JointLimits l;
  // thumb
  l.set_bend(0, 0, -20, 40);
  l.set_bend(0, 1, -8, 50);
  l.set_bend(0, 2, -10, 100);
  l.set_splay(0, -30, 30);
  // index
  l.set_bend(1, 0, -25, 70);
  l.set_bend(1, 1, -4, 110);
  l.set_bend(1, 2, -8, 90);
  l.set_splay(1, -25, 15);
  // middle
  l.set_bend(2, 0, -25, 80);
  l.set_bend(2, 1, -7, 100);
  l.set_bend(2, 2, -8, 90);
  l.set_splay(2, -15, 15);
  // ring
  l.set_bend(3, 0, -25, 70);
  l.set_bend(3, 1, -10, 100);
  l.set_bend(3, 2, -8, 90);
  l.set_splay(3, -25, 15);
  // pinky
  l.set_bend(4, 0, -22, 70);
  l.set_bend(4, 1, -8, 90);
  l.set_bend(4, 2, -8, 90);
  l.set_splay(4, -20, 30);
  return l;
}

void JointLimits::set_bend(int finger, int level, double lo_deg,
                           double hi_deg) {
  bend_[finger][level] = {deg(lo_deg), deg(hi_deg)};
}

void JointLimits::set_splay(int finger, double lo_deg, double hi_deg) {
  splay_[finger] = {deg(lo_deg), deg(hi_deg)};
}

void JointLimits::validate() const {
  for (int f = 0; f < kNumFingers; ++f) {
    for (int level = 0; level < 3; ++level) {
      const AngleRange& b = bend_[f][level];
      if (b.lo > b.hi || !b.contains(0.0))
        throw ConfigError("malformed joint limits: bend range of finger " +
                          std::to_string(f) + " level " + std::to_string(level));
    }
    const AngleRange& s = splay_[f];
    if (s.lo > s.hi || !s.contains(0.0))
      throw ConfigError("malformed joint limits: splay range of finger " +
                        std::to_string(f));
  }
}

JointLimits JointLimits::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open limits file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed limits file: " + std::string(e.what()));
  }
  JointLimits l = defaults();
  static const char* kFingerNames[] = {"thumb", "index", "middle", "ring",
                                       "pinky"};
  try {
    for (int f = 0; f < kNumFingers; ++f) {
      if (!j.contains(kFingerNames[f])) continue;
      const auto& fj = j[kFingerNames[f]];
      static const char* kLevelNames[] = {"root", "middle", "end"};
      for (int level = 0; level < 3; ++level)
        if (fj.contains(kLevelNames[level])) {
          const auto& r = fj[kLevelNames[level]];
          l.set_bend(f, level, r.at("bend").at(0).get<double>(),
                     r.at("bend").at(1).get<double>());
          if (level == 0 && r.contains("splay"))
            l.set_splay(f, r["splay"].at(0).get<double>(),
                        r["splay"].at(1).get<double>());
        }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed limits file: " + std::string(e.what()));
  }
  l.validate();
  return l;
}

void AugmentationConfig::validate() const {
  if (count < 1) throw ConfigError("augmentation count must be >= 1");
  if (bend_offset.lo > bend_offset.hi || splay_offset.lo > splay_offset.hi)
    throw ConfigError("augmentation offset range inverted");
}

HandPose clamp_pose(const HandPose& pose, const JointLimits& limits) {
  HandPose out = pose;
  for (int f = 0; f < kNumFingers; ++f)
    for (int level = 0; level < 3; ++level) {
      const int tj = theta_index(f, level);
      for (int a = 0; a < 3; ++a)
        out.theta(tj, a) = limits.range(f, level, a).clamp(pose.theta(tj, a));
    }
  return out;
}

std::vector<PosePair> augment_pose(const PosePair& seed,
                                   const AugmentationConfig& cfg,
                                   const JointLimits& limits, RngStream& rng) {
  cfg.validate();
  limits.validate();

  std::vector<PosePair> out;
  out.reserve(cfg.count);
  for (int i = 0; i < cfg.count; ++i) {
    PosePair pair = seed;
    for (HandPose* hand : {&pair.right, &pair.left}) {
      for (int f = 0; f < kNumFingers; ++f)
        for (int level = 0; level < 3; ++level) {
          const int tj = theta_index(f, level);
          hand->theta(tj, kBend) +=
              rng.uniform(cfg.bend_offset.lo, cfg.bend_offset.hi);
          if (level == 0)
            hand->theta(tj, kSplay) +=
                rng.uniform(cfg.splay_offset.lo, cfg.splay_offset.hi);
        }
      *hand = clamp_pose(*hand, limits);
    }
    out.push_back(pair);
  }
  return out;
}

}  // namespace ihgen
