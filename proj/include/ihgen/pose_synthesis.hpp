#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "ihgen/hand_model.hpp"
#include "ihgen/rng.hpp"

namespace ihgen {

// Closed angle range [lo, hi] in radians.
struct AngleRange {
  double lo = 0.0;
  double hi = 0.0;
  double clamp(double x) const { return std::clamp(x, lo, hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

// Per-finger anatomic rotation limits. Bend is limited on every joint, splay
// only on root joints, twist is pinned to zero everywhere. Every range
// contains zero so the T-pose is always legal.
class JointLimits {
 public:
  static JointLimits defaults();
  static JointLimits from_json_file(const std::string& path);

  // axis ranges for finger joint (finger, level)
  AngleRange range(int finger, int level, int axis) const {
    if (axis == kBend) return bend_[finger][level];
    if (axis == kSplay) return level == 0 ? splay_[finger] : AngleRange{};
    return AngleRange{};  // twist
  }

  void set_bend(int finger, int level, double lo_deg, double hi_deg);
  void set_splay(int finger, double lo_deg, double hi_deg);

  // Throws ConfigError when a range is inverted or excludes zero.
  void validate() const;

 private:
  std::array<std::array<AngleRange, 3>, kNumFingers> bend_{};
  std::array<AngleRange, kNumFingers> splay_{};
};

struct AugmentationConfig {
  int count = 30;                      // poses generated per seed
  AngleRange bend_offset{-std::numbers::pi / 2.0, std::numbers::pi / 2.0};
  AngleRange splay_offset{-std::numbers::pi / 6.0, std::numbers::pi / 6.0};

  void validate() const;
};

struct PosePair {
  HandPose right;
  HandPose left;
};

// Random TSB offsets composed onto the seed pose in angle space, splay only
// on root joints, every resulting angle clamped into its limit range. Root
// rotation/translation are copied from the seed.
std::vector<PosePair> augment_pose(const PosePair& seed,
                                   const AugmentationConfig& cfg,
                                   const JointLimits& limits, RngStream& rng);

// Componentwise projection into the limit ranges; idempotent. Also restores
// the twist = 0 / non-root splay = 0 pose invariants.
HandPose clamp_pose(const HandPose& pose, const JointLimits& limits);

}  // namespace ihgen
