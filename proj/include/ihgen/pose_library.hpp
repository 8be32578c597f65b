#pragma once

#include <vector>

#include "ihgen/discriminator.hpp"
#include "ihgen/hand_model.hpp"
#include "ihgen/pose_synthesis.hpp"
#include "ihgen/rng.hpp"

namespace ihgen {

// Hand-authored single-hand articulations (right-hand convention, all within
// the anatomic limits): canonical grips and gestures plus blends between
// them. Used as the natural base poses for discriminator training.
const std::vector<Eigen::Matrix<double, kPoseDim, 1>>& natural_gesture_library();

// Built-in two-hand seed configurations in near contact. The left hand is
// translated along each seed's approach axis until the surface gap reaches a
// few millimeters, so the attraction machinery always has anchors in range.
std::vector<PosePair> builtin_seed_pairs(const HandModel& right_model,
                                         const HandModel& left_model);

// Cycles the built-in seed pairs to the requested count.
std::vector<PosePair> expand_seed_pairs(const std::vector<PosePair>& base,
                                        int count);

// Natural corpus: library gestures under small jitter, labeled 1.
std::vector<TrainSample> make_natural_corpus(int count, const JointLimits& limits,
                                             RngStream& rng);

// Perturbed corpus: library gestures under augmentation-scale offsets,
// labeled by label_probability of the offsets that survive clamping.
std::vector<TrainSample> make_perturbed_corpus(int count,
                                               const JointLimits& limits,
                                               const AugmentationConfig& cfg,
                                               RngStream& rng);

// Signed surface gap between two posed hands: separation distance when
// apart, minus the deepest vertex penetration when overlapping.
double pair_surface_gap(const PartitionedMesh& right,
                        const PartitionedMesh& left);

}  // namespace ihgen
