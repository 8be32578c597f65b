#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ihgen/hand_model.hpp"
#include "ihgen/pose_synthesis.hpp"

namespace ihgen {

nlohmann::json pose_to_json(const HandPose& pose);
HandPose pose_from_json(const nlohmann::json& j);

struct StoredPosePair {
  PosePair pair;
  int seed_id = 0;
  int aug_index = 0;
};

nlohmann::json pose_pair_to_json(const StoredPosePair& entry);
StoredPosePair pose_pair_from_json(const nlohmann::json& j);

// The "ihgen-poses/1" document: seeds, initial poses, optimized poses and
// the filtered library all share this format.
void save_pose_library(const std::string& path,
                       const std::vector<StoredPosePair>& entries);
std::vector<StoredPosePair> load_pose_library(const std::string& path);

}  // namespace ihgen
