#include "ihgen/pose_io.hpp"

#include <fstream>

#include "ihgen/errors.hpp"

namespace ihgen {

nlohmann::json pose_to_json(const HandPose& pose) {
  nlohmann::json j;
  j["side"] = side_name(pose.side);
  std::vector<double> theta(kPoseDim);
  for (int i = 0; i < kNumFingerJoints; ++i)
    for (int a = 0; a < 3; ++a) theta[i * 3 + a] = pose.theta(i, a);
  j["theta"] = theta;
  j["root_rotation"] = {pose.root_rotation.w(), pose.root_rotation.x(),
                        pose.root_rotation.y(), pose.root_rotation.z()};
  j["root_translation"] = {pose.root_translation.x(), pose.root_translation.y(),
                           pose.root_translation.z()};
  return j;
}

HandPose pose_from_json(const nlohmann::json& j) {
  HandPose pose;
  pose.side = j.at("side").get<std::string>() == "left" ? Side::kLeft
                                                        : Side::kRight;
  const auto theta = j.at("theta").get<std::vector<double>>();
  if (theta.size() != kPoseDim)
    throw IoError("pose theta must have 45 entries");
  for (int i = 0; i < kNumFingerJoints; ++i)
    for (int a = 0; a < 3; ++a) pose.theta(i, a) = theta[i * 3 + a];
  const auto& q = j.at("root_rotation");
  pose.root_rotation = Eigen::Quaterniond(
      q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>(),
      q.at(3).get<double>());
  const auto& t = j.at("root_translation");
  pose.root_translation = Vec3(t.at(0).get<double>(), t.at(1).get<double>(),
                               t.at(2).get<double>());
  return pose;
}

nlohmann::json pose_pair_to_json(const StoredPosePair& entry) {
  nlohmann::json j;
  j["right"] = pose_to_json(entry.pair.right);
  j["left"] = pose_to_json(entry.pair.left);
  j["provenance"] = {{"seed", entry.seed_id}, {"aug", entry.aug_index}};
  return j;
}

StoredPosePair pose_pair_from_json(const nlohmann::json& j) {
  StoredPosePair entry;
  entry.pair.right = pose_from_json(j.at("right"));
  entry.pair.left = pose_from_json(j.at("left"));
  if (j.contains("provenance")) {
    entry.seed_id = j["provenance"].value("seed", 0);
    entry.aug_index = j["provenance"].value("aug", 0);
  }
  return entry;
}

void save_pose_library(const std::string& path,
                       const std::vector<StoredPosePair>& entries) {
  nlohmann::json j;
  j["schema"] = "ihgen-poses/1";
  j["poses"] = nlohmann::json::array();
  for (const auto& e : entries) j["poses"].push_back(pose_pair_to_json(e));
  std::ofstream out(path);
  if (!out) throw IoError("cannot write pose library: " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("short write to pose library: " + path);
}

std::vector<StoredPosePair> load_pose_library(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pose library: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed pose library " + path + ": " + e.what());
  }
  if (j.value("schema", "") != "ihgen-poses/1")
    throw IoError("unsupported pose library schema in " + path);
  std::vector<StoredPosePair> out;
  for (const auto& node : j.at("poses")) out.push_back(pose_pair_from_json(node));
  return out;
}

}  // namespace ihgen
