#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ihgen/hand_model.hpp"
#include "ihgen/pose_synthesis.hpp"

namespace ihgen {

struct CameraParams {
  double fx = 500.0, fy = 500.0;
  double cx = 256.0, cy = 167.0;
  int width = 512, height = 334;
  Mat3 rotation = Mat3::Identity();  // world-to-camera
  Vec3 translation = Vec3::Zero();

  Vec3 to_camera(const Vec3& p_world) const {
    return rotation * p_world + translation;
  }
};

struct RigConfig {
  double radius = 0.6;  // meters
  int tracks = 4;
  int views_per_track = 10;
  std::vector<double> elevations_deg = {-45.0, -15.0, 15.0, 45.0};
  double fx = 500.0, fy = 500.0;
  int width = 512, height = 334;
};

// Spherical rig: `tracks` circular tracks at the configured elevations, each
// with views_per_track azimuths uniformly covering 360 degrees, every camera
// aimed at `center`. Track-major ordering: camera t*views_per_track + a.
std::vector<CameraParams> build_rig(const Vec3& center, const RigConfig& cfg);

struct Projected {
  double u = 0.0, v = 0.0;
  double depth = 0.0;
  bool in_front = false;
};

Projected project(const Vec3& p_world, const CameraParams& cam);

// Ground truth for one pose pair under one camera.
struct AnnotationView {
  int camera_index = 0;
  CameraParams camera;
  std::vector<Vec3> joints_cam_right;  // 21, camera coordinates, meters
  std::vector<Vec3> joints_cam_left;
  std::vector<Eigen::Vector2d> joints_px_right;  // 21, pixels
  std::vector<Eigen::Vector2d> joints_px_left;
};

struct AnnotationRecord {
  PosePair pose;
  int seed_id = 0;
  int aug_index = 0;
  std::vector<Vec3> joints_world_right;  // 21, world, meters
  std::vector<Vec3> joints_world_left;
  std::vector<AnnotationView> views;
};

enum class CameraSelection { kSparse, kFull };  // 10 of the rig vs all 40

struct ExportSummary {
  int pose_count = 0;
  int record_count = 0;  // pose x camera
  std::vector<std::string> files;
};

// One JSON document per pose pair under out_dir/annotations, containing all
// selected cameras for that pose. Sparse selection takes one camera per
// azimuth slot, cycling through the tracks. Throws ConfigError for an empty
// library and IoError for unwritable paths; nothing is written on error.
ExportSummary export_annotations(
    const std::vector<std::pair<PosePair, std::pair<int, int>>>& library,
    const HandModel& right_model, const HandModel& left_model,
    const RigConfig& rig, CameraSelection selection,
    const std::string& out_dir);

std::vector<AnnotationRecord> read_annotation_file(const std::string& path);

// Largest |stored 2D - reprojected 3D| over every joint of the record, px.
double reprojection_error_px(const AnnotationRecord& record);

}  // namespace ihgen
