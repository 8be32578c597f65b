#include "ihgen/scene_sampler.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "ihgen/errors.hpp"
#include "ihgen/pose_io.hpp"

namespace ihgen {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;

nlohmann::json vec3_list(const std::vector<Vec3>& pts) {
  nlohmann::json out = nlohmann::json::array();
  for (const Vec3& p : pts) out.push_back({p.x(), p.y(), p.z()});
  return out;
}

std::vector<Vec3> vec3_list_from(const nlohmann::json& j) {
  std::vector<Vec3> out;
  for (const auto& p : j)
    out.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(),
                     p.at(2).get<double>());
  return out;
}

}  // namespace

std::vector<CameraParams> build_rig(const Vec3& center, const RigConfig& cfg) {
  if (!(cfg.radius > 0.0)) throw ConfigError("rig radius must be positive");
  if (cfg.tracks < 1 || cfg.views_per_track < 1)
    throw ConfigError("rig needs at least one track and one view");
  if (static_cast<int>(cfg.elevations_deg.size()) < cfg.tracks)
    throw ConfigError("rig elevation list shorter than track count");

  std::vector<CameraParams> cameras;
  cameras.reserve(cfg.tracks * cfg.views_per_track);
  for (int t = 0; t < cfg.tracks; ++t) {
    const double elev = cfg.elevations_deg[t] * kDeg;
    for (int a = 0; a < cfg.views_per_track; ++a) {
      const double azim = 2.0 * std::numbers::pi * a / cfg.views_per_track;
      const Vec3 dir(std::cos(elev) * std::cos(azim),
                     std::cos(elev) * std::sin(azim), std::sin(elev));
      const Vec3 position = center + cfg.radius * dir;

      CameraParams cam;
      cam.fx = cfg.fx;
      cam.fy = cfg.fy;
      cam.width = cfg.width;
      cam.height = cfg.height;
      cam.cx = cfg.width / 2.0;
      cam.cy = cfg.height / 2.0;

      const Vec3 forward = (center - position).normalized();
      Vec3 up = Vec3::UnitZ();
      if (std::abs(forward.dot(up)) > 0.999) up = Vec3::UnitX();
      const Vec3 x_cam = forward.cross(up).normalized();
      const Vec3 y_cam = forward.cross(x_cam);
      cam.rotation.row(0) = x_cam;
      cam.rotation.row(1) = y_cam;
      cam.rotation.row(2) = forward;
      cam.translation = -(cam.rotation * position);
      cameras.push_back(cam);
    }
  }
  return cameras;
}

Projected project(const Vec3& p_world, const CameraParams& cam) {
  const Vec3 pc = cam.to_camera(p_world);
  Projected out;
  out.depth = pc.z();
  out.in_front = pc.z() > 0.0;
  out.u = cam.fx * pc.x() / pc.z() + cam.cx;
  out.v = cam.fy * pc.y() / pc.z() + cam.cy;
  return out;
}

namespace {

nlohmann::json camera_to_json(const CameraParams& cam) {
  nlohmann::json j;
  j["fx"] = cam.fx;
  j["fy"] = cam.fy;
  j["cx"] = cam.cx;
  j["cy"] = cam.cy;
  j["width"] = cam.width;
  j["height"] = cam.height;
  std::vector<double> r(9);
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 3; ++c) r[i * 3 + c] = cam.rotation(i, c);
  j["rotation"] = r;
  j["translation"] = {cam.translation.x(), cam.translation.y(),
                      cam.translation.z()};
  return j;
}

CameraParams camera_from_json(const nlohmann::json& j) {
  CameraParams cam;
  cam.fx = j.at("fx").get<double>();
  cam.fy = j.at("fy").get<double>();
  cam.cx = j.at("cx").get<double>();
  cam.cy = j.at("cy").get<double>();
  cam.width = j.at("width").get<int>();
  cam.height = j.at("height").get<int>();
  const auto r = j.at("rotation").get<std::vector<double>>();
  for (int i = 0; i < 3; ++i)
    for (int c = 0; c < 3; ++c) cam.rotation(i, c) = r[i * 3 + c];
  const auto& t = j.at("translation");
  cam.translation = Vec3(t.at(0).get<double>(), t.at(1).get<double>(),
                         t.at(2).get<double>());
  return cam;
}

nlohmann::json px_list(const std::vector<Eigen::Vector2d>& pts) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : pts) out.push_back({p.x(), p.y()});
  return out;
}

std::vector<Eigen::Vector2d> px_list_from(const nlohmann::json& j) {
  std::vector<Eigen::Vector2d> out;
  for (const auto& p : j)
    out.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  return out;
}

}  // namespace

ExportSummary export_annotations(
    const std::vector<std::pair<PosePair, std::pair<int, int>>>& library,
    const HandModel& right_model, const HandModel& left_model,
    const RigConfig& rig, CameraSelection selection,
    const std::string& out_dir) {
  if (library.empty())
    throw ConfigError("cannot export annotations from an empty pose library");

  namespace fs = std::filesystem;
  const fs::path dir = fs::path(out_dir) / "annotations";
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create annotation directory: " + dir.string());

  ExportSummary summary;
  for (size_t idx = 0; idx < library.size(); ++idx) {
    const PosePair& pair = library[idx].first;

    const auto jr = joint_positions(right_model,
                                    forward_kinematics(right_model, pair.right));
    const auto jl =
        joint_positions(left_model, forward_kinematics(left_model, pair.left));
    std::vector<Vec3> joints_r(jr.begin(), jr.end());
    std::vector<Vec3> joints_l(jl.begin(), jl.end());

    // rig centered on the two-hand midpoint
    Vec3 center = Vec3::Zero();
    for (const Vec3& p : joints_r) center += p;
    for (const Vec3& p : joints_l) center += p;
    center /= static_cast<double>(joints_r.size() + joints_l.size());

    const std::vector<CameraParams> cameras = build_rig(center, rig);

    std::vector<int> selected;
    if (selection == CameraSelection::kFull) {
      selected.resize(cameras.size());
      for (size_t c = 0; c < cameras.size(); ++c) selected[c] = static_cast<int>(c);
    } else {
      // one camera per azimuth slot, cycling through the tracks
      for (int a = 0; a < rig.views_per_track; ++a)
        selected.push_back((a % rig.tracks) * rig.views_per_track + a);
    }

    nlohmann::json doc;
    doc["schema"] = "ihgen-annotations/1";
    StoredPosePair stored{pair, library[idx].second.first,
                          library[idx].second.second};
    doc["pose"] = pose_pair_to_json(stored);
    doc["joints3d_world_m"] = {{"right", vec3_list(joints_r)},
                               {"left", vec3_list(joints_l)}};
    doc["views"] = nlohmann::json::array();
    for (int cam_index : selected) {
      const CameraParams& cam = cameras[cam_index];
      nlohmann::json view;
      view["camera_index"] = cam_index;
      view["camera"] = camera_to_json(cam);
      std::vector<Vec3> cam_r, cam_l;
      std::vector<Eigen::Vector2d> px_r, px_l;
      for (const Vec3& p : joints_r) {
        cam_r.push_back(cam.to_camera(p));
        const Projected pr = project(p, cam);
        px_r.emplace_back(pr.u, pr.v);
      }
      for (const Vec3& p : joints_l) {
        cam_l.push_back(cam.to_camera(p));
        const Projected pr = project(p, cam);
        px_l.emplace_back(pr.u, pr.v);
      }
      view["joints3d_cam_m"] = {{"right", vec3_list(cam_r)},
                                {"left", vec3_list(cam_l)}};
      view["joints2d_px"] = {{"right", px_list(px_r)}, {"left", px_list(px_l)}};
      doc["views"].push_back(std::move(view));
      ++summary.record_count;
    }

    char name[64];
    std::snprintf(name, sizeof(name), "pose_%05zu.json", idx);
    const fs::path file = dir / name;
    std::ofstream out(file);
    if (!out) throw IoError("cannot write annotation file: " + file.string());
    out << doc.dump(2) << "\n";
    summary.files.push_back(std::string("annotations/") + name);
    ++summary.pose_count;
  }
  return summary;
}

std::vector<AnnotationRecord> read_annotation_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open annotation file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed annotation file " + path + ": " + e.what());
  }
  if (doc.value("schema", "") != "ihgen-annotations/1")
    throw IoError("unsupported annotation schema in " + path);

  AnnotationRecord record;
  const StoredPosePair stored = pose_pair_from_json(doc.at("pose"));
  record.pose = stored.pair;
  record.seed_id = stored.seed_id;
  record.aug_index = stored.aug_index;
  record.joints_world_right =
      vec3_list_from(doc.at("joints3d_world_m").at("right"));
  record.joints_world_left =
      vec3_list_from(doc.at("joints3d_world_m").at("left"));
  for (const auto& vj : doc.at("views")) {
    AnnotationView view;
    view.camera_index = vj.at("camera_index").get<int>();
    view.camera = camera_from_json(vj.at("camera"));
    view.joints_cam_right = vec3_list_from(vj.at("joints3d_cam_m").at("right"));
    view.joints_cam_left = vec3_list_from(vj.at("joints3d_cam_m").at("left"));
    view.joints_px_right = px_list_from(vj.at("joints2d_px").at("right"));
    view.joints_px_left = px_list_from(vj.at("joints2d_px").at("left"));
    record.views.push_back(std::move(view));
  }
  return {record};
}

double reprojection_error_px(const AnnotationRecord& record) {
  double worst = 0.0;
  for (const AnnotationView& view : record.views) {
    auto check = [&](const std::vector<Vec3>& cam_pts,
                     const std::vector<Eigen::Vector2d>& px) {
      for (size_t i = 0; i < cam_pts.size(); ++i) {
        const Vec3& p = cam_pts[i];
        const double u = view.camera.fx * p.x() / p.z() + view.camera.cx;
        const double v = view.camera.fy * p.y() / p.z() + view.camera.cy;
        worst = std::max(worst, std::abs(u - px[i].x()));
        worst = std::max(worst, std::abs(v - px[i].y()));
      }
    };
    check(view.joints_cam_right, view.joints_px_right);
    check(view.joints_cam_left, view.joints_px_left);
  }
  return worst;
}

}  // namespace ihgen
