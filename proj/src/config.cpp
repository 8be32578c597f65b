#include "ihgen/config.hpp"

#include <fstream>
#include <numbers>

#include "ihgen/errors.hpp"

namespace ihgen {

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

void PipelineConfig::validate() const {
  augmentation.validate();
  schedule.validate();
  if (anchor_count < 1) throw ConfigError("anchors.count must be >= 1");
  if (!(spring_scale_m > 0.0))
    throw ConfigError("anchors.spring_scale_m must be positive");
  if (hop_exclusion < 0) throw ConfigError("anchors.hop_exclusion negative");
  if (disc_epochs < 1 || disc_batch_size < 1 || disc_natural_count < 1 ||
      disc_perturbed_count < 1 || !(disc_learning_rate > 0.0))
    throw ConfigError("discriminator training settings must be positive");
  if (!(rig.radius > 0.0)) throw ConfigError("rig.radius_m must be positive");
  if (!(penetration_tolerance_mm >= 0.0))
    throw ConfigError("filter.penetration_tolerance_mm negative");
  if (seed_count < 0) throw ConfigError("batch.seed_count negative");
  if (workers < 1) throw ConfigError("batch.workers must be >= 1");
}

PipelineConfig default_config() { return PipelineConfig{}; }

nlohmann::json config_to_json(const PipelineConfig& cfg) {
  nlohmann::json j;
  j["paths"] = {{"seeds", cfg.seeds_path},
                {"anchors", cfg.anchors_path},
                {"discriminator", cfg.discriminator_path},
                {"natural_corpus", cfg.natural_corpus_path},
                {"proportions", cfg.proportions_path},
                {"limits", cfg.limits_path},
                {"out", cfg.out_dir}};
  j["rng_seed"] = cfg.rng_seed;
  j["augmentation"] = {
      {"count", cfg.augmentation.count},
      {"bend_offset_deg",
       {cfg.augmentation.bend_offset.lo / kDeg, cfg.augmentation.bend_offset.hi / kDeg}},
      {"splay_offset_deg",
       {cfg.augmentation.splay_offset.lo / kDeg, cfg.augmentation.splay_offset.hi / kDeg}}};
  j["schedule"] = {{"total_iters", cfg.schedule.total_iters},
                   {"ramp_end", cfg.schedule.ramp_end},
                   {"rebuild_every", cfg.schedule.rebuild_every},
                   {"initial_lr", cfg.schedule.initial_lr},
                   {"plateau_patience", cfg.schedule.plateau_patience},
                   {"lr_decay", cfg.schedule.lr_decay},
                   {"w1_start", cfg.schedule.w1_start},
                   {"w1_end", cfg.schedule.w1_end},
                   {"w4_start", cfg.schedule.w4_start},
                   {"w4_end", cfg.schedule.w4_end},
                   {"w2", cfg.schedule.w2},
                   {"w3", cfg.schedule.w3}};
  j["sdf"] = {{"resolution", cfg.schedule.sdf_resolution},
              {"padding_cells", cfg.schedule.sdf_padding}};
  j["anchors"] = {{"count", cfg.anchor_count},
                  {"spring_scale_m", cfg.spring_scale_m},
                  {"hop_exclusion", cfg.hop_exclusion},
                  {"contact_threshold_m", cfg.contact_threshold_m},
                  {"corpus_limit", cfg.anchor_corpus_limit}};
  j["discriminator"] = {{"epochs", cfg.disc_epochs},
                        {"learning_rate", cfg.disc_learning_rate},
                        {"batch_size", cfg.disc_batch_size},
                        {"natural_count", cfg.disc_natural_count},
                        {"perturbed_count", cfg.disc_perturbed_count}};
  j["rig"] = {{"radius_m", cfg.rig.radius},
              {"tracks", cfg.rig.tracks},
              {"views_per_track", cfg.rig.views_per_track},
              {"elevations_deg", cfg.rig.elevations_deg},
              {"fx", cfg.rig.fx},
              {"fy", cfg.rig.fy},
              {"width", cfg.rig.width},
              {"height", cfg.rig.height},
              {"cameras",
               cfg.cameras == CameraSelection::kSparse ? "sparse" : "full"}};
  j["filter"] = {{"penetration_tolerance_mm", cfg.penetration_tolerance_mm}};
  j["batch"] = {{"seed_count", cfg.seed_count}, {"workers", cfg.workers}};
  return j;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }

  PipelineConfig cfg = default_config();
  try {
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      cfg.seeds_path = p.value("seeds", cfg.seeds_path);
      cfg.anchors_path = p.value("anchors", cfg.anchors_path);
      cfg.discriminator_path = p.value("discriminator", cfg.discriminator_path);
      cfg.natural_corpus_path =
          p.value("natural_corpus", cfg.natural_corpus_path);
      cfg.proportions_path = p.value("proportions", cfg.proportions_path);
      cfg.limits_path = p.value("limits", cfg.limits_path);
      cfg.out_dir = p.value("out", cfg.out_dir);
    }
    cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
    if (j.contains("augmentation")) {
      const auto& a = j["augmentation"];
      cfg.augmentation.count = a.value("count", cfg.augmentation.count);
      if (a.contains("bend_offset_deg"))
        cfg.augmentation.bend_offset = {a["bend_offset_deg"].at(0).get<double>() * kDeg,
                                        a["bend_offset_deg"].at(1).get<double>() * kDeg};
      if (a.contains("splay_offset_deg"))
        cfg.augmentation.splay_offset = {
            a["splay_offset_deg"].at(0).get<double>() * kDeg,
            a["splay_offset_deg"].at(1).get<double>() * kDeg};
    }
    if (j.contains("schedule")) {
      const auto& s = j["schedule"];
      Schedule& sc = cfg.schedule;
      sc.total_iters = s.value("total_iters", sc.total_iters);
      sc.ramp_end = s.value("ramp_end", sc.ramp_end);
      sc.rebuild_every = s.value("rebuild_every", sc.rebuild_every);
      sc.initial_lr = s.value("initial_lr", sc.initial_lr);
      sc.plateau_patience = s.value("plateau_patience", sc.plateau_patience);
      sc.lr_decay = s.value("lr_decay", sc.lr_decay);
      sc.w1_start = s.value("w1_start", sc.w1_start);
      sc.w1_end = s.value("w1_end", sc.w1_end);
      sc.w4_start = s.value("w4_start", sc.w4_start);
      sc.w4_end = s.value("w4_end", sc.w4_end);
      sc.w2 = s.value("w2", sc.w2);
      sc.w3 = s.value("w3", sc.w3);
    }
    if (j.contains("sdf")) {
      cfg.schedule.sdf_resolution =
          j["sdf"].value("resolution", cfg.schedule.sdf_resolution);
      cfg.schedule.sdf_padding =
          j["sdf"].value("padding_cells", cfg.schedule.sdf_padding);
    }
    if (j.contains("anchors")) {
      const auto& a = j["anchors"];
      cfg.anchor_count = a.value("count", cfg.anchor_count);
      cfg.spring_scale_m = a.value("spring_scale_m", cfg.spring_scale_m);
      cfg.hop_exclusion = a.value("hop_exclusion", cfg.hop_exclusion);
      cfg.contact_threshold_m =
          a.value("contact_threshold_m", cfg.contact_threshold_m);
      cfg.anchor_corpus_limit = a.value("corpus_limit", cfg.anchor_corpus_limit);
    }
    if (j.contains("discriminator")) {
      const auto& d = j["discriminator"];
      cfg.disc_epochs = d.value("epochs", cfg.disc_epochs);
      cfg.disc_learning_rate = d.value("learning_rate", cfg.disc_learning_rate);
      cfg.disc_batch_size = d.value("batch_size", cfg.disc_batch_size);
      cfg.disc_natural_count = d.value("natural_count", cfg.disc_natural_count);
      cfg.disc_perturbed_count =
          d.value("perturbed_count", cfg.disc_perturbed_count);
    }
    if (j.contains("rig")) {
      const auto& r = j["rig"];
      cfg.rig.radius = r.value("radius_m", cfg.rig.radius);
      cfg.rig.tracks = r.value("tracks", cfg.rig.tracks);
      cfg.rig.views_per_track =
          r.value("views_per_track", cfg.rig.views_per_track);
      if (r.contains("elevations_deg"))
        cfg.rig.elevations_deg =
            r["elevations_deg"].get<std::vector<double>>();
      cfg.rig.fx = r.value("fx", cfg.rig.fx);
      cfg.rig.fy = r.value("fy", cfg.rig.fy);
      cfg.rig.width = r.value("width", cfg.rig.width);
      cfg.rig.height = r.value("height", cfg.rig.height);
      const std::string sel = r.value("cameras", "sparse");
      if (sel != "sparse" && sel != "full")
        throw ConfigError("rig.cameras must be 'sparse' or 'full'");
      cfg.cameras = sel == "sparse" ? CameraSelection::kSparse
                                    : CameraSelection::kFull;
    }
    if (j.contains("filter"))
      cfg.penetration_tolerance_mm = j["filter"].value(
          "penetration_tolerance_mm", cfg.penetration_tolerance_mm);
    if (j.contains("batch")) {
      cfg.seed_count = j["batch"].value("seed_count", cfg.seed_count);
      cfg.workers = j["batch"].value("workers", cfg.workers);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed config " + path + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string config_hash(const PipelineConfig& cfg) {
  const std::string dump = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ihgen
