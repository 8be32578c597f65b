#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "ihgen/optimizer.hpp"
#include "ihgen/scene_sampler.hpp"

namespace ihgen {

struct PipelineConfig {
  // paths; empty string means built-in data / default location under out
  std::string seeds_path;
  std::string anchors_path;
  std::string discriminator_path;
  std::string natural_corpus_path;
  std::string proportions_path;
  std::string limits_path;
  std::string out_dir = "out";

  std::uint64_t rng_seed = 20240901;

  AugmentationConfig augmentation;
  Schedule schedule;

  int anchor_count = kDefaultAnchorCount;
  double spring_scale_m = kSpringScale;
  int hop_exclusion = 2;
  double contact_threshold_m = kSpringScale;
  int anchor_corpus_limit = 200;  // 0 = use the whole corpus

  int disc_epochs = 60;
  double disc_learning_rate = 1e-3;
  int disc_batch_size = 64;
  int disc_natural_count = 2000;
  int disc_perturbed_count = 2000;

  RigConfig rig;
  CameraSelection cameras = CameraSelection::kSparse;

  double penetration_tolerance_mm = 2.0;

  int seed_count = 50;
  int workers = 4;

  void validate() const;
};

PipelineConfig default_config();

// Defaults overlaid with the file's sections; unknown keys are ignored,
// malformed values raise ConfigError.
PipelineConfig load_config(const std::string& path);

nlohmann::json config_to_json(const PipelineConfig& cfg);

// FNV-1a over the canonical serialized form, as a 16-digit hex string;
// embedded in every output manifest.
std::string config_hash(const PipelineConfig& cfg);

}  // namespace ihgen
