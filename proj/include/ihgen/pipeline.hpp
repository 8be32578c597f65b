#pragma once

#include <string>
#include <vector>

#include "ihgen/anchors.hpp"
#include "ihgen/config.hpp"
#include "ihgen/metrics.hpp"
#include "ihgen/pose_io.hpp"

namespace ihgen {

// Models and limits shared by every stage.
struct PipelineContext {
  HandModel right;
  HandModel left;
  JointLimits limits;
};

PipelineContext make_context(const PipelineConfig& cfg);

// Stage outputs live under cfg.out_dir with fixed names; each stage consumes
// the previous stage's files, so individual subcommands compose into the
// same result as run_all.
std::string seeds_file(const PipelineConfig& cfg);
std::string initial_poses_file(const PipelineConfig& cfg);
std::string anchors_file(const PipelineConfig& cfg);
std::string discriminator_file(const PipelineConfig& cfg);
std::string optimized_poses_file(const PipelineConfig& cfg);
std::string library_file(const PipelineConfig& cfg);
std::string manifest_file(const PipelineConfig& cfg);

void stage_gen_poses(const PipelineConfig& cfg, const PipelineContext& ctx);
void stage_select_anchors(const PipelineConfig& cfg, const PipelineContext& ctx);
void stage_train_disc(const PipelineConfig& cfg, const PipelineContext& ctx);
void stage_optimize(const PipelineConfig& cfg, const PipelineContext& ctx);
void stage_filter(const PipelineConfig& cfg, const PipelineContext& ctx);
void stage_export(const PipelineConfig& cfg, const PipelineContext& ctx);
void run_all(const PipelineConfig& cfg, const PipelineContext& ctx);

struct EvalOptions {
  std::string gt_path;    // annotations directory or single file
  std::string pred_path;  // predictions file/directory (either schema)
  RootJoint root = RootJoint::kMiddleMcp;
};

MetricsReport stage_eval(const PipelineConfig& cfg, const PipelineContext& ctx,
                         const EvalOptions& options);

}  // namespace ihgen
