// Command-line driver for the interacting-hand pose synthesis pipeline.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ihgen/pipeline.hpp"
#include "ihgen/pose_library.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::string cameras;
  long long seed = -1;
  int workers = 0;
  double tolerance_mm = -1.0;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config_path, "pipeline config file (JSON)");
  cmd->add_option("--out", opts.out_dir, "output directory")
      ->envname("IHGEN_OUT");
  cmd->add_option("--seed", opts.seed, "rng seed override");
  cmd->add_option("--workers", opts.workers, "worker thread count");
  cmd->add_option("--cameras", opts.cameras, "camera selection: sparse|full")
      ->check(CLI::IsMember({"sparse", "full"}));
  cmd->add_option("--tolerance-mm", opts.tolerance_mm,
                  "penetration tolerance for the validity filter, mm");
}

ihgen::PipelineConfig effective_config(const CommonOptions& opts) {
  ihgen::PipelineConfig cfg = opts.config_path.empty()
                                  ? ihgen::default_config()
                                  : ihgen::load_config(opts.config_path);
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (opts.seed >= 0) cfg.rng_seed = static_cast<std::uint64_t>(opts.seed);
  if (opts.workers > 0) cfg.workers = opts.workers;
  if (!opts.cameras.empty())
    cfg.cameras = opts.cameras == "full" ? ihgen::CameraSelection::kFull
                                         : ihgen::CameraSelection::kSparse;
  if (opts.tolerance_mm >= 0.0) cfg.penetration_tolerance_mm = opts.tolerance_mm;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ihgen: two-hand interaction pose synthesis and evaluation"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string eval_gt, eval_pred, eval_root = "middle-mcp";

  CLI::App* gen = app.add_subcommand("gen-poses",
                                     "augment seed pairs into initial poses");
  CLI::App* sel = app.add_subcommand("select-anchors",
                                     "pick contact anchors from the corpus");
  CLI::App* disc = app.add_subcommand("train-disc",
                                      "pretrain the naturalness discriminator");
  CLI::App* opt = app.add_subcommand("optimize", "optimize the initial poses");
  CLI::App* filt = app.add_subcommand("filter",
                                      "validity-filter the optimized poses");
  CLI::App* exp = app.add_subcommand("export", "export ground-truth annotations");
  CLI::App* eval = app.add_subcommand("eval", "evaluate predictions against GT");
  CLI::App* all = app.add_subcommand("run-all", "run the whole pipeline");
  CLI::App* print = app.add_subcommand("print-config",
                                       "print the effective configuration");
  for (CLI::App* cmd : {gen, sel, disc, opt, filt, exp, eval, all, print})
    add_common(cmd, opts);

  eval->add_option("--gt", eval_gt, "ground-truth annotations dir or file")
      ->required();
  eval->add_option("--pred", eval_pred, "prediction file or directory")
      ->required();
  eval->add_option("--root", eval_root, "root joint: middle-mcp|wrist")
      ->check(CLI::IsMember({"middle-mcp", "wrist"}));

  CLI11_PARSE(app, argc, argv);

  try {
    const ihgen::PipelineConfig cfg = effective_config(opts);

    if (print->parsed()) {
      std::cout << ihgen::config_to_json(cfg).dump(2) << "\n";
      return ihgen::kExitOk;
    }

    const ihgen::PipelineContext ctx = ihgen::make_context(cfg);
    if (gen->parsed()) ihgen::stage_gen_poses(cfg, ctx);
    if (sel->parsed()) ihgen::stage_select_anchors(cfg, ctx);
    if (disc->parsed()) ihgen::stage_train_disc(cfg, ctx);
    if (opt->parsed()) ihgen::stage_optimize(cfg, ctx);
    if (filt->parsed()) ihgen::stage_filter(cfg, ctx);
    if (exp->parsed()) ihgen::stage_export(cfg, ctx);
    if (all->parsed()) ihgen::run_all(cfg, ctx);
    if (eval->parsed()) {
      ihgen::EvalOptions eopts;
      eopts.gt_path = eval_gt;
      eopts.pred_path = eval_pred;
      eopts.root = eval_root == "wrist" ? ihgen::RootJoint::kWrist
                                        : ihgen::RootJoint::kMiddleMcp;
      const ihgen::MetricsReport report = ihgen::stage_eval(cfg, ctx, eopts);
      std::printf("MPJPE   %10.4f mm\n", report.mpjpe_mm);
      std::printf("PAMPJPE %10.4f mm\n", report.pampjpe_mm);
      std::printf("SMPJPE  %10.4f mm\n", report.smpjpe_mm);
      std::printf("MRRPE   %10.4f mm\n", report.mrrpe_mm);
      if (report.cdev_mm)
        std::printf("CDev    %10.4f mm\n", *report.cdev_mm);
      else
        std::printf("CDev           n/a\n");
    }
  } catch (const ihgen::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ihgen::kExitFailure;
  }
  return ihgen::kExitOk;
}
