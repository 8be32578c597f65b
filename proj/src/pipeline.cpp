#include "ihgen/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <thread>

#include "ihgen/pose_library.hpp"

namespace ihgen {

namespace fs = std::filesystem;

namespace {

// rng stream ids; seed augmentation uses the seed index directly
constexpr std::uint64_t kDiscNaturalStream = 0x4e415455ull;
constexpr std::uint64_t kDiscPerturbedStream = 0x50455254ull;

std::string join(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

void ensure_out_dir(const PipelineConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed json " + path + ": " + e.what());
  }
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("short write to " + path);
}

}  // namespace

PipelineContext make_context(const PipelineConfig& cfg) {
  const HandProportions proportions =
      cfg.proportions_path.empty()
          ? HandProportions::defaults()
          : proportions_from_json_file(cfg.proportions_path);
  const JointLimits limits = cfg.limits_path.empty()
                                 ? JointLimits::defaults()
                                 : JointLimits::from_json_file(cfg.limits_path);
  return {HandModel::build(Side::kRight, proportions),
          HandModel::build(Side::kLeft, proportions), limits};
}

std::string seeds_file(const PipelineConfig& cfg) {
  return join(cfg.out_dir, "seeds.json");
}
std::string initial_poses_file(const PipelineConfig& cfg) {
  return join(cfg.out_dir, "poses_initial.json");
}
std::string anchors_file(const PipelineConfig& cfg) {
  return cfg.anchors_path.empty() ? join(cfg.out_dir, "anchors.json")
                                  : cfg.anchors_path;
}
std::string discriminator_file(const PipelineConfig& cfg) {
  return cfg.discriminator_path.empty()
             ? join(cfg.out_dir, "discriminator.bin")
             : cfg.discriminator_path;
}
std::string optimized_poses_file(const PipelineConfig& cfg) {
  return join(cfg.out_dir, "poses_optimized.json");
}
std::string library_file(const PipelineConfig& cfg) {
  return join(cfg.out_dir, "library.json");
}
std::string manifest_file(const PipelineConfig& cfg) {
  return join(cfg.out_dir, "manifest.json");
}

void stage_gen_poses(const PipelineConfig& cfg, const PipelineContext& ctx) {
  ensure_out_dir(cfg);

  std::vector<PosePair> seeds;
  if (cfg.seeds_path.empty()) {
    seeds = expand_seed_pairs(builtin_seed_pairs(ctx.right, ctx.left),
                              cfg.seed_count);
  } else {
    for (const auto& entry : load_pose_library(cfg.seeds_path))
      seeds.push_back(entry.pair);
    if (seeds.empty()) throw ConfigError("seed file has no poses");
  }

  std::vector<StoredPosePair> seed_entries;
  for (size_t s = 0; s < seeds.size(); ++s)
    seed_entries.push_back({seeds[s], static_cast<int>(s), 0});
  save_pose_library(seeds_file(cfg), seed_entries);

  RngStream master(cfg.rng_seed);
  std::vector<StoredPosePair> initial;
  for (size_t s = 0; s < seeds.size(); ++s) {
    RngStream stream = master.split(s);
    const auto augmented =
        augment_pose(seeds[s], cfg.augmentation, ctx.limits, stream);
    for (size_t i = 0; i < augmented.size(); ++i)
      initial.push_back(
          {augmented[i], static_cast<int>(s), static_cast<int>(i)});
  }
  save_pose_library(initial_poses_file(cfg), initial);
}

void stage_select_anchors(const PipelineConfig& cfg,
                          const PipelineContext& ctx) {
  ensure_out_dir(cfg);
  const auto entries = load_pose_library(initial_poses_file(cfg));
  std::vector<PosePair> corpus;
  for (const auto& e : entries) corpus.push_back(e.pair);
  if (cfg.anchor_corpus_limit > 0 &&
      static_cast<int>(corpus.size()) > cfg.anchor_corpus_limit)
    corpus.resize(cfg.anchor_corpus_limit);

  const AnchorSet right =
      select_anchors(ctx.right, ctx.left, corpus, cfg.anchor_count,
                     cfg.contact_threshold_m, cfg.hop_exclusion);
  const AnchorSet left =
      select_anchors(ctx.left, ctx.right, corpus, cfg.anchor_count,
                     cfg.contact_threshold_m, cfg.hop_exclusion);
  save_anchors(anchors_file(cfg), right, left);
}

void stage_train_disc(const PipelineConfig& cfg, const PipelineContext& ctx) {
  ensure_out_dir(cfg);
  RngStream master(cfg.rng_seed);

  std::vector<TrainSample> natural;
  if (cfg.natural_corpus_path.empty()) {
    RngStream rng = master.split(kDiscNaturalStream);
    natural = make_natural_corpus(cfg.disc_natural_count, ctx.limits, rng);
  } else {
    for (const auto& entry : load_pose_library(cfg.natural_corpus_path)) {
      natural.push_back({pose_to_vector(entry.pair.right), 1.0});
      natural.push_back({pose_to_vector(mirror_pose(entry.pair.left)), 1.0});
    }
    if (natural.empty()) throw ConfigError("natural corpus file has no poses");
  }

  RngStream perturbed_rng = master.split(kDiscPerturbedStream);
  const auto perturbed = make_perturbed_corpus(
      cfg.disc_perturbed_count, ctx.limits, cfg.augmentation, perturbed_rng);

  RngStream init_rng = master.split(kDiscNaturalStream ^ kDiscPerturbedStream);
  MlpParams params = MlpParams::init(MlpParams::default_layer_sizes(), init_rng);
  RngStream train_rng = master.split(kDiscPerturbedStream + 1);
  TrainResult result =
      train(std::move(params), natural, perturbed, cfg.disc_epochs,
            cfg.disc_learning_rate, cfg.disc_batch_size, train_rng);

  save_discriminator(discriminator_file(cfg), result.params);

  std::ofstream curve(join(cfg.out_dir, "disc_training.csv"));
  if (!curve) throw IoError("cannot write discriminator training curve");
  curve << "epoch,loss\n";
  for (size_t e = 0; e < result.loss_curve.size(); ++e)
    curve << e << "," << result.loss_curve[e] << "\n";
}

void stage_optimize(const PipelineConfig& cfg, const PipelineContext& ctx) {
  ensure_out_dir(cfg);
  const auto initial = load_pose_library(initial_poses_file(cfg));
  auto [anchors_right, anchors_left] = load_anchors(anchors_file(cfg));
  recompute_canonical_normals(anchors_right, ctx.right);
  recompute_canonical_normals(anchors_left, ctx.left);
  const MlpParams disc = load_discriminator(discriminator_file(cfg));

  std::vector<StoredPosePair> optimized(initial.size());
  std::vector<char> diverged(initial.size(), 0);
  std::vector<std::vector<IterationTrace>> traces(initial.size());

  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t idx = next.fetch_add(1);
      if (idx >= initial.size()) return;
      try {
        OptimizeResult res =
            optimize_pair(initial[idx].pair, ctx.right, ctx.left,
                          anchors_right, anchors_left, &disc, cfg.schedule,
                          ctx.limits);
        optimized[idx] = {res.pair, initial[idx].seed_id,
                          initial[idx].aug_index};
        traces[idx] = std::move(res.trace);
      } catch (const DivergenceError&) {
        diverged[idx] = 1;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::max(1, cfg.workers); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::vector<StoredPosePair> kept;
  std::vector<CandidateOutcome> trace_rows;
  int diverged_count = 0;
  for (size_t i = 0; i < initial.size(); ++i) {
    if (diverged[i]) {
      ++diverged_count;
      continue;
    }
    kept.push_back(optimized[i]);
    CandidateOutcome row;
    row.seed_id = optimized[i].seed_id;
    row.aug_index = optimized[i].aug_index;
    row.trace = std::move(traces[i]);
    trace_rows.push_back(std::move(row));
  }
  save_pose_library(optimized_poses_file(cfg), kept);
  write_trace_csv(join(cfg.out_dir, "traces.csv"), trace_rows);
  write_json(join(cfg.out_dir, "optimize_stats.json"),
             {{"candidates", initial.size()}, {"diverged", diverged_count}});
}

void stage_filter(const PipelineConfig& cfg, const PipelineContext& ctx) {
  ensure_out_dir(cfg);
  const auto optimized = load_pose_library(optimized_poses_file(cfg));
  const nlohmann::json stats = read_json(join(cfg.out_dir, "optimize_stats.json"));
  const int candidates = stats.value("candidates", 0);
  const int diverged = stats.value("diverged", 0);

  std::vector<StoredPosePair> library;
  int fail_limits = 0, fail_penetration = 0;
  for (const auto& entry : optimized) {
    const FilterReport report =
        validity_filter(entry.pair, ctx.right, ctx.left, ctx.limits,
                        cfg.penetration_tolerance_mm * 1e-3);
    if (report.pass) {
      library.push_back(entry);
    } else {
      if (!report.right_violations.empty() || !report.left_violations.empty())
        ++fail_limits;
      if (report.max_penetration_depth > cfg.penetration_tolerance_mm * 1e-3)
        ++fail_penetration;
    }
  }
  save_pose_library(library_file(cfg), library);

  std::ofstream report(join(cfg.out_dir, "yield_report.txt"));
  if (!report) throw IoError("cannot write yield report");
  report << "candidates: " << candidates << "\n";
  report << "diverged: " << diverged << "\n";
  report << "passed: " << library.size() << "\n";
  report << "failed_joint_limits: " << fail_limits << "\n";
  report << "failed_penetration: " << fail_penetration << "\n";
  if (candidates > 0)
    report << "yield: " << static_cast<double>(library.size()) / candidates
           << "\n";
  else
    report << "yield: n/a\n";
}

void stage_export(const PipelineConfig& cfg, const PipelineContext& ctx) {
  ensure_out_dir(cfg);
  const auto library = load_pose_library(library_file(cfg));
  std::vector<std::pair<PosePair, std::pair<int, int>>> entries;
  for (const auto& e : library)
    entries.push_back({e.pair, {e.seed_id, e.aug_index}});

  const ExportSummary summary = export_annotations(
      entries, ctx.right, ctx.left, cfg.rig, cfg.cameras, cfg.out_dir);

  nlohmann::json manifest;
  manifest["schema"] = "ihgen-manifest/1";
  manifest["config_hash"] = config_hash(cfg);
  manifest["pose_count"] = summary.pose_count;
  manifest["record_count"] = summary.record_count;
  manifest["cameras_per_pose"] =
      cfg.cameras == CameraSelection::kSparse
          ? cfg.rig.views_per_track
          : cfg.rig.tracks * cfg.rig.views_per_track;
  manifest["files"] = summary.files;
  write_json(manifest_file(cfg), manifest);
}

void run_all(const PipelineConfig& cfg, const PipelineContext& ctx) {
  stage_gen_poses(cfg, ctx);
  stage_select_anchors(cfg, ctx);
  stage_train_disc(cfg, ctx);
  stage_optimize(cfg, ctx);
  stage_filter(cfg, ctx);
  stage_export(cfg, ctx);

  // fold the batch statistics into the manifest
  nlohmann::json manifest = read_json(manifest_file(cfg));
  const nlohmann::json stats = read_json(join(cfg.out_dir, "optimize_stats.json"));
  const auto library = load_pose_library(library_file(cfg));
  const int candidates = stats.value("candidates", 0);
  manifest["candidates"] = candidates;
  manifest["diverged"] = stats.value("diverged", 0);
  manifest["passed"] = library.size();
  if (candidates > 0)
    manifest["yield"] = static_cast<double>(library.size()) / candidates;
  else
    manifest["yield"] = nullptr;
  write_json(manifest_file(cfg), manifest);
}

namespace {

std::vector<std::string> annotation_files_in(const std::string& path) {
  std::vector<std::string> files;
  if (fs::is_directory(path)) {
    const fs::path dir = fs::exists(fs::path(path) / "annotations")
                             ? fs::path(path) / "annotations"
                             : fs::path(path);
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.path().extension() == ".json") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  if (files.empty()) throw IoError("no annotation files under " + path);
  return files;
}

struct FlatRecord {
  std::vector<Vec3> joints_right_mm;
  std::vector<Vec3> joints_left_mm;
  std::vector<Vec3> mesh_right_mm;
  std::vector<Vec3> mesh_left_mm;
};

std::vector<FlatRecord> load_gt_records(const std::string& path) {
  std::vector<FlatRecord> out;
  for (const auto& file : annotation_files_in(path))
    for (const AnnotationRecord& rec : read_annotation_file(file))
      for (const AnnotationView& view : rec.views) {
        FlatRecord flat;
        for (const Vec3& p : view.joints_cam_right)
          flat.joints_right_mm.push_back(p * 1e3);
        for (const Vec3& p : view.joints_cam_left)
          flat.joints_left_mm.push_back(p * 1e3);
        out.push_back(std::move(flat));
      }
  return out;
}

std::vector<Vec3> vec3_list_mm(const nlohmann::json& j) {
  std::vector<Vec3> out;
  for (const auto& p : j)
    out.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(),
                     p.at(2).get<double>());
  return out;
}

std::vector<FlatRecord> load_predictions(const std::string& path) {
  // either the annotation schema or the minimal predictions-only schema
  if (fs::is_directory(path)) return load_gt_records(path);
  const nlohmann::json j = read_json(path);
  const std::string schema = j.value("schema", "");
  if (schema == "ihgen-annotations/1") return load_gt_records(path);
  if (schema != "ihgen-predictions/1")
    throw IoError("unsupported prediction schema in " + path);

  std::vector<FlatRecord> out;
  for (const auto& entry : j.at("predictions")) {
    FlatRecord flat;
    flat.joints_right_mm = vec3_list_mm(entry.at("joints3d_right_mm"));
    flat.joints_left_mm = vec3_list_mm(entry.at("joints3d_left_mm"));
    if (entry.contains("mesh_right_mm"))
      flat.mesh_right_mm = vec3_list_mm(entry["mesh_right_mm"]);
    if (entry.contains("mesh_left_mm"))
      flat.mesh_left_mm = vec3_list_mm(entry["mesh_left_mm"]);
    out.push_back(std::move(flat));
  }
  return out;
}

}  // namespace

MetricsReport stage_eval(const PipelineConfig& cfg, const PipelineContext& ctx,
                         const EvalOptions& options) {
  (void)ctx;
  ensure_out_dir(cfg);
  const auto gt = load_gt_records(options.gt_path);
  const auto pred = load_predictions(options.pred_path);
  if (gt.size() != pred.size())
    throw ShapeError("prediction count " + std::to_string(pred.size()) +
                     " does not match ground truth count " +
                     std::to_string(gt.size()));

  std::vector<EvalSample> samples;
  samples.reserve(gt.size());
  for (size_t i = 0; i < gt.size(); ++i) {
    EvalSample s;
    s.gt_right = gt[i].joints_right_mm;
    s.gt_left = gt[i].joints_left_mm;
    s.pred_right = pred[i].joints_right_mm;
    s.pred_left = pred[i].joints_left_mm;
    s.pred_mesh_right = pred[i].mesh_right_mm;
    s.pred_mesh_left = pred[i].mesh_left_mm;
    s.gt_mesh_right = gt[i].mesh_right_mm;
    s.gt_mesh_left = gt[i].mesh_left_mm;
    s.root = options.root;
    samples.push_back(std::move(s));
  }

  const MetricsReport report = evaluate_batch(samples);

  std::ofstream txt(join(cfg.out_dir, "metrics_report.txt"));
  if (!txt) throw IoError("cannot write metrics report");
  char line[256];
  std::snprintf(line, sizeof(line),
                "%-10s %10s\nMPJPE %14.4f\nPAMPJPE %12.4f\nSMPJPE %13.4f\n"
                "MRRPE %14.4f\n",
                "metric", "mm", report.mpjpe_mm, report.pampjpe_mm,
                report.smpjpe_mm, report.mrrpe_mm);
  txt << line;
  if (report.cdev_mm)
    txt << "CDev " << *report.cdev_mm << "\n";
  else
    txt << "CDev n/a\n";
  txt << "samples " << report.sample_count << "\n";

  nlohmann::json mj;
  mj["mpjpe_mm"] = report.mpjpe_mm;
  mj["pampjpe_mm"] = report.pampjpe_mm;
  mj["smpjpe_mm"] = report.smpjpe_mm;
  mj["mrrpe_mm"] = report.mrrpe_mm;
  if (report.cdev_mm)
    mj["cdev_mm"] = *report.cdev_mm;
  else
    mj["cdev_mm"] = nullptr;
  mj["samples"] = report.sample_count;
  write_json(join(cfg.out_dir, "metrics.json"), mj);
  return report;
}

}  // namespace ihgen
