#include "ihgen/optimizer.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

namespace ihgen {

namespace {

constexpr int kTotalParams = 2 * kParamsPerHand;

// Twist is never free; splay only on finger-root joints.
const Eigen::VectorXd& free_parameter_mask() {
  static const Eigen::VectorXd mask = [] {
    Eigen::VectorXd m = Eigen::VectorXd::Ones(kTotalParams);
    for (int hand = 0; hand < 2; ++hand) {
      const int base = hand * kParamsPerHand;
      for (int j = 0; j < kNumFingerJoints; ++j) {
        m[base + j * 3 + kTwist] = 0.0;
        if (j % 3 != 0) m[base + j * 3 + kSplay] = 0.0;
      }
    }
    return m;
  }();
  return mask;
}

Eigen::VectorXd pack_parameters(const PosePair& pair) {
  Eigen::VectorXd x(kTotalParams);
  x.segment<kPoseDim>(0) = pose_to_vector(pair.right);
  x.segment<3>(kPoseDim) = pair.right.root_translation;
  x.segment<kPoseDim>(kParamsPerHand) = pose_to_vector(pair.left);
  x.segment<3>(kParamsPerHand + kPoseDim) = pair.left.root_translation;
  return x;
}

void unpack_parameters(const Eigen::VectorXd& x, PosePair& pair) {
  for (int j = 0; j < kNumFingerJoints; ++j)
    for (int a = 0; a < 3; ++a) {
      pair.right.theta(j, a) = x[j * 3 + a];
      pair.left.theta(j, a) = x[kParamsPerHand + j * 3 + a];
    }
  pair.right.root_translation = x.segment<3>(kPoseDim);
  pair.left.root_translation = x.segment<3>(kParamsPerHand + kPoseDim);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

void Schedule::validate() const {
  if (total_iters < 1) throw ConfigError("schedule: total_iters must be >= 1");
  if (ramp_end < 1 || ramp_end > total_iters)
    throw ConfigError("schedule: ramp_end must be in [1, total_iters]");
  if (rebuild_every < 1)
    throw ConfigError("schedule: rebuild_every must be >= 1");
  if (!(initial_lr > 0.0) || !(lr_decay > 0.0) || plateau_patience < 1)
    throw ConfigError("schedule: learning-rate settings must be positive");
  if (w1_start < 0 || w1_end < 0 || w2 < 0 || w3 < 0 || w4_start < 0 ||
      w4_end < 0)
    throw ConfigError("schedule: loss weights must be non-negative");
  if (sdf_resolution < 8) throw ConfigError("schedule: sdf_resolution < 8");
}

LossWeights Schedule::weights_at(int iteration) const {
  const double t =
      std::min(1.0, static_cast<double>(iteration) / static_cast<double>(ramp_end));
  LossWeights w;
  w.attraction = w1_start + (w1_end - w1_start) * t;
  w.anatomic = w2;
  w.adversarial = w3;
  w.penetration = w4_start + (w4_end - w4_start) * t;
  return w;
}

void AdamState::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
                     double lr) {
  ++step_count;
  first_moment = kBeta1 * first_moment + (1.0 - kBeta1) * grad;
  second_moment =
      kBeta2 * second_moment + (1.0 - kBeta2) * grad.cwiseProduct(grad);
  const double corr1 = 1.0 - std::pow(kBeta1, step_count);
  const double corr2 = 1.0 - std::pow(kBeta2, step_count);
  params -= lr * ((first_moment / corr1).array() /
                  ((second_moment / corr2).array().sqrt() + kEpsilon))
                     .matrix();
}

OptimizeResult optimize_pair(const PosePair& initial,
                             const HandModel& right_model,
                             const HandModel& left_model,
                             const AnchorSet& anchors_right,
                             const AnchorSet& anchors_left,
                             const MlpParams* discriminator,
                             const Schedule& schedule, const JointLimits& limits,
                             const std::vector<AnchorPair>* forced_pairs) {
  schedule.validate();
  limits.validate();

  TotalLossEvaluator evaluator(right_model, left_model, limits, discriminator,
                               &anchors_right, &anchors_left,
                               schedule.weights_at(0));

  PosePair cur = initial;
  Eigen::VectorXd x = pack_parameters(cur);
  AdamState adam(kTotalParams);
  const Eigen::VectorXd& mask = free_parameter_mask();

  PartitionedMesh right_mesh = right_model.canonical_mesh();
  PartitionedMesh left_mesh = left_model.canonical_mesh();

  std::vector<AnchorPair> pairs;
  std::vector<IterationTrace> trace;
  trace.reserve(schedule.total_iters);

  double lr = schedule.initial_lr;
  double best_loss = std::numeric_limits<double>::infinity();
  int stall = 0;

  for (int iter = 0; iter < schedule.total_iters; ++iter) {
    const LossWeights weights = schedule.weights_at(iter);
    evaluator.set_weights(weights);

    right_mesh.vertices =
        skin_vertices(right_model, forward_kinematics(right_model, cur.right));
    left_mesh.vertices =
        skin_vertices(left_model, forward_kinematics(left_model, cur.left));

    if (forced_pairs) {
      pairs = *forced_pairs;
    } else if (iter % schedule.rebuild_every == 0) {
      pairs = build_anchor_pairs(anchors_right, right_mesh.vertices,
                                 right_mesh.faces, anchors_left,
                                 left_mesh.vertices, left_mesh.faces);
    }

    const PenetrationContext grids = build_penetration_context(
        right_mesh, left_mesh, schedule.sdf_resolution, schedule.sdf_padding);

    const TotalLossResult res = evaluator.evaluate(cur, pairs, grids);
    trace.push_back({iter, res.terms, lr, weights.attraction,
                     weights.penetration});

    Eigen::VectorXd grad(kTotalParams);
    grad.segment<kParamsPerHand>(0) = res.grad_right;
    grad.segment<kParamsPerHand>(kParamsPerHand) = res.grad_left;
    grad = grad.cwiseProduct(mask);

    if (!std::isfinite(res.terms.total) || !grad.allFinite())
      throw DivergenceError("non-finite loss or gradient at iteration " +
                                std::to_string(iter),
                            std::move(trace));

    if (res.terms.total < best_loss) {
      best_loss = res.terms.total;
      stall = 0;
    } else if (++stall >= schedule.plateau_patience) {
      lr *= schedule.lr_decay;
      stall = 0;
    }

    adam.step(x, grad, lr);
    unpack_parameters(x, cur);
    cur.right.root_rotation.normalize();
    cur.left.root_rotation.normalize();
  }

  // Final projection into the limits; the validity filter checks them
  // exactly afterwards, so residual overshoot must not survive here.
  cur.right = clamp_pose(cur.right, limits);
  cur.left = clamp_pose(cur.left, limits);
  return {cur, std::move(trace)};
}

FilterReport validity_filter(const PosePair& pair,
                             const HandModel& right_model,
                             const HandModel& left_model,
                             const JointLimits& limits,
                             double penetration_tolerance_m) {
  FilterReport report;
  report.right_violations = check_limits(pair.right, limits);
  report.left_violations = check_limits(pair.left, limits);

  PartitionedMesh right = right_model.canonical_mesh();
  PartitionedMesh left = left_model.canonical_mesh();
  right.vertices =
      skin_vertices(right_model, forward_kinematics(right_model, pair.right));
  left.vertices =
      skin_vertices(left_model, forward_kinematics(left_model, pair.left));

  auto deepest = [](const PartitionedMesh& own, const PartitionedMesh& other) {
    double depth = 0.0;
    for (int part = 0; part < other.part_count(); ++part) {
      const Aabb box = other.part_bounds(part);
      for (const Vec3& v : own.vertices) {
        if (!box.contains(v)) continue;
        depth = std::max(
            depth, exact_penetration_depth(v, other.vertices, other.faces,
                                           other.face_ranges[part].first,
                                           other.face_ranges[part].second));
      }
    }
    return depth;
  };
  report.max_penetration_depth =
      std::max(deepest(right, left), deepest(left, right));

  static const char* kAxisNames[] = {"bend", "splay", "twist"};
  static const char* kFingerNames[] = {"thumb", "index", "middle", "ring",
                                       "pinky"};
  static const char* kLevelNames[] = {"root", "middle", "end"};
  auto describe = [&](const char* side, const LimitViolation& v) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s %s %s %s exceeds limit by %.4f rad",
                  side, kFingerNames[v.finger], kLevelNames[v.level],
                  kAxisNames[v.axis], std::abs(v.excess));
    report.diagnostics.emplace_back(buf);
  };
  for (const auto& v : report.right_violations) describe("right", v);
  for (const auto& v : report.left_violations) describe("left", v);
  if (report.max_penetration_depth > penetration_tolerance_m) {
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "max penetration depth %.4f mm exceeds tolerance %.4f mm",
                  report.max_penetration_depth * 1e3,
                  penetration_tolerance_m * 1e3);
    report.diagnostics.emplace_back(buf);
  }

  report.pass = report.right_violations.empty() &&
                report.left_violations.empty() &&
                report.max_penetration_depth <= penetration_tolerance_m;
  return report;
}

BatchResult run_batch(const std::vector<PosePair>& seeds,
                      const AugmentationConfig& aug_cfg,
                      const Schedule& schedule, const JointLimits& limits,
                      const HandModel& right_model, const HandModel& left_model,
                      const AnchorSet& anchors_right,
                      const AnchorSet& anchors_left,
                      const MlpParams* discriminator,
                      double penetration_tolerance_m, std::uint64_t rng_seed,
                      int workers, bool keep_traces) {
  BatchResult result;
  if (seeds.empty()) return result;

  const auto t_aug = std::chrono::steady_clock::now();
  RngStream master(rng_seed);
  for (size_t s = 0; s < seeds.size(); ++s) {
    RngStream stream = master.split(s);
    const auto augmented = augment_pose(seeds[s], aug_cfg, limits, stream);
    for (size_t i = 0; i < augmented.size(); ++i) {
      CandidateOutcome c;
      c.seed_id = static_cast<int>(s);
      c.aug_index = static_cast<int>(i);
      c.initial = augmented[i];
      result.outcomes.push_back(std::move(c));
    }
  }
  result.stats.augment_seconds = seconds_since(t_aug);
  result.stats.candidates = static_cast<int>(result.outcomes.size());

  const auto t_opt = std::chrono::steady_clock::now();
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t idx = next.fetch_add(1);
      if (idx >= result.outcomes.size()) return;
      CandidateOutcome& c = result.outcomes[idx];
      try {
        OptimizeResult opt = optimize_pair(c.initial, right_model, left_model,
                                           anchors_right, anchors_left,
                                           discriminator, schedule, limits);
        c.optimized = opt.pair;
        if (keep_traces) c.trace = std::move(opt.trace);
      } catch (const DivergenceError&) {
        c.diverged = true;
      }
    }
  };
  const int n_threads = std::max(1, workers);
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  result.stats.optimize_seconds = seconds_since(t_opt);

  const auto t_filter = std::chrono::steady_clock::now();
  for (CandidateOutcome& c : result.outcomes) {
    if (c.diverged) {
      ++result.stats.diverged;
      continue;
    }
    const FilterReport report =
        validity_filter(c.optimized, right_model, left_model, limits,
                        penetration_tolerance_m);
    c.passed = report.pass;
    c.max_penetration_depth = report.max_penetration_depth;
    if (c.passed)
      result.library.push_back({c.optimized, c.seed_id, c.aug_index});
  }
  result.stats.passed = static_cast<int>(result.library.size());
  if (result.stats.candidates > 0)
    result.stats.yield = static_cast<double>(result.stats.passed) /
                         static_cast<double>(result.stats.candidates);
  result.stats.filter_seconds = seconds_since(t_filter);
  return result;
}

void write_trace_csv(const std::string& path,
                     const std::vector<CandidateOutcome>& outcomes) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw IoError("cannot write trace csv: " + path);
  std::fprintf(fp, "candidate,seed,aug,iteration,L_p,L_A,L_a,L_adv,total\n");
  for (size_t c = 0; c < outcomes.size(); ++c)
    for (const IterationTrace& row : outcomes[c].trace)
      std::fprintf(fp, "%zu,%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", c,
                   outcomes[c].seed_id, outcomes[c].aug_index, row.iteration,
                   row.terms.penetration, row.terms.attraction,
                   row.terms.anatomic, row.terms.adversarial, row.terms.total);
  std::fclose(fp);
}

}  // namespace ihgen
