#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ihgen/errors.hpp"
#include "ihgen/losses.hpp"

namespace ihgen {

// Iteration schedule of the pose optimization: fixed-length Adam run with a
// linear ramp of the attraction weight up and the penetration weight down
// until ramp_end, anchor-pair rebuilds on a fixed cadence, and learning-rate
// halving after plateau_patience non-improving iterations.
struct Schedule {
  int total_iters = 215;
  int ramp_end = 165;
  int rebuild_every = 40;
  double initial_lr = 0.01;
  int plateau_patience = 20;
  double lr_decay = 0.5;
  double w1_start = 0.1;  // attraction ramps up
  double w1_end = 2.0;
  double w4_start = 10.0;  // penetration ramps down
  double w4_end = 1.0;
  double w2 = 5.0;  // anatomic, fixed
  double w3 = 0.5;  // adversarial, fixed
  int sdf_resolution = 32;
  int sdf_padding = 3;

  void validate() const;
  LossWeights weights_at(int iteration) const;
};

// Adam over the 96 optimization parameters (two hands x (45 angles + 3 root
// translation)). Twist slots and non-root splay slots are frozen to keep the
// pose invariants; root rotations are not optimization variables.
struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;
  long step_count = 0;

  explicit AdamState(int dim)
      : first_moment(Eigen::VectorXd::Zero(dim)),
        second_moment(Eigen::VectorXd::Zero(dim)) {}

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr);
};

struct IterationTrace {
  int iteration = 0;
  LossTerms terms;
  double learning_rate = 0.0;
  double w1 = 0.0;
  double w4 = 0.0;
};

class DivergenceError : public Error {
 public:
  DivergenceError(std::string msg, std::vector<IterationTrace> trace)
      : Error(std::move(msg), kExitDivergence), trace_(std::move(trace)) {}
  const std::vector<IterationTrace>& trace() const { return trace_; }

 private:
  std::vector<IterationTrace> trace_;
};

struct OptimizeResult {
  PosePair pair;
  std::vector<IterationTrace> trace;
};

// Runs the full schedule on one pose pair and returns the optimized pair
// (projected into the joint limits as the final step) plus the per-iteration
// loss trace. forced_pairs, when given, replaces the anchor-pair rebuilds;
// intended for isolating the spring term in tests.
OptimizeResult optimize_pair(const PosePair& initial,
                             const HandModel& right_model,
                             const HandModel& left_model,
                             const AnchorSet& anchors_right,
                             const AnchorSet& anchors_left,
                             const MlpParams* discriminator,
                             const Schedule& schedule,
                             const JointLimits& limits,
                             const std::vector<AnchorPair>* forced_pairs =
                                 nullptr);

struct FilterReport {
  bool pass = false;
  std::vector<LimitViolation> right_violations;
  std::vector<LimitViolation> left_violations;
  double max_penetration_depth = 0.0;  // meters, brute-force point-to-mesh
  std::vector<std::string> diagnostics;
};

// Pass iff both hands satisfy the limits exactly and the deepest vertex
// penetration (grid-free winding-number evaluation) is within tolerance.
FilterReport validity_filter(const PosePair& pair,
                             const HandModel& right_model,
                             const HandModel& left_model,
                             const JointLimits& limits,
                             double penetration_tolerance_m);

struct CandidateOutcome {
  int seed_id = 0;
  int aug_index = 0;
  bool diverged = false;
  bool passed = false;
  double max_penetration_depth = 0.0;
  PosePair initial;
  PosePair optimized;
  std::vector<IterationTrace> trace;
};

struct BatchStats {
  int candidates = 0;
  int passed = 0;
  int diverged = 0;
  std::optional<double> yield;  // absent for an empty batch
  double augment_seconds = 0.0;
  double optimize_seconds = 0.0;
  double filter_seconds = 0.0;
};

struct LibraryEntry {
  PosePair pair;
  int seed_id = 0;
  int aug_index = 0;
};

struct BatchResult {
  std::vector<LibraryEntry> library;
  std::vector<CandidateOutcome> outcomes;
  BatchStats stats;
};

// augment -> optimize -> filter over every seed. Candidates are independent
// jobs distributed over `workers` threads; outputs are ordered by
// (seed, augmentation index) so results do not depend on scheduling.
// Per-candidate divergence is recorded, never fatal.
BatchResult run_batch(const std::vector<PosePair>& seeds,
                      const AugmentationConfig& aug_cfg,
                      const Schedule& schedule, const JointLimits& limits,
                      const HandModel& right_model, const HandModel& left_model,
                      const AnchorSet& anchors_right,
                      const AnchorSet& anchors_left,
                      const MlpParams* discriminator,
                      double penetration_tolerance_m, std::uint64_t rng_seed,
                      int workers, bool keep_traces = true);

void write_trace_csv(const std::string& path,
                     const std::vector<CandidateOutcome>& outcomes);

}  // namespace ihgen
