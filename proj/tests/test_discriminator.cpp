#include <doctest.h>

#include <filesystem>

#include "ihgen/discriminator.hpp"
#include "ihgen/errors.hpp"
#include "ihgen/pose_library.hpp"
#include "test_support.hpp"

using namespace ihgen;

namespace {

std::pair<std::vector<TrainSample>, std::vector<TrainSample>> small_corpora(
    int n, std::uint64_t seed) {
  const JointLimits limits = JointLimits::defaults();
  AugmentationConfig cfg;
  RngStream a(seed), b(seed ^ 0x5555);
  return {make_natural_corpus(n, limits, a),
          make_perturbed_corpus(n, limits, cfg, b)};
}

}  // namespace

TEST_CASE("label probability endpoints and monotonicity") {
  using PoseVec = Eigen::Matrix<double, kPoseDim, 1>;
  CHECK(label_probability(PoseVec::Zero()) == 1.0);

  // maximal augmentation offsets: all bends at 90 deg, root splays at 30 deg
  PoseVec max_offsets = PoseVec::Zero();
  for (int j = 0; j < kNumFingerJoints; ++j) {
    max_offsets[j * 3 + kBend] = std::numbers::pi / 2.0;
    if (j % 3 == 0) max_offsets[j * 3 + kSplay] = std::numbers::pi / 6.0;
  }
  CHECK(label_probability(max_offsets) == doctest::Approx(0.0).epsilon(1e-12));

  RngStream rng(2);
  for (int t = 0; t < 20; ++t) {
    PoseVec offsets = PoseVec::Zero();
    for (int i = 0; i < kPoseDim; ++i) offsets[i] = std::abs(rng.normal(0, 0.3));
    CHECK(label_probability(2.0 * offsets) <= label_probability(offsets));
  }
}

TEST_CASE("prediction stays strictly inside (0,1) and is deterministic") {
  RngStream rng(3);
  const MlpParams params = MlpParams::init(MlpParams::default_layer_sizes(), rng);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd x(kPoseDim);
    for (int i = 0; i < kPoseDim; ++i) x[i] = rng.uniform(-3.0, 3.0);
    const double d = predict(params, x);
    CHECK(d > 0.0);
    CHECK(d < 1.0);
    CHECK(predict(params, x) == d);
  }
}

TEST_CASE("adversarial loss fixed point and values") {
  RngStream rng(4);
  MlpParams params = MlpParams::init(MlpParams::default_layer_sizes(), rng);
  Eigen::Matrix<double, kPoseDim, 1> x;
  for (int i = 0; i < kPoseDim; ++i) x[i] = rng.uniform(-1.0, 1.0);
  const double d = predict(params, x);
  const auto [loss, grad] = adversarial_loss(params, x);
  CHECK(loss == doctest::Approx((d - 1.0) * (d - 1.0)).epsilon(1e-12));
}

TEST_CASE("input gradient matches finite differences") {
  RngStream rng(5);
  const MlpParams params = MlpParams::init(MlpParams::default_layer_sizes(), rng);
  for (int t = 0; t < 3; ++t) {
    Eigen::Matrix<double, kPoseDim, 1> x;
    for (int i = 0; i < kPoseDim; ++i) x[i] = rng.uniform(-1.0, 1.0);
    const auto [loss, grad] = adversarial_loss(params, x);
    const Eigen::VectorXd fd = test::finite_difference(
        [&](const Eigen::VectorXd& v) {
          return adversarial_loss(params,
                                  Eigen::Matrix<double, kPoseDim, 1>(v))
              .first;
        },
        x, 1e-6);
    CHECK(test::relative_error(grad, fd) < 1e-6);
  }
}

TEST_CASE("weight gradient matches finite differences") {
  RngStream rng(6);
  MlpParams params = MlpParams::init(MlpParams::default_layer_sizes(), rng);
  std::vector<TrainSample> samples(8);
  for (auto& s : samples) {
    for (int k = 0; k < kPoseDim; ++k) s.pose[k] = rng.uniform(-1, 1);
    s.label = rng.uniform01();
  }
  const MlpParams grads = corpus_loss_gradient(params, samples);

  RngStream pick(99);
  const double h = 1e-6;
  for (int probe = 0; probe < 40; ++probe) {
    const size_t l = pick.uniform_int(0, static_cast<int>(params.weights.size()) - 1);
    const int r = pick.uniform_int(0, static_cast<int>(params.weights[l].rows()) - 1);
    const int c = pick.uniform_int(0, static_cast<int>(params.weights[l].cols()) - 1);
    MlpParams p_plus = params, p_minus = params;
    p_plus.weights[l](r, c) += h;
    p_minus.weights[l](r, c) -= h;
    const double fd =
        (corpus_loss(p_plus, samples) - corpus_loss(p_minus, samples)) / (2 * h);
    CHECK(grads.weights[l](r, c) ==
          doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    MlpParams b_plus = params, b_minus = params;
    b_plus.biases[l][r] += h;
    b_minus.biases[l][r] -= h;
    const double fd_b =
        (corpus_loss(b_plus, samples) - corpus_loss(b_minus, samples)) / (2 * h);
    CHECK(grads.biases[l][r] ==
          doctest::Approx(fd_b).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("untrained balanced hard-label loss starts near 0.25") {
  RngStream rng(7);
  // tiny weights give a near-constant 0.5 output
  MlpParams params = MlpParams::init(MlpParams::default_layer_sizes(), rng);
  for (auto& w : params.weights) w *= 1e-3;
  std::vector<TrainSample> natural, perturbed;
  for (int i = 0; i < 64; ++i) {
    TrainSample s;
    for (int k = 0; k < kPoseDim; ++k) s.pose[k] = rng.uniform(-1, 1);
    s.label = 1.0;
    natural.push_back(s);
    TrainSample t;
    for (int k = 0; k < kPoseDim; ++k) t.pose[k] = rng.uniform(-1, 1);
    t.label = 0.0;
    perturbed.push_back(t);
  }
  RngStream train_rng(8);
  const TrainResult result =
      train(params, natural, perturbed, 1, 1e-3, 32, train_rng);
  CHECK(result.loss_curve.front() == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("duplicating the corpus leaves the mean loss unchanged") {
  RngStream rng(9);
  const MlpParams params = MlpParams::init(MlpParams::default_layer_sizes(), rng);
  auto [natural, perturbed] = small_corpora(50, 10);
  std::vector<TrainSample> corpus = natural;
  corpus.insert(corpus.end(), perturbed.begin(), perturbed.end());
  std::vector<TrainSample> doubled = corpus;
  doubled.insert(doubled.end(), corpus.begin(), corpus.end());
  CHECK(corpus_loss(params, corpus) ==
        doctest::Approx(corpus_loss(params, doubled)).epsilon(1e-12));
}

TEST_CASE("training separates natural from heavily offset poses") {
  auto [natural, perturbed] = small_corpora(700, 11);
  // held-out split built before training
  std::vector<TrainSample> train_nat(natural.begin(), natural.begin() + 500);
  std::vector<TrainSample> test_nat(natural.begin() + 500, natural.end());
  std::vector<TrainSample> train_pert(perturbed.begin(), perturbed.begin() + 500);
  std::vector<TrainSample> test_pert(perturbed.begin() + 500, perturbed.end());

  RngStream rng(12);
  MlpParams params = MlpParams::init(MlpParams::default_layer_sizes(), rng);
  RngStream train_rng(13);
  const TrainResult result =
      train(std::move(params), train_nat, train_pert, 40, 1e-3, 64, train_rng);

  CHECK(result.loss_curve.back() < result.loss_curve.front());

  std::vector<double> pos, neg;
  for (const auto& s : test_nat) pos.push_back(predict(result.params, s.pose));
  for (const auto& s : test_pert) {
    if (s.label < 0.5) neg.push_back(predict(result.params, s.pose));
  }
  REQUIRE(pos.size() > 30);
  REQUIRE(neg.size() > 30);
  CHECK(test::auc(pos, neg) >= 0.9);

  // T-pose is natural
  CHECK(predict(result.params, Eigen::VectorXd::Zero(kPoseDim)) > 0.5);
}

TEST_CASE("shuffled labels cannot be separated on held-out data") {
  auto [natural, perturbed] = small_corpora(600, 14);
  RngStream label_rng(15);
  std::vector<TrainSample> pool;
  for (size_t i = 0; i < natural.size(); ++i)
    pool.push_back(i % 2 == 0 ? natural[i] : perturbed[i]);
  for (auto& s : pool) s.label = label_rng.uniform01() < 0.5 ? 0.0 : 1.0;

  std::vector<TrainSample> train_pos, train_neg, held_out;
  for (size_t i = 0; i < pool.size(); ++i) {
    if (i >= pool.size() / 2)
      held_out.push_back(pool[i]);
    else
      (pool[i].label > 0.5 ? train_pos : train_neg).push_back(pool[i]);
  }

  RngStream rng(16);
  MlpParams params = MlpParams::init(MlpParams::default_layer_sizes(), rng);
  RngStream train_rng(17);
  const TrainResult result =
      train(std::move(params), train_pos, train_neg, 15, 1e-3, 64, train_rng);

  std::vector<double> pos, neg;
  for (const auto& s : held_out)
    (s.label > 0.5 ? pos : neg).push_back(predict(result.params, s.pose));
  REQUIRE(pos.size() > 50);
  REQUIRE(neg.size() > 50);
  CHECK(std::abs(test::auc(pos, neg) - 0.5) < 0.12);
}

TEST_CASE("empty corpora are rejected") {
  RngStream rng(18);
  MlpParams params = MlpParams::init(MlpParams::default_layer_sizes(), rng);
  std::vector<TrainSample> empty, one(1);
  RngStream train_rng(19);
  CHECK_THROWS_AS(train(params, empty, one, 1, 1e-3, 8, train_rng), ConfigError);
  CHECK_THROWS_AS(train(params, one, empty, 1, 1e-3, 8, train_rng), ConfigError);
}

TEST_CASE("parameters round-trip through the binary file") {
  RngStream rng(20);
  const MlpParams params = MlpParams::init(MlpParams::default_layer_sizes(), rng);
  const std::string path = "/tmp/ihgen_test_disc.bin";
  save_discriminator(path, params);
  const MlpParams loaded = load_discriminator(path);
  REQUIRE(loaded.weights.size() == params.weights.size());
  for (size_t l = 0; l < params.weights.size(); ++l) {
    CHECK((loaded.weights[l] - params.weights[l]).norm() == 0.0);
    CHECK((loaded.biases[l] - params.biases[l]).norm() == 0.0);
  }
  std::filesystem::remove(path);

  CHECK_THROWS_AS(load_discriminator("/tmp/ihgen_missing.bin"), IoError);
}

TEST_CASE("side invariance of the adversarial term") {
  RngStream rng(21);
  const MlpParams params = MlpParams::init(MlpParams::default_layer_sizes(), rng);
  const JointLimits limits = JointLimits::defaults();
  RngStream pose_rng(22);
  for (int t = 0; t < 5; ++t) {
    const HandPose right =
        test::random_pose_in_limits(limits, Side::kRight, pose_rng);
    const HandPose left = mirror_pose(right);
    // mirroring back into right-hand convention recovers the same score
    const double d_right = predict(params, pose_to_vector(right));
    const double d_left = predict(params, pose_to_vector(mirror_pose(left)));
    CHECK(d_right == d_left);
  }
}
