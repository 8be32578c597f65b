#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ihgen/hand_model.hpp"
#include "ihgen/rng.hpp"

namespace ihgen {

// Naturalness prior over 45-dim single-hand pose vectors: a small MLP with
// leaky-rectifier hidden layers and a logistic output in (0, 1). Left-hand
// poses must be mirrored into right-hand convention before scoring.
struct MlpParams {
  std::vector<Eigen::MatrixXd> weights;  // layer l: (out x in)
  std::vector<Eigen::VectorXd> biases;

  static constexpr double kLeakySlope = 0.01;
  static std::vector<int> default_layer_sizes() { return {45, 128, 128, 64, 1}; }

  static MlpParams init(const std::vector<int>& sizes, RngStream& rng);
  int input_dim() const { return static_cast<int>(weights.front().cols()); }
};

struct TrainSample {
  Eigen::Matrix<double, kPoseDim, 1> pose;
  double label = 1.0;  // natural probability p_n in [0, 1]
};

// p_n = max(0, 1 - |offsets| / rho_max), where rho_max is the norm of the
// maximal augmentation offsets (all 15 bends at 90 deg, all 5 root splays at
// 30 deg). Monotone non-increasing in every component.
double label_probability(const Eigen::Matrix<double, kPoseDim, 1>& offsets);
double label_probability_rho_max();

double predict(const MlpParams& params, const Eigen::VectorXd& pose_vec);

// Forward pass plus gradient of the output w.r.t. the input vector.
std::pair<double, Eigen::VectorXd> predict_with_input_gradient(
    const MlpParams& params, const Eigen::VectorXd& pose_vec);

// L_adv = (D(pose) - 1)^2 and its gradient w.r.t. the 45 pose angles.
std::pair<double, Eigen::Matrix<double, kPoseDim, 1>> adversarial_loss(
    const MlpParams& params, const Eigen::Matrix<double, kPoseDim, 1>& pose_vec);

// Mean squared error of predictions against labels over the corpus.
double corpus_loss(const MlpParams& params,
                   const std::vector<TrainSample>& samples);

// Gradient of corpus_loss w.r.t. every weight/bias, same shapes as params.
MlpParams corpus_loss_gradient(const MlpParams& params,
                               const std::vector<TrainSample>& samples);

struct TrainResult {
  MlpParams params;
  std::vector<double> loss_curve;  // pre-epoch corpus loss, epochs + 1 entries
};

// Mini-batch Adam on the soft-label MSE. Natural samples carry label 1,
// perturbed samples their p_n. Throws ConfigError on an empty corpus.
TrainResult train(MlpParams params, const std::vector<TrainSample>& natural,
                  const std::vector<TrainSample>& perturbed, int epochs,
                  double learning_rate, int batch_size, RngStream& rng);

// Flat little-endian binary: magic "IHD1", u32 version, u32 layer count,
// u32 sizes, then row-major f64 weight matrices and bias vectors per layer.
void save_discriminator(const std::string& path, const MlpParams& params);
MlpParams load_discriminator(const std::string& path);

}  // namespace ihgen
