#include "ihgen/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <numeric>

#include "ihgen/errors.hpp"

namespace ihgen {

namespace {

double leaky(double x) { return x > 0.0 ? x : MlpParams::kLeakySlope * x; }
double leaky_grad(double x) { return x > 0.0 ? 1.0 : MlpParams::kLeakySlope; }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Forward pass keeping pre-activations for backprop.
struct ForwardTrace {
  std::vector<Eigen::VectorXd> activations;  // a[0] = input, a[L] = output
  std::vector<Eigen::VectorXd> pre;          // z[l] per layer
};

ForwardTrace forward(const MlpParams& p, const Eigen::VectorXd& input) {
  ForwardTrace t;
  t.activations.push_back(input);
  const size_t layers = p.weights.size();
  for (size_t l = 0; l < layers; ++l) {
    Eigen::VectorXd z = p.weights[l] * t.activations.back() + p.biases[l];
    t.pre.push_back(z);
    Eigen::VectorXd a(z.size());
    if (l + 1 < layers)
      for (int i = 0; i < z.size(); ++i) a[i] = leaky(z[i]);
    else
      for (int i = 0; i < z.size(); ++i) a[i] = sigmoid(z[i]);
    t.activations.push_back(std::move(a));
  }
  return t;
}

// Backprop from d(loss)/d(output scalar); accumulates weight grads when
// grads != nullptr and returns d(loss)/d(input).
Eigen::VectorXd backward(const MlpParams& p, const ForwardTrace& t,
                         double d_output, MlpParams* grads) {
  const size_t layers = p.weights.size();
  const double out = t.activations.back()[0];
  Eigen::VectorXd delta(1);
  delta[0] = d_output * out * (1.0 - out);  // through the logistic
  for (size_t l = layers; l-- > 0;) {
    if (grads) {
      grads->weights[l] += delta * t.activations[l].transpose();
      grads->biases[l] += delta;
    }
    Eigen::VectorXd prev = p.weights[l].transpose() * delta;
    if (l > 0)
      for (int i = 0; i < prev.size(); ++i)
        prev[i] *= leaky_grad(t.pre[l - 1][i]);
    delta = std::move(prev);
  }
  return delta;
}

MlpParams zeros_like(const MlpParams& p) {
  MlpParams g;
  for (const auto& w : p.weights) g.weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  for (const auto& b : p.biases) g.biases.push_back(Eigen::VectorXd::Zero(b.size()));
  return g;
}

}  // namespace

MlpParams MlpParams::init(const std::vector<int>& sizes, RngStream& rng) {
  if (sizes.size() < 2) throw ConfigError("MLP needs at least two layer sizes");
  MlpParams p;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double scale = std::sqrt(2.0 / sizes[l]);
    Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) w(r, c) = scale * rng.normal();
    p.weights.push_back(std::move(w));
    p.biases.push_back(Eigen::VectorXd::Zero(sizes[l + 1]));
  }
  return p;
}

double label_probability_rho_max() {
  const double bend_max = std::numbers::pi / 2.0;
  const double splay_max = std::numbers::pi / 6.0;
  return std::sqrt(15.0 * bend_max * bend_max + 5.0 * splay_max * splay_max);
}

double label_probability(const Eigen::Matrix<double, kPoseDim, 1>& offsets) {
  return std::max(0.0, 1.0 - offsets.norm() / label_probability_rho_max());
}

double predict(const MlpParams& params, const Eigen::VectorXd& pose_vec) {
  return forward(params, pose_vec).activations.back()[0];
}

std::pair<double, Eigen::VectorXd> predict_with_input_gradient(
    const MlpParams& params, const Eigen::VectorXd& pose_vec) {
  const ForwardTrace t = forward(params, pose_vec);
  Eigen::VectorXd g = backward(params, t, 1.0, nullptr);
  return {t.activations.back()[0], std::move(g)};
}

std::pair<double, Eigen::Matrix<double, kPoseDim, 1>> adversarial_loss(
    const MlpParams& params,
    const Eigen::Matrix<double, kPoseDim, 1>& pose_vec) {
  const auto [d, dgrad] = predict_with_input_gradient(params, pose_vec);
  const double loss = (d - 1.0) * (d - 1.0);
  return {loss, (2.0 * (d - 1.0)) * dgrad};
}

double corpus_loss(const MlpParams& params,
                   const std::vector<TrainSample>& samples) {
  double sum = 0.0;
  for (const auto& s : samples) {
    const double d = predict(params, s.pose);
    sum += (d - s.label) * (d - s.label);
  }
  return sum / static_cast<double>(samples.size());
}

MlpParams corpus_loss_gradient(const MlpParams& params,
                               const std::vector<TrainSample>& samples) {
  MlpParams grads = zeros_like(params);
  for (const auto& s : samples) {
    const ForwardTrace t = forward(params, s.pose);
    const double d = t.activations.back()[0];
    backward(params, t, 2.0 * (d - s.label) / samples.size(), &grads);
  }
  return grads;
}

TrainResult train(MlpParams params, const std::vector<TrainSample>& natural,
                  const std::vector<TrainSample>& perturbed, int epochs,
                  double learning_rate, int batch_size, RngStream& rng) {
  if (natural.empty() || perturbed.empty())
    throw ConfigError("discriminator training corpus is empty");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");

  std::vector<TrainSample> corpus = natural;
  corpus.insert(corpus.end(), perturbed.begin(), perturbed.end());

  // Adam state over the flattened parameters.
  MlpParams m = zeros_like(params), v = zeros_like(params);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  long step = 0;

  TrainResult result;
  result.loss_curve.push_back(corpus_loss(params, corpus));

  std::vector<int> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < epochs; ++epoch) {
    // Fisher-Yates with the deterministic stream
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[rng.uniform_int(0, static_cast<int>(i) - 1)]);

    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(batch_size)) {
      const size_t end = std::min(order.size(), start + batch_size);
      MlpParams grads = zeros_like(params);
      for (size_t idx = start; idx < end; ++idx) {
        const TrainSample& s = corpus[order[idx]];
        const ForwardTrace t = forward(params, s.pose);
        const double d = t.activations.back()[0];
        backward(params, t, 2.0 * (d - s.label) / (end - start), &grads);
      }
      ++step;
      const double corr1 = 1.0 - std::pow(b1, step);
      const double corr2 = 1.0 - std::pow(b2, step);
      for (size_t l = 0; l < params.weights.size(); ++l) {
        auto adam = [&](Eigen::MatrixXd& p, Eigen::MatrixXd& mm,
                        Eigen::MatrixXd& vv, const Eigen::MatrixXd& g) {
          mm = b1 * mm + (1.0 - b1) * g;
          vv = b2 * vv + (1.0 - b2) * g.cwiseProduct(g);
          p -= learning_rate *
               ((mm / corr1).array() / ((vv / corr2).array().sqrt() + eps))
                   .matrix();
        };
        adam(params.weights[l], m.weights[l], v.weights[l], grads.weights[l]);
        Eigen::MatrixXd bm = m.biases[l], bv = v.biases[l], bg = grads.biases[l];
        Eigen::MatrixXd bp = params.biases[l];
        adam(bp, bm, bv, bg);
        params.biases[l] = bp;
        m.biases[l] = bm;
        v.biases[l] = bv;
      }
    }
    result.loss_curve.push_back(corpus_loss(params, corpus));
  }
  result.params = std::move(params);
  return result;
}

void save_discriminator(const std::string& path, const MlpParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write discriminator file: " + path);
  const char magic[4] = {'I', 'H', 'D', '1'};
  out.write(magic, 4);
  auto put_u32 = [&](std::uint32_t x) {
    out.write(reinterpret_cast<const char*>(&x), 4);
  };
  put_u32(1);  // version
  put_u32(static_cast<std::uint32_t>(params.weights.size()));
  put_u32(static_cast<std::uint32_t>(params.weights.front().cols()));
  for (const auto& w : params.weights)
    put_u32(static_cast<std::uint32_t>(w.rows()));
  for (size_t l = 0; l < params.weights.size(); ++l) {
    const Eigen::MatrixXd& w = params.weights[l];
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) {
        const double x = w(r, c);
        out.write(reinterpret_cast<const char*>(&x), 8);
      }
    const Eigen::VectorXd& b = params.biases[l];
    out.write(reinterpret_cast<const char*>(b.data()),
              static_cast<std::streamsize>(8 * b.size()));
  }
  if (!out) throw IoError("short write to discriminator file: " + path);
}

MlpParams load_discriminator(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open discriminator file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "IHD1", 4) != 0)
    throw IoError("bad discriminator magic in " + path);
  auto get_u32 = [&]() {
    std::uint32_t x = 0;
    in.read(reinterpret_cast<char*>(&x), 4);
    return x;
  };
  const std::uint32_t version = get_u32();
  if (version != 1)
    throw IoError("unsupported discriminator version in " + path);
  const std::uint32_t layers = get_u32();
  if (layers == 0 || layers > 64)
    throw IoError("implausible layer count in " + path);
  std::vector<int> sizes{static_cast<int>(get_u32())};
  for (std::uint32_t l = 0; l < layers; ++l)
    sizes.push_back(static_cast<int>(get_u32()));

  MlpParams p;
  for (std::uint32_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c)
        in.read(reinterpret_cast<char*>(&w(r, c)), 8);
    Eigen::VectorXd b(sizes[l + 1]);
    in.read(reinterpret_cast<char*>(b.data()),
            static_cast<std::streamsize>(8 * b.size()));
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  if (!in) throw IoError("truncated discriminator file: " + path);
  return p;
}

}  // namespace ihgen
