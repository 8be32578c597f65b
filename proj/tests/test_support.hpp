#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <vector>

#include "ihgen/hand_model.hpp"
#include "ihgen/pose_synthesis.hpp"
#include "ihgen/rng.hpp"

namespace ihgen::test {

// Central finite differences of a scalar function over a flat vector.
inline Eigen::VectorXd finite_difference(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd grad(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    grad[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return grad;
}

inline double relative_error(const Eigen::VectorXd& a,
                             const Eigen::VectorXd& b) {
  const double denom = std::max({a.norm(), b.norm(), 1e-12});
  return (a - b).norm() / denom;
}

// Random pose with all angles inside the limit ranges.
inline HandPose random_pose_in_limits(const JointLimits& limits, Side side,
                                      RngStream& rng) {
  HandPose pose;
  pose.side = side;
  for (int f = 0; f < kNumFingers; ++f)
    for (int level = 0; level < 3; ++level) {
      const int tj = theta_index(f, level);
      const AngleRange b = limits.range(f, level, kBend);
      pose.theta(tj, kBend) = rng.uniform(b.lo, b.hi);
      if (level == 0) {
        const AngleRange s = limits.range(f, level, kSplay);
        pose.theta(tj, kSplay) = rng.uniform(s.lo, s.hi);
      }
    }
  return pose;
}

inline Eigen::Quaterniond random_rotation(RngStream& rng) {
  const Vec3 axis =
      Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
  return Eigen::Quaterniond(
      Eigen::AngleAxisd(rng.uniform(-3.0, 3.0), axis));
}

// Rank-based AUC of scores for positive vs negative labels.
inline double auc(const std::vector<double>& positives,
                  const std::vector<double>& negatives) {
  double wins = 0.0;
  for (double p : positives)
    for (double n : negatives) {
      if (p > n)
        wins += 1.0;
      else if (p == n)
        wins += 0.5;
    }
  return wins / (static_cast<double>(positives.size()) * negatives.size());
}

}  // namespace ihgen::test
