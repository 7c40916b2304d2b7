#pragma once

#include "tsymp/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace testing {

using tsymp::Mat;
using tsymp::Vec;

// Hand-rolled generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal(double sigma = 1.0) { return std::normal_distribution<double>(0.0, sigma)(rng_); }

  Vec vec(Eigen::Index n, double sigma = 1.0) {
    Vec v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(sigma);
    return v;
  }

  Mat mat(Eigen::Index r, Eigen::Index c, double sigma = 1.0) {
    Mat m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = normal(sigma);
    return m;
  }

  Mat spd(Eigen::Index n) {
    const Mat a = mat(n, n);
    const Mat s = a * a.transpose() + 0.5 * Mat::Identity(n, n);
    return 0.5 * (s + s.transpose());
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// Plain three-point central difference of a scalar function.
inline Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h = 1e-5) {
  Vec g(x.size());
  Vec y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    y(i) = x(i) + h;
    const double fp = f(y);
    y(i) = x(i) - h;
    const double fm = f(y);
    y(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Componentwise relative error with a floor tied to the vector's scale.
inline double rel_error(const Vec& a, const Vec& b) {
  const double scale = std::max({a.lpNorm<Eigen::Infinity>(), b.lpNorm<Eigen::Infinity>(), 1e-12});
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double s = std::max({std::abs(a(i)), std::abs(b(i)), 1e-3 * scale});
    worst = std::max(worst, std::abs(a(i) - b(i)) / s);
  }
  return worst;
}

inline Mat symplectic_J(Eigen::Index n) {
  Mat J = Mat::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n).setIdentity();
  J.bottomLeftCorner(n, n) = -Mat::Identity(n, n);
  return J;
}

}  // namespace testing
