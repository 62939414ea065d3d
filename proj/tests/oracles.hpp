#pragma once
// Independent reference computations used by the tests. Nothing here calls
// into the library's own eigen, percentile or control code.

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dvfinv/spectral.hpp"

namespace oracle {

inline Eigen::MatrixXd to_eigen(const dvfinv::Mat3& m, int dim) {
  Eigen::MatrixXd e(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) e(i, j) = m[i][j];
  return e;
}

inline std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  std::vector<std::complex<double>> out;
  for (int i = 0; i < m.rows(); ++i) out.push_back(es.eigenvalues()[i]);
  return out;
}

inline double spectral_radius(const Eigen::MatrixXd& m) {
  double r = 0.0;
  for (auto z : eigenvalues(m)) r = std::max(r, std::abs(z));
  return r;
}

// Q(mu) = mu I - (1 - mu) J_u built explicitly as a matrix.
inline Eigen::MatrixXd propagation(const Eigen::MatrixXd& ju, double mu) {
  const auto n = ju.rows();
  return mu * Eigen::MatrixXd::Identity(n, n) - (1.0 - mu) * ju;
}

inline double rho_q(const Eigen::MatrixXd& ju, double mu) { return spectral_radius(propagation(ju, mu)); }

// min_j Re(1 / lambda_j(I + J_u)).
inline double gamma(const Eigen::MatrixXd& ju) {
  const auto n = ju.rows();
  double g = INFINITY;
  for (auto z : eigenvalues(Eigen::MatrixXd::Identity(n, n) + ju)) g = std::min(g, (1.0 / z).real());
  return g;
}

// Open-interval grid of `n` control values in (-1, 1).
inline std::vector<double> mu_grid(int n) {
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = -1.0 + 2.0 * (i + 1) / (n + 1);
  return g;
}

// Random displacement Jacobians whose transformation Jacobian is controllable
// (gamma > 0), mixing small, moderate and strongly non-translational samples.
struct JacobianSampler {
  std::mt19937_64 rng;
  explicit JacobianSampler(unsigned long long seed) : rng(seed) {}

  dvfinv::Mat3 next(int dim) {
    std::uniform_real_distribution<double> scale_pick(0.0, 1.0);
    for (;;) {
      const double p = scale_pick(rng);
      const double scale = p < 0.3 ? 0.3 : p < 0.7 ? 1.0 : 2.5;
      std::normal_distribution<double> entry(0.0, scale / std::sqrt(static_cast<double>(dim)));
      dvfinv::Mat3 m{};
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m[i][j] = entry(rng);
      const double g = gamma(to_eigen(m, dim));
      // Keep away from gamma = 0 where the feasible range degenerates.
      if (g > 1e-3) return m;
    }
  }
};

// Smallest sample tau with #(x <= tau) / n > beta / 100, by direct scan.
inline double percentile_scan(const std::vector<double>& xs, double beta) {
  double best = INFINITY;
  const double n = static_cast<double>(xs.size());
  for (double tau : xs) {
    std::size_t c = 0;
    for (double x : xs) c += x <= tau ? 1 : 0;
    if (static_cast<double>(c) / n > beta / 100.0) best = std::min(best, tau);
  }
  return best;
}

}  // namespace oracle
