#ifndef RSCEV_TESTS_ORACLES_HPP
#define RSCEV_TESTS_ORACLES_HPP

// Reference values computed by routes that share no code with the library.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rscev/model.hpp"

namespace rscev::testing {

/// CIR conditional mean theta + (R - theta) e^{-kappa tau}.
inline double cir_mean(double kappa, double theta, double R, double tau) {
  return theta + (R - theta) * std::exp(-kappa * tau);
}

/// CIR conditional second moment from the mean and the textbook variance
/// R s^2/k (e^{-k t} - e^{-2 k t}) + theta s^2/(2k) (1 - e^{-k t})^2.
inline double cir_second_moment(double k, double theta, double s, double R, double tau) {
  const double e = std::exp(-k * tau);
  const double var = R * s * s / k * (e - e * e) + theta * s * s / (2.0 * k) * (1.0 - e) * (1.0 - e);
  const double m = cir_mean(k, theta, R, tau);
  return var + m * m;
}

/// E[R_tau^2] for beta = 0, where d(R^2) = (2 k theta + s^2 - 2 k R^2) dt + 2 s R dW.
inline double ou_like_second_moment(double k, double theta, double s, double R, double tau) {
  const double level = theta + s * s / (2.0 * k);
  return level + (R * R - level) * std::exp(-2.0 * k * tau);
}

/// E[1/R_tau] for beta = 3 (High, alpha = 1): Y = 1/R has
/// dY = (k Y + s^2 - k theta) dt - s sqrt(Y) dW.
inline double inverse_feller_reciprocal_mean(double k, double theta, double s, double R,
                                             double tau) {
  const double e = std::exp(k * tau);
  return e / R + (s * s - k * theta) / k * (e - 1.0);
}

/// E[R_tau^{n/alpha} | R, X_0 = state] from the forward equations for
/// u_{l,j}(t) = E[R_t^{e_l} 1{X_t = j}], e_l = sign(n) l / alpha, integrated
/// by classical RK4. The drift of R^e is read straight off Ito's formula:
///   e k theta R^{e+beta-2} - e k R^e + e (e-1) s^2 / 2 R^{e+beta-2}.
inline double forward_moment(const RegimeModeld& model, int n, double tau, double R, int state,
                             int rk_steps = 4000) {
  const int m = static_cast<int>(model.states());
  const int L = std::abs(n);
  const double sign = n >= 0 ? 1.0 : -1.0;
  const double beta = model.beta();
  const Eigen::MatrixXd& q = model.generator().matrix();
  std::vector<double> e(static_cast<std::size_t>(L + 1));
  for (int l = 0; l <= L; ++l) e[static_cast<std::size_t>(l)] = sign * l / model.alpha();
  for (int l = 1; l <= L; ++l) {
    if (std::abs(e[static_cast<std::size_t>(l)] + beta - 2.0 - e[static_cast<std::size_t>(l - 1)]) >
        1e-12) {
      throw std::logic_error("forward_moment: exponent ladder does not close");
    }
  }

  using Mat = Eigen::MatrixXd;  // rows: level, cols: state
  const auto rhs = [&](const Mat& u) {
    Mat du = u * q;
    for (int l = 0; l <= L; ++l) {
      const double el = e[static_cast<std::size_t>(l)];
      for (int j = 0; j < m; ++j) {
        const double k = model.kappa(j);
        const double th = model.theta(j);
        const double s = model.sigma(j);
        du(l, j) -= el * k * u(l, j);
        if (l > 0) du(l, j) += (el * k * th + 0.5 * el * (el - 1.0) * s * s) * u(l - 1, j);
      }
    }
    return du;
  };

  Mat u = Mat::Zero(L + 1, m);
  for (int l = 0; l <= L; ++l) u(l, state) = std::pow(R, e[static_cast<std::size_t>(l)]);
  if (tau > 0.0) {
    const double dt = tau / rk_steps;
    for (int k = 0; k < rk_steps; ++k) {
      const Mat k1 = rhs(u);
      const Mat k2 = rhs(u + 0.5 * dt * k1);
      const Mat k3 = rhs(u + 0.5 * dt * k2);
      const Mat k4 = rhs(u + dt * k3);
      u += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  return u.row(L).sum();
}

/// The two parameter sets used in the validation runs, with Q = [[-1,1],[1,-1]].
inline GeneratorMatrixd symmetric_pair() {
  Eigen::MatrixXd q(2, 2);
  q << -1.0, 1.0, 1.0, -1.0;
  return validate_generator<double>(q);
}

inline RegimeModeld validation_low(double alpha) {
  ModelParams<double> p;
  p.branch = ElasticityBranch::Low;
  p.alpha = alpha;
  p.kappa = Eigen::Vector2d(0.01, 0.5);
  p.theta = Eigen::Vector2d(1.0, 0.5);
  p.sigma = Eigen::Vector2d(0.09, 0.15);
  return validate_model(p, symmetric_pair());
}

inline RegimeModeld validation_high(double alpha) {
  ModelParams<double> p;
  p.branch = ElasticityBranch::High;
  p.alpha = alpha;
  p.kappa = Eigen::Vector2d(-0.01, -0.5);
  p.theta = Eigen::Vector2d(1.0, 0.5);
  p.sigma = Eigen::Vector2d(-0.09, -0.15);
  return validate_model(p, symmetric_pair());
}

inline RegimeModeld single_state(ElasticityBranch b, double alpha, double kappa, double theta,
                                 double sigma) {
  ModelParams<double> p;
  p.branch = b;
  p.alpha = alpha;
  p.kappa = Eigen::VectorXd::Constant(1, kappa);
  p.theta = Eigen::VectorXd::Constant(1, theta);
  p.sigma = Eigen::VectorXd::Constant(1, sigma);
  return validate_model(p, GeneratorMatrixd::single_state());
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace rscev::testing

#endif  // RSCEV_TESTS_ORACLES_HPP
