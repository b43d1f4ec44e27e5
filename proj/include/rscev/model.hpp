#ifndef RSCEV_MODEL_HPP
#define RSCEV_MODEL_HPP

// Regime-switching NLD-CEV model
//
//   dR = kappa_X (theta_X R^{-(1-beta)} - R) dt + sigma_X R^{beta/2} dW,
//
// with per-state constants and an elasticity branch:
//   Low:  beta = (2 alpha - 1)/alpha in [0, 2),   alpha >= 1/2
//   High: beta = (2 alpha + 1)/alpha in (2, inf),  alpha > 0
//
// High-branch models store kappa and sigma as negative numbers.

#include <cmath>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Dense>

#include "rscev/error.hpp"
#include "rscev/markov.hpp"

namespace rscev {

enum class ElasticityBranch { Low, High };

constexpr std::string_view to_string(ElasticityBranch b) {
  return b == ElasticityBranch::Low ? "low" : "high";
}

template <typename Scalar = double>
Scalar beta_from_alpha(ElasticityBranch branch, Scalar alpha) {
  if (branch == ElasticityBranch::Low) {
    if (!(alpha >= Scalar(0.5)) || !std::isfinite(static_cast<double>(alpha))) {
      throw Error(ErrorCode::AlphaOutOfRange, "low branch requires alpha >= 1/2");
    }
    return (Scalar(2) * alpha - Scalar(1)) / alpha;
  }
  if (!(alpha > Scalar(0)) || !std::isfinite(static_cast<double>(alpha))) {
    throw Error(ErrorCode::AlphaOutOfRange, "high branch requires alpha > 0");
  }
  return (Scalar(2) * alpha + Scalar(1)) / alpha;
}

/// Unvalidated model fields, as read from a config or built by hand.
template <typename Scalar = double>
struct ModelParams {
  ElasticityBranch branch = ElasticityBranch::Low;
  Scalar alpha = Scalar(1);
  VectorX<Scalar> kappa;
  VectorX<Scalar> theta;
  VectorX<Scalar> sigma;
};

template <typename Scalar>
class RegimeModel;

template <typename Scalar>
RegimeModel<Scalar> validate_model(const ModelParams<Scalar>& params, GeneratorMatrix<Scalar> gen);

/// A validated regime-switching model: branch assumptions hold in every state.
template <typename Scalar = double>
class RegimeModel {
 public:
  using Vector = VectorX<Scalar>;

  ElasticityBranch branch() const { return params_.branch; }
  Scalar alpha() const { return params_.alpha; }
  Scalar beta() const { return beta_; }
  const Vector& kappa() const { return params_.kappa; }
  const Vector& theta() const { return params_.theta; }
  const Vector& sigma() const { return params_.sigma; }
  Scalar kappa(Eigen::Index i) const { return params_.kappa(i); }
  Scalar theta(Eigen::Index i) const { return params_.theta(i); }
  Scalar sigma(Eigen::Index i) const { return params_.sigma(i); }
  const GeneratorMatrix<Scalar>& generator() const { return gen_; }
  const ModelParams<Scalar>& params() const { return params_; }
  Eigen::Index states() const { return gen_.size(); }

  /// True when every state carries the same (kappa, theta, sigma).
  bool identical_states() const {
    for (Eigen::Index i = 1; i < states(); ++i) {
      if (kappa(i) != kappa(0) || theta(i) != theta(0) || sigma(i) != sigma(0)) return false;
    }
    return true;
  }

 private:
  RegimeModel(ModelParams<Scalar> params, GeneratorMatrix<Scalar> gen, Scalar beta)
      : params_(std::move(params)), gen_(std::move(gen)), beta_(beta) {}
  friend RegimeModel validate_model<Scalar>(const ModelParams<Scalar>&, GeneratorMatrix<Scalar>);

  ModelParams<Scalar> params_;
  GeneratorMatrix<Scalar> gen_;
  Scalar beta_;
};

using RegimeModeld = RegimeModel<double>;

template <typename Scalar>
RegimeModel<Scalar> validate_model(const ModelParams<Scalar>& params, GeneratorMatrix<Scalar> gen) {
  const Eigen::Index m = gen.size();
  if (params.kappa.size() != m || params.theta.size() != m || params.sigma.size() != m) {
    throw Error(ErrorCode::DimensionMismatch,
                "kappa/theta/sigma must each have " + std::to_string(m) + " entries");
  }
  const Scalar beta = beta_from_alpha(params.branch, params.alpha);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Scalar k = params.kappa(i);
    const Scalar th = params.theta(i);
    const Scalar s = params.sigma(i);
    const std::string where = " in state " + std::to_string(i + 1);
    if (params.branch == ElasticityBranch::Low) {
      if (!(k > Scalar(0) && th > Scalar(0) && s > Scalar(0))) {
        throw Error(ErrorCode::SignViolation, "low branch needs kappa, theta, sigma > 0" + where);
      }
      if (!(Scalar(2) * k * th >= s * s)) {
        throw Error(ErrorCode::FellerViolation, "2 kappa theta < sigma^2" + where);
      }
    } else {
      if (!(-k > Scalar(0) && th > Scalar(0) && -s > Scalar(0))) {
        throw Error(ErrorCode::SignViolation, "high branch needs -kappa, theta, -sigma > 0" + where);
      }
    }
  }
  return RegimeModel<Scalar>(params, std::move(gen), beta);
}

/// Coefficients of the ECIR process V = R^{2-beta}:
/// dV = A (B - V) dt + C sqrt(V) dW.
template <typename Scalar = double>
struct EcirParams {
  Scalar A;
  Scalar B;
  Scalar C;
};

template <typename Scalar>
EcirParams<Scalar> to_ecir(const RegimeModel<Scalar>& model, Eigen::Index state) {
  if (state < 0 || state >= model.states()) {
    throw Error(ErrorCode::InvalidArgument, "state out of range");
  }
  const Scalar beta = model.beta();
  if (beta == Scalar(2)) {
    throw Error(ErrorCode::DegenerateBeta, "beta = 2 has no ECIR image");
  }
  const Scalar k = model.kappa(state);
  const Scalar s = model.sigma(state);
  return {(Scalar(2) - beta) * k,
          model.theta(state) + (Scalar(1) - beta) * s * s / (Scalar(2) * k),
          (Scalar(2) - beta) * s};
}

}  // namespace rscev

#endif  // RSCEV_MODEL_HPP
