#ifndef RSCEV_MOMENTS_HPP
#define RSCEV_MOMENTS_HPP

// Fractional-order conditional moments
//
//   U_i(tau, R) = E[ R_T^{n/alpha} | R_t = R, X_t = i ],  tau = T - t,
//
// expanded as U_i = sum_k A_i^<k>(tau) R^{+-k/alpha} (sign + on the Low
// branch, - on the High branch). The coefficient vectors u^<l> = (A_j^<l>)_j
// obey the cascade
//
//   u^<L>' = P^<L> u^<L>,                  u^<L>(0) = 1,
//   u^<l>' = P^<l> u^<l> + D^<l> u^<l+1>,   u^<l>(0) = 0,  l < L = |n|,
//
// which is block upper-bidiagonal and constant-coefficient, so the whole
// cascade is one matrix exponential of dimension (L+1) m.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "rscev/error.hpp"
#include "rscev/markov.hpp"
#include "rscev/model.hpp"

namespace rscev {

/// Largest admissible tau * max|diagonal| of the cascade matrix.
inline constexpr double kExponentGuard = 700.0;

/// Integer moment order n; the moment is R^{n/alpha}.
struct MomentOrder {
  int n = 0;

  int levels() const { return std::abs(n); }
};

inline void check_order(ElasticityBranch branch, MomentOrder order) {
  if (branch == ElasticityBranch::Low && order.n < 0) {
    throw Error(ErrorCode::BranchMismatch, "low branch supports n >= 0 only");
  }
  if (branch == ElasticityBranch::High && order.n > 0) {
    throw Error(ErrorCode::BranchMismatch, "high branch supports n <= 0 only");
  }
}

template <typename Scalar = double>
struct SystemMatrices {
  std::vector<MatrixX<Scalar>> P;  // P^<l>, l = 0..L
  std::vector<VectorX<Scalar>> D;  // diagonal of D^<l>, l = 0..L-1

  int levels() const { return static_cast<int>(P.size()) - 1; }
  Eigen::Index states() const { return P.empty() ? 0 : P.front().rows(); }
};

/// gamma_i^<l> (Low) or gamma-bar_i^<l> (High): the coupling from level l+1
/// down to level l in state i.
template <typename Scalar>
Scalar level_coupling(const RegimeModel<Scalar>& model, Eigen::Index state, int level) {
  const Scalar p = Scalar(level + 1) / model.alpha();
  const Scalar k = model.kappa(state);
  const Scalar th = model.theta(state);
  const Scalar s2 = model.sigma(state) * model.sigma(state);
  if (model.branch() == ElasticityBranch::Low) {
    return p * (k * th + Scalar(0.5) * s2 * (p - Scalar(1)));
  }
  return p * (-k * th + Scalar(0.5) * s2 * (p + Scalar(1)));
}

template <typename Scalar>
SystemMatrices<Scalar> build_system(const RegimeModel<Scalar>& model, MomentOrder order) {
  check_order(model.branch(), order);
  const int L = order.levels();
  const Eigen::Index m = model.states();
  const Scalar sign = model.branch() == ElasticityBranch::Low ? Scalar(-1) : Scalar(1);

  SystemMatrices<Scalar> sys;
  sys.P.reserve(static_cast<std::size_t>(L + 1));
  sys.D.reserve(static_cast<std::size_t>(L));
  for (int l = 0; l <= L; ++l) {
    MatrixX<Scalar> p = model.generator().matrix();
    p.diagonal() += sign * model.kappa() * (Scalar(l) / model.alpha());
    sys.P.push_back(std::move(p));
  }
  for (int l = 0; l < L; ++l) {
    VectorX<Scalar> d(m);
    for (Eigen::Index i = 0; i < m; ++i) d(i) = level_coupling(model, i, l);
    sys.D.push_back(std::move(d));
  }
  return sys;
}

/// Stacked generator of the cascade, ordered (u^<0>, u^<1>, ..., u^<L>).
template <typename Scalar>
MatrixX<Scalar> cascade_matrix(const SystemMatrices<Scalar>& sys) {
  const Eigen::Index m = sys.states();
  const int L = sys.levels();
  const Eigen::Index dim = (L + 1) * m;
  MatrixX<Scalar> a = MatrixX<Scalar>::Zero(dim, dim);
  for (int l = 0; l <= L; ++l) {
    a.block(l * m, l * m, m, m) = sys.P[static_cast<std::size_t>(l)];
    if (l < L) {
      a.block(l * m, (l + 1) * m, m, m) = sys.D[static_cast<std::size_t>(l)].asDiagonal();
    }
  }
  return a;
}

/// Coefficients A_j^<k>(tau) for one moment order, indexed (state j, level k).
template <typename Scalar = double>
struct CoefficientTable {
  Scalar tau = Scalar(0);
  MomentOrder order;
  Scalar alpha = Scalar(1);
  MatrixX<Scalar> coeffs;

  /// sum_k coeffs(state, k) R^{+-k/alpha}; powers go through exp/log, so R > 0.
  Scalar moment(Scalar R, Eigen::Index state) const {
    using std::exp;
    using std::log;
    if (!(R > Scalar(0))) throw Error(ErrorCode::InvalidArgument, "R must be positive");
    if (state < 0 || state >= coeffs.rows()) {
      throw Error(ErrorCode::InvalidArgument, "state out of range");
    }
    const Scalar sign = order.n >= 0 ? Scalar(1) : Scalar(-1);
    const Scalar log_r = log(R);
    Scalar sum = coeffs(state, 0);
    for (Eigen::Index k = 1; k < coeffs.cols(); ++k) {
      sum += coeffs(state, k) * exp(sign * (Scalar(k) / alpha) * log_r);
    }
    return sum;
  }
};

namespace detail {

template <typename Scalar>
void check_tau(Scalar tau) {
  if (!(tau >= Scalar(0)) || !std::isfinite(static_cast<double>(tau))) {
    throw Error(ErrorCode::InvalidArgument, "tau must be finite and >= 0");
  }
}

template <typename Scalar>
MatrixX<Scalar> cascade_exponential(const MatrixX<Scalar>& a, Scalar tau) {
  using std::abs;
  const Scalar max_diag = a.diagonal().cwiseAbs().maxCoeff();
  if (static_cast<double>(tau * max_diag) > kExponentGuard) {
    throw Error(ErrorCode::NonFiniteResult,
                "tau * max|diagonal| = " + std::to_string(static_cast<double>(tau * max_diag)) +
                    " exceeds " + std::to_string(kExponentGuard));
  }
  MatrixX<Scalar> e = (tau * a).exp();
  if (!e.allFinite()) {
    throw Error(ErrorCode::NonFiniteResult, "cascade exponential overflowed");
  }
  return e;
}

template <typename Scalar>
CoefficientTable<Scalar> table_from_exponential(const MatrixX<Scalar>& e, Eigen::Index m,
                                                MomentOrder order, Scalar alpha, Scalar tau) {
  const int L = order.levels();
  CoefficientTable<Scalar> table{tau, order, alpha, MatrixX<Scalar>(m, L + 1)};
  // u(tau) = exp(tau M) u(0), with u(0) = 1 on the top level only.
  const VectorX<Scalar> u = e.block(0, L * m, (L + 1) * m, m).rowwise().sum();
  for (int k = 0; k <= L; ++k) table.coeffs.col(k) = u.segment(k * m, m);
  return table;
}

}  // namespace detail

template <typename Scalar>
CoefficientTable<Scalar> solve_coefficients(const RegimeModel<Scalar>& model, MomentOrder order,
                                            Scalar tau) {
  detail::check_tau(tau);
  const SystemMatrices<Scalar> sys = build_system(model, order);
  const Eigen::Index m = model.states();
  const int L = order.levels();
  if (tau == Scalar(0)) {
    CoefficientTable<Scalar> table{tau, order, model.alpha(), MatrixX<Scalar>::Zero(m, L + 1)};
    table.coeffs.col(L).setOnes();
    return table;
  }
  const MatrixX<Scalar> e = detail::cascade_exponential(cascade_matrix(sys), tau);
  return detail::table_from_exponential(e, m, order, model.alpha(), tau);
}

/// Tables for every order 0..max_order (same sign) from a single exponential:
/// the order-n cascade is the leading block of the order-N cascade, and the
/// exponential of a block upper-triangular matrix preserves that structure.
template <typename Scalar>
std::vector<CoefficientTable<Scalar>> solve_coefficient_family(const RegimeModel<Scalar>& model,
                                                               MomentOrder max_order, Scalar tau) {
  detail::check_tau(tau);
  const SystemMatrices<Scalar> sys = build_system(model, max_order);
  const Eigen::Index m = model.states();
  const int N = max_order.levels();
  const int sign = max_order.n >= 0 ? 1 : -1;
  MatrixX<Scalar> e;
  if (tau == Scalar(0)) {
    e = MatrixX<Scalar>::Identity((N + 1) * m, (N + 1) * m);
  } else {
    e = detail::cascade_exponential(cascade_matrix(sys), tau);
  }
  std::vector<CoefficientTable<Scalar>> family;
  family.reserve(static_cast<std::size_t>(N + 1));
  for (int n = 0; n <= N; ++n) {
    const MomentOrder order{sign * n};
    family.push_back(detail::table_from_exponential<Scalar>(
        e.topLeftCorner((n + 1) * m, (n + 1) * m), m, order, model.alpha(), tau));
  }
  return family;
}

template <typename Scalar>
Scalar conditional_moment(const RegimeModel<Scalar>& model, MomentOrder order, Scalar tau, Scalar R,
                          Eigen::Index state) {
  if (!(R > Scalar(0))) throw Error(ErrorCode::InvalidArgument, "R must be positive");
  if (state < 0 || state >= model.states()) {
    throw Error(ErrorCode::InvalidArgument, "state out of range");
  }
  return solve_coefficients(model, order, tau).moment(R, state);
}

/// Closed form for models whose states share (kappa, theta, sigma); the chain
/// then drops out of the moment entirely.
template <typename Scalar>
Scalar closed_form_identical(const RegimeModel<Scalar>& model, MomentOrder order, Scalar tau,
                             Scalar R) {
  using std::exp;
  using std::expm1;
  using std::log;
  using std::pow;
  check_order(model.branch(), order);
  detail::check_tau(tau);
  if (!(R > Scalar(0))) throw Error(ErrorCode::InvalidArgument, "R must be positive");
  if (!model.identical_states()) {
    throw Error(ErrorCode::ParametersNotIdentical, "states carry different parameters");
  }
  const int L = order.levels();
  const Scalar a = model.alpha();
  const Scalar k = model.kappa(0);
  const bool low = model.branch() == ElasticityBranch::Low;

  // Low:  e^{-L k tau/a} ((a e^{k tau/a} - a)/k)^{L-j}
  // High: e^{+L k tau/a} ((a - a e^{-k tau/a})/k)^{L-j}
  const Scalar decay = exp((low ? -Scalar(1) : Scalar(1)) * Scalar(L) * k * tau / a);
  const Scalar growth = low ? a * expm1(k * tau / a) / k : -a * expm1(-k * tau / a) / k;

  std::vector<Scalar> gamma(static_cast<std::size_t>(L));
  for (int l = 0; l < L; ++l) gamma[static_cast<std::size_t>(l)] = level_coupling(model, 0, l);

  const Scalar sign = low ? Scalar(1) : Scalar(-1);
  const Scalar log_r = log(R);
  Scalar sum = Scalar(0);
  Scalar product = Scalar(1);     // prod_{j=1}^{L-k} gamma^<L-j>
  Scalar growth_pow = Scalar(1);  // growth^{L-k}
  Scalar factorial = Scalar(1);   // (L-k)!
  for (int kk = L; kk >= 0; --kk) {
    const int d = L - kk;
    if (d > 0) {
      product *= gamma[static_cast<std::size_t>(L - d)];
      growth_pow *= growth;
      factorial *= Scalar(d);
    }
    const Scalar coeff = decay / factorial * growth_pow * product;
    sum += coeff * exp(sign * (Scalar(kk) / a) * log_r);
  }
  return sum;
}

enum class OnDegenerate { Fallback, Throw };

/// The explicit eigenvalue solution for the 1/alpha-moment (Low) or the
/// -1/alpha-moment (High) of a 2-state model. When the spectrum of P^<1> is
/// (nearly) repeated or one of the formula's denominators vanishes the
/// general solver is used instead, unless `policy` asks for an error.
template <typename Scalar>
Scalar closed_form_first_2state(const RegimeModel<Scalar>& model, Scalar tau, Scalar R,
                                Eigen::Index state, OnDegenerate policy = OnDegenerate::Fallback) {
  using std::abs;
  using std::exp;
  using std::log;
  using std::max;
  using std::sqrt;
  if (model.states() != 2) {
    throw Error(ErrorCode::DimensionMismatch, "closed form needs exactly 2 states");
  }
  detail::check_tau(tau);
  if (!(R > Scalar(0))) throw Error(ErrorCode::InvalidArgument, "R must be positive");
  if (state < 0 || state > 1) throw Error(ErrorCode::InvalidArgument, "state out of range");

  const bool low = model.branch() == ElasticityBranch::Low;
  const MomentOrder order{low ? 1 : -1};
  const Scalar a = model.alpha();
  const Scalar k1 = model.kappa(0);
  const Scalar k2 = model.kappa(1);
  const Scalar q12 = model.generator().rate(0, 1);
  const Scalar q21 = model.generator().rate(1, 0);
  const Scalar qs = q12 + q21;

  Scalar lambda1, lambda2, m11, m12, m21, m22;
  bool degenerate = false;
  auto tiny = [](Scalar x) { return abs(x) < Scalar(1e-12); };
  if (low) {
    const Scalar b = k1 + k2 + a * q12 + a * q21;
    Scalar disc = b * b - Scalar(4) * (k1 * k2 + a * k1 * q21 + a * k2 * q12);
    disc = max(disc, Scalar(0));
    lambda1 = (-b + sqrt(disc)) / (Scalar(2) * a);
    lambda2 = (-b - sqrt(disc)) / (Scalar(2) * a);
    const Scalar c = k2 / a;
    degenerate = tiny(q21) || tiny(lambda2 - lambda1);
    m11 = (c + lambda2) * (lambda1 + c + q21) / (q21 * (lambda2 - lambda1));
    m12 = (c + lambda1) * (lambda2 + c + q21) / (q21 * (lambda1 - lambda2));
    m21 = (c + lambda2) / (lambda2 - lambda1);
    m22 = (c + lambda1) / (lambda1 - lambda2);
  } else {
    const Scalar b = -k1 - k2 + a * q12 + a * q21;
    Scalar disc = b * b - Scalar(4) * (k1 * k2 - a * k1 * q21 - a * k2 * q12);
    disc = max(disc, Scalar(0));
    lambda1 = (-b + sqrt(disc)) / (Scalar(2) * a);
    lambda2 = (-b - sqrt(disc)) / (Scalar(2) * a);
    const Scalar c = k2 / a;
    degenerate = tiny(q21) || tiny(lambda2 - lambda1);
    m11 = (-c + lambda2) * (lambda1 - c + q21) / (q21 * (lambda2 - lambda1));
    m12 = (-c + lambda1) * (lambda2 - c + q21) / (q21 * (lambda1 - lambda2));
    m21 = (c - lambda2) / (lambda1 - lambda2);
    m22 = (c - lambda1) / (lambda2 - lambda1);
  }
  degenerate = degenerate ||
               abs(lambda1 - lambda2) < Scalar(1e-9) * max(abs(lambda1), abs(lambda2)) ||
               tiny(qs) || tiny(lambda1) || tiny(lambda2) || tiny(lambda1 + qs) ||
               tiny(lambda2 + qs);
  if (degenerate) {
    if (policy == OnDegenerate::Throw) {
      throw Error(ErrorCode::DegenerateSpectrum, "repeated eigenvalue or vanishing denominator");
    }
    return conditional_moment(model, order, tau, R, state);
  }

  const Scalar g1 = level_coupling(model, 0, 0);
  const Scalar g2 = level_coupling(model, 1, 0);
  const Scalar n11 = (g1 * m11 * q21 + g2 * m21 * q12) / qs;
  const Scalar n12 = (g1 * m12 * q21 + g2 * m22 * q12) / qs;
  const Scalar n21 = (g1 * m11 - g2 * m21) / qs;
  const Scalar n22 = (g1 * m12 - g2 * m22) / qs;

  const Scalar e1 = exp(tau * lambda1);
  const Scalar e2 = exp(tau * lambda2);
  const Scalar eq = exp(-tau * qs);
  const Scalar common = n11 * (e1 - Scalar(1)) / lambda1 + n12 * (e2 - Scalar(1)) / lambda2;
  const Scalar mixing = n21 * (e1 - eq) / (lambda1 + qs) + n22 * (e2 - eq) / (lambda2 + qs);

  Scalar level0, level1;
  if (state == 0) {
    level1 = m11 * e1 + m12 * e2;
    level0 = common + q12 * mixing;
  } else {
    level1 = m21 * e1 + m22 * e2;
    level0 = common - q21 * mixing;
  }
  const Scalar sign = low ? Scalar(1) : Scalar(-1);
  return level0 + level1 * exp(sign * log(R) / a);
}

}  // namespace rscev

#endif  // RSCEV_MOMENTS_HPP
