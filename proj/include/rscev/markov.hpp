#ifndef RSCEV_MARKOV_HPP
#define RSCEV_MARKOV_HPP

// Continuous-time finite-state Markov chains: generator validation,
// transition matrices P(h) = exp(hQ), stationary law and grid sampling.
//
// States are 0-based here; configuration files and CSV output use 1-based
// labels.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "rscev/error.hpp"

namespace rscev {

inline constexpr double kGeneratorRowSumTol = 1e-12;
inline constexpr double kTransitionRowSumTol = 1e-10;
inline constexpr double kProbabilityClampTol = 1e-12;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
class GeneratorMatrix;

template <typename Scalar>
GeneratorMatrix<Scalar> validate_generator(const MatrixX<Scalar>& q);

/// Intensity matrix Q of a chain. Instances come from validate_generator()
/// (irreducible, checked) or from the frozen()/single_state() factories.
template <typename Scalar = double>
class GeneratorMatrix {
 public:
  using Matrix = MatrixX<Scalar>;

  /// Degenerate 1-state chain (Q = [0]).
  static GeneratorMatrix single_state() { return frozen(1); }

  /// m states and no transitions at all. Not irreducible; this exists so that
  /// switching models can be compared against their no-switching limit.
  static GeneratorMatrix frozen(Eigen::Index m) { return GeneratorMatrix(Matrix::Zero(m, m)); }

  Eigen::Index size() const { return q_.rows(); }
  const Matrix& matrix() const { return q_; }
  Scalar rate(Eigen::Index i, Eigen::Index j) const { return q_(i, j); }

  /// Total exit rate of state i, i.e. -q_ii.
  Scalar exit_rate(Eigen::Index i) const { return -q_(i, i); }

 private:
  explicit GeneratorMatrix(Matrix q) : q_(std::move(q)) {}
  friend GeneratorMatrix validate_generator<Scalar>(const Matrix& q);

  Matrix q_;
};

using GeneratorMatrixd = GeneratorMatrix<double>;

namespace detail {

template <typename Scalar>
std::vector<bool> reachable(const MatrixX<Scalar>& q, bool transpose) {
  const Eigen::Index m = q.rows();
  std::vector<bool> seen(static_cast<std::size_t>(m), false);
  std::vector<Eigen::Index> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const Eigen::Index i = stack.back();
    stack.pop_back();
    for (Eigen::Index j = 0; j < m; ++j) {
      const Scalar w = transpose ? q(j, i) : q(i, j);
      if (j != i && w > Scalar(0) && !seen[static_cast<std::size_t>(j)]) {
        seen[static_cast<std::size_t>(j)] = true;
        stack.push_back(j);
      }
    }
  }
  return seen;
}

}  // namespace detail

template <typename Scalar>
GeneratorMatrix<Scalar> validate_generator(const MatrixX<Scalar>& q) {
  const Eigen::Index m = q.rows();
  if (m != q.cols()) {
    throw Error(ErrorCode::NotSquare, "generator must be square, got " + std::to_string(q.rows()) +
                                          "x" + std::to_string(q.cols()));
  }
  if (m < 2) {
    throw Error(ErrorCode::NotSquare, "generator needs at least 2 states");
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (i != j && !(q(i, j) >= Scalar(0))) {
        throw Error(ErrorCode::NegativeOffDiagonal,
                    "q[" + std::to_string(i + 1) + "][" + std::to_string(j + 1) + "] < 0");
      }
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    using std::abs;
    const Scalar row_sum = q.row(i).sum();
    if (!(abs(row_sum) <= Scalar(kGeneratorRowSumTol))) {
      throw Error(ErrorCode::RowSumViolation, "row " + std::to_string(i + 1) + " sums to " +
                                                  std::to_string(static_cast<double>(row_sum)));
    }
  }
  const auto forward = detail::reachable(q, false);
  const auto backward = detail::reachable(q, true);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!forward[static_cast<std::size_t>(i)] || !backward[static_cast<std::size_t>(i)]) {
      throw Error(ErrorCode::NotIrreducible,
                  "state " + std::to_string(i + 1) + " is not strongly connected to state 1");
    }
  }
  return GeneratorMatrix<Scalar>(q);
}

/// P(h) = exp(hQ), via Eigen's scaling-and-squaring Pade exponential.
/// Entries within kProbabilityClampTol outside [0, 1] are clamped.
template <typename Scalar>
MatrixX<Scalar> transition_matrix(const GeneratorMatrix<Scalar>& gen, Scalar h) {
  if (!(h > Scalar(0))) {
    throw Error(ErrorCode::InvalidArgument, "transition horizon h must be positive");
  }
  MatrixX<Scalar> p = (h * gen.matrix()).exp();
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      Scalar& v = p(i, j);
      if (v < Scalar(0)) {
        if (v < -Scalar(kProbabilityClampTol)) {
          throw std::logic_error("transition probability below zero beyond roundoff");
        }
        v = Scalar(0);
      } else if (v > Scalar(1)) {
        if (v > Scalar(1) + Scalar(kProbabilityClampTol)) {
          throw std::logic_error("transition probability above one beyond roundoff");
        }
        v = Scalar(1);
      }
    }
  }
  return p;
}

/// Stationary distribution: the probability vector pi with pi Q = 0.
template <typename Scalar>
VectorX<Scalar> stationary_distribution(const GeneratorMatrix<Scalar>& gen) {
  const Eigen::Index m = gen.size();
  MatrixX<Scalar> a = gen.matrix().transpose();
  a.row(m - 1).setOnes();
  VectorX<Scalar> rhs = VectorX<Scalar>::Zero(m);
  rhs(m - 1) = Scalar(1);
  return a.fullPivLu().solve(rhs);
}

/// Discrete chain X_k = X(kh) sampled on a uniform grid.
struct ChainPath {
  std::vector<int> states;
  double h = 0.0;

  std::size_t steps() const { return states.empty() ? 0 : states.size() - 1; }
  double time(std::size_t k) const { return static_cast<double>(k) * h; }
};

/// One-step transition sampler: compares a uniform draw against the
/// cumulative row probabilities of P(h). A draw exactly on a boundary goes
/// to the lower-indexed state.
class ChainStepper {
 public:
  template <typename Scalar>
  ChainStepper(const GeneratorMatrix<Scalar>& gen, double h) {
    const MatrixX<Scalar> p = transition_matrix(gen, Scalar(h));
    cumulative_ = p.template cast<double>();
    for (Eigen::Index i = 0; i < cumulative_.rows(); ++i) {
      for (Eigen::Index j = 1; j < cumulative_.cols(); ++j) {
        cumulative_(i, j) += cumulative_(i, j - 1);
      }
    }
  }

  int size() const { return static_cast<int>(cumulative_.rows()); }

  int next(int state, double omega) const {
    const Eigen::Index m = cumulative_.cols();
    for (Eigen::Index j = 0; j + 1 < m; ++j) {
      if (omega <= cumulative_(state, j)) return static_cast<int>(j);
    }
    return static_cast<int>(m - 1);
  }

  const Eigen::MatrixXd& cumulative() const { return cumulative_; }

 private:
  Eigen::MatrixXd cumulative_;
};

/// Grid sampling of the chain: path[0] = initial, then `steps` transitions.
template <typename Scalar>
ChainPath sample_chain(const GeneratorMatrix<Scalar>& gen, double h, std::size_t steps, int initial,
                       std::uint64_t seed) {
  if (initial < 0 || initial >= gen.size()) {
    throw Error(ErrorCode::InvalidArgument, "initial state out of range");
  }
  if (steps < 1) {
    throw Error(ErrorCode::InvalidArgument, "chain needs at least one step");
  }
  const ChainStepper stepper(gen, h);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  ChainPath path;
  path.h = h;
  path.states.reserve(steps + 1);
  path.states.push_back(initial);
  int state = initial;
  for (std::size_t k = 0; k < steps; ++k) {
    state = stepper.next(state, uniform(rng));
    path.states.push_back(state);
  }
  return path;
}

}  // namespace rscev

#endif  // RSCEV_MARKOV_HPP
