#ifndef RSCEV_PRICING_HPP
#define RSCEV_PRICING_HPP

// European call on the level R_T by Laguerre-series expansion:
//
//   C = e^{-r tau} K^b e^{-K} sum_{j<=J} c_j L_j^a(K),
//   c_j = sum_{n<=j} j! (-1)^n E[R_T^{p_n}] / (Gamma(n+a+1) n! (j-n)! (p_n-1) p_n),
//   p_n = a - b + n + 2,
//
// with every E[R_T^{p_n}] produced by the moment engine at the integer order
// alpha * p_n.

#include <vector>

#include "rscev/model.hpp"
#include "rscev/moments.hpp"

namespace rscev {

struct OptionSpec {
  double strike = 1.0;
  double rate = 0.0;
  double tau = 0.0;
  double a = 1.0;
  double b = 0.0;
  int J = 40;

  /// Checks a > 2 max(b,0) - 1, a > -1, J >= 0, strike > 0, tau >= 0 and that
  /// every alpha (a - b + n + 2), n <= J, is an integer >= 2.
  void validate(double alpha) const;
};

/// Generalized Laguerre polynomial L_j^a(x), three-term recurrence.
template <typename Scalar>
Scalar laguerre(int j, Scalar a, Scalar x) {
  if (j < 0) throw Error(ErrorCode::InvalidArgument, "Laguerre order must be >= 0");
  Scalar prev = Scalar(1);
  if (j == 0) return prev;
  Scalar cur = Scalar(1) + a - x;
  for (int k = 2; k <= j; ++k) {
    const Scalar next = ((Scalar(2 * k - 1) + a - x) * cur - (Scalar(k - 1) + a) * prev) / Scalar(k);
    prev = cur;
    cur = next;
  }
  return cur;
}

/// Integer moment order alpha (a - b + n + 2) needed by term n.
int expansion_moment_order(const OptionSpec& spec, double alpha, int n);

struct ExpansionCoefficients {
  std::vector<double> c;             // c_0..c_J
  std::vector<double> cancellation;  // sum|terms| / |sum terms| per c_j
};

/// c_0..c_J for a Low-branch model started at (R, state).
ExpansionCoefficients expansion_coefficients(const RegimeModeld& model, int state, double R,
                                             const OptionSpec& spec);

/// A single c_j.
double expansion_coefficient(const RegimeModeld& model, int state, double R,
                             const OptionSpec& spec, int j);

struct PriceResult {
  double price = 0.0;
  /// |c_J L_J^a(K)|, the magnitude of the last retained term.
  double last_term = 0.0;
  /// Worst sum|terms| / |sum terms| over the coefficient sums and the series.
  double cancellation_ratio = 1.0;
};

/// Coefficients are strike-independent; build once, price many strikes.
class LaguerrePricer {
 public:
  LaguerrePricer(const RegimeModeld& model, int state, double R, const OptionSpec& spec);

  PriceResult price(double strike) const;
  const ExpansionCoefficients& coefficients() const { return coeffs_; }

 private:
  OptionSpec spec_;
  ExpansionCoefficients coeffs_;
};

PriceResult price_call(const RegimeModeld& model, int state, double R, const OptionSpec& spec);

}  // namespace rscev

#endif  // RSCEV_PRICING_HPP
