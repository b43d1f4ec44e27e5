#include "rscev/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rscev {

namespace {

constexpr double kIntegerTol = 1e-9;

double ratio(long double abs_sum, long double sum) {
  if (abs_sum == 0.0L) return 1.0;
  if (sum == 0.0L) return HUGE_VAL;
  return static_cast<double>(abs_sum / std::abs(sum));
}

}  // namespace

void OptionSpec::validate(double alpha) const {
  if (!(strike > 0.0)) throw Error(ErrorCode::InvalidArgument, "strike must be > 0");
  if (!(tau >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be >= 0");
  if (J < 0) throw Error(ErrorCode::InvalidArgument, "truncation J must be >= 0");
  if (!(a > -1.0)) throw Error(ErrorCode::InvalidArgument, "Laguerre parameter a must be > -1");
  if (!(a > 2.0 * std::max(b, 0.0) - 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "need a > 2 max(b, 0) - 1");
  }
  for (int n = 0; n <= J; ++n) expansion_moment_order(*this, alpha, n);
}

int expansion_moment_order(const OptionSpec& spec, double alpha, int n) {
  const double order = alpha * (spec.a - spec.b + n + 2.0);
  const double rounded = std::round(order);
  if (std::abs(order - rounded) > kIntegerTol * std::max(1.0, std::abs(order)) || rounded < 2.0) {
    throw Error(ErrorCode::MomentOrderNotInteger,
                "alpha (a - b + " + std::to_string(n) + " + 2) = " + std::to_string(order) +
                    " is not an integer >= 2");
  }
  return static_cast<int>(rounded);
}

ExpansionCoefficients expansion_coefficients(const RegimeModeld& model, int state, double R,
                                             const OptionSpec& spec) {
  if (model.branch() != ElasticityBranch::Low) {
    throw Error(ErrorCode::BranchUnsupported,
                "Laguerre pricing needs positive moment orders (low branch only)");
  }
  spec.validate(model.alpha());
  if (!(R > 0.0)) throw Error(ErrorCode::InvalidArgument, "R must be positive");

  const int max_order = expansion_moment_order(spec, model.alpha(), spec.J);
  const auto family = solve_coefficient_family(model, MomentOrder{max_order}, spec.tau);
  std::vector<long double> moments(static_cast<std::size_t>(spec.J + 1));
  for (int n = 0; n <= spec.J; ++n) {
    const int order = expansion_moment_order(spec, model.alpha(), n);
    moments[static_cast<std::size_t>(n)] = family[static_cast<std::size_t>(order)].moment(R, state);
  }

  ExpansionCoefficients out;
  out.c.reserve(static_cast<std::size_t>(spec.J + 1));
  out.cancellation.reserve(static_cast<std::size_t>(spec.J + 1));
  for (int j = 0; j <= spec.J; ++j) {
    long double sum = 0.0L;
    long double abs_sum = 0.0L;
    for (int n = 0; n <= j; ++n) {
      const long double p = spec.a - spec.b + n + 2.0;
      const long double log_weight = std::lgamma(static_cast<long double>(j) + 1.0L) -
                                     std::lgamma(static_cast<long double>(n) + spec.a + 1.0L) -
                                     std::lgamma(static_cast<long double>(n) + 1.0L) -
                                     std::lgamma(static_cast<long double>(j - n) + 1.0L);
      const long double term = (n % 2 == 0 ? 1.0L : -1.0L) * std::exp(log_weight) *
                               moments[static_cast<std::size_t>(n)] / ((p - 1.0L) * p);
      sum += term;
      abs_sum += std::abs(term);
    }
    if (!std::isfinite(static_cast<double>(sum))) {
      throw Error(ErrorCode::NonFiniteResult, "c_" + std::to_string(j) + " is not finite");
    }
    out.c.push_back(static_cast<double>(sum));
    out.cancellation.push_back(ratio(abs_sum, sum));
  }
  return out;
}

double expansion_coefficient(const RegimeModeld& model, int state, double R,
                             const OptionSpec& spec, int j) {
  if (j < 0 || j > spec.J) throw Error(ErrorCode::InvalidArgument, "j outside [0, J]");
  OptionSpec truncated = spec;
  truncated.J = j;
  return expansion_coefficients(model, state, R, truncated).c.back();
}

LaguerrePricer::LaguerrePricer(const RegimeModeld& model, int state, double R,
                               const OptionSpec& spec)
    : spec_(spec), coeffs_(expansion_coefficients(model, state, R, spec)) {}

PriceResult LaguerrePricer::price(double strike) const {
  if (!(strike > 0.0)) throw Error(ErrorCode::InvalidArgument, "strike must be > 0");
  long double sum = 0.0L;
  long double abs_sum = 0.0L;
  long double last = 0.0L;
  for (int j = 0; j <= spec_.J; ++j) {
    const long double term = static_cast<long double>(coeffs_.c[static_cast<std::size_t>(j)]) *
                             laguerre<long double>(j, spec_.a, strike);
    sum += term;
    abs_sum += std::abs(term);
    last = term;
  }
  PriceResult r;
  const long double prefactor = std::exp(-static_cast<long double>(spec_.rate) * spec_.tau) *
                                std::pow(static_cast<long double>(strike), spec_.b) *
                                std::exp(-static_cast<long double>(strike));
  r.price = static_cast<double>(prefactor * sum);
  r.last_term = static_cast<double>(std::abs(last));
  r.cancellation_ratio = ratio(abs_sum, sum);
  for (double c : coeffs_.cancellation) r.cancellation_ratio = std::max(r.cancellation_ratio, c);
  if (!std::isfinite(r.price)) throw Error(ErrorCode::NonFiniteResult, "price is not finite");
  return r;
}

PriceResult price_call(const RegimeModeld& model, int state, double R, const OptionSpec& spec) {
  return LaguerrePricer(model, state, R, spec).price(spec.strike);
}

}  // namespace rscev
