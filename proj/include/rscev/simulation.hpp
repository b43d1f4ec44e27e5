#ifndef RSCEV_SIMULATION_HPP
#define RSCEV_SIMULATION_HPP

// Euler-Maruyama simulation with Markovian switching and Monte Carlo
// estimation of conditional moments.
//
// Random streams: every path owns a std::mt19937_64 seeded from
// (master seed, path index) through a splitmix64 mix. Within a step the
// chain draw (std::uniform_real_distribution) comes before the Gaussian
// draw (std::normal_distribution). Results are bit-reproducible for a given
// standard library; they do not depend on the number of worker threads.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "rscev/markov.hpp"
#include "rscev/model.hpp"
#include "rscev/moments.hpp"

namespace rscev {

struct SimulationConfig {
  double h = 1e-3;
  double T = 1.0;
  std::size_t paths = 1;
  std::uint64_t seed = 0;
  double floor_eps = 1e-10;
  double initial_R = 1.0;
  int initial_state = 0;
  /// Worker threads for multi-path runs; 0 picks hardware_concurrency().
  unsigned threads = 0;

  /// Number of EM steps k*: the first grid point k*h >= T.
  std::size_t steps() const;
  void validate() const;
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t paths = 0;
  std::size_t floored_steps = 0;
};

/// Per-state EM coefficients of one model, with the power laws resolved once.
class EmScheme {
 public:
  explicit EmScheme(const RegimeModeld& model);

  /// R + kappa_i (theta_i R^{beta-1} - R) h + sigma_i R^{beta/2} dw,
  /// where dw = sqrt(h) Z.
  double step(double R, int state, double h, double dw) const;

 private:
  enum class Power { Zero, Half, One, ThreeHalves, Two, General };
  static Power classify(double p);
  static double power(double R, Power kind, double p);

  std::vector<double> kappa_;
  std::vector<double> kappa_theta_;
  std::vector<double> sigma_;
  double drift_exp_;
  double diffusion_exp_;
  Power drift_kind_;
  Power diffusion_kind_;
};

struct EmPath {
  ChainPath chain;
  std::vector<double> levels;
  std::size_t floored_steps = 0;
};

/// A single path; `rng_seed` seeds the path's engine directly.
EmPath em_path(const RegimeModeld& model, const SimulationConfig& cfg, std::uint64_t rng_seed);

/// EM on caller-supplied chain states and Brownian increments, for coupling
/// paths across step sizes. states[k] is used on step k; increments.size()
/// steps are taken. Returns the level sequence (size increments.size()+1).
std::vector<double> integrate_em(const RegimeModeld& model, std::span<const int> states,
                                 std::span<const double> increments, double h, double initial_R,
                                 double floor_eps, std::size_t* floored_steps = nullptr);

/// Per-path seed derived from the master seed and the path index.
std::uint64_t path_seed(std::uint64_t master, std::uint64_t path_index);

struct TerminalSample {
  std::vector<double> R;
  std::vector<int> state;
  std::size_t floored_steps = 0;
  std::size_t steps = 0;
};

/// Terminal (R_T, X_T) of cfg.paths independent paths.
TerminalSample simulate_terminals(const RegimeModeld& model, const SimulationConfig& cfg);

/// Mean and standard error of f(R_T) over a terminal sample.
McEstimate summarize(const TerminalSample& sample, const std::function<double(double)>& f);

McEstimate estimate_moment_mc(const RegimeModeld& model, MomentOrder order, double tau, double R,
                              int state, SimulationConfig cfg);

/// 100 |analytic - mc| / |analytic|.
double relative_difference(double analytic, double mc);

/// CSV with columns path_index,terminal_state,terminal_R,payoff (1-based states).
void write_terminal_csv(std::ostream& os, const TerminalSample& sample,
                        const std::function<double(double)>& payoff);

}  // namespace rscev

#endif  // RSCEV_SIMULATION_HPP
