#include "rscev/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <thread>

#include "rscev/csv.hpp"

namespace rscev {

std::size_t SimulationConfig::steps() const {
  const double ratio = T / h;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::ceil(ratio));
}

void SimulationConfig::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw Error(ErrorCode::InvalidArgument, "h must be > 0");
  if (!(T >= h) || !std::isfinite(T)) throw Error(ErrorCode::InvalidArgument, "need h <= T");
  if (paths < 1) throw Error(ErrorCode::InvalidArgument, "paths must be >= 1");
  if (!(floor_eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "floor_eps must be > 0");
  if (!(floor_eps < initial_R)) {
    throw Error(ErrorCode::InvalidArgument, "initial_R must exceed floor_eps");
  }
}

EmScheme::Power EmScheme::classify(double p) {
  if (p == 0.0) return Power::Zero;
  if (p == 0.5) return Power::Half;
  if (p == 1.0) return Power::One;
  if (p == 1.5) return Power::ThreeHalves;
  if (p == 2.0) return Power::Two;
  return Power::General;
}

double EmScheme::power(double R, Power kind, double p) {
  switch (kind) {
    case Power::Zero: return 1.0;
    case Power::Half: return std::sqrt(R);
    case Power::One: return R;
    case Power::ThreeHalves: return R * std::sqrt(R);
    case Power::Two: return R * R;
    case Power::General: break;
  }
  return std::pow(R, p);
}

EmScheme::EmScheme(const RegimeModeld& model)
    : drift_exp_(model.beta() - 1.0),
      diffusion_exp_(0.5 * model.beta()),
      drift_kind_(classify(drift_exp_)),
      diffusion_kind_(classify(diffusion_exp_)) {
  for (Eigen::Index i = 0; i < model.states(); ++i) {
    kappa_.push_back(model.kappa(i));
    kappa_theta_.push_back(model.kappa(i) * model.theta(i));
    sigma_.push_back(model.sigma(i));
  }
}

double EmScheme::step(double R, int state, double h, double dw) const {
  const auto i = static_cast<std::size_t>(state);
  const double drift = kappa_theta_[i] * power(R, drift_kind_, drift_exp_) - kappa_[i] * R;
  return R + drift * h + sigma_[i] * power(R, diffusion_kind_, diffusion_exp_) * dw;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct PathResult {
  double R;
  int state;
  std::size_t floored;
};

// One EM path; optionally records the full trajectory.
PathResult run_path(const EmScheme& scheme, const ChainStepper& stepper, const SimulationConfig& cfg,
                    std::size_t steps, std::uint64_t seed, EmPath* record) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sqrt_h = std::sqrt(cfg.h);
  const bool switching = stepper.size() > 1;

  double R = cfg.initial_R;
  int state = cfg.initial_state;
  std::size_t floored = 0;
  if (record) {
    record->chain.h = cfg.h;
    record->chain.states.assign(1, state);
    record->levels.assign(1, R);
    record->chain.states.reserve(steps + 1);
    record->levels.reserve(steps + 1);
  }
  for (std::size_t k = 0; k < steps; ++k) {
    const int next_state = switching ? stepper.next(state, uniform(rng)) : state;
    R = scheme.step(R, state, cfg.h, sqrt_h * normal(rng));
    if (!(R > cfg.floor_eps)) {
      R = cfg.floor_eps;
      ++floored;
    }
    state = next_state;
    if (record) {
      record->chain.states.push_back(state);
      record->levels.push_back(R);
    }
  }
  return {R, state, floored};
}

}  // namespace

std::uint64_t path_seed(std::uint64_t master, std::uint64_t path_index) {
  return splitmix64(splitmix64(master) ^ splitmix64(path_index + 0x632be59bd9b4e019ULL));
}

EmPath em_path(const RegimeModeld& model, const SimulationConfig& cfg, std::uint64_t rng_seed) {
  cfg.validate();
  if (cfg.initial_state < 0 || cfg.initial_state >= model.states()) {
    throw Error(ErrorCode::InvalidArgument, "initial state out of range");
  }
  const EmScheme scheme(model);
  const ChainStepper stepper(model.generator(), cfg.h);
  EmPath path;
  path.floored_steps = run_path(scheme, stepper, cfg, cfg.steps(), rng_seed, &path).floored;
  return path;
}

std::vector<double> integrate_em(const RegimeModeld& model, std::span<const int> states,
                                 std::span<const double> increments, double h, double initial_R,
                                 double floor_eps, std::size_t* floored_steps) {
  if (states.size() < increments.size()) {
    throw Error(ErrorCode::InvalidArgument, "need one chain state per increment");
  }
  const EmScheme scheme(model);
  std::vector<double> levels;
  levels.reserve(increments.size() + 1);
  levels.push_back(initial_R);
  std::size_t floored = 0;
  double R = initial_R;
  for (std::size_t k = 0; k < increments.size(); ++k) {
    R = scheme.step(R, states[k], h, increments[k]);
    if (!(R > floor_eps)) {
      R = floor_eps;
      ++floored;
    }
    levels.push_back(R);
  }
  if (floored_steps) *floored_steps = floored;
  return levels;
}

TerminalSample simulate_terminals(const RegimeModeld& model, const SimulationConfig& cfg) {
  cfg.validate();
  if (cfg.initial_state < 0 || cfg.initial_state >= model.states()) {
    throw Error(ErrorCode::InvalidArgument, "initial state out of range");
  }
  const EmScheme scheme(model);
  const ChainStepper stepper(model.generator(), cfg.h);
  const std::size_t steps = cfg.steps();

  TerminalSample sample;
  sample.R.resize(cfg.paths);
  sample.state.resize(cfg.paths);
  sample.steps = steps;

  unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, cfg.paths));
  std::vector<std::size_t> floored(workers, 0);

  // Paths are written to fixed slots, so the partition cannot change results.
  auto work = [&](unsigned w) {
    for (std::size_t p = w; p < cfg.paths; p += workers) {
      const PathResult r = run_path(scheme, stepper, cfg, steps, path_seed(cfg.seed, p), nullptr);
      sample.R[p] = r.R;
      sample.state[p] = r.state;
      floored[w] += r.floored;
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (std::size_t f : floored) sample.floored_steps += f;
  return sample;
}

McEstimate summarize(const TerminalSample& sample, const std::function<double(double)>& f) {
  const std::size_t n = sample.R.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "empty sample");
  long double sum = 0.0L;
  for (double r : sample.R) sum += f(r);
  const long double mean = sum / static_cast<long double>(n);
  long double ss = 0.0L;
  for (double r : sample.R) {
    const long double d = static_cast<long double>(f(r)) - mean;
    ss += d * d;
  }
  McEstimate est;
  est.mean = static_cast<double>(mean);
  est.paths = n;
  est.floored_steps = sample.floored_steps;
  if (n > 1) {
    const long double var = ss / static_cast<long double>(n - 1);
    est.std_error = static_cast<double>(std::sqrt(var / static_cast<long double>(n)));
  }
  return est;
}

McEstimate estimate_moment_mc(const RegimeModeld& model, MomentOrder order, double tau, double R,
                              int state, SimulationConfig cfg) {
  check_order(model.branch(), order);
  cfg.T = tau;
  cfg.initial_R = R;
  cfg.initial_state = state;
  const TerminalSample sample = simulate_terminals(model, cfg);
  const double exponent = static_cast<double>(order.n) / model.alpha();
  return summarize(sample, [exponent](double r) { return std::exp(exponent * std::log(r)); });
}

double relative_difference(double analytic, double mc) {
  if (analytic == 0.0) {
    throw Error(ErrorCode::DivisionByZero, "relative difference against a zero analytic value");
  }
  return 100.0 * std::abs(analytic - mc) / std::abs(analytic);
}

void write_terminal_csv(std::ostream& os, const TerminalSample& sample,
                        const std::function<double(double)>& payoff) {
  os << "path_index,terminal_state,terminal_R,payoff\n";
  for (std::size_t p = 0; p < sample.R.size(); ++p) {
    os << p << ',' << sample.state[p] + 1 << ',' << csv::number(sample.R[p]) << ','
       << csv::number(payoff(sample.R[p])) << '\n';
  }
}

}  // namespace rscev
