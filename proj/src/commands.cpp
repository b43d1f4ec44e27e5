#include "rscev/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>

#include "rscev/csv.hpp"
#include "rscev/moments.hpp"
#include "rscev/pricing.hpp"
#include "rscev/simulation.hpp"

namespace rscev::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kCancellationWarn = 1e6;

using csv::number;

std::vector<int> all_states(Eigen::Index m) {
  std::vector<int> s(static_cast<std::size_t>(m));
  std::iota(s.begin(), s.end(), 1);
  return s;
}

// "run.csv" -> "run_tau0.5.csv" when several horizons share one path.
std::string with_tau_suffix(const std::string& path, double tau) {
  char tag[40];
  std::snprintf(tag, sizeof tag, "_tau%g", tau);
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + tag;
  return path.substr(0, dot) + tag + path.substr(dot);
}

}  // namespace

int cmd_moment(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto& task = std::get<MomentTask>(cfg.task);
  const RegimeModeld model = cfg.model.build();
  const std::vector<int> states = task.states.empty() ? all_states(model.states()) : task.states;
  int code = kOk;
  out << kMomentHeader << '\n';
  for (double tau : task.tau) {
    std::optional<CoefficientTable<double>> table;
    try {
      table = solve_coefficients(model, MomentOrder{task.n}, tau);
    } catch (const Error& e) {
      err << "moment: tau=" << tau << ": " << e.what() << '\n';
      code = kNumericalFailure;
    }
    for (int s : states) {
      for (double R : task.R) {
        double value = kNaN;
        if (table) {
          try {
            value = table->moment(R, s - 1);
            if (!std::isfinite(value)) throw Error(ErrorCode::NonFiniteResult, "non-finite moment");
          } catch (const Error& e) {
            err << "moment: tau=" << tau << " state=" << s << " R=" << R << ": " << e.what() << '\n';
            value = kNaN;
            code = kNumericalFailure;
          }
        }
        out << number(tau) << ',' << s << ',' << number(R) << ',' << number(value) << '\n';
      }
    }
  }
  return code;
}

int cmd_simulate(const RunConfig& cfg, const Overrides& ov, std::ostream& out, std::ostream&) {
  const auto& task = std::get<SimulateTask>(cfg.task);
  const RegimeModeld model = cfg.model.build();
  SimulationConfig sim;
  sim.h = task.h;
  sim.T = task.T;
  sim.paths = 1;
  sim.seed = ov.seed.value_or(task.seed);
  sim.floor_eps = task.floor_eps;
  sim.initial_R = task.initial_R;
  sim.initial_state = task.initial_state - 1;
  const EmPath path = em_path(model, sim, path_seed(sim.seed, 0));
  out << kSimulateHeader << '\n';
  for (std::size_t k = 0; k < path.levels.size(); ++k) {
    out << number(path.chain.time(k)) << ',' << path.chain.states[k] + 1 << ','
        << number(path.levels[k]) << '\n';
  }
  return kOk;
}

int cmd_compare(const RunConfig& cfg, const Overrides& ov, std::ostream& out, std::ostream& err) {
  const auto& task = std::get<CompareTask>(cfg.task);
  const RegimeModeld model = cfg.model.build();
  const double threshold = ov.threshold.value_or(task.threshold);
  const double power = static_cast<double>(task.n) / model.alpha();
  const auto payoff = [power](double r) { return std::pow(r, power); };

  SimulationConfig sim;
  sim.h = task.simulation.h;
  sim.paths = task.simulation.paths;
  sim.seed = ov.seed.value_or(task.simulation.seed);
  sim.floor_eps = task.simulation.floor_eps;
  sim.threads = task.simulation.threads;
  sim.initial_R = task.R;
  sim.initial_state = task.state - 1;

  bool failed = false;
  bool exceeded = false;
  out << kCompareHeader << '\n';
  for (double tau : task.tau) {
    sim.T = tau;
    double analytic = kNaN;
    double rel = kNaN;
    McEstimate mc;
    mc.mean = mc.std_error = kNaN;
    try {
      analytic = conditional_moment(model, MomentOrder{task.n}, tau, task.R,
                                    static_cast<Eigen::Index>(task.state - 1));
      const TerminalSample sample = simulate_terminals(model, sim);
      mc = summarize(sample, payoff);
      if (sample.floored_steps > 0) {
        err << "compare: tau=" << tau << ": " << sample.floored_steps
            << " steps hit the positivity floor\n";
      }
      if (task.terminal_csv) {
        const std::string path =
            task.tau.size() > 1 ? with_tau_suffix(*task.terminal_csv, tau) : *task.terminal_csv;
        std::ofstream f(path);
        if (!f) throw Error(ErrorCode::ConfigError, "cannot write " + path);
        write_terminal_csv(f, sample, payoff);
      }
      rel = relative_difference(analytic, mc.mean);
      if (!std::isfinite(rel)) throw Error(ErrorCode::NonFiniteResult, "non-finite comparison");
      if (rel > threshold) exceeded = true;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError) throw;
      err << "compare: tau=" << tau << ": " << e.what() << '\n';
      failed = true;
    }
    out << number(tau) << ',' << number(analytic) << ',' << number(mc.mean) << ','
        << number(mc.std_error) << ',' << number(rel) << '\n';
  }
  if (failed) return kNumericalFailure;
  if (exceeded) {
    err << "compare: relative difference above " << threshold << "%\n";
    return kThresholdExceeded;
  }
  return kOk;
}

int cmd_price(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto& task = std::get<PriceTask>(cfg.task);
  const RegimeModeld model = cfg.model.build();
  OptionSpec spec{task.strikes.front(), task.rate, task.tau, task.a, task.b, task.J};
  const LaguerrePricer pricer(model, task.state - 1, task.R, spec);

  out << kPriceHeader << '\n';
  double prev_k = 0.0;
  double prev_price = 0.0;
  bool first = true;
  for (double k : task.strikes) {
    const PriceResult r = pricer.price(k);
    if (!first && k > prev_k && r.price > prev_price) {
      err << "price: price increases between K=" << prev_k << " and K=" << k << '\n';
    }
    if (r.cancellation_ratio > kCancellationWarn) {
      err << "price: K=" << k << ": cancellation ratio " << r.cancellation_ratio << '\n';
    }
    out << number(k) << ',' << number(r.price) << ',' << number(r.last_term) << ','
        << number(r.cancellation_ratio) << '\n';
    prev_k = k;
    prev_price = r.price;
    first = false;
  }
  return kOk;
}

int run(const Invocation& inv, std::ostream& default_out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(inv.config_path);
  } catch (const Error& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  if (task_name(cfg.task) != inv.command) {
    err << "config error: task.type is \"" << task_name(cfg.task) << "\" but the subcommand is \""
        << inv.command << "\"\n";
    return kConfigError;
  }

  std::ofstream file;
  std::ostream* out = &default_out;
  if (const auto path = inv.out_path ? inv.out_path : cfg.output) {
    file.open(*path);
    if (!file) {
      err << "config error: cannot open output " << *path << '\n';
      return kConfigError;
    }
    out = &file;
  }

  try {
    if (inv.command == "moment") return cmd_moment(cfg, *out, err);
    if (inv.command == "simulate") return cmd_simulate(cfg, inv.overrides, *out, err);
    if (inv.command == "compare") return cmd_compare(cfg, inv.overrides, *out, err);
    return cmd_price(cfg, *out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ConfigError ? kConfigError : kNumericalFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace rscev::cli
