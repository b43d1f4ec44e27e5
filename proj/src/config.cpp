#include "rscev/config.hpp"

#include <fstream>
#include <sstream>

#include "rscev/moments.hpp"
#include "rscev/pricing.hpp"

namespace rscev {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::ConfigError, path + ": " + msg);
}

const json& field(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail(path + "." + key, "missing");
  return obj.at(key);
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

long long integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<long long>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

double number_or(const json& obj, const std::string& path, const char* key, double fallback) {
  return obj.contains(key) ? number(obj.at(key), path + "." + key) : fallback;
}

long long integer_or(const json& obj, const std::string& path, const char* key, long long fallback) {
  return obj.contains(key) ? integer(obj.at(key), path + "." + key) : fallback;
}

std::uint64_t seed_or(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) return 0;
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    fail(path + "." + key, "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

void require(bool ok, const std::string& path, const std::string& msg) {
  if (!ok) fail(path, msg);
}

ModelConfig parse_model(const json& j) {
  const std::string p = "model";
  if (!j.is_object()) fail(p, "expected an object");
  ModelConfig m;
  const json& branch = field(j, p, "branch");
  if (!branch.is_string()) fail(p + ".branch", "expected \"low\" or \"high\"");
  m.branch = branch.get<std::string>();
  if (m.branch != "low" && m.branch != "high") fail(p + ".branch", "expected \"low\" or \"high\"");
  m.alpha = number(field(j, p, "alpha"), p + ".alpha");
  m.kappa = numbers(field(j, p, "kappa"), p + ".kappa");
  m.theta = numbers(field(j, p, "theta"), p + ".theta");
  m.sigma = numbers(field(j, p, "sigma"), p + ".sigma");
  if (j.contains("Q")) {
    const json& q = j.at("Q");
    if (!q.is_array()) fail(p + ".Q", "expected an array of rows");
    for (std::size_t i = 0; i < q.size(); ++i) {
      m.Q.push_back(numbers(q[i], p + ".Q[" + std::to_string(i) + "]"));
    }
  }
  return m;
}

std::vector<int> parse_states(const json& obj, const std::string& path) {
  std::vector<int> out;
  if (!obj.contains("states")) return out;
  const json& v = obj.at("states");
  if (!v.is_array()) fail(path + ".states", "expected an array of state labels");
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(static_cast<int>(integer(v[i], path + ".states[" + std::to_string(i) + "]")));
  }
  return out;
}

SimulationBlock parse_simulation(const json& j, const std::string& p) {
  if (!j.is_object()) fail(p, "expected an object");
  SimulationBlock s;
  s.h = number(field(j, p, "h"), p + ".h");
  s.paths = static_cast<std::size_t>(integer(field(j, p, "paths"), p + ".paths"));
  s.seed = seed_or(j, p, "seed");
  s.floor_eps = number_or(j, p, "floor_eps", s.floor_eps);
  s.threads = static_cast<unsigned>(integer_or(j, p, "threads", 0));
  return s;
}

Task parse_task(const json& j) {
  const std::string p = "task";
  if (!j.is_object()) fail(p, "expected an object");
  const json& type = field(j, p, "type");
  if (!type.is_string()) fail(p + ".type", "expected a string");
  const std::string t = type.get<std::string>();
  if (t == "moment") {
    MomentTask m;
    m.n = static_cast<int>(integer(field(j, p, "n"), p + ".n"));
    m.tau = numbers(field(j, p, "tau"), p + ".tau");
    m.R = numbers(field(j, p, "R"), p + ".R");
    m.states = parse_states(j, p);
    return m;
  }
  if (t == "simulate") {
    SimulateTask s;
    s.h = number(field(j, p, "h"), p + ".h");
    s.T = number(field(j, p, "T"), p + ".T");
    s.initial_R = number(field(j, p, "initial_R"), p + ".initial_R");
    s.initial_state = static_cast<int>(integer_or(j, p, "initial_state", 1));
    s.seed = seed_or(j, p, "seed");
    s.floor_eps = number_or(j, p, "floor_eps", s.floor_eps);
    return s;
  }
  if (t == "compare") {
    CompareTask c;
    c.n = static_cast<int>(integer(field(j, p, "n"), p + ".n"));
    c.tau = numbers(field(j, p, "tau"), p + ".tau");
    c.R = number(field(j, p, "R"), p + ".R");
    c.state = static_cast<int>(integer_or(j, p, "state", 1));
    c.simulation = parse_simulation(field(j, p, "simulation"), p + ".simulation");
    c.threshold = number_or(j, p, "threshold", c.threshold);
    if (j.contains("terminal_csv")) {
      const json& v = j.at("terminal_csv");
      if (!v.is_string()) fail(p + ".terminal_csv", "expected a path string");
      c.terminal_csv = v.get<std::string>();
    }
    return c;
  }
  if (t == "price") {
    PriceTask pr;
    pr.R = number(field(j, p, "R"), p + ".R");
    pr.state = static_cast<int>(integer_or(j, p, "state", 1));
    pr.tau = number(field(j, p, "tau"), p + ".tau");
    pr.rate = number_or(j, p, "rate", 0.0);
    pr.strikes = numbers(field(j, p, "strikes"), p + ".strikes");
    pr.a = number_or(j, p, "a", pr.a);
    pr.b = number_or(j, p, "b", pr.b);
    pr.J = static_cast<int>(integer_or(j, p, "J", pr.J));
    return pr;
  }
  fail(p + ".type", "unknown task \"" + t + "\" (expected moment|simulate|compare|price)");
}

void check_state(int state, Eigen::Index m, const std::string& path) {
  require(state >= 1 && state <= m, path, "state must be in 1.." + std::to_string(m));
}

void check_task(const Task& task, const RegimeModeld& model) {
  const Eigen::Index m = model.states();
  if (const auto* t = std::get_if<MomentTask>(&task)) {
    check_order(model.branch(), MomentOrder{t->n});
    require(!t->tau.empty(), "task.tau", "must not be empty");
    for (double v : t->tau) require(v >= 0.0, "task.tau", "entries must be >= 0");
    require(!t->R.empty(), "task.R", "must not be empty");
    for (double v : t->R) require(v > 0.0, "task.R", "entries must be > 0");
    for (int s : t->states) check_state(s, m, "task.states");
  } else if (const auto* t = std::get_if<SimulateTask>(&task)) {
    require(t->h > 0.0, "task.h", "must be > 0");
    require(t->T >= t->h, "task.T", "must be >= h");
    require(t->floor_eps > 0.0 && t->initial_R > t->floor_eps, "task.initial_R",
            "must exceed floor_eps > 0");
    check_state(t->initial_state, m, "task.initial_state");
  } else if (const auto* t = std::get_if<CompareTask>(&task)) {
    check_order(model.branch(), MomentOrder{t->n});
    require(t->simulation.h > 0.0, "task.simulation.h", "must be > 0");
    require(t->simulation.paths >= 1, "task.simulation.paths", "must be >= 1");
    require(!t->tau.empty(), "task.tau", "must not be empty");
    for (double v : t->tau) require(v >= t->simulation.h, "task.tau", "entries must be >= h");
    require(t->R > t->simulation.floor_eps, "task.R", "must exceed floor_eps");
    require(t->threshold >= 0.0, "task.threshold", "must be >= 0");
    check_state(t->state, m, "task.state");
  } else if (const auto* t = std::get_if<PriceTask>(&task)) {
    if (model.branch() != ElasticityBranch::Low) {
      throw Error(ErrorCode::BranchUnsupported,
                  "price: Laguerre pricing needs positive moment orders (low branch only)");
    }
    require(t->R > 0.0, "task.R", "must be > 0");
    require(!t->strikes.empty(), "task.strikes", "must not be empty");
    check_state(t->state, m, "task.state");
    OptionSpec spec{1.0, t->rate, t->tau, t->a, t->b, t->J};
    for (double k : t->strikes) {
      require(k > 0.0, "task.strikes", "entries must be > 0");
    }
    spec.validate(model.alpha());
  }
}

}  // namespace

RegimeModeld ModelConfig::build() const {
  ModelParams<double> params;
  params.branch = branch == "high" ? ElasticityBranch::High : ElasticityBranch::Low;
  params.alpha = alpha;
  params.kappa = Eigen::Map<const Eigen::VectorXd>(kappa.data(), static_cast<Eigen::Index>(kappa.size()));
  params.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
  params.sigma = Eigen::Map<const Eigen::VectorXd>(sigma.data(), static_cast<Eigen::Index>(sigma.size()));

  const bool single = kappa.size() == 1 &&
                      (Q.empty() || (Q.size() == 1 && Q[0].size() == 1 && Q[0][0] == 0.0));
  if (single) return validate_model(params, GeneratorMatrixd::single_state());

  const auto m = static_cast<Eigen::Index>(Q.size());
  Eigen::MatrixXd q(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = Q[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.size()) != m) {
      throw Error(ErrorCode::NotSquare, "model.Q row " + std::to_string(i + 1) + " has " +
                                            std::to_string(row.size()) + " entries, expected " +
                                            std::to_string(m));
    }
    for (Eigen::Index j = 0; j < m; ++j) q(i, j) = row[static_cast<std::size_t>(j)];
  }
  return validate_model(params, validate_generator<double>(q));
}

std::string task_name(const Task& task) {
  switch (task.index()) {
    case 0: return "moment";
    case 1: return "simulate";
    case 2: return "compare";
    default: return "price";
  }
}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) fail("<root>", "expected an object");
  RunConfig cfg;
  cfg.model = parse_model(field(j, "<root>", "model"));
  cfg.task = parse_task(field(j, "<root>", "task"));
  if (j.contains("output")) {
    if (!j.at("output").is_string()) fail("output", "expected a path string");
    cfg.output = j.at("output").get<std::string>();
  }
  const RegimeModeld model = cfg.model.build();
  check_task(cfg.task, model);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, path + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const RunConfig& cfg) {
  json j;
  j["model"] = {{"branch", cfg.model.branch}, {"alpha", cfg.model.alpha},
                {"kappa", cfg.model.kappa},   {"theta", cfg.model.theta},
                {"sigma", cfg.model.sigma},   {"Q", cfg.model.Q}};
  json t;
  t["type"] = task_name(cfg.task);
  std::visit(
      [&t](const auto& task) {
        using T = std::decay_t<decltype(task)>;
        if constexpr (std::is_same_v<T, MomentTask>) {
          t["n"] = task.n;
          t["tau"] = task.tau;
          t["R"] = task.R;
          if (!task.states.empty()) t["states"] = task.states;
        } else if constexpr (std::is_same_v<T, SimulateTask>) {
          t["h"] = task.h;
          t["T"] = task.T;
          t["initial_R"] = task.initial_R;
          t["initial_state"] = task.initial_state;
          t["seed"] = task.seed;
          t["floor_eps"] = task.floor_eps;
        } else if constexpr (std::is_same_v<T, CompareTask>) {
          t["n"] = task.n;
          t["tau"] = task.tau;
          t["R"] = task.R;
          t["state"] = task.state;
          t["simulation"] = {{"h", task.simulation.h},
                             {"paths", task.simulation.paths},
                             {"seed", task.simulation.seed},
                             {"floor_eps", task.simulation.floor_eps},
                             {"threads", task.simulation.threads}};
          t["threshold"] = task.threshold;
          if (task.terminal_csv) t["terminal_csv"] = *task.terminal_csv;
        } else {
          t["R"] = task.R;
          t["state"] = task.state;
          t["tau"] = task.tau;
          t["rate"] = task.rate;
          t["strikes"] = task.strikes;
          t["a"] = task.a;
          t["b"] = task.b;
          t["J"] = task.J;
        }
      },
      cfg.task);
  j["task"] = t;
  if (cfg.output) j["output"] = *cfg.output;
  return j;
}

}  // namespace rscev
