#include "rchow/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "rchow/error.hpp"
#include "rchow/intersection_learner.hpp"
#include "rchow/ltf_learner.hpp"
#include "rchow/numeric.hpp"
#include "rchow/ptf_learner.hpp"

namespace rchow {

namespace {

class ConfigReader {
 public:
  ConfigReader(const Json& j, const std::string& text) : j_(j), text_(text) {}

  [[noreturn]] void error(const std::string& key, const std::string& what) const {
    const int line = line_of_key(text_, key);
    const std::string where = line > 0 ? "line " + std::to_string(line) + ": " : std::string();
    fail(ErrorKind::ConfigError, where + "'" + key + "' " + what);
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const Json& at(const std::string& key) const { return j_.at(key); }

  double number(const std::string& key) const {
    if (!j_.at(key).is_number()) error(key, "must be a number");
    return j_.at(key).get<double>();
  }

  long long integer(const std::string& key, long long min) const {
    if (!j_.at(key).is_number_integer()) error(key, "must be an integer");
    const long long v = j_.at(key).get<long long>();
    if (v < min) error(key, "must be at least " + std::to_string(min));
    return v;
  }

  std::string string(const std::string& key) const {
    if (!j_.at(key).is_string()) error(key, "must be a string");
    return j_.at(key).get<std::string>();
  }

  bool boolean(const std::string& key) const {
    if (!j_.at(key).is_boolean()) error(key, "must be true or false");
    return j_.at(key).get<bool>();
  }

  /// Rethrows library errors from nested parsers with the key's line.
  template <typename Fn>
  auto nested(const std::string& key, Fn&& fn) const {
    try {
      return fn(j_.at(key));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ConfigError) throw;
      error(key, std::string("is invalid: ") + e.what());
    }
  }

 private:
  const Json& j_;
  const std::string& text_;
};

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void add_flag(std::string& flags, const std::string& flag) {
  if (!flags.empty()) flags += '|';
  flags += flag;
}

std::size_t removed_points(const Provenance& p) { return p.pruned + p.removed_by_filter; }

}  // namespace

std::string to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::PTF: return "ptf";
    case LearnerKind::LTF: return "ltf";
    case LearnerKind::Intersection: return "intersection";
  }
  return "ltf";
}

LearnerKind parse_learner(const std::string& name) {
  if (name == "ptf") return LearnerKind::PTF;
  if (name == "ltf") return LearnerKind::LTF;
  if (name == "intersection") return LearnerKind::Intersection;
  fail(ErrorKind::ConfigError, "unknown learner '" + name + "' (expected ptf, ltf or intersection)");
}

ExperimentConfig experiment_config_from_json(const Json& j, const std::string& text) {
  require(j.is_object(), ErrorKind::ConfigError, "experiment config must be a JSON object");
  static const std::set<std::string> allowed = {
      "learner", "distribution", "n", "d", "k", "eps", "strategies", "m", "holdout", "score_count", "trials",
      "seed", "output", "plant", "attack", "filter", "xi", "delta", "timeout_ms", "record_timing"};
  const ConfigReader r(j, text);
  for (const auto& item : j.items()) {
    if (allowed.count(item.key()) == 0) r.error(item.key(), "is not a recognised key");
  }

  ExperimentConfig c;
  if (!r.has("learner")) fail(ErrorKind::ConfigError, "missing 'learner'");
  try {
    c.learner = parse_learner(r.string("learner"));
  } catch (const Error& e) {
    r.error("learner", "is invalid: " + std::string(e.what()));
  }
  c.d = c.learner == LearnerKind::Intersection ? 2 : 1;
  int dist_n = 0;
  int dist_d = 0;
  if (r.has("distribution")) {
    c.distribution = r.nested("distribution", [&](const Json& d) {
      return distribution_config_from_json(d, &dist_n, &dist_d);
    });
  }
  if (dist_n > 0) c.n = dist_n;
  if (dist_d > 0) c.d = dist_d;
  if (r.has("n")) c.n = static_cast<int>(r.integer("n", 1));
  if (r.has("d")) c.d = static_cast<int>(r.integer("d", 1));
  if (r.has("k")) c.k = static_cast<int>(r.integer("k", 1));
  if (dist_n > 0 && dist_n != c.n) r.error("n", "disagrees with distribution.n");
  if (dist_d > 0 && dist_d != c.d) r.error("d", "disagrees with distribution.d");

  if (!r.has("eps")) fail(ErrorKind::ConfigError, "missing 'eps' grid");
  if (!r.at("eps").is_array()) r.error("eps", "must be an array");
  if (r.at("eps").empty()) r.error("eps", "grid is empty");
  for (const auto& e : r.at("eps")) {
    if (!e.is_number()) r.error("eps", "must contain numbers");
    const double v = e.get<double>();
    if (!(v >= 0.0 && v < 1.0 / 3.0)) r.error("eps", "entries must lie in [0, 1/3)");
    c.eps_grid.push_back(v);
  }
  if (!r.has("strategies")) fail(ErrorKind::ConfigError, "missing 'strategies'");
  if (!r.at("strategies").is_array()) r.error("strategies", "must be an array");
  if (r.at("strategies").empty()) r.error("strategies", "list is empty");
  for (const auto& s : r.at("strategies")) {
    if (!s.is_string()) r.error("strategies", "must contain strings");
    c.strategies.push_back(parse_strategy(s.get<std::string>()));
  }

  if (r.has("m")) c.m = static_cast<std::size_t>(r.integer("m", 1));
  if (r.has("holdout")) c.holdout = static_cast<std::size_t>(r.integer("holdout", 0));
  if (r.has("score_count")) c.score_count = static_cast<std::size_t>(r.integer("score_count", 1000));
  if (r.has("trials")) c.trials = static_cast<std::size_t>(r.integer("trials", 1));
  if (r.has("seed")) {
    if (!r.at("seed").is_number_unsigned() && !r.at("seed").is_number_integer()) r.error("seed", "must be an integer");
    if (r.at("seed").is_number_integer() && r.at("seed").get<long long>() < 0) r.error("seed", "must be non-negative");
    c.seed = r.at("seed").get<std::uint64_t>();
  }
  if (r.has("output")) c.output = r.string("output");
  if (r.has("plant")) {
    const Json& p = r.at("plant");
    if (!p.is_object()) r.error("plant", "must be an object");
    for (const auto& item : p.items()) {
      if (item.key() != "theta" && item.key() != "polynomial") r.error("plant", "has unknown key '" + item.key() + "'");
    }
    if (p.contains("theta")) {
      if (!p.at("theta").is_number()) r.error("plant", "theta must be a number");
      c.plant_theta = p.at("theta").get<double>();
    }
    if (p.contains("polynomial")) {
      c.plant_polynomial = r.nested("plant", [](const Json& pj) { return polynomial_from_json(pj.at("polynomial")); });
    }
  }
  if (r.has("attack")) {
    const Json& a = r.at("attack");
    if (!a.is_object()) r.error("attack", "must be an object");
    for (const auto& item : a.items()) {
      const std::string& key = item.key();
      if (key == "rho") {
        c.strategy_params.rho = item.value().get<double>();
        if (!(c.strategy_params.rho > 0.0 && c.strategy_params.rho < 1.0)) r.error("attack", "rho must lie in (0, 1)");
      } else if (key == "magnitude") {
        c.strategy_params.magnitude = item.value().get<double>();
      } else if (key == "pool_factor") {
        c.strategy_params.pool_factor = item.value().get<std::size_t>();
      } else if (key == "direction") {
        Vector v(static_cast<Eigen::Index>(item.value().size()));
        for (std::size_t i = 0; i < item.value().size(); ++i) v(static_cast<Eigen::Index>(i)) = item.value()[i].get<double>();
        c.strategy_params.direction = v;
      } else {
        r.error("attack", "has unknown key '" + key + "'");
      }
    }
  }
  if (r.has("filter")) c.filter = r.nested("filter", [](const Json& f) { return filter_params_from_json(f); });
  if (r.has("xi")) {
    c.xi = r.number("xi");
    if (!(*c.xi > 0.0 && *c.xi < 1.0)) r.error("xi", "must lie in (0, 1)");
  }
  if (r.has("delta")) {
    c.delta = r.number("delta");
    if (!(*c.delta > 0.0 && *c.delta < 1.0)) r.error("delta", "must lie in (0, 1)");
  }
  if (r.has("timeout_ms")) {
    c.timeout_ms = r.number("timeout_ms");
    if (*c.timeout_ms <= 0.0) r.error("timeout_ms", "must be positive");
  }
  if (r.has("record_timing")) c.record_timing = r.boolean("record_timing");

  switch (c.learner) {
    case LearnerKind::LTF:
      if (c.distribution.family != "gaussian") r.error("learner", "ltf needs the gaussian family");
      if (c.d != 1) r.error("d", "must be 1 for the ltf learner");
      break;
    case LearnerKind::Intersection:
      if (c.distribution.family != "gaussian") r.error("learner", "intersection needs the gaussian family");
      if (c.d != 2) r.error("d", "must be 2 for the intersection learner");
      if (c.k > 3) r.error("k", "must be at most 3");
      if (c.k > c.n) r.error("k", "must not exceed n");
      break;
    case LearnerKind::PTF:
      if (c.distribution.family == "log-concave") r.error("distribution", "log-concave has no sampler for experiments");
      if (c.distribution.family == "hypercube" && c.d != 1) r.error("d", "must be 1 on the hypercube");
      break;
  }
  if (c.plant_polynomial && c.plant_polynomial->basis().n() != c.n) r.error("plant", "polynomial has the wrong n");
  if (c.strategy_params.direction && c.strategy_params.direction->size() != c.n) {
    r.error("attack", "direction has the wrong dimension");
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::ConfigError, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  return experiment_config_from_json(parse_json_text(text), text);
}

Json to_json(const ExperimentConfig& c) {
  Json eps = Json::array();
  for (double e : c.eps_grid) eps.push_back(e);
  Json strategies = Json::array();
  for (StrategyTag s : c.strategies) strategies.push_back(to_string(s));
  Json plant = {{"theta", plant_theta(c)}};
  if (c.plant_polynomial) plant["polynomial"] = to_json(*c.plant_polynomial);
  Json j = {{"learner", to_string(c.learner)},
            {"distribution", to_json(c.distribution)},
            {"n", c.n},
            {"d", c.d},
            {"k", c.k},
            {"eps", eps},
            {"strategies", strategies},
            {"m", c.m},
            {"holdout", c.holdout},
            {"score_count", c.score_count},
            {"trials", c.trials},
            {"seed", c.seed},
            {"plant", plant},
            {"filter", to_json(c.filter)},
            {"record_timing", c.record_timing}};
  Json attack = {{"rho", c.strategy_params.rho}, {"pool_factor", c.strategy_params.pool_factor}};
  if (c.strategy_params.magnitude) attack["magnitude"] = *c.strategy_params.magnitude;
  if (c.strategy_params.direction) {
    Json dir = Json::array();
    for (Eigen::Index i = 0; i < c.strategy_params.direction->size(); ++i) dir.push_back((*c.strategy_params.direction)(i));
    attack["direction"] = dir;
  }
  j["attack"] = attack;
  if (c.output) j["output"] = *c.output;
  if (c.xi) j["xi"] = *c.xi;
  if (c.delta) j["delta"] = *c.delta;
  if (c.timeout_ms) j["timeout_ms"] = *c.timeout_ms;
  return j;
}

double score(const Hypothesis& h, const Hypothesis& plant, const ReasonableDistribution& dist, std::size_t count,
             std::uint64_t seed) {
  require(count >= 1000, ErrorKind::InvalidArgument, "scoring needs at least 1000 points");
  return disagreement(h, plant, dist.sample(count, seed));
}

double plant_theta(const ExperimentConfig& c) {
  if (c.plant_theta) return *c.plant_theta;
  switch (c.learner) {
    case LearnerKind::LTF: return 1.0;
    case LearnerKind::Intersection: return 0.5;
    case LearnerKind::PTF: return 0.0;
  }
  return 0.0;
}

Hypothesis make_plant(const ExperimentConfig& c) {
  const int n = c.n;
  const double theta = plant_theta(c);
  switch (c.learner) {
    case LearnerKind::LTF: {
      Vector v = Vector::Zero(n);
      v(0) = 1.0;
      return LTF(v, theta);
    }
    case LearnerKind::Intersection: {
      std::vector<LTF> members;
      for (int j = 0; j < c.k; ++j) {
        Vector v = Vector::Zero(n);
        v(j) = 1.0;
        members.emplace_back(v, theta);
      }
      return Intersection(std::move(members), n);
    }
    case LearnerKind::PTF: {
      if (c.plant_polynomial) return PTF(*c.plant_polynomial);
      const bool cube = c.distribution.family == "hypercube";
      BasisPtr basis = enumerate_basis(n, c.d, cube ? BasisKind::Multilinear : BasisKind::Full);
      Vector coeffs = Vector::Zero(static_cast<Eigen::Index>(basis->size()));
      if (cube) {
        // sum_i x_i + 1/2: never zero on the cube.
        coeffs(0) = 0.5;
        for (int j = 0; j < n; ++j) coeffs(static_cast<Eigen::Index>(basis->linear_slot(j))) = 1.0;
      } else if (c.d == 1) {
        coeffs(0) = theta;
        coeffs(static_cast<Eigen::Index>(basis->linear_slot(0))) = 1.0;
      } else {
        MultiIndex sq(static_cast<std::size_t>(n), 0);
        sq[0] = 2;
        coeffs(0) = -1.0;
        coeffs(static_cast<Eigen::Index>(basis->find(sq))) = 1.0;
      }
      return PTF(Polynomial(std::move(basis), std::move(coeffs)));
    }
  }
  fail(ErrorKind::ConfigError, "unknown learner");
}

std::uint64_t cell_seed(const ExperimentConfig& c, std::size_t strategy_index, std::size_t eps_index,
                        std::size_t trial) {
  const std::size_t cell = (strategy_index * c.eps_grid.size() + eps_index) * c.trials + trial;
  return derive_seed(c.seed, cell);
}

CellOutcome run_cell(const ExperimentConfig& c, StrategyTag strategy, double eps, std::size_t trial,
                     std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  CellOutcome out;
  ResultRow& row = out.row;
  row.learner = to_string(c.learner);
  row.strategy = to_string(strategy);
  row.eps = eps;
  row.trial = trial;
  row.seed = seed;

  const Hypothesis plant = make_plant(c);
  AdversaryStrategy adv = c.strategy_params;
  adv.tag = strategy;
  const ReasonableDistribution dist = make_distribution(c.distribution, c.n, c.d, eps);

  try {
    switch (c.learner) {
      case LearnerKind::LTF: {
        LTFOptions opts;
        opts.filter = c.filter;
        opts.holdout = c.holdout;
        const SampleSource source = corrupted_source(plant, dist, eps, adv, derive_seed(seed, 1));
        const LTFResult res = learn_ltf(source, c.m, eps, derive_seed(seed, 3), opts);
        out.hypothesis = res.hypothesis;
        row.iterations = res.iterations;
        add_flag(row.flags, "branch=" + res.branch);
        if (res.weak) {
          const LTF& p = std::get<LTF>(plant);
          Vector chi(c.n + 1);
          chi(0) = ltf_mean(p.theta);
          chi.tail(c.n) = ltf_chow(p.v, p.theta);
          row.chow_error = chow_distance(res.weak->chow, make_chow(dist, chi));
          row.points_removed = removed_points(res.weak->chow.provenance);
          if (res.weak->chow.provenance.no_threshold) add_flag(row.flags, "no_threshold");
        }
        break;
      }
      case LearnerKind::PTF: {
        const PlantedInstance inst = plant_instance(plant, dist, c.m, derive_seed(seed, 1));
        const LabeledSampleSet corrupted = corrupt(inst.clean, plant, eps, adv, dist, derive_seed(seed, 2));
        PTFOptions opts;
        opts.filter = c.filter;
        opts.xi = c.xi;
        const PTFResult res = learn_ptf(corrupted, dist, c.d, eps, opts);
        out.hypothesis = res.ptf;
        row.iterations = res.reconstruction.iterations;
        row.points_removed = removed_points(res.target.provenance);
        const LabeledSampleSet reference = label_points(plant, dist.sample(c.score_count, derive_seed(seed, 5)));
        row.chow_error = chow_distance(res.target, empirical_chow(reference, dist));
        if (res.target.provenance.no_threshold) add_flag(row.flags, "no_threshold");
        if (res.reconstruction.stalled) add_flag(row.flags, "stalled");
        if (res.reconstruction.cap_reached) add_flag(row.flags, "cap_reached");
        break;
      }
      case LearnerKind::Intersection: {
        const PlantedInstance inst = plant_instance(plant, dist, c.m, derive_seed(seed, 1));
        const LabeledSampleSet corrupted = corrupt(inst.clean, plant, eps, adv, dist, derive_seed(seed, 2));
        IntersectionOptions opts;
        opts.filter = c.filter;
        opts.delta = c.delta;
        const IntersectionResult res = learn_intersection(corrupted, c.k, eps, opts);
        out.hypothesis = res.hypothesis;
        row.iterations = res.chow.provenance.iterations;
        row.points_removed = removed_points(res.chow.provenance);
        const LabeledSampleSet reference = label_points(plant, dist.sample(c.score_count, derive_seed(seed, 5)));
        row.chow_error = chow_distance(res.chow, empirical_chow(reference, dist));
        add_flag(row.flags, "dim=" + std::to_string(res.subspace.dim()));
        if (res.chow.provenance.no_threshold) add_flag(row.flags, "no_threshold");
        break;
      }
    }
    row.disagreement = score(*out.hypothesis, plant, dist, c.score_count, derive_seed(seed, 4));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigError) throw;
    add_flag(row.flags, "error=" + std::string(to_string(e.kind())));
  }

  const double ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (c.record_timing) row.wall_time_ms = ms;
  if (c.timeout_ms && ms > *c.timeout_ms) add_flag(row.flags, "timeout");
  return out;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& c) {
  require(!c.eps_grid.empty(), ErrorKind::ConfigError, "eps grid is empty");
  require(!c.strategies.empty(), ErrorKind::ConfigError, "strategy list is empty");
  require(c.trials > 0, ErrorKind::ConfigError, "trials must be positive");
  const std::size_t per_strategy = c.eps_grid.size() * c.trials;
  const std::size_t cells = c.strategies.size() * per_strategy;
  std::vector<ResultRow> rows(cells);
  parallel_for(cells, [&](std::size_t cell) {
    const std::size_t s = cell / per_strategy;
    const std::size_t e = (cell % per_strategy) / c.trials;
    const std::size_t t = cell % c.trials;
    rows[cell] = run_cell(c, c.strategies[s], c.eps_grid[e], t, cell_seed(c, s, e, t)).row;
  });
  if (c.output) write_results_csv(rows, *c.output);
  return rows;
}

const char* const kResultHeader =
    "learner,strategy,eps,trial,seed,disagreement,chow_error,iterations,points_removed,wall_time_ms,flags";

std::string format_row(const ResultRow& row) {
  std::string s = row.learner + "," + row.strategy + "," + format_double(row.eps) + "," + std::to_string(row.trial) +
                  "," + std::to_string(row.seed) + ",";
  if (row.disagreement) s += format_double(*row.disagreement);
  s += ",";
  if (row.chow_error) s += format_double(*row.chow_error);
  s += "," + std::to_string(row.iterations) + "," + std::to_string(row.points_removed) + "," +
       format_double(row.wall_time_ms) + "," + row.flags;
  return s;
}

void write_results_csv(const std::vector<ResultRow>& rows, std::ostream& out) {
  out << kResultHeader << '\n';
  for (const auto& row : rows) out << format_row(row) << '\n';
}

void write_results_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::IoError, "cannot write '" + path + "'");
  write_results_csv(rows, out);
  require(out.good(), ErrorKind::IoError, "write to '" + path + "' failed");
}

}  // namespace rchow
