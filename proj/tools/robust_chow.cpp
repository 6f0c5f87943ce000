#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rchow/error.hpp"
#include "rchow/harness.hpp"
#include "rchow/sample_set.hpp"
#include "rchow/serialize.hpp"

namespace {

using rchow::ErrorKind;
using rchow::Json;

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

struct LearnFlags {
  std::string json_out;
  std::optional<double> eps;
  std::optional<std::size_t> m;
  std::optional<std::string> strategy;
  std::optional<int> n;
  std::optional<int> d;
  std::optional<int> k;
  std::optional<double> xi;
  std::optional<double> theta_plant;
  std::optional<double> delta;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  rchow::require(out.good(), ErrorKind::IoError, "cannot write '" + path + "'");
  out << text;
}

int run_chow(const Common& common) {
  const Json cfg = rchow::load_json_file(common.config);
  rchow::require(cfg.is_object(), ErrorKind::ConfigError, "chow config must be a JSON object");
  for (const auto& item : cfg.items()) {
    const std::string& key = item.key();
    rchow::require(key == "samples" || key == "distribution" || key == "eps" || key == "filter" || key == "unfiltered",
                   ErrorKind::ConfigError, "unknown key '" + key + "' in chow config");
  }
  rchow::require(cfg.contains("samples"), ErrorKind::ConfigError, "chow config needs 'samples'");
  const rchow::LabeledSampleSet samples = rchow::read_samples_csv(cfg.at("samples").get<std::string>());
  int n = samples.n();
  int d = 1;
  rchow::DistributionConfig dc;
  if (cfg.contains("distribution")) dc = rchow::distribution_config_from_json(cfg.at("distribution"), &n, &d);
  rchow::require(n == samples.n(), ErrorKind::ConfigError, "distribution.n does not match the sample file");
  const double eps = cfg.contains("eps") ? cfg.at("eps").get<double>() : 0.0;
  rchow::require(eps >= 0.0 && eps < 1.0 / 3.0, ErrorKind::ConfigError, "'eps' must lie in [0, 1/3)");
  rchow::FilterParams fp;
  if (cfg.contains("filter")) fp = rchow::filter_params_from_json(cfg.at("filter"));
  const rchow::ReasonableDistribution dist = rchow::make_distribution(dc, n, d, eps);
  const bool unfiltered = cfg.contains("unfiltered") && cfg.at("unfiltered").get<bool>();
  const rchow::ChowEstimate est = unfiltered ? rchow::empirical_chow(samples, dist) : rchow::robust_chow(samples, dist, fp);
  write_text(common.out, rchow::to_json(est).dump(2) + "\n");
  return 0;
}

rchow::ExperimentConfig learn_config(const Common& common, const LearnFlags& flags, const std::string& learner) {
  Json j;
  std::string text;
  if (!common.config.empty()) {
    std::ifstream in(common.config);
    rchow::require(in.good(), ErrorKind::ConfigError, "cannot open config '" + common.config + "'");
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    j = rchow::parse_json_text(text);
  } else {
    j = Json::object();
  }
  rchow::require(j.is_object(), ErrorKind::ConfigError, "config must be a JSON object");
  if (j.contains("learner")) {
    rchow::require(j.at("learner") == learner, ErrorKind::ConfigError,
                   "config learner does not match the subcommand '" + learner + "'");
  }
  j["learner"] = learner;
  if (flags.eps) j["eps"] = Json::array({*flags.eps});
  if (!j.contains("eps")) j["eps"] = Json::array({0.0});
  if (flags.strategy) j["strategies"] = Json::array({*flags.strategy});
  if (!j.contains("strategies")) j["strategies"] = Json::array({"none"});
  if (flags.m) j["m"] = *flags.m;
  if (flags.n) j["n"] = *flags.n;
  if (flags.d) j["d"] = *flags.d;
  if (flags.k) j["k"] = *flags.k;
  if (flags.xi) j["xi"] = *flags.xi;
  if (flags.delta) j["delta"] = *flags.delta;
  if (flags.theta_plant) j["plant"]["theta"] = *flags.theta_plant;
  if (common.seed) j["seed"] = *common.seed;
  j["trials"] = 1;
  return rchow::experiment_config_from_json(j, text);
}

int run_learn(const Common& common, const LearnFlags& flags, const std::string& learner) {
  const rchow::ExperimentConfig cfg = learn_config(common, flags, learner);
  const rchow::CellOutcome cell =
      rchow::run_cell(cfg, cfg.strategies.front(), cfg.eps_grid.front(), 0, rchow::cell_seed(cfg, 0, 0, 0));
  if (cell.hypothesis) write_text(flags.json_out, rchow::to_json(*cell.hypothesis).dump(2) + "\n");
  std::string csv = std::string(rchow::kResultHeader) + "\n" + rchow::format_row(cell.row) + "\n";
  const std::string csv_path = !common.out.empty() ? common.out : cfg.output.value_or("");
  write_text(csv_path, csv);
  if (!cell.hypothesis) {
    std::cerr << "learner failed: " << cell.row.flags << "\n";
    return 3;
  }
  return 0;
}

int run_experiment_cmd(const Common& common) {
  rchow::ExperimentConfig cfg = rchow::load_experiment_config(common.config);
  if (common.seed) cfg.seed = *common.seed;
  if (!common.out.empty()) cfg.output = common.out;
  const auto rows = rchow::run_experiment(cfg);
  if (!cfg.output) rchow::write_results_csv(rows, std::cout);
  return 0;
}

bool is_config_error(ErrorKind kind) {
  return kind == ErrorKind::ConfigError || kind == ErrorKind::UnknownStrategy || kind == ErrorKind::UnknownFamily;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust Chow-parameter estimation and learners under nasty noise"};
  app.require_subcommand(1);

  Common common;
  LearnFlags flags;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", common.config, "JSON config file");
    if (config_required) opt->required();
    sub->add_option("--out", common.out, "output path (stdout when omitted)");
    sub->add_option("--seed", common.seed, "master seed");
  };

  CLI::App* chow = app.add_subcommand("chow", "robust Chow parameters of a sample CSV");
  add_common(chow, true);

  auto add_learn = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, false);
    sub->add_option("--json", flags.json_out, "hypothesis JSON path (stdout when omitted)");
    sub->add_option("--eps", flags.eps, "corruption rate");
    sub->add_option("--m", flags.m, "training samples");
    sub->add_option("--strategy", flags.strategy, "adversary strategy");
    sub->add_option("--n", flags.n, "dimension");
    return sub;
  };
  CLI::App* ptf = add_learn("learn-ptf", "learn a degree-d PTF");
  ptf->add_option("--d", flags.d, "degree");
  ptf->add_option("--xi", flags.xi, "grid step override");
  CLI::App* ltf = add_learn("learn-ltf", "learn an LTF under the Gaussian");
  ltf->add_option("--theta-plant", flags.theta_plant, "threshold of the planted LTF");
  CLI::App* inter = add_learn("learn-intersection", "learn an intersection of k halfspaces");
  inter->add_option("--k", flags.k, "number of halfspaces");
  inter->add_option("--delta-override", flags.delta, "cover resolution");
  inter->add_option("--theta-plant", flags.theta_plant, "threshold of each planted halfspace");
  CLI::App* experiment = app.add_subcommand("experiment", "run a sweep and write result rows");
  add_common(experiment, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (chow->parsed()) return run_chow(common);
    if (ptf->parsed()) return run_learn(common, flags, "ptf");
    if (ltf->parsed()) return run_learn(common, flags, "ltf");
    if (inter->parsed()) return run_learn(common, flags, "intersection");
    if (experiment->parsed()) return run_experiment_cmd(common);
  } catch (const rchow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_config_error(e.kind()) ? 2 : 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
