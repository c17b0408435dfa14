// lmnl: estimate choice models, generate synthetic data and run the
// experiment drivers. Exit codes: 0 ok, 1 runtime failure, 2 bad config.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "lmnl/analysis.hpp"
#include "lmnl/error.hpp"
#include "lmnl/model_io.hpp"

using namespace lmnl;
using lmnl::cli::Config;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::string out_dir = "runs";
};

void add_common(CLI::App* app, Common& c, bool config_required) {
  auto* opt = app->add_option("--config", c.config, "run configuration (INI)");
  if (config_required) opt->required();
  app->add_option("--seed", c.seed, "seed for every random draw");
  app->add_option("--jobs", c.jobs, "worker threads for replications")->check(CLI::PositiveNumber);
  app->add_option("--out-dir", c.out_dir, "parent directory of the run directory");
}

Config load_config(const Common& c) {
  Config cfg = c.config.empty() ? Config{} : Config::load(c.config);
  if (c.seed) cfg.set("run.seed", std::to_string(*c.seed));
  if (!cfg.has("run.seed")) cfg.set("run.seed", "0");
  return cfg;
}

template <typename F>
void write_file(const std::filesystem::path& path, F&& body) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  body(f);
  if (!f) throw Error("error while writing " + path.string());
}

void print_advisories(const ModelDef& def, const ChoiceDataset& data) {
  if (def.kind != ModelKind::LMNL && def.kind != ModelKind::LNL) return;
  FeaturePartition p = def.partition;
  if (p.x.empty()) p.x = def.spec.columns();
  const auto check = validate_partition(p, def.kind, &data, 0.8);
  for (const auto& a : check.advisories) std::cerr << "advisory: " << a << '\n';
  if (!check.ok()) {
    std::string msg;
    for (const auto& v : check.violations) msg += (msg.empty() ? "" : "; ") + v;
    throw ConfigError(msg);
  }
}

// Trained model for the analysis commands: a saved one (model.file) or a fresh fit.
HybridChoiceModel obtain_model(const Config& cfg, const ChoiceDataset& train) {
  if (cfg.has("model.file")) return load_model(std::filesystem::path(cfg.str("model.file")));
  const auto def = cli::model_def(cfg);
  print_advisories(def, train);
  const auto tc = cli::train_config(cfg);
  auto model = def.build(tc.seed);
  fit(model, train, tc, parse_strategy(cfg.str("train.strategy", "joint")), nullptr,
      ReportOptions{.standard_errors = false, .ratios = {}});
  return model;
}

int cmd_estimate(const Common& common, bool eval_only, bool ga_cost_adjust, const std::string& model_file) {
  Config cfg = load_config(common);
  if (ga_cost_adjust) cfg.set("data.ga_cost_adjust", "true");
  if (!model_file.empty()) cfg.set("model.file", model_file);
  if (eval_only && !cfg.has("model.file")) throw ConfigError("--eval-only needs a saved model (--model or model.file)");

  auto [train_data, test_data] = cli::load_data(cfg);
  const ChoiceDataset* test = test_data.rows() > 0 ? &test_data : nullptr;
  ReportOptions options;
  options.standard_errors = cfg.flag("report.standard_errors", true);

  HybridChoiceModel model;
  EstimationReport report;
  std::string name;
  if (eval_only) {
    model = load_model(std::filesystem::path(cfg.str("model.file")));
    name = cfg.str("model.name", to_string(model.kind));
    report = evaluate(model, train_data, test, options);
  } else {
    const auto def = cli::model_def(cfg);
    name = def.name;
    print_advisories(def, train_data);
    const auto tc = cli::train_config(cfg);
    model = def.build(tc.seed);
    const auto strategy = parse_strategy(cfg.str("train.strategy", "joint"));
    report = fit(model, train_data, tc, strategy, test, options);
  }
  report.model = name;
  const auto dir = cli::make_run_dir(common.out_dir, "estimate", cfg);
  report.save(dir, "report");
  save_model(model, dir / "model.txt");
  std::cout << report.markdown() << "\nrun directory: " << dir.string() << '\n';
  return 0;
}

int cmd_generate(const Common& common, const std::string& scenario, std::optional<std::size_t> n,
                 std::optional<std::size_t> n_test, double s, double beta_u, const std::string& source) {
  Config cfg = load_config(common);
  cfg.set("generate.scenario", scenario);
  if (n) cfg.set("scenario.n_train", std::to_string(*n));
  if (n_test) cfg.set("scenario.n_test", std::to_string(*n_test));
  const auto seed = static_cast<std::uint64_t>(cfg.integer("run.seed", 0));

  ChoiceDataset data;
  Truth truth;
  if (scenario == "binary" || scenario == "correlated" || scenario == "unobserved") {
    auto sc = cli::binary_scenario(cfg);
    if (scenario == "binary") {
      data = gen_binary(sc);
      truth = sc.truth();
    } else if (scenario == "correlated") {
      cfg.set("scenario.s", std::to_string(s));
      data = gen_correlated(sc, s);
      truth = sc.truth();
      truth.set("s", s);
    } else {
      cfg.set("scenario.beta_u", std::to_string(beta_u));
      std::tie(data, truth) = gen_with_unobserved(sc, beta_u);
    }
  } else if (scenario == "guevara") {
    const std::size_t rows = n.value_or(static_cast<std::size_t>(cfg.integer("scenario.rows", 1000)));
    data = gen_guevara(rows, seed);
    truth = guevara_truth();
  } else if (scenario == "semi_synthetic") {
    const auto path = source.empty() ? cfg.str("data.path") : source;
    cfg.set("data.path", path);
    SemiSyntheticScenario sc;
    sc.seed = seed;
    sc.rows = n.value_or(0);
    sc.minmax_scale = cfg.flag("scenario.minmax_scale", true);
    data = gen_semi_synthetic(sc, preprocess_swissmetro(load_table(path)));
    truth = sc.truth();
  } else {
    throw ConfigError("unknown scenario '" + scenario +
                      "' (binary, correlated, unobserved, guevara, semi_synthetic)");
  }
  const auto dir = cli::make_run_dir(common.out_dir, "generate", cfg);
  write_csv(data, dir / (scenario + ".csv"));
  truth.write(dir / (scenario + "_truth.txt"));
  std::cout << data.rows() << " rows written to " << (dir / (scenario + ".csv")).string() << '\n';
  return 0;
}

struct ExperimentArgs {
  std::optional<std::size_t> reps;
  std::vector<Eigen::Index> widths;
  std::vector<double> s_values;
  std::string column;
  std::vector<double> perturbations;
  std::string model_file;
};

int cmd_experiment(const Common& common, const std::string& kind, const ExperimentArgs& args) {
  Config cfg = load_config(common);
  cfg.set("experiment.kind", kind);
  if (args.reps) cfg.set("experiment.replications", std::to_string(*args.reps));
  if (!args.model_file.empty()) cfg.set("model.file", args.model_file);
  const auto seed = static_cast<std::uint64_t>(cfg.integer("run.seed", 0));
  const auto reps = static_cast<std::size_t>(cfg.integer("experiment.replications", 20));
  if (reps < 1) throw ConfigError("replications must be >= 1");
  const auto list_or = [&](const std::string& key, auto values) {
    std::string joined;
    for (auto v : values) joined += (joined.empty() ? "" : ",") + std::to_string(v);
    if (!joined.empty()) cfg.set(key, joined);
  };

  if (kind == "montecarlo") {
    CampaignConfig c;
    const auto design = cfg.str("experiment.design", "binary");
    const auto width = cfg.integer("model.width", design == "guevara" ? 100 : 25);
    if (design == "binary") {
      c.design = binary_design(cli::binary_scenario(cfg));
      c.models = synthetic_benchmark_models(width);
    } else if (design == "guevara") {
      c.design = guevara_design(static_cast<std::size_t>(cfg.integer("scenario.n_train", 1000)),
                                static_cast<std::size_t>(cfg.integer("scenario.n_test", 0)));
      c.models = guevara_models(width);
    } else {
      throw ConfigError("unknown experiment.design '" + design + "' (binary, guevara)");
    }
    c.train = cli::train_config(cfg);
    c.replications = reps;
    c.seed = seed;
    c.jobs = common.jobs;
    const auto result = monte_carlo(c);
    const auto dir = cli::make_run_dir(common.out_dir, "montecarlo", cfg);
    result.save(dir, "montecarlo", "Monte Carlo (" + std::to_string(reps) + " replications)");
    std::cout << result.markdown("Monte Carlo") << "\nrun directory: " << dir.string() << '\n';
    return 0;
  }

  if (kind == "neuron-scan") {
    list_or("experiment.widths", args.widths);
    std::vector<Eigen::Index> widths;
    for (const auto& w : cfg.list("experiment.widths")) widths.push_back(std::stol(w));
    if (widths.empty()) widths = {0, 10, 100};
    Design design;
    std::function<ModelDef(Eigen::Index)> model_for;
    if (cfg.has("data.path")) {
      auto [tr, te] = cli::load_data(cfg);
      design = fixed_design(std::move(tr), std::move(te));
      design.ratios = {{"B_COST", "B_TIME"}, {"B_COST", "B_FREQ"}};
      model_for = [cfg](Eigen::Index w) {
        Config local = cfg;
        local.set("model.width", std::to_string(std::max<Eigen::Index>(w, 1)));
        auto d = cli::model_def(local);
        if (w == 0) {
          d.kind = ModelKind::Logit;
          d.partition = {};
          d.nests.reset();
        }
        return d;
      };
    } else {
      design = binary_design(cli::binary_scenario(cfg));
      model_for = [](Eigen::Index w) { return binary_lmnl("lmnl", {"p", "a", "b"}, {"q", "c"}, w); };
    }
    const auto result =
        neuron_scan(design, model_for, widths, cli::train_config(cfg), reps, seed, common.jobs);
    const auto dir = cli::make_run_dir(common.out_dir, "neuron-scan", cfg);
    result.save(dir, "neuron_scan", "Neuron scan");
    std::cout << result.markdown("Neuron scan") << "\nrun directory: " << dir.string() << '\n';
    return 0;
  }

  if (kind == "correlation-sweep") {
    list_or("experiment.s", args.s_values);
    auto s_values = cfg.reals("experiment.s");
    if (s_values.empty()) s_values = {0.0, 0.4, 0.8, 1.0};
    const auto width = cfg.integer("model.width", 100);
    const auto sweep = correlation_bias_sweep(cli::binary_scenario(cfg), s_values, correlation_models(width),
                                              cli::train_config(cfg), reps, seed, common.jobs);
    const auto dir = cli::make_run_dir(common.out_dir, "correlation-sweep", cfg);
    write_file(dir / "correlation_sweep.csv", [&](std::ostream& os) { write_sweep_csv(sweep, os); });
    const auto md = sweep_markdown(sweep);
    write_file(dir / "correlation_sweep.md", [&](std::ostream& os) { os << md; });
    std::cout << md << "\nrun directory: " << dir.string() << '\n';
    return 0;
  }

  if (kind == "sensitivity" || kind == "feature-impact") {
    if (!args.column.empty()) cfg.set("experiment.column", args.column);
    list_or("experiment.perturbations", args.perturbations);
    auto [train_data, test_data] = cli::load_data(cfg);
    const auto model = obtain_model(cfg, train_data);
    const auto dir = cli::make_run_dir(common.out_dir, kind, cfg);
    save_model(model, dir / "model.txt");
    if (kind == "sensitivity") {
      auto perturbations = cfg.reals("experiment.perturbations");
      if (perturbations.empty()) perturbations = {-50, -25, 0, 25, 50};
      const auto r = sensitivity_sweep(model, train_data, cfg.str("experiment.column"), perturbations);
      write_file(dir / "sensitivity.csv", [&](std::ostream& os) { r.write_csv(os); });
      write_file(dir / "sensitivity.md", [&](std::ostream& os) { os << r.markdown(); });
      std::cout << r.markdown();
    } else {
      const auto r = feature_impact(model, train_data);
      write_file(dir / "feature_impact.csv", [&](std::ostream& os) { r.write_csv(os); });
      write_file(dir / "feature_impact.md", [&](std::ostream& os) { os << r.markdown(); });
      std::cout << r.markdown();
    }
    std::cout << "\nrun directory: " << dir.string() << '\n';
    return 0;
  }

  if (kind == "strategy-compare") {
    BinaryScenario sc = cli::binary_scenario(cfg);
    if (!cfg.has("scenario.beta_p")) sc.beta_p = -2.0;
    if (!cfg.has("scenario.beta_a")) sc.beta_a = 1.0;
    const auto data = gen_binary(sc);
    auto [train_data, test_data] = head_split(data, sc.n_train);
    const auto def = binary_lmnl("lmnl", {"p", "a", "b"}, {"q", "c"}, cfg.integer("model.width", 100));
    const auto rows = strategy_compare(def, train_data, test_data.rows() ? &test_data : nullptr,
                                       cli::train_config(cfg));
    const auto dir = cli::make_run_dir(common.out_dir, "strategy-compare", cfg);
    write_file(dir / "strategies.csv", [&](std::ostream& os) { write_strategy_csv(rows, os); });
    const auto md = strategy_markdown(rows);
    write_file(dir / "strategies.md", [&](std::ostream& os) { os << md; });
    std::cout << md << "\nrun directory: " << dir.string() << '\n';
    return 0;
  }

  throw ConfigError("unknown experiment '" + kind +
                    "' (montecarlo, neuron-scan, correlation-sweep, sensitivity, feature-impact, "
                    "strategy-compare)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid discrete choice models: linear utilities with a learned representation term"};
  app.require_subcommand(1);

  Common est_common;
  bool eval_only = false, ga_cost_adjust = false;
  std::string est_model;
  auto* est = app.add_subcommand("estimate", "fit (or evaluate) one model and write its report");
  add_common(est, est_common, true);
  est->add_flag("--eval-only", eval_only, "evaluate a saved model without training");
  est->add_flag("--ga-cost-adjust", ga_cost_adjust, "Swissmetro: zero train/SM cost for GA holders");
  est->add_option("--model", est_model, "saved model file (for --eval-only)");

  Common gen_common;
  std::string scenario, source;
  std::optional<std::size_t> n, n_test;
  double s = 0.0, beta_u = 0.0;
  auto* gen = app.add_subcommand("generate", "write a synthetic dataset and its truth sidecar");
  add_common(gen, gen_common, false);
  gen->add_option("scenario", scenario, "binary | correlated | unobserved | guevara | semi_synthetic")->required();
  gen->add_option("--n", n, "rows (training rows for the binary family)");
  gen->add_option("--n-test", n_test, "test rows (binary family)");
  gen->add_option("--s", s, "correlation for 'correlated'")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--beta-u", beta_u, "coefficient of the unobserved variable");
  gen->add_option("--source", source, "raw Swissmetro file for semi_synthetic");

  Common exp_common;
  std::string kind;
  ExperimentArgs ea;
  auto* exp = app.add_subcommand("experiment", "run an experiment driver");
  add_common(exp, exp_common, false);
  exp->add_option("kind", kind,
                  "montecarlo | neuron-scan | correlation-sweep | sensitivity | feature-impact | strategy-compare")
      ->required();
  exp->add_option("--reps", ea.reps, "replications")->check(CLI::PositiveNumber);
  exp->add_option("--widths", ea.widths, "hidden widths for neuron-scan")->delimiter(',');
  exp->add_option("--s", ea.s_values, "correlation values for correlation-sweep")->delimiter(',');
  exp->add_option("--column", ea.column, "network input to perturb (sensitivity)");
  exp->add_option("--perturbations", ea.perturbations, "percent changes (sensitivity)")->delimiter(',');
  exp->add_option("--model", ea.model_file, "saved model for sensitivity / feature-impact");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*est) return cmd_estimate(est_common, eval_only, ga_cost_adjust, est_model);
    if (*gen) return cmd_generate(gen_common, scenario, n, n_test, s, beta_u, source);
    if (*exp) return cmd_experiment(exp_common, kind, ea);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
