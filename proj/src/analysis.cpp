#include "lmnl/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "lmnl/error.hpp"
#include "lmnl/random.hpp"

namespace lmnl {

namespace {

std::string real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt(double x, int digits) {
  if (!std::isfinite(x)) return "-";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string ratio_key(const std::pair<std::string, std::string>& r) { return r.first + "/" + r.second; }

std::optional<double> truth_of(const Design& d, const std::string& name) {
  for (const auto& t : d.truth) {
    if (t.name == name) return t.value;
  }
  return std::nullopt;
}

bool has_parameter(const HybridChoiceModel& m, const std::string& name) {
  const auto& p = m.spec.parameters();
  return std::find(p.begin(), p.end(), name) != p.end();
}

// Runs f(0..count-1) on up to `jobs` threads; results are written by index, so
// the outcome does not depend on scheduling.
template <typename F>
void parallel_for(std::size_t count, unsigned jobs, F&& f) {
  const unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
  if (n == 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) f(i);
    });
  }
}

std::uint64_t data_seed(std::uint64_t base, std::size_t replication) {
  return Rng::mix(base + 0x2545f4914f6cdd1dULL * (replication + 1));
}

std::vector<NamedValue> replication_metrics(const HybridChoiceModel& model, const EstimationReport& r,
                                            const Design& design) {
  std::vector<NamedValue> out;
  out.push_back({"train_ll", r.train_ll});
  out.push_back({"train_accuracy", r.train_accuracy});
  if (r.has_test) {
    out.push_back({"test_ll", r.test_ll});
    out.push_back({"test_accuracy", r.test_accuracy});
  }
  double not_rejected = 0.0;
  int tested = 0;
  for (const auto& name : design.tracked) {
    if (!has_parameter(model, name)) continue;
    const auto& est = r.parameter(name);
    out.push_back({"estimate:" + name, est.value});
    const auto truth = truth_of(design, name);
    if (!truth) continue;
    if (auto e = relative_error(est.value, *truth)) out.push_back({"error:" + name, *e});
    if (std::isfinite(est.std_error) && est.std_error > 0.0) {
      const bool keep = !t_test(est.value, est.std_error, *truth).reject;
      out.push_back({"not_rejected:" + name, keep ? 1.0 : 0.0});
      not_rejected += keep ? 1.0 : 0.0;
      ++tested;
    }
  }
  if (tested > 0) out.push_back({"not_rejected_mean", not_rejected / tested});
  for (const auto& pair : design.ratios) {
    if (!has_parameter(model, pair.first) || !has_parameter(model, pair.second)) continue;
    const double num = r.value(pair.first);
    const double den = r.value(pair.second);
    if (std::abs(den) < 1e-12) continue;
    const auto key = ratio_key(pair);
    out.push_back({"ratio:" + key, num / den});
    const auto tn = truth_of(design, pair.first);
    const auto td = truth_of(design, pair.second);
    if (!tn || !td) continue;
    if (auto e = ratio_relative_error(num, *tn, den, *td)) out.push_back({"ratio_error:" + key, *e});
    if (r.covariance.rows() == static_cast<Eigen::Index>(model.spec.parameter_count()) &&
        r.covariance.allFinite()) {
      const auto test = ratio_t_test(model.beta, r.covariance, model.spec.parameter_index(pair.first),
                                     model.spec.parameter_index(pair.second), *tn / *td);
      if (std::isfinite(test.t)) out.push_back({"ratio_not_rejected:" + key, test.reject ? 0.0 : 1.0});
    }
  }
  return out;
}

void write_summary_rows(std::ostream& os, const std::vector<ModelSummary>& summaries,
                        const std::string& prefix) {
  for (const auto& s : summaries) {
    os << prefix << s.model << ",runs," << s.runs << "," << s.runs << ",0,"
       << s.runs << '\n';
    os << prefix << s.model << ",failures," << s.runs << "," << s.failures << ",0," << s.failures
       << '\n';
    for (const auto& m : s.metrics) {
      os << prefix << s.model << ',' << m.metric << ',' << m.n << ',' << real(m.mean) << ','
         << real(m.sd) << ',' << real(m.median) << '\n';
    }
  }
}

std::string summary_table(const std::vector<ModelSummary>& summaries) {
  // collect metric names in first-seen order
  std::vector<std::string> metrics;
  for (const auto& s : summaries) {
    for (const auto& m : s.metrics) {
      if (std::find(metrics.begin(), metrics.end(), m.metric) == metrics.end()) metrics.push_back(m.metric);
    }
  }
  std::ostringstream os;
  os << "| model | runs | failed |";
  for (const auto& m : metrics) os << ' ' << m << " |";
  os << "\n|---|---|---|";
  for (std::size_t k = 0; k < metrics.size(); ++k) os << "---|";
  os << '\n';
  for (const auto& s : summaries) {
    os << "| " << s.model << " | " << s.runs << " | " << s.failures << " |";
    for (const auto& m : metrics) {
      const auto* v = s.find(m);
      if (!v) {
        os << " - |";
        continue;
      }
      const bool pct = m.rfind("error", 0) == 0 || m.rfind("ratio_error", 0) == 0 ||
                       m.find("not_rejected") != std::string::npos || m.find("accuracy") != std::string::npos;
      const double scale = pct ? 100.0 : 1.0;
      os << ' ' << fmt(v->mean * scale, pct ? 1 : 3) << " ± " << fmt(v->sd * scale, pct ? 1 : 3) << " |";
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- designs

Design binary_design(const BinaryScenario& scenario, double correlation) {
  if (!(correlation >= 0.0 && correlation <= 1.0)) throw ConfigError("correlation s must lie in [0, 1]");
  Design d;
  d.make = [scenario, correlation](std::uint64_t seed) {
    BinaryScenario sc = scenario;
    sc.seed = seed;
    auto data = correlation == 0.0 ? gen_binary(sc) : gen_correlated(sc, correlation);
    return head_split(data, sc.n_train);
  };
  d.truth = {{"B_P", scenario.beta_p}, {"B_A", scenario.beta_a}, {"B_B", scenario.beta_b},
             {"B_QC", scenario.beta_qc}};
  d.tracked = {"B_P", "B_A"};
  d.ratios = {{"B_P", "B_A"}};
  return d;
}

Design guevara_design(std::size_t n_train, std::size_t n_test) {
  if (n_train == 0) throw ConfigError("n_train must be >= 1");
  Design d;
  d.make = [n_train, n_test](std::uint64_t seed) {
    return head_split(gen_guevara(n_train + n_test, seed), n_train);
  };
  const auto t = guevara_truth();
  d.truth = {{"B_P", t.get("beta_p")}, {"B_A", t.get("beta_a")}, {"B_B", t.get("beta_b")},
             {"B_Q", t.get("beta_q")}};
  d.tracked = {"B_P", "B_A"};
  d.ratios = {{"B_P", "B_A"}};
  return d;
}

Design fixed_design(ChoiceDataset train, ChoiceDataset test) {
  Design d;
  auto shared = std::make_shared<std::pair<ChoiceDataset, ChoiceDataset>>(std::move(train), std::move(test));
  d.make = [shared](std::uint64_t) { return *shared; };
  return d;
}

// ---------------------------------------------------------------- monte carlo

std::optional<double> ReplicationRecord::metric(std::string_view name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return m.value;
  }
  return std::nullopt;
}

const Summary* ModelSummary::find(std::string_view metric) const {
  for (const auto& m : metrics) {
    if (m.metric == metric) return &m;
  }
  return nullptr;
}

double ModelSummary::mean(std::string_view metric) const {
  const auto* s = find(metric);
  if (!s) throw ConfigError("model '" + model + "' has no metric '" + std::string(metric) + "'");
  return s->mean;
}

const ModelSummary& CampaignResult::summary(std::string_view model) const {
  for (const auto& s : summaries) {
    if (s.model == model) return s;
  }
  throw ConfigError("no summary for model '" + std::string(model) + "'");
}

std::vector<ModelSummary> summarise(const std::vector<ReplicationRecord>& records,
                                    const std::vector<std::string>& model_order) {
  std::vector<ModelSummary> out;
  for (const auto& name : model_order) {
    ModelSummary s;
    s.model = name;
    std::vector<std::string> metric_order;
    std::vector<std::vector<double>> values;
    for (const auto& r : records) {
      if (r.model != name) continue;
      ++s.runs;
      if (r.failed) {
        ++s.failures;
        continue;
      }
      for (const auto& m : r.metrics) {
        auto it = std::find(metric_order.begin(), metric_order.end(), m.name);
        if (it == metric_order.end()) {
          metric_order.push_back(m.name);
          values.emplace_back();
          it = metric_order.end() - 1;
        }
        values[static_cast<std::size_t>(it - metric_order.begin())].push_back(m.value);
      }
    }
    for (std::size_t k = 0; k < metric_order.size(); ++k) {
      auto& v = values[k];
      Summary sm;
      sm.metric = metric_order[k];
      sm.n = v.size();
      double sum = 0.0;
      for (double x : v) sum += x;
      sm.mean = sum / static_cast<double>(v.size());
      double ss = 0.0;
      for (double x : v) ss += (x - sm.mean) * (x - sm.mean);
      sm.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
      std::sort(v.begin(), v.end());
      const std::size_t h = v.size() / 2;
      sm.median = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
      s.metrics.push_back(sm);
    }
    out.push_back(std::move(s));
  }
  return out;
}

CampaignResult monte_carlo(const CampaignConfig& config) {
  if (config.replications < 1) throw ConfigError("replications must be >= 1");
  if (config.models.empty()) throw ConfigError("no models to run");
  if (!config.design.make) throw ConfigError("design has no data source");
  config.train.validate();

  const std::size_t M = config.models.size();
  std::vector<ReplicationRecord> records(config.replications * M);
  ReportOptions options;
  options.standard_errors = config.standard_errors;
  options.ratios.clear();

  parallel_for(config.replications, config.jobs, [&](std::size_t rep) {
    const auto seed = data_seed(config.seed, rep);
    std::pair<ChoiceDataset, ChoiceDataset> data;
    std::string data_error;
    try {
      data = config.design.make(seed);
    } catch (const std::exception& e) {
      data_error = std::string("data generation: ") + e.what();
    }
    for (std::size_t m = 0; m < M; ++m) {
      auto& rec = records[rep * M + m];
      rec.replication = rep;
      rec.data_seed = seed;
      rec.model = config.models[m].name;
      if (!data_error.empty()) {
        rec.failed = true;
        rec.error = data_error;
        continue;
      }
      try {
        const auto model_seed = Rng::mix(seed ^ (0x9e3779b97f4a7c15ULL * (m + 1)));
        auto model = config.models[m].build(model_seed);
        TrainConfig tc = config.train;
        tc.seed = Rng::mix(model_seed + 1);
        const ChoiceDataset* test = data.second.rows() > 0 ? &data.second : nullptr;
        const auto report = fit(model, data.first, tc, Strategy::Joint, test, options);
        rec.metrics = replication_metrics(model, report, config.design);
      } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = "replication " + std::to_string(rep) + ", model " + rec.model + ": " + e.what();
      }
    }
  });

  CampaignResult result;
  result.records = std::move(records);
  std::vector<std::string> names;
  for (const auto& d : config.models) names.push_back(d.name);
  result.summaries = summarise(result.records, names);
  return result;
}

void CampaignResult::write_records_csv(std::ostream& os) const {
  os << "replication,seed,model,metric,value\n";
  for (const auto& r : records) {
    if (r.failed) {
      os << r.replication << ',' << r.data_seed << ',' << r.model << ",failed,1\n";
      continue;
    }
    for (const auto& m : r.metrics) {
      os << r.replication << ',' << r.data_seed << ',' << r.model << ',' << m.name << ',' << real(m.value)
         << '\n';
    }
  }
}

void CampaignResult::write_summary_csv(std::ostream& os) const {
  os << "model,metric,n,mean,sd,median\n";
  write_summary_rows(os, summaries, "");
}

std::string CampaignResult::markdown(const std::string& title) const {
  std::ostringstream os;
  os << "# " << title << "\n\n";
  os << "Mean ± s.d. across replications; errors, accuracies and non-rejection rates in %.\n\n";
  os << summary_table(summaries);
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.failed ? 1 : 0;
  if (failed) {
    os << "\nFailed runs (excluded):\n\n";
    for (const auto& r : records) {
      if (r.failed) os << "- " << r.error << '\n';
    }
  }
  return os.str();
}

void CampaignResult::save(const std::filesystem::path& directory, const std::string& stem,
                          const std::string& title) const {
  std::filesystem::create_directories(directory);
  std::ofstream rec(directory / (stem + "_records.csv"));
  write_records_csv(rec);
  std::ofstream sum(directory / (stem + "_summary.csv"));
  write_summary_csv(sum);
  std::ofstream md(directory / (stem + ".md"));
  md << markdown(title);
  if (!rec || !sum || !md) throw Error("cannot write results under " + directory.string());
}

// ---------------------------------------------------------------- scans

CampaignResult neuron_scan(const Design& design, const std::function<ModelDef(Eigen::Index)>& model_for,
                           const std::vector<Eigen::Index>& widths, const TrainConfig& train,
                           std::size_t replications, std::uint64_t seed, unsigned jobs) {
  if (widths.empty()) throw ConfigError("neuron scan needs at least one width");
  CampaignConfig c;
  c.design = design;
  c.train = train;
  c.replications = replications;
  c.seed = seed;
  c.jobs = jobs;
  for (auto w : widths) {
    if (w < 0) throw ConfigError("widths must be >= 0");
    auto def = model_for(w);
    if (w == 0 && def.kind != ModelKind::Logit) throw ConfigError("width 0 must give a Logit model");
    def.name = "n=" + std::to_string(w);
    c.models.push_back(std::move(def));
  }
  return monte_carlo(c);
}

std::vector<SweepPoint> correlation_bias_sweep(const BinaryScenario& scenario,
                                               const std::vector<double>& s_values,
                                               const std::vector<ModelDef>& models,
                                               const TrainConfig& train, std::size_t replications,
                                               std::uint64_t seed, unsigned jobs) {
  for (double s : s_values) {
    if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("every s must lie in [0, 1]");
  }
  std::vector<SweepPoint> out;
  for (double s : s_values) {
    CampaignConfig c;
    c.design = binary_design(scenario, s);
    c.models = models;
    c.train = train;
    c.replications = replications;
    c.seed = seed;  // same seeds across s so only the correlation changes
    c.jobs = jobs;
    out.push_back({s, monte_carlo(c)});
  }
  return out;
}

void write_sweep_csv(const std::vector<SweepPoint>& sweep, std::ostream& os) {
  os << "s,model,metric,n,mean,sd,median\n";
  for (const auto& p : sweep) write_summary_rows(os, p.result.summaries, real(p.s) + ",");
}

std::string sweep_markdown(const std::vector<SweepPoint>& sweep) {
  std::ostringstream os;
  os << "# Correlation sweep\n\n";
  for (const auto& p : sweep) {
    os << "## s = " << fmt(p.s, 2) << "\n\n" << summary_table(p.result.summaries) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------- sensitivity

SensitivityResult sensitivity_sweep(const HybridChoiceModel& model, const ChoiceDataset& data,
                                    const std::string& column, const std::vector<double>& percents) {
  const auto& q = model.partition.q;
  if (std::find(q.begin(), q.end(), column) == q.end()) {
    throw ConfigError("sensitivity column '" + column + "' is not a network input of this model");
  }
  if (data.rows() == 0) throw DataError("sensitivity sweep on an empty dataset");
  const auto shares = [&](const ChoiceDataset& d) -> Vector {
    return choice_probabilities(model, d).colwise().mean().transpose();
  };
  const Vector base = shares(data);
  const Vector original = data.column(column);
  SensitivityResult out;
  out.column = column;
  ChoiceDataset work = data;
  for (double pct : percents) {
    work.set_column(column, original * (1.0 + pct / 100.0));
    const Vector s = pct == 0.0 ? base : shares(work);
    for (Eigen::Index i = 0; i < base.size(); ++i) {
      SensitivityRow row;
      row.perturbation = pct;
      row.alternative = data.alternatives[static_cast<std::size_t>(i)];
      row.base_share = base[i];
      row.share = s[i];
      row.change = base[i] > 0.0 ? 100.0 * (s[i] - base[i]) / base[i] : 0.0;
      out.rows.push_back(row);
    }
  }
  return out;
}

void SensitivityResult::write_csv(std::ostream& os) const {
  os << "column,perturbation,alternative,base_share,share,change_pct\n";
  for (const auto& r : rows) {
    os << column << ',' << real(r.perturbation) << ',' << r.alternative << ',' << real(r.base_share) << ','
       << real(r.share) << ',' << real(r.change) << '\n';
  }
}

std::string SensitivityResult::markdown() const {
  std::ostringstream os;
  os << "# Sensitivity of predicted shares to " << column << "\n\n";
  os << "| change in " << column << " (%) | alternative | share | change (%) |\n|---|---|---|---|\n";
  for (const auto& r : rows) {
    os << "| " << fmt(r.perturbation, 1) << " | " << r.alternative << " | " << fmt(r.share, 4) << " | "
       << fmt(r.change, 3) << " |\n";
  }
  return os.str();
}

// ---------------------------------------------------------------- feature impact

FeatureImpact feature_impact(const HybridChoiceModel& model, const ChoiceDataset& data) {
  FeatureImpact out;
  out.features = data.columns;
  out.alternatives = data.alternatives;
  const auto C = data.alternative_count();
  out.impact = Matrix::Zero(static_cast<Eigen::Index>(data.columns.size()), C);
  out.predicted.assign(static_cast<std::size_t>(C), 0);
  if (data.rows() == 0) return out;

  const auto inputs = bind_inputs(model, data);
  const Matrix p = choice_probabilities(model, data);
  std::vector<int> predicted(static_cast<std::size_t>(data.rows()));
  for (Eigen::Index n = 0; n < p.rows(); ++n) {
    Eigen::Index best = 0;
    double best_p = -1.0;
    for (Eigen::Index i = 0; i < C; ++i) {
      if (data.available(n, i) && p(n, i) > best_p) {
        best_p = p(n, i);
        best = i;
      }
    }
    predicted[static_cast<std::size_t>(n)] = static_cast<int>(best);
    ++out.predicted[static_cast<std::size_t>(best)];
  }
  if (!model.net || inputs.q_columns.empty()) return out;

  const Matrix g = utility_input_gradient(model, inputs, predicted);
  for (Eigen::Index n = 0; n < g.rows(); ++n) {
    const auto alt = predicted[static_cast<std::size_t>(n)];
    for (Eigen::Index k = 0; k < g.cols(); ++k) {
      out.impact(inputs.q_columns[static_cast<std::size_t>(k)], alt) += std::abs(g(n, k));
    }
  }
  for (Eigen::Index i = 0; i < C; ++i) {
    const auto count = out.predicted[static_cast<std::size_t>(i)];
    if (count > 0) out.impact.col(i) /= static_cast<double>(count);
  }
  return out;
}

double FeatureImpact::overall(std::string_view feature) const {
  for (std::size_t f = 0; f < features.size(); ++f) {
    if (features[f] != feature) continue;
    double sum = 0.0;
    int used = 0;
    for (std::size_t i = 0; i < alternatives.size(); ++i) {
      if (predicted[i] == 0) continue;
      sum += impact(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(i));
      ++used;
    }
    return used ? sum / used : 0.0;
  }
  throw ConfigError("feature impact has no column '" + std::string(feature) + "'");
}

void FeatureImpact::write_csv(std::ostream& os) const {
  os << "feature,alternative,impact,predicted_rows\n";
  for (std::size_t f = 0; f < features.size(); ++f) {
    for (std::size_t i = 0; i < alternatives.size(); ++i) {
      os << features[f] << ',' << alternatives[i] << ','
         << real(impact(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(i))) << ','
         << predicted[i] << '\n';
    }
  }
}

std::string FeatureImpact::markdown() const {
  std::ostringstream os;
  os << "# Feature impact (mean |d utility / d input| of the predicted alternative)\n\n| feature |";
  for (const auto& a : alternatives) os << ' ' << a << " |";
  os << " overall |\n|---|";
  for (std::size_t i = 0; i <= alternatives.size(); ++i) os << "---|";
  os << '\n';
  std::vector<std::size_t> order(features.size());
  for (std::size_t f = 0; f < order.size(); ++f) order[f] = f;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return overall(features[a]) > overall(features[b]); });
  for (auto f : order) {
    os << "| " << features[f] << " |";
    for (std::size_t i = 0; i < alternatives.size(); ++i) {
      os << ' ' << fmt(impact(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(i)), 4) << " |";
    }
    os << ' ' << fmt(overall(features[f]), 4) << " |\n";
  }
  return os.str();
}

// ---------------------------------------------------------------- strategies

std::vector<StrategyRow> strategy_compare(const ModelDef& def, const ChoiceDataset& train,
                                          const ChoiceDataset* test, const TrainConfig& config) {
  std::vector<StrategyRow> rows;
  for (auto s : {Strategy::Joint, Strategy::NetThenBeta, Strategy::BetaThenNet}) {
    auto model = def.build(config.seed);
    StrategyRow row;
    row.strategy = s;
    row.report = fit(model, train, config, s, test, ReportOptions{.standard_errors = true, .ratios = {}});
    row.report.model = def.name + " (" + to_string(s) + ")";
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_strategy_csv(const std::vector<StrategyRow>& rows, std::ostream& os) {
  os << "strategy,metric,value\n";
  for (const auto& r : rows) {
    const auto name = to_string(r.strategy);
    os << name << ",train_ll," << real(r.report.train_ll) << '\n';
    if (r.report.has_test) os << name << ",test_ll," << real(r.report.test_ll) << '\n';
    for (const auto& p : r.report.parameters) os << name << ",estimate:" << p.name << ',' << real(p.value) << '\n';
  }
}

std::string strategy_markdown(const std::vector<StrategyRow>& rows) {
  std::ostringstream os;
  os << "# Optimization strategies\n\n| strategy | train LL | test LL |";
  std::vector<std::string> params;
  if (!rows.empty()) {
    for (const auto& p : rows.front().report.parameters) params.push_back(p.name);
  }
  for (const auto& p : params) os << ' ' << p << " |";
  os << "\n|---|---|---|";
  for (std::size_t k = 0; k < params.size(); ++k) os << "---|";
  os << '\n';
  for (const auto& r : rows) {
    os << "| " << to_string(r.strategy) << " | " << fmt(r.report.train_ll, 1) << " | "
       << (r.report.has_test ? fmt(r.report.test_ll, 1) : std::string("-")) << " |";
    for (const auto& p : params) os << ' ' << fmt(r.report.value(p), 3) << " |";
    os << '\n';
  }
  return os.str();
}

}  // namespace lmnl
