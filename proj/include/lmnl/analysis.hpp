#pragma once

// Experiment drivers. Every driver is a pure function of its config (seeds
// included) and writes tidy CSV, one row per cell, plus a Markdown summary.

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "lmnl/estimation.hpp"
#include "lmnl/scenarios.hpp"
#include "lmnl/synthgen.hpp"

namespace lmnl {

/// Data source for repeated experiments: `make(seed)` returns (train, test);
/// a test part with zero rows means "no test set".
struct Design {
  std::function<std::pair<ChoiceDataset, ChoiceDataset>(std::uint64_t seed)> make;
  std::vector<NamedValue> truth;  // by parameter name; may be empty
  std::vector<std::string> tracked;  // parameters whose errors / tests are reported
  std::vector<std::pair<std::string, std::string>> ratios;  // numerator, denominator
};

/// Binary generator family; tracked B_P and B_A, ratio B_P/B_A.
Design binary_design(const BinaryScenario& scenario, double correlation = 0.0);
/// Complex-correlation generator; n_test may be 0. Tracked B_P, B_A; ratio B_P/B_A.
Design guevara_design(std::size_t n_train, std::size_t n_test);
/// Same (train, test) for every seed.
Design fixed_design(ChoiceDataset train, ChoiceDataset test);

struct CampaignConfig {
  Design design;
  std::vector<ModelDef> models;
  TrainConfig train;
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  bool standard_errors = true;
};

struct ReplicationRecord {
  std::size_t replication = 0;
  std::uint64_t data_seed = 0;
  std::string model;
  bool failed = false;
  std::string error;
  std::vector<NamedValue> metrics;

  std::optional<double> metric(std::string_view name) const;
};

struct Summary {
  std::string metric;
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // across replications (n - 1 denominator; 0 when n == 1)
  double median = 0.0;
};

struct ModelSummary {
  std::string model;
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::vector<Summary> metrics;

  const Summary* find(std::string_view metric) const;
  /// Mean of `metric`; throws ConfigError when no successful run produced it.
  double mean(std::string_view metric) const;
};

struct CampaignResult {
  std::vector<ReplicationRecord> records;  // ordered by (replication, model)
  std::vector<ModelSummary> summaries;     // in model order

  const ModelSummary& summary(std::string_view model) const;
  void write_records_csv(std::ostream& os) const;  // replication,seed,model,metric,value
  void write_summary_csv(std::ostream& os) const;  // model,metric,n,mean,sd,median
  std::string markdown(const std::string& title) const;
  void save(const std::filesystem::path& directory, const std::string& stem,
            const std::string& title) const;
};

// Metric names used in records:
//   train_ll test_ll train_accuracy test_accuracy
//   estimate:<param>  error:<param>  not_rejected:<param>  not_rejected_mean
//   ratio:<num>/<den> ratio_error:<num>/<den> ratio_not_rejected:<num>/<den>
// Errors are fractions; not_rejected values are 0/1 (mean = rate).

/// Models x replications. A replication that throws is recorded and excluded
/// from the summaries; the count is reported per model.
CampaignResult monte_carlo(const CampaignConfig& config);

/// Aggregates (no training); exposed for tests.
std::vector<ModelSummary> summarise(const std::vector<ReplicationRecord>& records,
                                    const std::vector<std::string>& model_order);

/// One model per width, named "n=<width>"; width 0 must map to a pure Logit.
CampaignResult neuron_scan(const Design& design, const std::function<ModelDef(Eigen::Index)>& model_for,
                           const std::vector<Eigen::Index>& widths, const TrainConfig& train,
                           std::size_t replications, std::uint64_t seed, unsigned jobs = 1);

struct SweepPoint {
  double s = 0.0;
  CampaignResult result;
};

/// One campaign per correlation value s (binary family).
std::vector<SweepPoint> correlation_bias_sweep(const BinaryScenario& scenario,
                                               const std::vector<double>& s_values,
                                               const std::vector<ModelDef>& models,
                                               const TrainConfig& train, std::size_t replications,
                                               std::uint64_t seed, unsigned jobs = 1);
void write_sweep_csv(const std::vector<SweepPoint>& sweep, std::ostream& os);  // s,model,metric,n,mean,sd,median
std::string sweep_markdown(const std::vector<SweepPoint>& sweep);

struct SensitivityRow {
  double perturbation = 0.0;  // percent
  std::string alternative;
  double base_share = 0.0;
  double share = 0.0;
  double change = 0.0;  // percent change of the aggregate share
};

struct SensitivityResult {
  std::string column;
  std::vector<SensitivityRow> rows;

  void write_csv(std::ostream& os) const;
  std::string markdown() const;
};

/// Scales `column` by (1 + p/100) for each p, recomputes the mean predicted
/// share of every alternative and reports its percent change. The column must
/// be a network input.
SensitivityResult sensitivity_sweep(const HybridChoiceModel& model, const ChoiceDataset& data,
                                    const std::string& column, const std::vector<double>& percents);

struct FeatureImpact {
  std::vector<std::string> features;      // every dataset column
  std::vector<std::string> alternatives;
  Matrix impact;                          // [features x alternatives]
  std::vector<std::size_t> predicted;     // rows predicted per alternative

  double overall(std::string_view feature) const;  // mean over alternatives with predictions
  void write_csv(std::ostream& os) const;          // feature,alternative,impact,count
  std::string markdown() const;
};

/// For each row, back-propagates the utility of the argmax alternative to the
/// network inputs; |gradient| summed per feature and divided by the number of
/// rows predicting that alternative. Columns the network never reads get 0.
FeatureImpact feature_impact(const HybridChoiceModel& model, const ChoiceDataset& data);

struct StrategyRow {
  Strategy strategy = Strategy::Joint;
  EstimationReport report;
};

/// Joint, net-then-beta and beta-then-net fits of the same definition and seed.
std::vector<StrategyRow> strategy_compare(const ModelDef& def, const ChoiceDataset& train,
                                          const ChoiceDataset* test, const TrainConfig& config);
void write_strategy_csv(const std::vector<StrategyRow>& rows, std::ostream& os);
std::string strategy_markdown(const std::vector<StrategyRow>& rows);

}  // namespace lmnl
