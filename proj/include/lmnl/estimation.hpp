#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "lmnl/dataio.hpp"
#include "lmnl/models.hpp"

namespace lmnl {

struct TrainConfig {
  int epochs = 200;
  std::size_t batch_size = 50;  // 0 => full batch
  double dropout = 0.2;
  double l2 = 0.0;
  std::uint64_t seed = 0;
  double learning_rate = 1e-3;

  void validate() const;  // throws ConfigError
};

enum class Strategy { Joint, BetaThenNet, NetThenBeta };
std::string to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

struct ParameterEstimate {
  std::string name;
  double value = 0.0;
  double std_error = 0.0;  // NaN when unavailable
  double t_stat = 0.0;     // against 0
  double p_value = 1.0;
};

struct NamedValue {
  std::string name;
  double value = 0.0;
};

struct EstimationReport {
  std::string model;
  std::vector<ParameterEstimate> parameters;
  std::vector<NamedValue> nest_factors;
  Matrix covariance;  // beta block
  bool hessian_singular = false;
  std::vector<std::string> warnings;

  std::size_t train_rows = 0;
  double train_ll = 0.0;
  double train_null_ll = 0.0;
  double train_rho2 = 0.0;
  double train_accuracy = 0.0;

  bool has_test = false;
  std::size_t test_rows = 0;
  double test_ll = 0.0;
  double test_null_ll = 0.0;
  double test_rho2 = 0.0;
  double test_accuracy = 0.0;

  std::vector<NamedValue> ratios;
  std::vector<double> epoch_loss;

  const ParameterEstimate& parameter(std::string_view name) const;  // throws ConfigError
  double value(std::string_view name) const { return parameter(name).value; }

  void write_parameters_csv(std::ostream& os) const;
  void write_metrics_csv(std::ostream& os) const;
  std::string markdown() const;
  /// Writes <stem>_parameters.csv, <stem>_metrics.csv, <stem>.md and <stem>_loss.csv.
  void save(const std::filesystem::path& directory, const std::string& stem) const;
};

struct ReportOptions {
  bool standard_errors = true;
  /// (name, numerator parameter, denominator parameter); missing parameters are skipped.
  std::vector<std::tuple<std::string, std::string, std::string>> ratios = {
      {"VOT", "B_COST", "B_TIME"}, {"VOF", "B_COST", "B_FREQ"}};
};

/// All trainables (beta, network, free nest factors) updated together by Adam.
/// `test` (optional) is only evaluated, always in eval mode.
EstimationReport fit_joint(HybridChoiceModel& model, const ChoiceDataset& train,
                           const TrainConfig& config, const ChoiceDataset* test = nullptr,
                           const ReportOptions& options = {});

/// BetaThenNet: beta (and nests) with the network bypassed, then the network with
/// beta frozen. NetThenBeta: network with beta frozen at its start value, then
/// beta (and nests) with the network frozen. Each phase runs `config.epochs`.
EstimationReport fit_sequential(HybridChoiceModel& model, const ChoiceDataset& train,
                                const TrainConfig& config, Strategy order,
                                const ChoiceDataset* test = nullptr,
                                const ReportOptions& options = {});

EstimationReport fit(HybridChoiceModel& model, const ChoiceDataset& train, const TrainConfig& config,
                     Strategy strategy, const ChoiceDataset* test = nullptr,
                     const ReportOptions& options = {});

/// Training loop only; returns the per-epoch mean batch loss. Throws
/// TrainingError on a non-finite loss after restoring the last good state.
std::vector<double> train(HybridChoiceModel& model, const ModelInputs& inputs,
                          const TrainConfig& config, const BlockMask& blocks);

/// Report for the model as it stands (no training).
EstimationReport evaluate(const HybridChoiceModel& model, const ChoiceDataset& train,
                          const ChoiceDataset* test = nullptr, const ReportOptions& options = {});

double log_likelihood(const HybridChoiceModel& model, const ChoiceDataset& data);
double log_likelihood(const HybridChoiceModel& model, const ModelInputs& inputs);
/// LL of equal shares over each row's available alternatives.
double null_log_likelihood(const AvailabilityMatrix& available);
double mcfadden_rho2(double ll, double null_ll);
double mcfadden_rho2(const HybridChoiceModel& model, const ChoiceDataset& data);
double accuracy(const HybridChoiceModel& model, const ChoiceDataset& data);
double accuracy(const Matrix& probabilities, const std::vector<int>& choice);

struct HessianResult {
  Matrix hessian;     // of the negative log-likelihood w.r.t. beta
  Matrix covariance;  // inverse (or pseudo-inverse)
  Vector std_errors;
  bool singular = false;
  std::string warning;
};

/// Central differences of the analytic beta-gradient (step 1e-4 * max(1, |beta|)),
/// network and nest factors frozen, eval mode.
HessianResult hessian_std_errors(const HybridChoiceModel& model, const ChoiceDataset& data);
HessianResult hessian_std_errors(const HybridChoiceModel& model, const ModelInputs& inputs);

struct TTest {
  double t = 0.0;
  double p_value = 1.0;
  bool reject = false;  // at 5%, |t| > 1.96
};

TTest t_test(double estimate, double std_error, double reference);

/// Delta-method test of beta_i / beta_j against `reference`.
TTest ratio_t_test(const Vector& beta, const Matrix& covariance, std::size_t i, std::size_t j,
                   double reference);

/// e = |(truth - estimate) / truth|; empty when truth is 0.
std::optional<double> relative_error(double estimate, double truth);
/// |(e_i - e_j) / (1 - e_j)| with signed errors e = (truth - estimate) / truth, which
/// equals the relative error of the ratio estimate_i / estimate_j.
std::optional<double> ratio_relative_error(double estimate_i, double truth_i, double estimate_j,
                                           double truth_j);

struct RelativeErrors {
  std::vector<std::optional<double>> parameters;
  std::vector<std::optional<double>> ratios;  // one per requested pair
};
RelativeErrors relative_errors(const std::vector<double>& estimates, const std::vector<double>& truth,
                               const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

double parameter_ratio(const EstimationReport& report, std::string_view numerator,
                       std::string_view denominator);

}  // namespace lmnl
