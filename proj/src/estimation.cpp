#include "lmnl/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "lmnl/error.hpp"

namespace lmnl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::size_t> all_rows(Eigen::Index n) {
  std::vector<std::size_t> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

// Flat views over every tensor the blocks allow to move.
struct TensorViews {
  std::vector<std::span<double>> params;
  std::vector<std::span<const double>> grads;
};

template <typename Dense>
std::span<double> view(Dense& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}
template <typename Dense>
std::span<const double> cview(const Dense& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

TensorViews collect(HybridChoiceModel& model, const Gradients& g, const BlockMask& blocks) {
  TensorViews v;
  if (blocks.beta && model.beta.size() > 0) {
    v.params.push_back(view(model.beta));
    v.grads.push_back(cview(g.beta));
  }
  if (blocks.net && blocks.net_active && model.net) {
    auto& layers = model.net->layers();
    for (std::size_t k = 0; k < layers.size(); ++k) {
      v.params.push_back(view(layers[k].weights));
      v.grads.push_back(cview(g.weights[k]));
      v.params.push_back(view(layers[k].biases));
      v.grads.push_back(cview(g.biases[k]));
    }
  }
  if (blocks.mu && model.nests && model.nests->mu.size() > 0) {
    v.params.push_back(view(model.nests->mu));
    v.grads.push_back(cview(g.mu));
  }
  return v;
}

std::string fmt(double x, int precision = 4) {
  if (std::isnan(x)) return "n/a";
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(l2 >= 0.0)) throw ConfigError("l2 weight must be nonnegative");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Joint: return "joint";
    case Strategy::BetaThenNet: return "beta_then_net";
    case Strategy::NetThenBeta: return "net_then_beta";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  std::string key(name);
  std::replace(key.begin(), key.end(), '-', '_');
  if (key == "joint") return Strategy::Joint;
  if (key == "beta_then_net") return Strategy::BetaThenNet;
  if (key == "net_then_beta") return Strategy::NetThenBeta;
  throw ConfigError("unknown optimisation strategy '" + std::string(name) + "'");
}

std::vector<double> train(HybridChoiceModel& model, const ModelInputs& inputs,
                          const TrainConfig& config, const BlockMask& blocks) {
  config.validate();
  std::vector<double> trace;
  if (config.epochs == 0 || inputs.rows == 0) return trace;

  Rng rng(config.seed);
  AdamState adam;
  adam.learning_rate = config.learning_rate;
  auto order = all_rows(inputs.rows);
  const std::size_t batch =
      config.batch_size == 0 ? order.size() : std::min(config.batch_size, order.size());
  const bool dropout_active = blocks.net_active && model.net && config.dropout > 0.0;

  Gradients grads;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const HybridChoiceModel snapshot = model;
    rng.shuffle(std::span<std::size_t>(order));
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t len = std::min(batch, order.size() - start);
      std::span<const std::size_t> rows(order.data() + start, len);
      const double loss =
          loss_and_gradient(model, inputs, rows, dropout_active ? Mode::Train : Mode::Eval,
                            config.dropout, config.l2, &rng, blocks, &grads);
      if (!std::isfinite(loss)) {
        model = snapshot;
        throw TrainingError("non-finite loss in epoch " + std::to_string(epoch + 1) +
                            "; parameters restored to the start of that epoch");
      }
      auto views = collect(model, grads, blocks);
      try {
        adam_step(adam, views.params, views.grads);
      } catch (const TrainingError&) {
        model = snapshot;
        throw;
      }
      if (model.nests) model.nests->project();
      total += loss;
      ++batches;
    }
    trace.push_back(total / static_cast<double>(batches));
  }
  return trace;
}

double log_likelihood(const HybridChoiceModel& model, const ModelInputs& inputs) {
  const auto rows = all_rows(inputs.rows);
  const Matrix p = choice_probabilities(model, inputs, rows);
  double ll = 0.0;
  for (Eigen::Index n = 0; n < p.rows(); ++n) {
    ll += std::log(std::max(p(n, inputs.choice[static_cast<std::size_t>(n)]), kProbabilityFloor));
  }
  return ll;
}

double log_likelihood(const HybridChoiceModel& model, const ChoiceDataset& data) {
  return log_likelihood(model, bind_inputs(model, data));
}

double null_log_likelihood(const AvailabilityMatrix& available) {
  double ll = 0.0;
  for (Eigen::Index n = 0; n < available.rows(); ++n) {
    const auto count = available.row(n).count();
    if (count == 0) throw InvalidRowError("row without an available alternative");
    ll -= std::log(static_cast<double>(count));
  }
  return ll;
}

double mcfadden_rho2(double ll, double null_ll) {
  if (null_ll == 0.0) throw DataError("null log-likelihood is zero (single-alternative rows)");
  return 1.0 - ll / null_ll;
}

double mcfadden_rho2(const HybridChoiceModel& model, const ChoiceDataset& data) {
  if (data.rows() == 0) throw DataError("rho2 of an empty dataset");
  return mcfadden_rho2(log_likelihood(model, data), null_log_likelihood(data.available));
}

double accuracy(const Matrix& probabilities, const std::vector<int>& choice) {
  if (probabilities.rows() == 0) return 0.0;
  std::size_t hits = 0;
  for (Eigen::Index n = 0; n < probabilities.rows(); ++n) {
    Eigen::Index best = 0;
    probabilities.row(n).maxCoeff(&best);
    if (best == choice[static_cast<std::size_t>(n)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(probabilities.rows());
}

double accuracy(const HybridChoiceModel& model, const ChoiceDataset& data) {
  return accuracy(choice_probabilities(model, data), data.choice);
}

HessianResult hessian_std_errors(const HybridChoiceModel& model, const ModelInputs& inputs) {
  const auto K = model.beta.size();
  HessianResult out;
  out.hessian = Matrix::Zero(K, K);
  if (K == 0) {
    out.covariance = Matrix::Zero(0, 0);
    out.std_errors = Vector::Zero(0);
    return out;
  }
  HybridChoiceModel probe = model;
  for (Eigen::Index k = 0; k < K; ++k) {
    const double h = 1e-4 * std::max(1.0, std::abs(model.beta[k]));
    probe.beta = model.beta;
    probe.beta[k] += h;
    const Vector up = -beta_loglik_gradient(probe, inputs);
    probe.beta[k] = model.beta[k] - h;
    const Vector down = -beta_loglik_gradient(probe, inputs);
    out.hessian.col(k) = (up - down) / (2.0 * h);
  }
  out.hessian = 0.5 * (out.hessian + out.hessian.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(out.hessian);
  const Vector& lambda = eig.eigenvalues();
  const double scale = std::max(lambda.cwiseAbs().maxCoeff(), 1e-300);
  const double tol = scale * static_cast<double>(K) * 1e-10;
  if (lambda.minCoeff() <= tol) {
    out.singular = true;
    out.warning =
        "Hessian of the negative log-likelihood is singular or not positive definite "
        "(smallest eigenvalue " + fmt(lambda.minCoeff()) + "); standard errors use a pseudo-inverse";
    Vector inv = Vector::Zero(K);
    for (Eigen::Index k = 0; k < K; ++k) {
      if (lambda[k] > tol) inv[k] = 1.0 / lambda[k];
    }
    out.covariance = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  } else {
    out.covariance = eig.eigenvectors() * lambda.cwiseInverse().asDiagonal() *
                     eig.eigenvectors().transpose();
  }
  out.std_errors.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double var = out.covariance(k, k);
    out.std_errors[k] = var > 0.0 ? std::sqrt(var) : kNaN;
  }
  return out;
}

HessianResult hessian_std_errors(const HybridChoiceModel& model, const ChoiceDataset& data) {
  return hessian_std_errors(model, bind_inputs(model, data));
}

TTest t_test(double estimate, double std_error, double reference) {
  if (!(std_error > 0.0)) throw Error("t-test needs a positive standard error");
  TTest r;
  r.t = (estimate - reference) / std_error;
  r.p_value = std::erfc(std::abs(r.t) / std::sqrt(2.0));
  r.reject = std::abs(r.t) > 1.96;
  return r;
}

TTest ratio_t_test(const Vector& beta, const Matrix& covariance, std::size_t i, std::size_t j,
                   double reference) {
  const auto ii = static_cast<Eigen::Index>(i);
  const auto jj = static_cast<Eigen::Index>(j);
  if (std::abs(beta[jj]) < 1e-12) throw Error("ratio test with a zero denominator");
  const double ratio = beta[ii] / beta[jj];
  const double gi = 1.0 / beta[jj];
  const double gj = -beta[ii] / (beta[jj] * beta[jj]);
  const double var = gi * gi * covariance(ii, ii) + gj * gj * covariance(jj, jj) +
                     2.0 * gi * gj * covariance(ii, jj);
  if (!(var > 0.0)) throw Error("ratio test: non-positive delta-method variance");
  return t_test(ratio, std::sqrt(var), reference);
}

std::optional<double> relative_error(double estimate, double truth) {
  if (truth == 0.0) return std::nullopt;
  return std::abs((truth - estimate) / truth);
}

std::optional<double> ratio_relative_error(double estimate_i, double truth_i, double estimate_j,
                                           double truth_j) {
  if (truth_i == 0.0 || truth_j == 0.0) return std::nullopt;
  const double ei = (truth_i - estimate_i) / truth_i;
  const double ej = (truth_j - estimate_j) / truth_j;
  if (ej == 1.0) return std::nullopt;  // estimate_j == 0
  return std::abs((ei - ej) / (1.0 - ej));
}

RelativeErrors relative_errors(const std::vector<double>& estimates, const std::vector<double>& truth,
                               const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  if (estimates.size() != truth.size()) throw ShapeError("estimates and truth differ in length");
  RelativeErrors out;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    out.parameters.push_back(relative_error(estimates[k], truth[k]));
  }
  for (auto [i, j] : pairs) {
    if (i >= truth.size() || j >= truth.size()) throw ShapeError("ratio pair out of range");
    out.ratios.push_back(ratio_relative_error(estimates[i], truth[i], estimates[j], truth[j]));
  }
  return out;
}

const ParameterEstimate& EstimationReport::parameter(std::string_view name) const {
  for (const auto& p : parameters) {
    if (p.name == name) return p;
  }
  throw ConfigError("report has no parameter '" + std::string(name) + "'");
}

double parameter_ratio(const EstimationReport& report, std::string_view numerator,
                       std::string_view denominator) {
  const double den = report.value(denominator);
  if (std::abs(den) < 1e-12) {
    throw Error("parameter ratio: '" + std::string(denominator) + "' is zero");
  }
  return report.value(numerator) / den;
}

EstimationReport evaluate(const HybridChoiceModel& model, const ChoiceDataset& train_data,
                          const ChoiceDataset* test, const ReportOptions& options) {
  EstimationReport r;
  r.model = to_string(model.kind);
  const auto inputs = bind_inputs(model, train_data);
  const auto rows = all_rows(inputs.rows);
  const Matrix p = choice_probabilities(model, inputs, rows);
  r.train_rows = static_cast<std::size_t>(inputs.rows);
  r.train_ll = 0.0;
  for (Eigen::Index n = 0; n < p.rows(); ++n) {
    r.train_ll += std::log(std::max(p(n, inputs.choice[static_cast<std::size_t>(n)]), kProbabilityFloor));
  }
  r.train_null_ll = null_log_likelihood(inputs.available);
  r.train_rho2 = mcfadden_rho2(r.train_ll, r.train_null_ll);
  r.train_accuracy = accuracy(p, inputs.choice);

  if (test) {
    r.has_test = true;
    r.test_rows = static_cast<std::size_t>(test->rows());
    r.test_ll = log_likelihood(model, *test);
    r.test_null_ll = null_log_likelihood(test->available);
    r.test_rho2 = mcfadden_rho2(r.test_ll, r.test_null_ll);
    r.test_accuracy = accuracy(model, *test);
  }

  HessianResult h;
  if (options.standard_errors) {
    h = hessian_std_errors(model, inputs);
    r.covariance = h.covariance;
    r.hessian_singular = h.singular;
    if (h.singular) r.warnings.push_back(h.warning);
  }
  const auto& names = model.spec.parameters();
  for (std::size_t k = 0; k < names.size(); ++k) {
    ParameterEstimate e;
    e.name = names[k];
    e.value = model.beta[static_cast<Eigen::Index>(k)];
    e.std_error = options.standard_errors ? h.std_errors[static_cast<Eigen::Index>(k)] : kNaN;
    if (e.std_error > 0.0) {
      const auto t = t_test(e.value, e.std_error, 0.0);
      e.t_stat = t.t;
      e.p_value = t.p_value;
    } else {
      e.t_stat = kNaN;
      e.p_value = kNaN;
    }
    r.parameters.push_back(e);
  }
  if (model.nests) {
    for (std::size_t m = 0; m < model.nests->nests.size(); ++m) {
      std::string name = "MU";
      for (auto a : model.nests->nests[m]) name += "_" + model.spec.alternatives()[a];
      r.nest_factors.push_back({name, model.nests->mu[static_cast<Eigen::Index>(m)]});
    }
  }
  for (const auto& [name, num, den] : options.ratios) {
    const auto has = [&](const std::string& n) {
      return std::any_of(r.parameters.begin(), r.parameters.end(),
                         [&](const ParameterEstimate& p) { return p.name == n; });
    };
    if (has(num) && has(den) && std::abs(r.value(den)) >= 1e-12) {
      r.ratios.push_back({name, parameter_ratio(r, num, den)});
    }
  }
  return r;
}

EstimationReport fit_joint(HybridChoiceModel& model, const ChoiceDataset& train_data,
                           const TrainConfig& config, const ChoiceDataset* test,
                           const ReportOptions& options) {
  const auto inputs = bind_inputs(model, train_data);
  auto trace = train(model, inputs, config, BlockMask{});
  auto report = evaluate(model, train_data, test, options);
  report.epoch_loss = std::move(trace);
  return report;
}

EstimationReport fit_sequential(HybridChoiceModel& model, const ChoiceDataset& train_data,
                                const TrainConfig& config, Strategy order,
                                const ChoiceDataset* test, const ReportOptions& options) {
  if (order == Strategy::Joint) return fit_joint(model, train_data, config, test, options);
  const auto inputs = bind_inputs(model, train_data);
  BlockMask first, second;
  if (order == Strategy::BetaThenNet) {
    first = {.beta = true, .net = false, .mu = true, .net_active = false};
    second = {.beta = false, .net = true, .mu = false, .net_active = true};
  } else {
    first = {.beta = false, .net = true, .mu = false, .net_active = true};
    second = {.beta = true, .net = false, .mu = true, .net_active = true};
  }
  TrainConfig phase = config;
  auto trace = train(model, inputs, phase, first);
  phase.seed = Rng::mix(config.seed);
  auto rest = train(model, inputs, phase, second);
  trace.insert(trace.end(), rest.begin(), rest.end());
  auto report = evaluate(model, train_data, test, options);
  report.epoch_loss = std::move(trace);
  return report;
}

EstimationReport fit(HybridChoiceModel& model, const ChoiceDataset& train_data,
                     const TrainConfig& config, Strategy strategy, const ChoiceDataset* test,
                     const ReportOptions& options) {
  return strategy == Strategy::Joint ? fit_joint(model, train_data, config, test, options)
                                     : fit_sequential(model, train_data, config, strategy, test, options);
}

// ---------------------------------------------------------------- export

void EstimationReport::write_parameters_csv(std::ostream& os) const {
  os << "model,parameter,estimate,std_error,t_stat,p_value\n";
  os << std::setprecision(10);
  for (const auto& p : parameters) {
    os << model << ',' << p.name << ',' << p.value << ',' << p.std_error << ',' << p.t_stat << ','
       << p.p_value << '\n';
  }
  for (const auto& m : nest_factors) os << model << ',' << m.name << ',' << m.value << ",,,\n";
}

void EstimationReport::write_metrics_csv(std::ostream& os) const {
  os << "model,metric,value\n";
  os << std::setprecision(10);
  auto row = [&](const std::string& k, double v) { os << model << ',' << k << ',' << v << '\n'; };
  row("train_rows", static_cast<double>(train_rows));
  row("train_ll", train_ll);
  row("train_null_ll", train_null_ll);
  row("train_rho2", train_rho2);
  row("train_accuracy", train_accuracy);
  if (has_test) {
    row("test_rows", static_cast<double>(test_rows));
    row("test_ll", test_ll);
    row("test_null_ll", test_null_ll);
    row("test_rho2", test_rho2);
    row("test_accuracy", test_accuracy);
  }
  for (const auto& r : ratios) row(r.name, r.value);
  row("hessian_singular", hessian_singular ? 1.0 : 0.0);
}

std::string EstimationReport::markdown() const {
  std::ostringstream os;
  os << "## " << model << "\n\n";
  os << "| | train | test |\n|---|---|---|\n";
  os << "| observations | " << train_rows << " | " << (has_test ? std::to_string(test_rows) : "") << " |\n";
  os << "| log-likelihood | " << fmt(train_ll, 6) << " | " << (has_test ? fmt(test_ll, 6) : "") << " |\n";
  os << "| rho2 | " << fmt(train_rho2, 3) << " | " << (has_test ? fmt(test_rho2, 3) : "") << " |\n";
  os << "| accuracy | " << fmt(train_accuracy, 3) << " | " << (has_test ? fmt(test_accuracy, 3) : "")
     << " |\n\n";
  if (!parameters.empty()) {
    os << "| Parameter | Estimate | Std error | t-stat | p-value |\n|---|---|---|---|---|\n";
    for (const auto& p : parameters) {
      os << "| " << p.name << " | " << fmt(p.value) << " | " << fmt(p.std_error, 3) << " | "
         << fmt(p.t_stat, 3) << " | " << fmt(p.p_value, 2) << " |\n";
    }
    os << '\n';
  }
  if (!nest_factors.empty()) {
    os << "| Nest | factor |\n|---|---|\n";
    for (const auto& m : nest_factors) os << "| " << m.name << " | " << fmt(m.value) << " |\n";
    os << '\n';
  }
  if (!ratios.empty()) {
    os << "| Ratio | value |\n|---|---|\n";
    for (const auto& r : ratios) os << "| " << r.name << " | " << fmt(r.value, 3) << " |\n";
    os << '\n';
  }
  for (const auto& w : warnings) os << "> warning: " << w << "\n";
  return os.str();
}

void EstimationReport::save(const std::filesystem::path& directory, const std::string& stem) const {
  std::filesystem::create_directories(directory);
  auto open = [&](const std::string& name) {
    std::ofstream f(directory / name);
    if (!f) throw Error("cannot write " + (directory / name).string());
    return f;
  };
  {
    auto f = open(stem + "_parameters.csv");
    write_parameters_csv(f);
  }
  {
    auto f = open(stem + "_metrics.csv");
    write_metrics_csv(f);
  }
  {
    auto f = open(stem + ".md");
    f << markdown();
  }
  {
    auto f = open(stem + "_loss.csv");
    f << "epoch,loss\n" << std::setprecision(10);
    for (std::size_t e = 0; e < epoch_loss.size(); ++e) f << e + 1 << ',' << epoch_loss[e] << '\n';
  }
}

}  // namespace lmnl
