#include "lmnl/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "lmnl/error.hpp"

namespace lmnl {

namespace {

double log_sum_exp(const std::vector<double>& values) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : values) top = std::max(top, v);
  if (!std::isfinite(top)) return top;
  double total = 0.0;
  for (double v : values) total += std::exp(v - top);
  return top + std::log(total);
}

std::set<std::string> as_set(const std::vector<std::string>& names) {
  return {names.begin(), names.end()};
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

Availability row_availability(const ModelInputs& inputs, std::size_t row) {
  return inputs.available.row(static_cast<Eigen::Index>(row)).transpose();
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Logit: return "logit";
    case ModelKind::DNN: return "dnn";
    case ModelKind::DNN_L: return "dnn_l";
    case ModelKind::LMNL: return "lmnl";
    case ModelKind::LNL: return "lnl";
    case ModelKind::DummyLogit: return "dummy_logit";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  std::string key(name);
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return c == '-' ? '_' : static_cast<char>(std::tolower(c)); });
  if (key == "logit" || key == "mnl" || key == "nl" || key == "nested_logit") return ModelKind::Logit;
  if (key == "dnn") return ModelKind::DNN;
  if (key == "dnn_l") return ModelKind::DNN_L;
  if (key == "lmnl" || key == "l_mnl") return ModelKind::LMNL;
  if (key == "lnl" || key == "l_nl") return ModelKind::LNL;
  if (key == "dummy_logit" || key == "dummylogit") return ModelKind::DummyLogit;
  throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- UtilitySpec

UtilitySpec::UtilitySpec(std::vector<std::string> alternatives)
    : alternatives_(std::move(alternatives)) {}

std::size_t UtilitySpec::add_parameter(std::string name) {
  if (std::find(parameters_.begin(), parameters_.end(), name) != parameters_.end()) {
    throw ConfigError("duplicate parameter '" + name + "'");
  }
  parameters_.push_back(std::move(name));
  return parameters_.size() - 1;
}

UtilitySpec& UtilitySpec::intercept(std::string parameter, std::size_t alternative) {
  const auto k = add_parameter(std::move(parameter));
  terms_.push_back({k, alternative, "", Sharing::AlternativeSpecific});
  return *this;
}

UtilitySpec& UtilitySpec::shared(
    std::string parameter, const std::vector<std::pair<std::size_t, std::string>>& entries) {
  if (entries.empty()) throw ConfigError("parameter '" + parameter + "' enters no utility");
  const auto k = add_parameter(std::move(parameter));
  const Sharing sharing = entries.size() > 1 ? Sharing::Shared : Sharing::AlternativeSpecific;
  for (const auto& [alt, column] : entries) terms_.push_back({k, alt, column, sharing});
  return *this;
}

UtilitySpec& UtilitySpec::shared(std::string parameter, const std::string& column,
                                 const std::vector<std::size_t>& alternatives) {
  std::vector<std::pair<std::size_t, std::string>> entries;
  for (auto alt : alternatives) entries.emplace_back(alt, column);
  return shared(std::move(parameter), entries);
}

UtilitySpec& UtilitySpec::specific(const std::string& prefix, const std::string& column,
                                   const std::vector<std::size_t>& alternatives) {
  for (auto alt : alternatives) {
    if (alt >= alternatives_.size()) throw ConfigError("alternative index out of range in " + prefix);
    const auto k = add_parameter(prefix + "_" + alternatives_[alt]);
    terms_.push_back({k, alt, column, Sharing::AlternativeSpecific});
  }
  return *this;
}

void UtilitySpec::add_term(std::string_view parameter, UtilityTerm term) {
  auto it = std::find(parameters_.begin(), parameters_.end(), parameter);
  if (it == parameters_.end()) {
    parameters_.emplace_back(parameter);
    term.parameter = parameters_.size() - 1;
  } else {
    term.parameter = static_cast<std::size_t>(it - parameters_.begin());
  }
  terms_.push_back(std::move(term));
}

std::size_t UtilitySpec::parameter_index(std::string_view name) const {
  auto it = std::find(parameters_.begin(), parameters_.end(), name);
  if (it == parameters_.end()) throw ConfigError("unknown parameter '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - parameters_.begin());
}

std::vector<std::string> UtilitySpec::columns() const {
  std::vector<std::string> out;
  for (const auto& t : terms_) {
    if (!t.column.empty() && std::find(out.begin(), out.end(), t.column) == out.end()) {
      out.push_back(t.column);
    }
  }
  return out;
}

void UtilitySpec::validate(const ChoiceDataset* data) const {
  if (!parameters_.empty() && alternatives_.empty()) {
    throw ConfigError("utility specification has parameters but no alternatives");
  }
  std::vector<bool> used(parameters_.size(), false);
  for (const auto& t : terms_) {
    if (t.parameter >= parameters_.size()) throw ConfigError("utility term names no parameter");
    if (t.alternative >= alternatives_.size()) {
      throw ConfigError("parameter '" + parameters_[t.parameter] +
                        "' refers to an alternative outside the choice set");
    }
    if (data && !t.column.empty() && !data->has_column(t.column)) {
      throw DataError("utility column '" + t.column + "' is not in the dataset");
    }
    used[t.parameter] = true;
  }
  for (std::size_t k = 0; k < used.size(); ++k) {
    if (!used[k]) throw ConfigError("parameter '" + parameters_[k] + "' enters no utility");
  }
  if (data && data->alternative_count() != static_cast<Eigen::Index>(alternatives_.size())) {
    throw DataError("dataset and specification disagree on the number of alternatives");
  }
}

// ---------------------------------------------------------------- partition

PartitionCheck validate_partition(const FeaturePartition& partition, ModelKind kind,
                                  const ChoiceDataset* data, double correlation_threshold) {
  PartitionCheck check;
  const auto xs = as_set(partition.x);
  const auto qs = as_set(partition.q);
  if (xs.size() != partition.x.size()) check.violations.push_back("X lists a column twice");
  if (qs.size() != partition.q.size()) check.violations.push_back("Q lists a column twice");

  std::vector<std::string> shared;
  std::set_intersection(xs.begin(), xs.end(), qs.begin(), qs.end(), std::back_inserter(shared));

  switch (kind) {
    case ModelKind::Logit:
      if (!qs.empty()) check.violations.push_back("Logit takes no network inputs (Q must be empty)");
      break;
    case ModelKind::DNN:
      if (!xs.empty()) check.violations.push_back("DNN has no linear part (X must be empty)");
      if (qs.empty()) check.violations.push_back("DNN needs at least one network input");
      break;
    case ModelKind::DNN_L:
      if (xs != qs) check.violations.push_back("DNN_L feeds the same columns to both parts (X must equal Q)");
      if (qs.empty()) check.violations.push_back("DNN_L needs at least one network input");
      break;
    case ModelKind::LMNL:
    case ModelKind::LNL:
    case ModelKind::DummyLogit:
      if (!shared.empty()) {
        check.violations.push_back(
            "interpretability rule: a column in the linear part must not feed the network "
            "(X and Q must be disjoint); shared: " + join(shared));
      }
      if (qs.empty() && kind != ModelKind::DummyLogit) {
        check.violations.push_back(to_string(kind) + " needs at least one network input");
      }
      break;
  }

  if (data) {
    for (const auto& c : partition.x) {
      if (!data->has_column(c)) check.violations.push_back("X column '" + c + "' is not in the dataset");
    }
    for (const auto& c : partition.q) {
      if (!data->has_column(c)) check.violations.push_back("Q column '" + c + "' is not in the dataset");
    }
    if (check.ok() && !partition.x.empty() && !partition.q.empty() && data->rows() >= 2) {
      std::vector<std::string> cols = partition.x;
      for (const auto& q : partition.q) {
        if (!xs.contains(q)) cols.push_back(q);
      }
      const auto corr = correlation_matrix(*data, cols);
      const auto nx = static_cast<Eigen::Index>(partition.x.size());
      for (Eigen::Index i = 0; i < nx; ++i) {
        for (Eigen::Index j = nx; j < static_cast<Eigen::Index>(cols.size()); ++j) {
          const double r = corr.values(i, j);
          if (std::abs(r) > correlation_threshold) {
            std::ostringstream msg;
            msg << "X column '" << cols[i] << "' and Q column '" << cols[j]
                << "' are strongly correlated (r = " << r << "); linear estimates may be biased";
            check.advisories.push_back(msg.str());
          }
        }
      }
    }
  }
  return check;
}

// ---------------------------------------------------------------- nests

NestStructure NestStructure::make(std::vector<std::vector<std::size_t>> groups,
                                  std::size_t alternatives) {
  NestStructure n;
  n.nests = std::move(groups);
  n.mu = Vector::Ones(static_cast<Eigen::Index>(n.nests.size()));
  for (const auto& g : n.nests) n.fixed.push_back(g.size() == 1);
  n.validate(alternatives);
  return n;
}

void NestStructure::validate(std::size_t alternatives) const {
  if (nests.empty()) throw ConfigError("nest structure has no nests");
  if (static_cast<std::size_t>(mu.size()) != nests.size() || fixed.size() != nests.size()) {
    throw ConfigError("nest structure: one scale factor and one fixed flag per nest expected");
  }
  std::vector<int> seen(alternatives, 0);
  for (const auto& g : nests) {
    if (g.empty()) throw ConfigError("nest structure contains an empty nest");
    for (auto a : g) {
      if (a >= alternatives) throw ConfigError("nest refers to an unknown alternative");
      ++seen[a];
    }
  }
  for (std::size_t a = 0; a < alternatives; ++a) {
    if (seen[a] != 1) {
      throw ConfigError("nests must partition the choice set (alternative " + std::to_string(a) +
                        " appears " + std::to_string(seen[a]) + " times)");
    }
  }
  for (Eigen::Index m = 0; m < mu.size(); ++m) {
    if (!(mu[m] >= 1.0)) throw ConfigError("nest scale factors must be >= 1");
    if (nests[static_cast<std::size_t>(m)].size() == 1 && mu[m] != 1.0) {
      throw ConfigError("a singleton nest must keep scale factor 1");
    }
  }
}

std::size_t NestStructure::nest_of(std::size_t alternative) const {
  for (std::size_t m = 0; m < nests.size(); ++m) {
    if (std::find(nests[m].begin(), nests[m].end(), alternative) != nests[m].end()) return m;
  }
  throw ConfigError("alternative is in no nest");
}

void NestStructure::project() {
  for (Eigen::Index m = 0; m < mu.size(); ++m) {
    if (fixed[static_cast<std::size_t>(m)] || !std::isfinite(mu[m])) {
      mu[m] = 1.0;
    } else {
      mu[m] = std::max(mu[m], 1.0);
    }
  }
}

// ---------------------------------------------------------------- model

std::size_t HybridChoiceModel::free_nest_count() const {
  if (!nests) return 0;
  return static_cast<std::size_t>(std::count(nests->fixed.begin(), nests->fixed.end(), false));
}

std::size_t HybridChoiceModel::trainable_count() const {
  return interpretable_parameter_count() + network_weight_count() + network_bias_count() +
         free_nest_count();
}

HybridChoiceModel build_model(ModelKind kind, const UtilitySpec& spec,
                              const FeaturePartition& partition, const NetConfig& net_config,
                              std::optional<NestStructure> nests, std::uint64_t seed) {
  HybridChoiceModel model;
  model.kind = kind;
  model.spec = spec;
  model.partition = partition;
  if (model.partition.x.empty()) model.partition.x = spec.columns();

  if (kind == ModelKind::DNN && !spec.empty()) {
    throw ConfigError("DNN has no linear part; the utility specification must be empty");
  }
  if (as_set(spec.columns()) != as_set(model.partition.x)) {
    throw ConfigError("X must list exactly the columns read by the utility specification");
  }
  const auto check = validate_partition(model.partition, kind);
  if (!check.ok()) throw ConfigError(check.violations.front());
  if (kind == ModelKind::LNL && !nests) throw ConfigError("L-NL needs a nest structure");
  if (kind == ModelKind::LMNL && nests) throw ConfigError("L-MNL takes no nests; use L-NL");

  const std::size_t alternatives = spec.alternatives().size();
  if (alternatives < 2) throw ConfigError("a choice model needs at least two alternatives");

  if (kind == ModelKind::DummyLogit) {
    // every Q column gets its own coefficient in all but the last alternative
    std::vector<std::size_t> alts(alternatives - 1);
    for (std::size_t i = 0; i + 1 < alternatives; ++i) alts[i] = i;
    for (const auto& q : model.partition.q) model.spec.specific("B_" + q, q, alts);
    for (const auto& q : model.partition.q) model.partition.x.push_back(q);
    model.partition.q.clear();
  }
  model.spec.validate();
  model.beta = Vector::Zero(static_cast<Eigen::Index>(model.spec.parameter_count()));

  const bool with_net = kind == ModelKind::DNN || kind == ModelKind::DNN_L ||
                        kind == ModelKind::LMNL || kind == ModelKind::LNL;
  if (with_net) {
    Rng rng(seed);
    model.net.emplace(static_cast<Eigen::Index>(model.partition.q.size()), net_config.hidden,
                      static_cast<Eigen::Index>(alternatives), rng);
  }
  if (nests) {
    nests->validate(alternatives);
    model.nests = std::move(nests);
  }
  return model;
}

ModelInputs bind_inputs(const HybridChoiceModel& model, const ChoiceDataset& data) {
  model.spec.validate(&data);
  ModelInputs in;
  in.rows = data.rows();
  in.alternatives = data.alternative_count();
  const auto C = in.alternatives;
  const auto K = static_cast<Eigen::Index>(model.spec.parameter_count());
  in.linear = Matrix::Zero(in.rows * C, K);
  for (const auto& t : model.spec.terms()) {
    const auto k = static_cast<Eigen::Index>(t.parameter);
    const auto i = static_cast<Eigen::Index>(t.alternative);
    if (t.column.empty()) {
      for (Eigen::Index n = 0; n < in.rows; ++n) in.linear(n * C + i, k) += 1.0;
    } else {
      const auto col = data.column_index(t.column);
      for (Eigen::Index n = 0; n < in.rows; ++n) in.linear(n * C + i, k) += data.values(n, col);
    }
  }
  const auto& q = model.partition.q;
  in.net_in.resize(in.rows, static_cast<Eigen::Index>(q.size()));
  for (std::size_t j = 0; j < q.size(); ++j) {
    const auto col = data.column_index(q[j]);
    in.q_columns.push_back(col);
    in.net_in.col(static_cast<Eigen::Index>(j)) = data.values.col(col);
  }
  if (model.net && model.net->input_width() != in.net_in.cols()) {
    throw ShapeError("network input width does not match the Q partition");
  }
  in.available = data.available;
  in.choice = data.choice;
  return in;
}

Matrix systematic_utility(const HybridChoiceModel& model, const ModelInputs& inputs,
                          std::span<const std::size_t> rows, Mode mode, double dropout, Rng* rng,
                          NetCache* cache, bool net_active) {
  const auto C = inputs.alternatives;
  const auto B = static_cast<Eigen::Index>(rows.size());
  Matrix v(B, C);
  for (Eigen::Index b = 0; b < B; ++b) {
    const auto n = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(b)]);
    if (n >= inputs.rows) throw ShapeError("row index out of range");
    if (model.beta.size() > 0) {
      v.row(b) = (inputs.linear.middleRows(n * C, C) * model.beta).transpose();
    } else {
      v.row(b).setZero();
    }
  }
  if (model.net && net_active) {
    Matrix q(B, inputs.net_in.cols());
    for (Eigen::Index b = 0; b < B; ++b) {
      q.row(b) = inputs.net_in.row(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(b)]));
    }
    v += model.net->forward(q, mode, dropout, rng, cache);
  }
  return v;
}

Vector systematic_utility(const HybridChoiceModel& model, const ChoiceDataset& data,
                          Eigen::Index row) {
  const std::size_t r = static_cast<std::size_t>(row);
  const auto one = data.subset(std::span<const std::size_t>(&r, 1));
  const auto inputs = bind_inputs(model, one);
  const std::size_t first = 0;
  return systematic_utility(model, inputs, std::span<const std::size_t>(&first, 1)).row(0).transpose();
}

Vector mnl_probabilities(const Vector& utilities, const Availability& available) {
  return softmax(utilities, available);
}

namespace {

// Shared pieces of the nested formula for one observation.
struct NestTerms {
  std::vector<double> log_s;     // log S_m (or -inf when nothing available)
  std::vector<double> inclusive;  // I_m = log S_m / mu_m
  double log_denominator = 0.0;   // log sum_k exp(I_k)
};

NestTerms nest_terms(const Vector& v, const Availability& available, const NestStructure& nests) {
  NestTerms t;
  std::vector<double> active;
  for (std::size_t m = 0; m < nests.nests.size(); ++m) {
    const double mu = nests.mu[static_cast<Eigen::Index>(m)];
    std::vector<double> scaled;
    for (auto j : nests.nests[m]) {
      if (available[static_cast<Eigen::Index>(j)]) scaled.push_back(mu * v[static_cast<Eigen::Index>(j)]);
    }
    const double ls = scaled.empty() ? -std::numeric_limits<double>::infinity() : log_sum_exp(scaled);
    t.log_s.push_back(ls);
    t.inclusive.push_back(ls / mu);
    if (std::isfinite(ls)) active.push_back(ls / mu);
  }
  if (active.empty()) throw InvalidRowError("nested probabilities: no available alternative");
  t.log_denominator = log_sum_exp(active);
  return t;
}

}  // namespace

Vector nested_probabilities(const Vector& utilities, const Availability& available,
                            const NestStructure& nests) {
  if (utilities.size() != available.size()) throw ShapeError("availability length mismatch");
  const auto t = nest_terms(utilities, available, nests);
  Vector p = Vector::Zero(utilities.size());
  for (std::size_t m = 0; m < nests.nests.size(); ++m) {
    if (!std::isfinite(t.log_s[m])) continue;
    const double mu = nests.mu[static_cast<Eigen::Index>(m)];
    for (auto j : nests.nests[m]) {
      const auto jj = static_cast<Eigen::Index>(j);
      if (!available[jj]) continue;
      p[jj] = std::exp(mu * utilities[jj] - t.log_s[m] + t.inclusive[m] - t.log_denominator);
    }
  }
  return p;
}

NestedLossGradient nested_loss_gradient(const Vector& v, const Availability& available,
                                        const NestStructure& nests, int chosen) {
  const auto C = v.size();
  if (chosen < 0 || chosen >= C || !available[chosen]) {
    throw InvalidRowError("chosen alternative is not available");
  }
  const auto t = nest_terms(v, available, nests);
  const std::size_t M = nests.nests.size();
  const std::size_t own = nests.nest_of(static_cast<std::size_t>(chosen));

  NestedLossGradient out;
  out.d_utilities = Vector::Zero(C);
  out.d_mu = Vector::Zero(static_cast<Eigen::Index>(M));
  const double mu_own = nests.mu[static_cast<Eigen::Index>(own)];
  const double log_p = mu_own * v[chosen] - t.log_s[own] + t.inclusive[own] - t.log_denominator;
  if (log_p < std::log(kProbabilityFloor)) {
    out.loss = -std::log(kProbabilityFloor);  // clamped: flat, zero gradient
    return out;
  }
  out.loss = -log_p;

  for (std::size_t m = 0; m < M; ++m) {
    if (!std::isfinite(t.log_s[m])) continue;
    const auto mm = static_cast<Eigen::Index>(m);
    const double mu = nests.mu[mm];
    const double nest_share = std::exp(t.inclusive[m] - t.log_denominator);
    double mean_v = 0.0;  // sum_j q_{j|m} V_j
    for (auto j : nests.nests[m]) {
      const auto jj = static_cast<Eigen::Index>(j);
      if (!available[jj]) continue;
      const double within = std::exp(mu * v[jj] - t.log_s[m]);
      mean_v += within * v[jj];
      double d_logp;
      if (m == own) {
        d_logp = mu * ((jj == chosen ? 1.0 : 0.0) - within) + within - nest_share * within;
      } else {
        d_logp = -nest_share * within;
      }
      out.d_utilities[jj] = -d_logp;
    }
    const double d_inclusive = -t.log_s[m] / (mu * mu) + mean_v / mu;
    double d_logp_mu;
    if (m == own) {
      d_logp_mu = v[chosen] - mean_v + (1.0 - nest_share) * d_inclusive;
    } else {
      d_logp_mu = -nest_share * d_inclusive;
    }
    out.d_mu[mm] = -d_logp_mu;
  }
  return out;
}

Matrix choice_probabilities(const HybridChoiceModel& model, const ModelInputs& inputs,
                            std::span<const std::size_t> rows, bool net_active) {
  const Matrix v = systematic_utility(model, inputs, rows, Mode::Eval, 0.0, nullptr, nullptr,
                                      net_active);
  Matrix p(v.rows(), v.cols());
  for (Eigen::Index b = 0; b < v.rows(); ++b) {
    const auto avail = row_availability(inputs, rows[static_cast<std::size_t>(b)]);
    const Vector vb = v.row(b).transpose();
    p.row(b) = (model.nests ? nested_probabilities(vb, avail, *model.nests)
                            : mnl_probabilities(vb, avail))
                   .transpose();
  }
  return p;
}

Matrix choice_probabilities(const HybridChoiceModel& model, const ChoiceDataset& data) {
  const auto inputs = bind_inputs(model, data);
  std::vector<std::size_t> rows(static_cast<std::size_t>(inputs.rows));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return choice_probabilities(model, inputs, rows);
}

double loss_and_gradient(const HybridChoiceModel& model, const ModelInputs& inputs,
                         std::span<const std::size_t> rows, Mode mode, double dropout, double l2,
                         Rng* rng, const BlockMask& blocks, Gradients* grads) {
  if (rows.empty()) throw ShapeError("loss over an empty batch");
  const auto C = inputs.alternatives;
  const auto B = static_cast<Eigen::Index>(rows.size());
  const bool use_net = model.net.has_value() && blocks.net_active;
  NetCache cache;
  const Matrix v =
      systematic_utility(model, inputs, rows, mode, dropout, rng, use_net ? &cache : nullptr, use_net);

  Matrix d_v = Matrix::Zero(B, C);  // d mean-loss / d V
  Vector d_mu;
  if (model.nests) d_mu = Vector::Zero(model.nests->mu.size());
  double loss = 0.0;
  const double inv_b = 1.0 / static_cast<double>(B);
  for (Eigen::Index b = 0; b < B; ++b) {
    const auto n = rows[static_cast<std::size_t>(b)];
    const auto avail = row_availability(inputs, n);
    const int chosen = inputs.choice[n];
    const Vector vb = v.row(b).transpose();
    if (model.nests) {
      const auto g = nested_loss_gradient(vb, avail, *model.nests, chosen);
      loss += g.loss;
      d_v.row(b) = g.d_utilities.transpose() * inv_b;
      d_mu += g.d_mu * inv_b;
    } else {
      if (chosen < 0 || chosen >= C || !avail[chosen]) {
        throw InvalidRowError("chosen alternative is not available in row " + std::to_string(n));
      }
      const Vector p = softmax(vb, avail);
      if (p[chosen] < kProbabilityFloor) {
        loss -= std::log(kProbabilityFloor);
      } else {
        loss -= std::log(p[chosen]);
        Vector g = p;
        g[chosen] -= 1.0;
        d_v.row(b) = g.transpose() * inv_b;
      }
    }
  }
  loss *= inv_b;
  if (model.net && l2 > 0.0) loss += l2 * model.net->squared_weight_norm();

  if (grads) {
    const auto K = model.beta.size();
    grads->beta = Vector::Zero(K);
    if (blocks.beta && K > 0) {
      for (Eigen::Index b = 0; b < B; ++b) {
        const auto n = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(b)]);
        grads->beta += inputs.linear.middleRows(n * C, C).transpose() * d_v.row(b).transpose();
      }
    }
    grads->weights.clear();
    grads->biases.clear();
    if (model.net) {
      const auto& layers = model.net->layers();
      if (blocks.net && use_net) {
        auto ng = model.net->backward(cache, d_v, false);
        grads->weights = std::move(ng.weights);
        grads->biases = std::move(ng.biases);
        if (l2 > 0.0) {
          for (std::size_t k = 0; k < layers.size(); ++k) grads->weights[k] += 2.0 * l2 * layers[k].weights;
        }
      } else {
        for (const auto& layer : layers) {
          grads->weights.push_back(Matrix::Zero(layer.weights.rows(), layer.weights.cols()));
          grads->biases.push_back(Vector::Zero(layer.biases.size()));
        }
      }
    }
    grads->mu = Vector::Zero(model.nests ? model.nests->mu.size() : 0);
    if (model.nests && blocks.mu) {
      for (Eigen::Index m = 0; m < d_mu.size(); ++m) {
        if (!model.nests->fixed[static_cast<std::size_t>(m)]) grads->mu[m] = d_mu[m];
      }
    }
  }
  return loss;
}

Vector beta_loglik_gradient(const HybridChoiceModel& model, const ModelInputs& inputs) {
  std::vector<std::size_t> rows(static_cast<std::size_t>(inputs.rows));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  Gradients g;
  BlockMask blocks;
  blocks.net = false;
  blocks.mu = false;
  loss_and_gradient(model, inputs, rows, Mode::Eval, 0.0, 0.0, nullptr, blocks, &g);
  return -static_cast<double>(inputs.rows) * g.beta;
}

Matrix utility_input_gradient(const HybridChoiceModel& model, const ModelInputs& inputs,
                              std::span<const int> alternative_per_row) {
  const auto N = static_cast<Eigen::Index>(alternative_per_row.size());
  if (N != inputs.rows) throw ShapeError("one alternative per row expected");
  if (!model.net) return Matrix::Zero(N, inputs.net_in.cols());
  NetCache cache;
  model.net->forward(inputs.net_in, Mode::Eval, 0.0, nullptr, &cache);
  Matrix seed = Matrix::Zero(N, inputs.alternatives);
  for (Eigen::Index n = 0; n < N; ++n) seed(n, alternative_per_row[static_cast<std::size_t>(n)]) = 1.0;
  return model.net->backward(cache, seed, true).inputs;
}

}  // namespace lmnl
